//! Epidemic flooding over a fixed trajectory.
//!
//! Messages no larger than a link (`alpha <= 1`) travel `floor(1/alpha)`
//! hops within a single step. Larger messages need `ceil(alpha)` up-steps
//! on a link before the receiver holds a copy, and a node infected at the
//! end of a step only starts relaying at the next one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{link_index, NodeId, Snapshot, Trajectory};

/// Slack for `1/alpha` so that sizes such as `0.2` give the intended hop
/// budget despite binary rounding.
const HOP_EPS: f64 = 1e-9;

/// Message size (in link sizes) and deadline (in steps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageSpec {
    pub alpha: f64,
    pub deadline: usize,
}

/// How a message moves across links for a given size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Up to this many hops per step.
    Hops(usize),
    /// This many up-steps per hop.
    Transfer(usize),
}

impl MessageSpec {
    pub fn new(alpha: f64, deadline: usize) -> Result<Self> {
        let m = MessageSpec { alpha, deadline };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidMessage("alpha must be positive"));
        }
        if self.deadline < 1 {
            return Err(Error::InvalidMessage("deadline must be at least 1"));
        }
        Ok(())
    }

    pub fn regime(&self) -> Result<Regime> {
        self.validate()?;
        if self.alpha <= 1.0 {
            hop_budget(self.alpha).map(Regime::Hops)
        } else {
            transfer_steps(self.alpha).map(Regime::Transfer)
        }
    }
}

/// Behaviour of a multi-step transfer when its link goes down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TransferSemantics {
    /// Partial progress is lost.
    #[default]
    Restart,
    /// Partial progress is kept until the link comes back.
    Resume,
}

impl fmt::Display for TransferSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransferSemantics::Restart => "restart",
            TransferSemantics::Resume => "resume",
        })
    }
}

impl FromStr for TransferSemantics {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "restart" => Ok(TransferSemantics::Restart),
            "resume" => Ok(TransferSemantics::Resume),
            other => Err(format!(
                "unknown semantics {other:?} (expected restart|resume)"
            )),
        }
    }
}

/// Hops per step for `0 < alpha <= 1`.
pub fn hop_budget(alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidMessage("hop budget needs 0 < alpha <= 1"));
    }
    Ok(((1.0 / alpha + HOP_EPS).floor() as usize).max(1))
}

/// Up-steps per hop for `alpha > 1`.
pub fn transfer_steps(alpha: f64) -> Result<usize> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::InvalidMessage("transfer steps need alpha > 1"));
    }
    Ok(alpha.ceil() as usize)
}

/// A set of nodes over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeSet(Vec<bool>);

impl NodeSet {
    pub fn new(n_nodes: usize) -> Self {
        NodeSet(vec![false; n_nodes])
    }

    pub fn from_nodes(n_nodes: usize, nodes: &[NodeId]) -> Self {
        let mut s = NodeSet::new(n_nodes);
        for &v in nodes {
            s.insert(v);
        }
        s
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0[v]
    }

    /// Returns true if `v` was not present.
    pub fn insert(&mut self, v: NodeId) -> bool {
        !std::mem::replace(&mut self.0[v], true)
    }

    pub fn len(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| !a || b)
    }
}

/// Nodes within `h` hops of `infected` in `snapshot`.
pub fn spread_small(snapshot: &Snapshot, infected: &NodeSet, h: usize) -> NodeSet {
    let mut out = infected.clone();
    let mut frontier: Vec<NodeId> = infected.iter().collect();
    for _ in 0..h {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &u in &frontier {
            for v in snapshot.neighbors(u) {
                if out.insert(v) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Infected set plus progress of in-flight transfers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpidemicState {
    pub infected: NodeSet,
    /// Accumulated up-steps per link index, only for links with exactly one
    /// infected endpoint.
    pub progress: BTreeMap<usize, usize>,
    /// Number of steps processed so far.
    pub step: usize,
}

impl EpidemicState {
    pub fn new(n_nodes: usize, source: NodeId) -> Self {
        EpidemicState {
            infected: NodeSet::from_nodes(n_nodes, &[source]),
            progress: BTreeMap::new(),
            step: 0,
        }
    }
}

/// Advances multi-step transfers by one step over `snapshot`.
pub fn spread_large(
    snapshot: &Snapshot,
    state: &mut EpidemicState,
    s: usize,
    sem: TransferSemantics,
) {
    let n = state.infected.universe();
    let senders: Vec<NodeId> = state.infected.iter().collect();
    let mut newly = Vec::new();
    for &u in &senders {
        for v in 0..n {
            if state.infected.contains(v) {
                continue;
            }
            let link = link_index(n, u, v);
            if snapshot.link_up(link) {
                let p = state.progress.entry(link).or_insert(0);
                *p += 1;
                if *p >= s {
                    newly.push(v);
                }
            } else if sem == TransferSemantics::Restart {
                state.progress.remove(&link);
            }
        }
    }
    for v in newly {
        state.infected.insert(v);
    }
    let infected = &state.infected;
    state.progress.retain(|&link, _| {
        let (a, b) = link_endpoints(n, link);
        infected.contains(a) != infected.contains(b)
    });
    state.step += 1;
}

fn link_endpoints(n: usize, link: usize) -> (NodeId, NodeId) {
    let mut rem = link;
    let mut a = 0;
    while rem >= n - a - 1 {
        rem -= n - a - 1;
        a += 1;
    }
    (a, a + 1 + rem)
}

/// Result of one delivery attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeliveryOutcome {
    /// First step (1-based) after which the destination holds the message.
    pub delivery_step: Option<usize>,
}

impl DeliveryOutcome {
    pub fn delivered(&self) -> bool {
        self.delivery_step.is_some()
    }

    pub fn at(step: usize) -> Self {
        DeliveryOutcome {
            delivery_step: Some(step),
        }
    }

    pub fn failed() -> Self {
        DeliveryOutcome {
            delivery_step: None,
        }
    }
}

/// Floods a message from `source` over steps `1..=msg.deadline`.
pub fn run(
    trajectory: &Trajectory,
    source: NodeId,
    dest: NodeId,
    msg: &MessageSpec,
    sem: TransferSemantics,
) -> Result<DeliveryOutcome> {
    run_window(
        trajectory.n_nodes(),
        trajectory.snapshots(),
        source,
        dest,
        msg,
        sem,
    )
}

/// [`run`] over a bare slice of snapshots, so callers can replay a window
/// of a longer trajectory without copying it.
pub fn run_window(
    n_nodes: usize,
    snapshots: &[Snapshot],
    source: NodeId,
    dest: NodeId,
    msg: &MessageSpec,
    sem: TransferSemantics,
) -> Result<DeliveryOutcome> {
    for node in [source, dest] {
        if node >= n_nodes {
            return Err(Error::NodeOutOfRange { node, n_nodes });
        }
    }
    if source == dest {
        return Err(Error::SameEndpoints(source));
    }
    let regime = msg.regime()?;
    if snapshots.len() < msg.deadline {
        return Err(Error::TrajectoryTooShort {
            len: snapshots.len(),
            needed: msg.deadline,
        });
    }
    let window = &snapshots[..msg.deadline];
    match regime {
        Regime::Hops(h) => {
            let mut infected = NodeSet::from_nodes(n_nodes, &[source]);
            for (i, snap) in window.iter().enumerate() {
                infected = spread_small(snap, &infected, h);
                if infected.contains(dest) {
                    return Ok(DeliveryOutcome::at(i + 1));
                }
            }
        }
        Regime::Transfer(s) => {
            let mut state = EpidemicState::new(n_nodes, source);
            for (i, snap) in window.iter().enumerate() {
                spread_large(snap, &mut state, s, sem);
                if state.infected.contains(dest) {
                    return Ok(DeliveryOutcome::at(i + 1));
                }
            }
        }
    }
    Ok(DeliveryOutcome::failed())
}
