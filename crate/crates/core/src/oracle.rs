//! Ground truth for small instances.
//!
//! [`exact_delivery`] enumerates every link-state sequence and weights the
//! epidemic engine's verdict by the Markov chain probability of the
//! sequence. [`spacetime_reachable`] and [`component_spread`] recompute
//! delivery on a given trajectory by routes that share no code with
//! [`crate::epidemic`].

use std::collections::VecDeque;

use crate::epidemic::{run, DeliveryOutcome, MessageSpec, TransferSemantics};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{stationary_up, ModelParams, NodeId, Snapshot, Trajectory};

/// Largest `L * d` enumerated unless the caller raises it.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 24;

/// Sequences per work unit. Partial sums are combined in chunk order, so the
/// result does not depend on the execution strategy.
const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactResult {
    pub probability: f64,
    pub trajectories_enumerated: u64,
    /// Probability mass of all enumerated sequences; 1 up to rounding.
    pub total_mass: f64,
}

/// Exact delivery probability under stationary start, by enumeration of all
/// `2^(L*d)` link-state sequences.
pub fn exact_delivery(
    params: &ModelParams,
    msg: &MessageSpec,
    source: NodeId,
    dest: NodeId,
    sem: TransferSemantics,
    budget: usize,
    exec: Exec,
) -> Result<ExactResult> {
    params.validate()?;
    msg.validate()?;
    let n = params.n_nodes;
    for node in [source, dest] {
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n_nodes: n });
        }
    }
    if source == dest {
        return Err(Error::SameEndpoints(source));
    }
    let links = params.n_links();
    let d = msg.deadline;
    let bits = links * d;
    if bits > budget || bits >= 63 {
        return Err(Error::EnumerationTooLarge {
            required: bits,
            allowed: budget,
        });
    }
    let t = params.transitions()?;
    let p_up = stationary_up(params.lambda);
    // Transition table indexed by [prev][next], 1 = up.
    let step_p = [
        [1.0 - t.leave_down, t.leave_down],
        [t.leave_up, 1.0 - t.leave_up],
    ];
    let init_p = [1.0 - p_up, p_up];

    let total: u64 = 1 << bits;
    let chunks = total.div_ceil(CHUNK) as usize;
    let partial = exec.map(chunks, |c| {
        let lo = c as u64 * CHUNK;
        let hi = (lo + CHUNK).min(total);
        let mut hit = 0.0;
        let mut mass = 0.0;
        for code in lo..hi {
            // Bit `step * links + link` is the state of `link` at step + 1.
            let state = |step: usize, link: usize| (code >> (step * links + link) & 1) as usize;
            let mut p = 1.0;
            for link in 0..links {
                p *= init_p[state(0, link)];
                for step in 1..d {
                    p *= step_p[state(step - 1, link)][state(step, link)];
                }
            }
            mass += p;
            if p == 0.0 {
                continue;
            }
            let snaps = (0..d)
                .map(|step| {
                    let mut s = Snapshot::empty(n);
                    for link in 0..links {
                        s.set_link(link, state(step, link) == 1);
                    }
                    s
                })
                .collect();
            let traj = Trajectory::new(n, snaps).expect("well-formed");
            if run(&traj, source, dest, msg, sem)
                .expect("inputs validated")
                .delivered()
            {
                hit += p;
            }
        }
        (hit, mass)
    });
    let (probability, total_mass) = partial
        .into_iter()
        .fold((0.0, 0.0), |(h, m), (ph, pm)| (h + ph, m + pm));
    Ok(ExactResult {
        probability,
        trajectories_enumerated: total,
        total_mass,
    })
}

/// Earliest arrival over the layered space-time graph with at most `h` hops
/// inside any single step, by breadth-first search over `(node, step, hops)`.
pub fn spacetime_reachable(
    trajectory: &Trajectory,
    source: NodeId,
    dest: NodeId,
    h: usize,
    d: usize,
) -> Result<DeliveryOutcome> {
    if h < 1 {
        return Err(Error::InvalidMessage("hop budget must be at least 1"));
    }
    let n = trajectory.n_nodes();
    for node in [source, dest] {
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n_nodes: n });
        }
    }
    if trajectory.len() < d {
        return Err(Error::TrajectoryTooShort {
            len: trajectory.len(),
            needed: d,
        });
    }
    if d == 0 {
        return Ok(DeliveryOutcome::failed());
    }
    // Visited flags for (node, step in 1..=d, hops used in 0..=h).
    let idx = |v: usize, t: usize, k: usize| ((t - 1) * n + v) * (h + 1) + k;
    let mut seen = vec![false; n * d * (h + 1)];
    let mut queue = VecDeque::new();
    seen[idx(source, 1, 0)] = true;
    queue.push_back((source, 1usize, 0usize));
    let mut best: Option<usize> = None;
    while let Some((v, t, k)) = queue.pop_front() {
        if v == dest {
            best = Some(best.map_or(t, |b| b.min(t)));
            continue;
        }
        if t < d && !seen[idx(v, t + 1, 0)] {
            seen[idx(v, t + 1, 0)] = true;
            queue.push_back((v, t + 1, 0));
        }
        if k < h {
            let snap = trajectory.step(t);
            for w in 0..n {
                if w != v && snap.is_up(v, w) && !seen[idx(w, t, k + 1)] {
                    seen[idx(w, t, k + 1)] = true;
                    queue.push_back((w, t, k + 1));
                }
            }
        }
    }
    Ok(DeliveryOutcome {
        delivery_step: best,
    })
}

/// Upper-limit diffusion: at every step the whole connected component of
/// each infected node becomes infected.
pub fn component_spread(
    trajectory: &Trajectory,
    source: NodeId,
    dest: NodeId,
    d: usize,
) -> Result<DeliveryOutcome> {
    let n = trajectory.n_nodes();
    for node in [source, dest] {
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n_nodes: n });
        }
    }
    if trajectory.len() < d {
        return Err(Error::TrajectoryTooShort {
            len: trajectory.len(),
            needed: d,
        });
    }
    let mut infected = vec![false; n];
    infected[source] = true;
    for t in 1..=d {
        let mut dsu = DisjointSets::new(n);
        for (a, b) in trajectory.step(t).up_links() {
            dsu.union(a, b);
        }
        let mut hot = vec![false; n];
        for v in (0..n).filter(|&v| infected[v]) {
            hot[dsu.find(v)] = true;
        }
        for v in 0..n {
            if hot[dsu.find(v)] {
                infected[v] = true;
            }
        }
        if infected[dest] {
            return Ok(DeliveryOutcome::at(t));
        }
    }
    Ok(DeliveryOutcome::failed())
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = v;
        while self.parent[cur] != root {
            cur = std::mem::replace(&mut self.parent[cur], root);
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
