//! Markovian random temporal graphs.
//!
//! Every one of the `N(N-1)/2` potential links is an independent two-state
//! (up/down) Markov chain. A link leaves the up state with probability
//! `1/r` per step, which gives geometric up-sojourns of mean `r`, and leaves
//! the down state with probability `1/(r*lambda)`, which makes the
//! stationary down/up ratio equal to `lambda`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Full generative description of the random temporal graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n_nodes: usize,
    /// Mean number of consecutive steps a link stays up.
    pub r: f64,
    /// Ratio of time spent down to time spent up.
    pub lambda: f64,
    /// Step duration in seconds. Metadata only.
    pub tau: f64,
    /// Nominal link capacity per unit time. Metadata only.
    pub phi: f64,
}

impl ModelParams {
    /// Parameters with `tau = phi = 1`.
    pub fn new(n_nodes: usize, r: f64, lambda: f64) -> Self {
        ModelParams {
            n_nodes,
            r,
            lambda,
            tau: 1.0,
            phi: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_params(self)
    }

    pub fn n_links(&self) -> usize {
        n_links(self.n_nodes)
    }

    pub fn transitions(&self) -> Result<LinkTransition> {
        transitions(self.r, self.lambda)
    }
}

impl Default for ModelParams {
    /// The baseline operating point: `N = 20`, `r = 2`, `lambda = 10`.
    fn default() -> Self {
        ModelParams::new(20, 2.0, 10.0)
    }
}

/// Checks every parameter constraint, reporting the first one violated.
pub fn validate_params(p: &ModelParams) -> Result<()> {
    if p.n_nodes < 2 {
        return Err(Error::InvalidParams("N < 2"));
    }
    if !(p.r.is_finite() && p.r >= 1.0) {
        return Err(Error::InvalidParams("r < 1"));
    }
    if !(p.lambda.is_finite() && p.lambda > 0.0) {
        return Err(Error::InvalidParams("lambda <= 0"));
    }
    if p.r * p.lambda < 1.0 {
        return Err(Error::InvalidParams("r·λ < 1"));
    }
    if !(p.tau.is_finite() && p.tau > 0.0) {
        return Err(Error::InvalidParams("tau <= 0"));
    }
    if !(p.phi.is_finite() && p.phi > 0.0) {
        return Err(Error::InvalidParams("phi <= 0"));
    }
    Ok(())
}

/// Per-step transition probabilities of a single link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkTransition {
    /// Probability of going from up to down.
    pub leave_up: f64,
    /// Probability of going from down to up.
    pub leave_down: f64,
}

pub fn transitions(r: f64, lambda: f64) -> Result<LinkTransition> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidParams("r < 1"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParams("lambda <= 0"));
    }
    if r * lambda < 1.0 {
        return Err(Error::InvalidParams("r·λ < 1"));
    }
    Ok(LinkTransition {
        leave_up: 1.0 / r,
        leave_down: 1.0 / (r * lambda),
    })
}

/// Stationary probability that a link is up.
pub fn stationary_up(lambda: f64) -> f64 {
    1.0 / (1.0 + lambda)
}

/// Mean node degree under the stationary distribution, `(N-1)/(1+lambda)`.
pub fn expected_degree(params: &ModelParams) -> f64 {
    (params.n_nodes as f64 - 1.0) * stationary_up(params.lambda)
}

pub fn n_links(n_nodes: usize) -> usize {
    n_nodes * n_nodes.saturating_sub(1) / 2
}

/// Dense index of the unordered pair `{a, b}`, `a != b`.
#[inline]
pub fn link_index(n_nodes: usize, a: NodeId, b: NodeId) -> usize {
    debug_assert!(a != b && a < n_nodes && b < n_nodes);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    lo * (2 * n_nodes - lo - 1) / 2 + (hi - lo - 1)
}

/// Connectivity at one step: which links are up.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Snapshot {
    n_nodes: usize,
    bits: Vec<u64>,
}

impl Snapshot {
    /// All links down.
    pub fn empty(n_nodes: usize) -> Self {
        let words = n_links(n_nodes).div_ceil(64);
        Snapshot {
            n_nodes,
            bits: vec![0; words],
        }
    }

    /// All links up.
    pub fn complete(n_nodes: usize) -> Self {
        let mut s = Snapshot::empty(n_nodes);
        for l in 0..s.n_links() {
            s.set_link(l, true);
        }
        s
    }

    /// Builds a snapshot from a list of up pairs.
    pub fn from_edges(n_nodes: usize, edges: &[(NodeId, NodeId)]) -> Self {
        let mut s = Snapshot::empty(n_nodes);
        for &(a, b) in edges {
            s.set(a, b, true);
        }
        s
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_links(&self) -> usize {
        n_links(self.n_nodes)
    }

    #[inline]
    pub fn link_up(&self, link: usize) -> bool {
        self.bits[link / 64] >> (link % 64) & 1 == 1
    }

    #[inline]
    pub fn set_link(&mut self, link: usize, up: bool) {
        let mask = 1u64 << (link % 64);
        if up {
            self.bits[link / 64] |= mask;
        } else {
            self.bits[link / 64] &= !mask;
        }
    }

    /// Whether `a` and `b` are connected. Self-links are never up.
    #[inline]
    pub fn is_up(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.link_up(link_index(self.n_nodes, a, b))
    }

    pub fn set(&mut self, a: NodeId, b: NodeId, up: bool) {
        assert!(a != b, "self-links are not representable");
        self.set_link(link_index(self.n_nodes, a, b), up);
    }

    pub fn count_up(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Up links as `(a, b)` pairs with `a < b`, in index order.
    pub fn up_links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        let n = self.n_nodes;
        (0..n)
            .flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
            .filter(move |&(a, b)| self.is_up(a, b))
    }

    /// Neighbours of `a` in this snapshot.
    pub fn neighbors(&self, a: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n_nodes).filter(move |&b| self.is_up(a, b))
    }
}

/// A time-indexed sequence of snapshots. Index 0 holds step 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    n_nodes: usize,
    snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn new(n_nodes: usize, snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InvalidCount(
                "trajectory needs at least one snapshot",
            ));
        }
        if snapshots.iter().any(|s| s.n_nodes() != n_nodes) {
            return Err(Error::InvalidCount("snapshots disagree on node count"));
        }
        Ok(Trajectory { n_nodes, snapshots })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Snapshot at 1-based step `t`.
    pub fn step(&self, t: usize) -> &Snapshot {
        &self.snapshots[t - 1]
    }

    /// Export format: a `temporal-graph v1 N=<n> d=<d>` header, then one
    /// `step a b` line per up link with 1-based steps.
    pub fn to_text(&self) -> String {
        let mut out = format!("temporal-graph v1 N={} d={}\n", self.n_nodes, self.len());
        for (i, snap) in self.snapshots.iter().enumerate() {
            for (a, b) in snap.up_links() {
                let _ = writeln!(out, "{} {} {}", i + 1, a, b);
            }
        }
        out
    }

    /// Parses the format produced by [`Trajectory::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "missing header".into(),
        })?;
        let bad_header = || Error::Parse {
            line: 1,
            reason: format!("bad header {header:?}"),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "temporal-graph" || fields[1] != "v1" {
            return Err(bad_header());
        }
        let n: usize = fields[2]
            .strip_prefix("N=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad_header)?;
        let d: usize = fields[3]
            .strip_prefix("d=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad_header)?;
        if n < 2 || d < 1 {
            return Err(bad_header());
        }
        let mut snapshots = vec![Snapshot::empty(n); d];
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse {
                line: i + 1,
                reason,
            };
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|f| f.parse().map_err(|_| err(format!("not an integer: {f:?}"))))
                .collect::<Result<_>>()?;
            let [t, a, b] = nums[..] else {
                return Err(err("expected `step a b`".into()));
            };
            if t < 1 || t > d || a >= n || b >= n || a == b {
                return Err(err(format!("entry out of range: {line:?}")));
            }
            snapshots[t - 1].set(a, b, true);
        }
        Trajectory::new(n, snapshots)
    }
}

/// Draws every link independently from the stationary distribution.
pub fn sample_initial<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Snapshot {
    let p_up = stationary_up(params.lambda);
    let mut snap = Snapshot::empty(params.n_nodes);
    for l in 0..snap.n_links() {
        let u: f64 = rng.random();
        if u < p_up {
            snap.set_link(l, true);
        }
    }
    snap
}

/// One Markov step for every link.
pub fn advance<R: Rng + ?Sized>(current: &Snapshot, t: &LinkTransition, rng: &mut R) -> Snapshot {
    let mut next = Snapshot::empty(current.n_nodes());
    for l in 0..current.n_links() {
        let u: f64 = rng.random();
        let up = if current.link_up(l) {
            u >= t.leave_up
        } else {
            u < t.leave_down
        };
        if up {
            next.set_link(l, true);
        }
    }
    next
}

/// Random stream for `(seed, stream)`. Stream `i` is used for trial `i`, so
/// trial outcomes do not depend on the order trials are evaluated in.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stationary start followed by `d - 1` Markov steps, drawn from `rng`.
pub fn generate_trajectory_with<R: Rng + ?Sized>(
    params: &ModelParams,
    d: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    params.validate()?;
    if d < 1 {
        return Err(Error::InvalidCount("d must be at least 1"));
    }
    let t = params.transitions()?;
    let mut snapshots = Vec::with_capacity(d);
    snapshots.push(sample_initial(params, rng));
    for i in 1..d {
        let next = advance(&snapshots[i - 1], &t, rng);
        snapshots.push(next);
    }
    Ok(Trajectory {
        n_nodes: params.n_nodes,
        snapshots,
    })
}

/// A trajectory of `d` steps, fully determined by `(params, d, seed)`.
///
/// Equal to trial 0 of a Monte Carlo run with the same seed.
pub fn generate_trajectory(params: &ModelParams, d: usize, seed: u64) -> Result<Trajectory> {
    generate_trajectory_with(params, d, &mut stream_rng(seed, 0))
}
