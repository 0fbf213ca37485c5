//! Contact-trace ingestion and replay.
//!
//! A trace is a list of contacts `node_a node_b t_start t_end`, one per
//! line, separated by whitespace or commas. Lines starting with `#` are
//! comments. Node labels are arbitrary tokens and get renumbered densely in
//! order of first appearance.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::epidemic::{run_window, MessageSpec, TransferSemantics};
use crate::error::{Error, Result};
use crate::estimate::{EstimateResult, Z95};
use crate::exec::Exec;
use crate::model::{stream_rng, NodeId, Snapshot, Trajectory};

/// A half-open contact interval `[t_start, t_end)` between two nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactRecord {
    pub node_a: NodeId,
    pub node_b: NodeId,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContactTrace {
    pub records: Vec<ContactRecord>,
    /// Original label to dense id.
    pub node_ids: HashMap<String, NodeId>,
}

impl ContactTrace {
    pub fn n_nodes(&self) -> usize {
        self.node_ids.len()
    }
}

/// When a contact makes a link count as up for a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoverageRule {
    /// The contact spans the whole step.
    #[default]
    Full,
    /// The contact overlaps the step.
    Any,
}

impl fmt::Display for CoverageRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoverageRule::Full => "full",
            CoverageRule::Any => "any",
        })
    }
}

impl FromStr for CoverageRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "full" => Ok(CoverageRule::Full),
            "any" => Ok(CoverageRule::Any),
            other => Err(format!(
                "unknown coverage rule {other:?} (expected full|any)"
            )),
        }
    }
}

pub fn parse_contacts(text: &str) -> Result<ContactTrace> {
    let mut trace = ContactTrace::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        let err = |reason: String| Error::Parse {
            line: lineno,
            reason,
        };
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let time = |f: &str| -> Result<f64> {
            f.parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .ok_or_else(|| err(format!("bad time {f:?}")))
        };
        let (t_start, t_end) = (time(fields[2])?, time(fields[3])?);
        if fields[0] == fields[1] {
            return Err(err(format!("self-contact of node {}", fields[0])));
        }
        if t_start >= t_end {
            return Err(err(format!("empty interval [{t_start}, {t_end})")));
        }
        let mut id = |label: &str| {
            let next = trace.node_ids.len();
            *trace.node_ids.entry(label.to_string()).or_insert(next)
        };
        let (node_a, node_b) = (id(fields[0]), id(fields[1]));
        trace.records.push(ContactRecord {
            node_a,
            node_b,
            t_start,
            t_end,
        });
    }
    Ok(trace)
}

/// Samples the trace every `tau` seconds starting at the earliest contact.
///
/// Contacts of the same pair are merged into maximal intervals first, so
/// abutting or overlapping records cover a step together.
pub fn discretize(trace: &ContactTrace, tau: f64, rule: CoverageRule) -> Result<Trajectory> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidCount("tau must be positive"));
    }
    if trace.records.is_empty() {
        return Err(Error::InvalidCount("trace has no contacts"));
    }
    let n = trace.n_nodes().max(2);
    let t0 = trace
        .records
        .iter()
        .map(|c| c.t_start)
        .fold(f64::INFINITY, f64::min);
    let t_last = trace
        .records
        .iter()
        .map(|c| c.t_end)
        .fold(f64::NEG_INFINITY, f64::max);
    let steps = (((t_last - t0) / tau).ceil() as usize).max(1);

    let mut per_pair: BTreeMap<(NodeId, NodeId), Vec<(f64, f64)>> = BTreeMap::new();
    for c in &trace.records {
        let key = (c.node_a.min(c.node_b), c.node_a.max(c.node_b));
        per_pair
            .entry(key)
            .or_default()
            .push((c.t_start - t0, c.t_end - t0));
    }

    let mut snapshots = vec![Snapshot::empty(n); steps];
    for ((a, b), mut spans) in per_pair {
        spans.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
        for (s, e) in spans {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        for (s, e) in merged {
            let (first, end) = match rule {
                CoverageRule::Full => ((s / tau).ceil(), (e / tau).floor()),
                CoverageRule::Any => ((s / tau).floor(), (e / tau).ceil()),
            };
            let first = first.max(0.0) as usize;
            let end = (end.max(0.0) as usize).min(steps);
            for snap in snapshots.iter_mut().take(end).skip(first) {
                snap.set(a, b, true);
            }
        }
    }
    Trajectory::new(n, snapshots)
}

/// Which messages a replay draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReplaySampling {
    /// Fixed `(source, destination)`; uniform over ordered pairs when absent.
    pub pair: Option<(NodeId, NodeId)>,
}

/// Delivery ratio over messages started at uniformly drawn steps of a
/// replayed trajectory.
pub fn replay_estimate(
    trajectory: &Trajectory,
    msg: &MessageSpec,
    sem: TransferSemantics,
    samples: u64,
    seed: u64,
    sampling: ReplaySampling,
    exec: Exec,
) -> Result<EstimateResult> {
    msg.validate()?;
    if samples == 0 {
        return Err(Error::InvalidCount("samples must be at least 1"));
    }
    if trajectory.len() < msg.deadline {
        return Err(Error::TrajectoryTooShort {
            len: trajectory.len(),
            needed: msg.deadline,
        });
    }
    let n = trajectory.n_nodes();
    if let Some((s, d)) = sampling.pair {
        for node in [s, d] {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n_nodes: n });
            }
        }
        if s == d {
            return Err(Error::SameEndpoints(s));
        }
    }
    let last_start = trajectory.len() - msg.deadline;
    let snaps = trajectory.snapshots();
    let hits = exec.count(samples as usize, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let (src, dst) = sampling.pair.unwrap_or_else(|| {
            let src = rng.random_range(0..n);
            let mut dst = rng.random_range(0..n - 1);
            if dst >= src {
                dst += 1;
            }
            (src, dst)
        });
        let start = rng.random_range(0..=last_start);
        run_window(n, &snaps[start..], src, dst, msg, sem)
            .expect("validated")
            .delivered()
    });
    EstimateResult::from_counts(hits, samples, Z95, seed)
}
