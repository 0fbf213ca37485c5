//! Monte Carlo delivery-ratio estimation.
//!
//! Trial `i` draws its trajectory from stream `i` of the master seed, so an
//! estimate is a pure function of its inputs whatever the execution
//! strategy or thread count. Source and destination are nodes 0 and 1; all
//! nodes are exchangeable under the model.

use crate::epidemic::{run, DeliveryOutcome, MessageSpec, TransferSemantics};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{generate_trajectory_with, stream_rng, ModelParams, Trajectory};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

pub const SOURCE: usize = 0;
pub const DESTINATION: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub trials: u64,
    pub successes: u64,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl EstimateResult {
    pub fn from_counts(successes: u64, trials: u64, z: f64, seed: u64) -> Result<Self> {
        let (lo, hi) = wilson_interval(successes, trials, z)?;
        let ratio = successes as f64 / trials as f64;
        Ok(EstimateResult {
            trials,
            successes,
            ratio,
            ci_low: lo.min(ratio),
            ci_high: hi.max(ratio),
            seed,
        })
    }

    /// Whether `value` lies inside the confidence interval.
    pub fn covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    /// True when the two confidence intervals are disjoint.
    pub fn separated_from(&self, other: &EstimateResult) -> bool {
        self.ci_high < other.ci_low || other.ci_high < self.ci_low
    }
}

/// Wilson score interval for `successes` out of `trials`, clamped to [0, 1].
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidCount("trials must be at least 1"));
    }
    if successes > trials {
        return Err(Error::InvalidCount("successes exceed trials"));
    }
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::InvalidCount("z must be positive"));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((lo, hi))
}

/// Trial count, master seed, interval width and execution strategy shared
/// by a batch of estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub trials: u64,
    pub seed: u64,
    pub z: f64,
    pub exec: Exec,
}

impl MonteCarlo {
    pub fn new(trials: u64, seed: u64) -> Self {
        MonteCarlo {
            trials,
            seed,
            z: Z95,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.z = z;
        self
    }

    /// Applies `f` to the trajectory of every trial, in trial order.
    pub fn map_trials<T, F>(&self, params: &ModelParams, steps: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&Trajectory) -> T + Sync + Send,
    {
        params.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidCount("trials must be at least 1"));
        }
        if steps == 0 {
            return Err(Error::InvalidCount("trajectory needs at least one step"));
        }
        let seed = self.seed;
        Ok(self.exec.map(self.trials as usize, |i| {
            let mut rng = stream_rng(seed, i as u64);
            let traj = generate_trajectory_with(params, steps, &mut rng).expect("validated");
            f(&traj)
        }))
    }

    /// Per-trial outcomes of every message on shared trajectories; row `i`
    /// is trial `i`, columns follow `msgs`.
    pub fn paired_outcomes(
        &self,
        params: &ModelParams,
        msgs: &[MessageSpec],
        sem: TransferSemantics,
    ) -> Result<Vec<Vec<DeliveryOutcome>>> {
        if msgs.is_empty() {
            return Err(Error::InvalidCount("at least one message is required"));
        }
        for m in msgs {
            m.validate()?;
        }
        let steps = msgs.iter().map(|m| m.deadline).max().unwrap_or(1);
        self.map_trials(params, steps, |traj| {
            msgs.iter()
                .map(|m| run(traj, SOURCE, DESTINATION, m, sem).expect("validated"))
                .collect()
        })
    }

    pub fn estimate(
        &self,
        params: &ModelParams,
        msg: &MessageSpec,
        sem: TransferSemantics,
    ) -> Result<EstimateResult> {
        Ok(self
            .paired_sweep(params, std::slice::from_ref(msg), sem)?
            .remove(0))
    }

    /// Estimates for every message, evaluated on common trajectories.
    pub fn paired_sweep(
        &self,
        params: &ModelParams,
        msgs: &[MessageSpec],
        sem: TransferSemantics,
    ) -> Result<Vec<EstimateResult>> {
        let rows = self.paired_outcomes(params, msgs, sem)?;
        (0..msgs.len())
            .map(|j| {
                let hits = rows.iter().filter(|row| row[j].delivered()).count() as u64;
                EstimateResult::from_counts(hits, self.trials, self.z, self.seed)
            })
            .collect()
    }
}

pub fn estimate_delivery(
    params: &ModelParams,
    msg: &MessageSpec,
    sem: TransferSemantics,
    trials: u64,
    seed: u64,
) -> Result<EstimateResult> {
    MonteCarlo::new(trials, seed).estimate(params, msg, sem)
}

pub fn paired_sweep(
    params: &ModelParams,
    msgs: &[MessageSpec],
    sem: TransferSemantics,
    trials: u64,
    seed: u64,
) -> Result<Vec<EstimateResult>> {
    MonteCarlo::new(trials, seed).paired_sweep(params, msgs, sem)
}

/// Counts per-trial violations of size and deadline monotonicity.
///
/// For every pair of columns `(i, j)` with `alpha_i <= alpha_j` and
/// `d_i >= d_j`, message `i` must deliver whenever `j` does, no later than
/// `j`. When the sizes are equal the steps must coincide.
pub fn monotonicity_violations(msgs: &[MessageSpec], rows: &[Vec<DeliveryOutcome>]) -> u64 {
    let mut violations = 0;
    for row in rows {
        for (i, mi) in msgs.iter().enumerate() {
            for (j, mj) in msgs.iter().enumerate() {
                if i == j || mi.alpha > mj.alpha || mi.deadline < mj.deadline {
                    continue;
                }
                let ok = match (row[i].delivery_step, row[j].delivery_step) {
                    (_, None) => true,
                    (None, Some(_)) => false,
                    (Some(si), Some(sj)) if mi.alpha == mj.alpha => si == sj,
                    (Some(si), Some(sj)) => si <= sj,
                };
                if !ok {
                    violations += 1;
                }
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100, 1.96).unwrap();
        assert_eq!(lo, 0.0);
        // Independent closed form for zero successes: 2 * (z^2/2) / (n + z^2).
        assert!((hi - 1.96f64.powi(2) / (100.0 + 1.96f64.powi(2))).abs() < 1e-12);
        assert!((hi - 0.0370).abs() < 5e-5);

        let (lo, hi) = wilson_interval(50, 100, 1.96).unwrap();
        assert!(
            (lo - 0.404).abs() < 5e-4 && (hi - 0.596).abs() < 5e-4,
            "{lo} {hi}"
        );

        let (lo, hi) = wilson_interval(100, 100, 1.96).unwrap();
        assert!((lo - 0.963).abs() < 5e-4);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn wilson_errors() {
        assert!(wilson_interval(0, 0, 1.96).is_err());
        assert!(wilson_interval(5, 4, 1.96).is_err());
        assert!(wilson_interval(1, 4, 0.0).is_err());
    }

    #[test]
    fn result_invariants() {
        for (s, n) in [(0, 1), (1, 1), (3, 7), (999, 1000)] {
            let r = EstimateResult::from_counts(s, n, Z95, 0).unwrap();
            assert!(
                0.0 <= r.ci_low && r.ci_low <= r.ratio && r.ratio <= r.ci_high && r.ci_high <= 1.0
            );
        }
    }

    #[test]
    fn extinction_at_r_one() {
        let p = ModelParams::new(2, 1.0, 1.0);
        let msg = MessageSpec::new(2.0, 6).unwrap();
        let est = estimate_delivery(&p, &msg, TransferSemantics::Restart, 2000, 5).unwrap();
        assert_eq!(est.successes, 0);
    }

    #[test]
    fn two_node_estimate_near_exact() {
        let p = ModelParams::new(2, 2.0, 1.0);
        let msg = MessageSpec::new(1.0, 2).unwrap();
        let trials = 100_000;
        let est = estimate_delivery(&p, &msg, Default::default(), trials, 17).unwrap();
        let sigma = (0.75f64 * 0.25 / trials as f64).sqrt();
        assert!((est.ratio - 0.75).abs() < 3.0 * sigma, "{est:?}");
    }

    #[test]
    fn single_message_sweep_matches_estimate() {
        let p = ModelParams::default();
        let msg = MessageSpec::new(1.0, 5).unwrap();
        let mc = MonteCarlo::new(500, 3);
        let one = mc.estimate(&p, &msg, Default::default()).unwrap();
        let sweep = mc.paired_sweep(&p, &[msg], Default::default()).unwrap();
        assert_eq!(sweep, vec![one]);
        // A shorter deadline in a wider sweep sees the same trajectory prefix.
        let wide = mc
            .paired_sweep(
                &p,
                &[msg, MessageSpec::new(1.0, 9).unwrap()],
                Default::default(),
            )
            .unwrap();
        assert_eq!(wide[0], one);
    }

    #[test]
    fn paired_deadlines_nest() {
        let p = ModelParams::default();
        let msgs = [
            MessageSpec::new(1.0, 4).unwrap(),
            MessageSpec::new(1.0, 8).unwrap(),
        ];
        let rows = MonteCarlo::new(2000, 1)
            .paired_outcomes(&p, &msgs, Default::default())
            .unwrap();
        assert_eq!(monotonicity_violations(&msgs, &rows), 0);
        for row in &rows {
            assert!(!row[0].delivered() || row[1].delivered());
        }
    }

    #[test]
    fn violation_counter_detects_inversions() {
        let msgs = [
            MessageSpec::new(0.5, 4).unwrap(),
            MessageSpec::new(2.0, 4).unwrap(),
        ];
        let bad = vec![vec![DeliveryOutcome::failed(), DeliveryOutcome::at(3)]];
        assert_eq!(monotonicity_violations(&msgs, &bad), 1);
        let late = vec![vec![DeliveryOutcome::at(4), DeliveryOutcome::at(3)]];
        assert_eq!(monotonicity_violations(&msgs, &late), 1);
        let good = vec![vec![DeliveryOutcome::at(2), DeliveryOutcome::at(3)]];
        assert_eq!(monotonicity_violations(&msgs, &good), 0);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let p = ModelParams::default();
        let msgs = [
            MessageSpec::new(0.5, 5).unwrap(),
            MessageSpec::new(2.0, 5).unwrap(),
        ];
        let seq = MonteCarlo::new(800, 12).with_exec(Exec::Sequential);
        let par = MonteCarlo::new(800, 12).with_exec(Exec::Parallel);
        assert_eq!(
            seq.paired_sweep(&p, &msgs, TransferSemantics::Resume)
                .unwrap(),
            par.paired_sweep(&p, &msgs, TransferSemantics::Resume)
                .unwrap()
        );
    }

    #[test]
    fn rejects_zero_trials() {
        let msg = MessageSpec::new(1.0, 2).unwrap();
        assert!(
            estimate_delivery(&ModelParams::default(), &msg, Default::default(), 0, 1).is_err()
        );
        let bad = ModelParams::new(2, 0.5, 1.0);
        assert!(estimate_delivery(&bad, &msg, Default::default(), 10, 1).is_err());
    }
}
