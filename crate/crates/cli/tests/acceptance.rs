//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mrtg::estimate::{monotonicity_violations, Z99};
use mrtg::model::stream_rng;
use mrtg::oracle::{component_spread, spacetime_reachable, DEFAULT_ENUMERATION_BUDGET};
use mrtg::trace::ReplaySampling;
use mrtg::*;
use rand::Rng;

const MIN: Duration = Duration::from_secs(60);

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn msg(alpha: f64, d: usize) -> MessageSpec {
    MessageSpec::new(alpha, d).unwrap()
}

fn exact(p: &ModelParams, m: &MessageSpec, sem: TransferSemantics) -> ExactResult {
    exact_delivery(p, m, 0, 1, sem, DEFAULT_ENUMERATION_BUDGET, Exec::default()).unwrap()
}

fn c1_oracle_agreement() -> Outcome {
    let p = ModelParams::new(3, 2.0, 2.0);
    let m = msg(1.0, 3);
    let truth = exact(&p, &m, TransferSemantics::Restart);
    let covered = (0..100u64)
        .filter(|&rep| {
            MonteCarlo::new(100_000, 1_000 + rep)
                .with_z(Z99)
                .estimate(&p, &m, TransferSemantics::Restart)
                .unwrap()
                .covers(truth.probability)
        })
        .count();
    outcome(
        covered >= 95 && truth.trajectories_enumerated == 512,
        format!(
            "exact={:.6} over {} sequences, covered {covered}/100",
            truth.probability, truth.trajectories_enumerated
        ),
    )
}

fn c2_hand_values() -> Outcome {
    let p = ModelParams::new(2, 2.0, 1.0);
    let cases = [
        (1.0, 1, TransferSemantics::Restart, 0.5),
        (1.0, 2, TransferSemantics::Restart, 0.75),
        (2.0, 3, TransferSemantics::Restart, 0.375),
        (2.0, 3, TransferSemantics::Resume, 0.5),
    ];
    let mut worst: f64 = 0.0;
    for (alpha, d, sem, want) in cases {
        let got = exact(&p, &msg(alpha, d), sem).probability;
        worst = worst.max((got - want).abs());
    }
    outcome(worst <= 1e-12, format!("max abs error {worst:e}"))
}

fn c3_stationarity() -> Outcome {
    let p = ModelParams::new(2, 2.0, 10.0);
    let traj = generate_trajectory(&p, 1_000_000, 1).unwrap();
    let states: Vec<bool> = traj.snapshots().iter().map(|s| s.link_up(0)).collect();
    let frac = states.iter().filter(|&&u| u).count() as f64 / states.len() as f64;
    let mean_run = |state: bool| {
        let (mut total, mut runs, mut cur) = (0usize, 0usize, 0usize);
        for &s in &states {
            if s == state {
                cur += 1;
            } else if cur > 0 {
                total += cur;
                runs += 1;
                cur = 0;
            }
        }
        total as f64 / runs as f64
    };
    let (up, down) = (mean_run(true), mean_run(false));
    let target = 1.0 / 11.0;
    let pass = (frac - target).abs() <= 0.01 * target
        && (up - 2.0).abs() <= 0.02 * 2.0
        && (down - 20.0).abs() <= 0.02 * 20.0;
    outcome(pass, format!("up fraction {frac:.5} (target {target:.5}), mean up-run {up:.4}, mean down-run {down:.3}"))
}

fn c4_monotonicity() -> Outcome {
    let p = ModelParams::default();
    let mut msgs = Vec::new();
    for alpha in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for d in [2, 5, 10] {
            msgs.push(msg(alpha, d));
        }
    }
    let mut total = 0;
    for sem in [TransferSemantics::Restart, TransferSemantics::Resume] {
        let rows = MonteCarlo::new(10_000, 4)
            .paired_outcomes(&p, &msgs, sem)
            .unwrap();
        total += monotonicity_violations(&msgs, &rows);
    }
    outcome(
        total == 0,
        format!("{total} violations over 2 x 10^4 paired trajectories"),
    )
}

fn all_trajectories(n: usize, d: usize) -> impl Iterator<Item = Trajectory> {
    let links = n * (n - 1) / 2;
    (0u64..1 << (links * d)).map(move |code| {
        let snaps = (0..d)
            .map(|t| {
                let mut s = Snapshot::empty(n);
                for l in 0..links {
                    s.set_link(l, code >> (t * links + l) & 1 == 1);
                }
                s
            })
            .collect();
        Trajectory::new(n, snaps).unwrap()
    })
}

fn c5_spacetime_equivalence() -> Outcome {
    let (mut checked, mut agree, mut count) = (0, 0, 0);
    for traj in all_trajectories(3, 3) {
        count += 1;
        for (alpha, h) in [(1.0, 1), (0.5, 2)] {
            for (s, t) in [(0, 1), (0, 2), (1, 2), (2, 0)] {
                let a = run(&traj, s, t, &msg(alpha, 3), TransferSemantics::Restart).unwrap();
                let b = spacetime_reachable(&traj, s, t, h, 3).unwrap();
                checked += 1;
                agree += (a == b) as usize;
            }
        }
    }
    outcome(
        count == 512 && agree == checked,
        format!("{agree}/{checked} agree over {count} trajectories"),
    )
}

fn c6_component_saturation() -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for lambda in [10.0, 2.0] {
        let p = ModelParams::new(6, 2.0, lambda);
        let m = msg(0.2, 5);
        let agree = MonteCarlo::new(10_000, 6)
            .map_trials(&p, 5, |traj| {
                run(traj, 0, 1, &m, TransferSemantics::Restart).unwrap()
                    == component_spread(traj, 0, 1, 5).unwrap()
            })
            .unwrap()
            .into_iter()
            .filter(|&ok| ok)
            .count();
        pass &= agree == 10_000;
        detail.push(format!("lambda={lambda}: {agree}/10000"));
    }
    outcome(pass, detail.join(", "))
}

fn c7_bracketing_and_extinction() -> Outcome {
    let p = ModelParams::default();
    let m = msg(2.0, 8);
    let violations = MonteCarlo::new(10_000, 7)
        .map_trials(&p, 8, |traj| {
            let restart = run(traj, 0, 1, &m, TransferSemantics::Restart).unwrap();
            let resume = run(traj, 0, 1, &m, TransferSemantics::Resume).unwrap();
            match (restart.delivery_step, resume.delivery_step) {
                (Some(a), Some(b)) => b > a,
                (Some(_), None) => true,
                _ => false,
            }
        })
        .unwrap()
        .into_iter()
        .filter(|&v| v)
        .count();
    let unstable = ModelParams::new(20, 1.0, 10.0);
    let extinct = MonteCarlo::new(100_000, 7)
        .estimate(&unstable, &m, TransferSemantics::Restart)
        .unwrap();
    outcome(
        violations == 0 && extinct.successes == 0,
        format!(
            "{violations} restart>resume violations; r=1 successes {}/{}",
            extinct.successes, extinct.trials
        ),
    )
}

fn fmt_est(e: &EstimateResult) -> String {
    format!("{:.4} [{:.4},{:.4}]", e.ratio, e.ci_low, e.ci_high)
}

fn c8_message_size_shape() -> Outcome {
    let p = ModelParams::default();
    let msgs = [
        msg(2.0, 4),
        msg(1.0, 4),
        msg(0.25, 4),
        msg(0.125, 4),
        msg(0.0625, 4),
        msg(2.0, 8),
        msg(1.0, 8),
    ];
    let r = MonteCarlo::new(10_000, 8)
        .paired_sweep(&p, &msgs, TransferSemantics::Restart)
        .unwrap();
    let a = r[0].ratio < r[1].ratio
        && r[0].separated_from(&r[1])
        && r[5].ratio < r[6].ratio
        && r[5].separated_from(&r[6]);
    let b = r[2].ratio > r[1].ratio && r[2].separated_from(&r[1]);
    // The optimistic (resume) curve for alpha = 2 must also sit below alpha = 1.
    let upper = MonteCarlo::new(10_000, 8)
        .paired_sweep(&p, &[msg(2.0, 4), msg(2.0, 8)], TransferSemantics::Resume)
        .unwrap();
    let a = a && increasing(&upper[0], &r[1]) && increasing(&upper[1], &r[6]);
    let plateau = (r[3].ratio - r[4].ratio).abs();
    let c = plateau < 0.02;
    outcome(
        a && b && c,
        format!(
            "(a) d=4 a2 {}/{} < a1 {}, d=8 a2 {}/{} < a1 {}: {a}; (b) a0.25 {} > a1: {b}; (c) |a1/8 - a1/16| = {plateau:.4}: {c}",
            fmt_est(&r[0]), fmt_est(&upper[0]), fmt_est(&r[1]),
            fmt_est(&r[5]), fmt_est(&upper[1]), fmt_est(&r[6]), fmt_est(&r[2])
        ),
    )
}

fn estimate_at(p: ModelParams, m: MessageSpec) -> EstimateResult {
    MonteCarlo::new(10_000, 9)
        .estimate(&p, &m, TransferSemantics::Restart)
        .unwrap()
}

fn increasing(lo: &EstimateResult, hi: &EstimateResult) -> bool {
    lo.ratio < hi.ratio && lo.separated_from(hi)
}

fn c9_parameter_trends() -> Outcome {
    let base = ModelParams::default();
    let m = msg(1.0, 5);
    let by_n: Vec<_> = [5, 20, 40]
        .iter()
        .map(|&n| estimate_at(ModelParams { n_nodes: n, ..base }, m))
        .collect();
    let n_ok = by_n[0].ratio < by_n[1].ratio
        && by_n[1].ratio < by_n[2].ratio
        && increasing(&by_n[0], &by_n[2]);

    let small = msg(0.5, 5);
    let slow = estimate_at(ModelParams { r: 8.0, ..base }, small);
    let fast = estimate_at(ModelParams { r: 2.0, ..base }, small);
    let r_ok = increasing(&slow, &fast);

    let dense = estimate_at(
        ModelParams {
            lambda: 2.0,
            ..base
        },
        m,
    );
    let sparse = estimate_at(
        ModelParams {
            lambda: 20.0,
            ..base
        },
        m,
    );
    let l_ok = increasing(&sparse, &dense);

    let short = estimate_at(base, msg(1.0, 2));
    let long = estimate_at(base, msg(1.0, 10));
    let d_ok = increasing(&short, &long) && long.ratio > 0.9;

    outcome(
        n_ok && r_ok && l_ok && d_ok,
        format!(
            "N 5/20/40: {}/{}/{} {n_ok}; alpha=0.5 r 8->2: {} -> {} {r_ok}; lambda 20->2: {} -> {} {l_ok}; \
             d 2->10: {} -> {} {d_ok}",
            fmt_est(&by_n[0]), fmt_est(&by_n[1]), fmt_est(&by_n[2]),
            fmt_est(&slow), fmt_est(&fast), fmt_est(&sparse), fmt_est(&dense),
            fmt_est(&short), fmt_est(&long)
        ),
    )
}

fn c10_trace_pipeline() -> Outcome {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/relay.trace");
    let trace = parse_contacts(&std::fs::read_to_string(fixture).unwrap()).unwrap();
    let pair = ReplaySampling {
        pair: Some((trace.node_ids["a"], trace.node_ids["c"])),
    };
    let mut relay_ok = true;
    for rule in [CoverageRule::Full, CoverageRule::Any] {
        let traj = discretize(&trace, 10.0, rule).unwrap();
        for alpha in [0.25, 0.5, 1.0] {
            let replay = |d| {
                replay_estimate(
                    &traj,
                    &msg(alpha, d),
                    TransferSemantics::Restart,
                    100,
                    10,
                    pair,
                    Exec::default(),
                )
                .unwrap()
                .successes
            };
            relay_ok &= replay(2) == 100 && replay(1) == 0;
        }
    }

    let mut rng = stream_rng(10, 0);
    let mut violations = 0;
    for _ in 0..1000 {
        let mut text = String::new();
        for _ in 0..rng.random_range(1..20) {
            let a = rng.random_range(0..6);
            let b = (a + rng.random_range(1..6)) % 6;
            let s: f64 = rng.random_range(0.0..50.0);
            let len: f64 = rng.random_range(0.01..8.0);
            text.push_str(&format!("{a} {b} {s} {}\n", s + len));
        }
        let trace = parse_contacts(&text).unwrap();
        let tau = rng.random_range(0.2..3.0);
        let full = discretize(&trace, tau, CoverageRule::Full).unwrap();
        let any = discretize(&trace, tau, CoverageRule::Any).unwrap();
        for (f, a) in full.snapshots().iter().zip(any.snapshots()) {
            violations += (0..f.n_links())
                .filter(|&l| f.link_up(l) && !a.link_up(l))
                .count();
        }
    }
    outcome(
        relay_ok && violations == 0,
        format!(
            "relay fixture ok: {relay_ok}; full-not-any violations over 1000 traces: {violations}"
        ),
    )
}

fn simulate_output(threads: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_mrtg"))
        .args([
            "--threads",
            &threads.to_string(),
            "simulate",
            "--seed",
            "11",
        ])
        .output()
        .expect("running mrtg");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn c11_determinism() -> Outcome {
    let many = std::thread::available_parallelism()
        .map_or(4, |n| n.get())
        .max(4);
    let a = simulate_output(many);
    let b = simulate_output(many);
    let c = simulate_output(1);
    let rows = String::from_utf8_lossy(&a).lines().count();
    outcome(
        a == b && a == c && rows == 2,
        format!(
            "rerun identical: {}; 1 vs {many} threads identical: {}",
            a == b,
            a == c
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "oracle agreement (N=3 Monte Carlo vs enumeration)",
            MIN,
            c1_oracle_agreement,
        ),
        ("hand-derived exact values", MIN, c2_hand_values),
        (
            "stationarity and sojourn means",
            Duration::from_secs(10),
            c3_stationarity,
        ),
        (
            "per-trajectory size/deadline monotonicity",
            MIN,
            c4_monotonicity,
        ),
        (
            "space-time search equivalence (exhaustive N=3, d=3)",
            MIN,
            c5_spacetime_equivalence,
        ),
        (
            "component saturation (N=6, alpha=0.2)",
            MIN,
            c6_component_saturation,
        ),
        (
            "restart/resume bracketing and r=1 extinction",
            MIN,
            c7_bracketing_and_extinction,
        ),
        ("message-size curve shape", 5 * MIN, c8_message_size_shape),
        ("parameter trends", 5 * MIN, c9_parameter_trends),
        (
            "trace pipeline",
            Duration::from_secs(10),
            c10_trace_pipeline,
        ),
        (
            "CSV determinism across reruns and thread counts",
            5 * MIN,
            c11_determinism,
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let Outcome { pass, detail } = check();
        let elapsed = start.elapsed();
        let pass = pass && elapsed <= *limit;
        failed += !pass as usize;
        println!(
            "criterion {:>2} {}: {name} ({:.1}s, limit {}s) {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
