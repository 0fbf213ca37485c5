use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use mrtg::oracle::DEFAULT_ENUMERATION_BUDGET;
use mrtg::trace::ReplaySampling;
use mrtg::{
    discretize, exact_delivery, generate_trajectory, parse_contacts, replay_estimate, CoverageRule,
    EstimateResult, Exec, MessageSpec, ModelParams, MonteCarlo, TransferSemantics,
};
use serde::Serialize;

use crate::config::SweepConfig;

pub const SIMULATE_HEADER: &str =
    "N,r,lambda,alpha,d,semantics,trials,successes,ratio,ci_low,ci_high,seed";

pub const REPLAY_HEADER: &str =
    "nodes,steps,tau,coverage,alpha,d,semantics,samples,successes,ratio,ci_low,ci_high,seed";

/// Runs every cell of the grid and renders the result table.
pub fn simulate_csv(cfg: &SweepConfig) -> Result<String> {
    let families = cfg.families()?;
    let sem: TransferSemantics = cfg.semantics.into();
    let mc = MonteCarlo::new(cfg.trials, cfg.seed);
    let mut out = String::from(SIMULATE_HEADER);
    out.push('\n');
    for fam in &families {
        let results = mc.paired_sweep(&fam.params, &fam.msgs, sem)?;
        for (msg, res) in fam.msgs.iter().zip(&results) {
            let p = &fam.params;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                p.n_nodes,
                p.r,
                p.lambda,
                msg.alpha,
                msg.deadline,
                sem,
                estimate_columns(res)
            )?;
        }
    }
    Ok(out)
}

fn estimate_columns(res: &EstimateResult) -> String {
    format!(
        "{},{},{},{},{},{}",
        res.trials, res.successes, res.ratio, res.ci_low, res.ci_high, res.seed
    )
}

pub fn generate_text(params: &ModelParams, d: usize, seed: u64) -> Result<String> {
    Ok(generate_trajectory(params, d, seed)?.to_text())
}

pub fn exact_csv(
    params: &ModelParams,
    msg: &MessageSpec,
    sem: TransferSemantics,
    budget: Option<usize>,
) -> Result<String> {
    let res = exact_delivery(
        params,
        msg,
        0,
        1,
        sem,
        budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET),
        Exec::default(),
    )?;
    Ok(format!(
        "N,r,lambda,alpha,d,semantics,probability,trajectories_enumerated\n{},{},{},{},{},{},{},{}\n",
        params.n_nodes,
        params.r,
        params.lambda,
        msg.alpha,
        msg.deadline,
        sem,
        res.probability,
        res.trajectories_enumerated
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayConfig {
    pub tau: f64,
    #[serde(serialize_with = "display")]
    pub coverage: CoverageRule,
    pub alpha: Vec<f64>,
    pub d: Vec<usize>,
    #[serde(serialize_with = "display")]
    pub semantics: TransferSemantics,
    pub samples: u64,
    pub seed: u64,
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Replays a contact trace for every `(alpha, d)` pair.
pub fn replay_csv(trace_text: &str, cfg: &ReplayConfig) -> Result<String> {
    let trace = parse_contacts(trace_text)?;
    let traj = discretize(&trace, cfg.tau, cfg.coverage)?;
    let mut out = String::from(REPLAY_HEADER);
    out.push('\n');
    for &alpha in &cfg.alpha {
        for &d in &cfg.d {
            let msg = MessageSpec::new(alpha, d)?;
            let res = replay_estimate(
                &traj,
                &msg,
                cfg.semantics,
                cfg.samples,
                cfg.seed,
                ReplaySampling::default(),
                Exec::default(),
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                traj.n_nodes(),
                traj.len(),
                cfg.tau,
                cfg.coverage,
                alpha,
                d,
                cfg.semantics,
                estimate_columns(&res)
            )?;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    parameters: &'a T,
    output: String,
}

/// Writes `text` to `path` plus a `<path>.manifest.json` provenance record.
pub fn write_with_manifest<T: Serialize>(
    path: &Path,
    text: &str,
    command: &str,
    parameters: &T,
) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        parameters,
        output: path.display().to_string(),
    };
    let mut manifest_path = path.as_os_str().to_owned();
    manifest_path.push(".manifest.json");
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&manifest_path, json)
        .with_context(|| format!("writing {}", Path::new(&manifest_path).display()))?;
    Ok(())
}
