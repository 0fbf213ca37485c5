//! Parameter grids for `simulate` and `sweep`.
//!
//! A sweep document is JSON. Every key is optional and may hold a single
//! value or a list:
//!
//! ```json
//! { "nodes": [5, 20, 40], "r": 2, "lambda": 10, "alpha": [0.5, 1, 2],
//!   "d": 5, "semantics": "restart", "trials": 10000, "seed": 1 }
//! ```
//!
//! Missing keys take the baseline defaults `N = 20`, `r = 2`,
//! `lambda = 10`, `d = 5`, `alpha = 1`, restart semantics and 10^4 trials.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use mrtg::{MessageSpec, ModelParams, TransferSemantics};
use serde::{Deserialize, Deserializer, Serialize};

pub const DEFAULT_NODES: usize = 20;
pub const DEFAULT_R: f64 = 2.0;
pub const DEFAULT_LAMBDA: f64 = 10.0;
pub const DEFAULT_DELAY: usize = 5;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    #[default]
    Restart,
    Resume,
}

impl From<Semantics> for TransferSemantics {
    fn from(s: Semantics) -> Self {
        match s {
            Semantics::Restart => TransferSemantics::Restart,
            Semantics::Resume => TransferSemantics::Resume,
        }
    }
}

impl From<TransferSemantics> for Semantics {
    fn from(s: TransferSemantics) -> Self {
        match s {
            TransferSemantics::Restart => Semantics::Restart,
            TransferSemantics::Resume => Semantics::Resume,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(deserialize_with = "one_or_many")]
    pub nodes: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub r: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub lambda: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub alpha: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub d: Vec<usize>,
    pub semantics: Semantics,
    pub trials: u64,
    pub seed: u64,
    pub tau: f64,
    pub phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            nodes: vec![DEFAULT_NODES],
            r: vec![DEFAULT_R],
            lambda: vec![DEFAULT_LAMBDA],
            alpha: vec![DEFAULT_ALPHA],
            d: vec![DEFAULT_DELAY],
            semantics: Semantics::Restart,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            tau: 1.0,
            phi: 1.0,
            output: None,
        }
    }
}

fn one_or_many<'de, D, T>(de: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// One `(N, r, lambda)` family; all of its messages share trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub params: ModelParams,
    pub msgs: Vec<MessageSpec>,
}

impl SweepConfig {
    /// Checks every cell of the grid and reports all invalid ones together.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, empty) in [
            ("nodes", self.nodes.is_empty()),
            ("r", self.r.is_empty()),
            ("lambda", self.lambda.is_empty()),
            ("alpha", self.alpha.is_empty()),
            ("d", self.d.is_empty()),
        ] {
            if empty {
                problems.push(format!("`{name}` has no values"));
            }
        }
        if self.trials == 0 {
            problems.push("trials must be at least 1".to_string());
        }
        for &n in &self.nodes {
            for &r in &self.r {
                for &lambda in &self.lambda {
                    let params = self.params(n, r, lambda);
                    let model_err = params.validate().err();
                    for &alpha in &self.alpha {
                        for &d in &self.d {
                            let msg_err = MessageSpec::new(alpha, d).err();
                            let errs: Vec<String> = model_err
                                .iter()
                                .chain(msg_err.iter())
                                .map(|e| e.to_string())
                                .collect();
                            if !errs.is_empty() {
                                problems.push(format!(
                                    "cell N={n} r={r} lambda={lambda} alpha={alpha} d={d}: {}",
                                    errs.join("; ")
                                ));
                            }
                        }
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            bail!("invalid sweep configuration:\n  {}", problems.join("\n  "))
        }
    }

    fn params(&self, n: usize, r: f64, lambda: f64) -> ModelParams {
        ModelParams {
            n_nodes: n,
            r,
            lambda,
            tau: self.tau,
            phi: self.phi,
        }
    }

    /// Grid families in row order: `N`, then `r`, then `lambda`. Messages
    /// within a family are ordered by `alpha`, then `d`.
    pub fn families(&self) -> Result<Vec<Family>> {
        self.validate()?;
        let mut msgs = Vec::new();
        for &alpha in &self.alpha {
            for &d in &self.d {
                msgs.push(MessageSpec::new(alpha, d)?);
            }
        }
        let mut out = Vec::new();
        for &n in &self.nodes {
            for &r in &self.r {
                for &lambda in &self.lambda {
                    out.push(Family {
                        params: self.params(n, r, lambda),
                        msgs: msgs.clone(),
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Parses and fully validates a sweep document.
pub fn load_sweep_config(document: &str) -> Result<SweepConfig> {
    let cfg: SweepConfig = if document.trim().is_empty() {
        SweepConfig::default()
    } else {
        serde_json::from_str(document).context("malformed sweep configuration")?
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        for doc in ["", "{}", "  \n"] {
            let cfg = load_sweep_config(doc).unwrap();
            assert_eq!(cfg, SweepConfig::default());
        }
        let fam = SweepConfig::default().families().unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].params, ModelParams::new(20, 2.0, 10.0));
        assert_eq!(fam[0].msgs, vec![MessageSpec::new(1.0, 5).unwrap()]);
    }

    #[test]
    fn list_varies_one_axis() {
        let cfg = load_sweep_config(r#"{"r": [1, 2, 4, 8]}"#).unwrap();
        let fam = cfg.families().unwrap();
        assert_eq!(fam.len(), 4);
        let rs: Vec<f64> = fam.iter().map(|f| f.params.r).collect();
        assert_eq!(rs, vec![1.0, 2.0, 4.0, 8.0]);
        assert!(fam
            .iter()
            .all(|f| f.params.n_nodes == 20 && f.params.lambda == 10.0));
    }

    #[test]
    fn scalars_are_accepted() {
        let cfg =
            load_sweep_config(r#"{"nodes": 5, "alpha": [0.5, 2], "semantics": "resume"}"#).unwrap();
        assert_eq!(cfg.nodes, vec![5]);
        assert_eq!(cfg.semantics, Semantics::Resume);
        assert_eq!(cfg.families().unwrap()[0].msgs.len(), 2);
    }

    #[test]
    fn invalid_cells_are_all_named() {
        let err = load_sweep_config(r#"{"r": [0.5]}"#)
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("cell N=20 r=0.5 lambda=10 alpha=1 d=5"),
            "{err}"
        );
        assert!(err.contains("r < 1"));

        let err = load_sweep_config(r#"{"r": [0.5, 2], "d": [0, 3]}"#)
            .unwrap_err()
            .to_string();
        // r=0.5 fails with both deadlines, d=0 fails with both r values.
        assert_eq!(err.matches("cell ").count(), 3, "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = load_sweep_config(r#"{"lamda": [2]}"#).unwrap_err();
        assert!(format!("{err:#}").contains("lamda"));
        assert!(load_sweep_config(r#"{"trials": 0}"#).is_err());
        assert!(load_sweep_config(r#"{"alpha": []}"#).is_err());
    }
}
