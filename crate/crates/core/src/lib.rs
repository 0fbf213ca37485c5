//! Deadline-bounded epidemic delivery over Markovian random temporal graphs.
//!
//! * [`model`]: two-state link chains and trajectory generation.
//! * [`epidemic`]: flooding over a trajectory for any message size.
//! * [`oracle`]: exact enumeration and independent reachability checks.
//! * [`estimate`]: reproducible Monte Carlo delivery ratios.
//! * [`trace`]: contact-trace discretization and replay.

pub mod epidemic;
pub mod error;
pub mod estimate;
pub mod exec;
pub mod model;
pub mod oracle;
pub mod trace;

pub use epidemic::{run, DeliveryOutcome, MessageSpec, Regime, TransferSemantics};
pub use error::{Error, Result};
pub use estimate::{estimate_delivery, paired_sweep, wilson_interval, EstimateResult, MonteCarlo};
pub use exec::Exec;
pub use model::{generate_trajectory, ModelParams, Snapshot, Trajectory};
pub use oracle::{exact_delivery, ExactResult};
pub use trace::{discretize, parse_contacts, replay_estimate, CoverageRule};
