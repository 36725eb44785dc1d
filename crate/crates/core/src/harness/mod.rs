//! Experiment drivers: configuration, deployments, datasets, bandit runs,
//! Monte Carlo sweeps and CSV reports.

pub mod config;
pub mod csvio;
pub mod dataset;
pub mod episode;
pub mod report;
pub mod scenario;
pub mod sweeps;

pub use config::{ContextPhase, ExperimentConfig, PowerMode};
pub use dataset::{generate_dataset, Dataset};
pub use episode::{make_policy, run_bandit, PolicyKind};
pub use sweeps::{mc_outage_vs_k, mc_sinr_vs_k, OutagePoint, SinrPoint, SweepPower};
