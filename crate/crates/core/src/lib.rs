//! Opportunistic spatial orthogonalization (OSO) for machine-type uplinks.
//!
//! The crate is organised bottom-up:
//!
//! - [`chanmodel`]: one-ring spatial covariance, correlated and i.i.d. channel draws,
//!   path loss with log-normal shadowing.
//! - [`airlink`]: MRC beamforming, SINR at the base station and at the aggregator,
//!   residual interference, full-CSI scheduling and MTD power control.
//! - [`closedform`]: distribution of the minimum interference, SINR density and
//!   outage probability under i.i.d. Rayleigh fading.
//! - [`bandit`]: contextual Thompson sampling with a per-arm normal–inverse-gamma
//!   linear model, uniform and oracle baselines, regret accounting.
//! - [`harness`]: experiment configuration, dataset generation, Monte Carlo sweeps
//!   and CSV emission.
//!
//! All randomness flows through [`rng::SeedTree`] substreams so that results are
//! reproducible independent of evaluation order and thread count.

pub mod airlink;
pub mod bandit;
pub mod chanmodel;
pub mod closedform;
pub mod error;
pub mod harness;
pub mod quad;
pub mod rng;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
