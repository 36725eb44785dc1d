//! Contextual multi-armed bandits for MTD scheduling.
//!
//! Each arm is an MTD. Before every decision the learner sees a context built
//! from the HTD receive beamformer, picks one arm, and observes only that arm's
//! normalized reward.

mod context;
mod policy;
mod posterior;
mod regret;

pub use context::{build_context, ContextVector};
pub use policy::{
    round_robin_init, ts_select, uniform_select, LinearFullPosterior, LinearHyper, OraclePolicy,
    Policy, UniformPolicy,
};
pub use posterior::{ts_sample, ts_update, LinearArmPosterior, PosteriorParams};
pub use regret::{cumulative_regret, EpisodeTrace, StepRecord};
