use std::str::FromStr;

use rand::RngCore;

use super::dataset::Dataset;
use crate::bandit::{EpisodeTrace, LinearFullPosterior, LinearHyper, OraclePolicy, Policy, StepRecord, UniformPolicy};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Linear,
    Uniform,
    Oracle,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Linear, PolicyKind::Uniform, PolicyKind::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Uniform => "uniform",
            Self::Oracle => "oracle",
        }
    }

    /// Fixed stream index so each policy's randomness is independent of the others.
    pub fn stream_index(self) -> u64 {
        self as u64
    }
}

impl FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("policy must be linear|uniform|oracle, got `{s}`")))
    }
}

pub fn make_policy(kind: PolicyKind, k: usize, context_dim: usize, hyper: LinearHyper) -> Result<Box<dyn Policy>> {
    Ok(match kind {
        PolicyKind::Linear => Box::new(LinearFullPosterior::new(k, context_dim, hyper)?),
        PolicyKind::Uniform => Box::new(UniformPolicy::new(k)?),
        PolicyKind::Oracle => Box::new(OraclePolicy::new(k)?),
    })
}

/// Plays `policy` over the dataset in step order, revealing one reward per step.
pub fn run_bandit(ds: &Dataset, policy: &mut dyn Policy, rng: &mut dyn RngCore) -> Result<EpisodeTrace> {
    if policy.num_arms() != ds.num_arms() {
        return Err(Error::DimensionMismatch { expected: ds.num_arms(), actual: policy.num_arms() });
    }
    let mut trace = EpisodeTrace::new(policy.name());
    trace.records.reserve(ds.horizon());
    for t in 0..ds.horizon() {
        let ctx = &ds.contexts[t];
        let arm = policy.select(t, ctx, &ds.rewards[t], rng)?;
        let reward = ds.rewards[t][arm];
        policy.observe(ctx, arm, reward)?;
        trace.push(StepRecord { step: t, context_id: t, arm, reward, optimal_reward: ds.optimal_reward(t) })?;
    }
    Ok(trace)
}
