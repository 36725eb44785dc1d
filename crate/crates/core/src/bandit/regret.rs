use crate::error::{Error, Result};

/// One decision of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub context_id: usize,
    pub arm: usize,
    pub reward: f64,
    /// Reward of the best arm at this step.
    pub optimal_reward: f64,
}

/// Ordered per-step records of one policy run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeTrace {
    pub policy: String,
    pub records: Vec<StepRecord>,
}

/// Slack for `reward ≤ optimal_reward` on values read back from text.
const REWARD_SLACK: f64 = 1e-12;

impl EpisodeTrace {
    pub fn new(policy: impl Into<String>) -> Self {
        Self { policy: policy.into(), records: Vec::new() }
    }

    pub fn push(&mut self, rec: StepRecord) -> Result<()> {
        if rec.step != self.records.len() {
            return Err(Error::domain(format!(
                "trace step {} out of order (expected {})",
                rec.step,
                self.records.len()
            )));
        }
        if !(rec.reward >= 0.0 && rec.reward <= rec.optimal_reward + REWARD_SLACK) {
            return Err(Error::domain(format!(
                "step {}: reward {} outside [0, optimal {}]",
                rec.step, rec.reward, rec.optimal_reward
            )));
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward).sum()
    }

    pub fn optimal_cumulative_reward(&self) -> f64 {
        self.records.iter().map(|r| r.optimal_reward).sum()
    }

    /// `(step, reward)` pairs for reward scatter plots.
    pub fn reward_series(&self) -> Vec<(usize, f64)> {
        self.records.iter().map(|r| (r.step, r.reward)).collect()
    }
}

/// Prefix sums of `optimal_reward - reward`; the last entry is the total regret.
pub fn cumulative_regret(trace: &EpisodeTrace) -> Vec<f64> {
    trace
        .records
        .iter()
        .scan(0.0, |acc, r| {
            *acc += (r.optimal_reward - r.reward).max(0.0);
            Some(*acc)
        })
        .collect()
}
