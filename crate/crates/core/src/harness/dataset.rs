//! Offline bandit datasets: one context and the full reward row per step.

use std::path::Path;

use rayon::prelude::*;

use super::config::{ContextPhase, ExperimentConfig};
use super::csvio::{fmt_f64, parse_f64, parse_usize, Table};
use super::scenario::{deploy, draw_htd, Deployment};
use crate::airlink::{mrc, normalized_rate, sinr_htd};
use crate::bandit::{build_context, ContextVector};
use crate::error::{Error, Result};
use crate::rng::{Domain, SeedTree};

pub const DATASET_SCHEMA: &str = "oso-dataset/1";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub contexts: Vec<ContextVector>,
    /// `rewards[t][k]`, normalised HTD rate when MTD `k` is scheduled at step `t`.
    pub rewards: Vec<Vec<f64>>,
    pub optimal_arm: Vec<usize>,
}

fn best_arm(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &r) in row.iter().enumerate() {
        if r > row[best] {
            best = k;
        }
    }
    best
}

impl Dataset {
    /// Builds a dataset; optimal arms are recomputed from the rewards.
    pub fn new(contexts: Vec<ContextVector>, rewards: Vec<Vec<f64>>) -> Result<Self> {
        if contexts.is_empty() || contexts.len() != rewards.len() {
            return Err(Error::DimensionMismatch { expected: contexts.len(), actual: rewards.len() });
        }
        let d = contexts[0].dim();
        let k = rewards[0].len();
        if k == 0 {
            return Err(Error::domain("dataset needs at least one arm"));
        }
        for (c, r) in contexts.iter().zip(&rewards) {
            if c.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, actual: c.dim() });
            }
            if r.len() != k {
                return Err(Error::DimensionMismatch { expected: k, actual: r.len() });
            }
            if r.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::domain("rewards must lie in [0, 1]"));
            }
        }
        let optimal_arm = rewards.iter().map(|r| best_arm(r)).collect();
        Ok(Self { contexts, rewards, optimal_arm })
    }

    pub fn horizon(&self) -> usize {
        self.contexts.len()
    }

    pub fn num_arms(&self) -> usize {
        self.rewards[0].len()
    }

    pub fn context_dim(&self) -> usize {
        self.contexts[0].dim()
    }

    pub fn optimal_reward(&self, t: usize) -> f64 {
        self.rewards[t][self.optimal_arm[t]]
    }

    /// Mean reward of each arm over all steps.
    pub fn arm_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.num_arms()];
        for row in &self.rewards {
            for (a, r) in m.iter_mut().zip(row) {
                *a += r;
            }
        }
        m.iter().map(|s| s / self.horizon() as f64).collect()
    }

    pub fn to_table(&self) -> Table {
        let d = self.context_dim();
        let k = self.num_arms();
        let mut header = vec!["step".to_string()];
        header.extend((0..d).map(|i| format!("q{i}")));
        header.extend((0..k).map(|i| format!("r{i}")));
        header.push("optimal_arm".into());
        let mut t = Table { header, rows: Vec::with_capacity(self.horizon()) };
        for s in 0..self.horizon() {
            let mut row = vec![s.to_string()];
            row.extend(self.contexts[s].features().iter().map(|&x| fmt_f64(x)));
            row.extend(self.rewards[s].iter().map(|&x| fmt_f64(x)));
            row.push(self.optimal_arm[s].to_string());
            t.rows.push(row);
        }
        t
    }

    pub fn from_table(t: &Table) -> Result<Self> {
        let d = t.header.iter().filter(|h| h.starts_with('q')).count();
        let k = t.header.iter().filter(|h| h.starts_with('r')).count();
        if t.header.len() != d + k + 2 || t.header[0] != "step" || t.header[d + k + 1] != "optimal_arm" {
            return Err(Error::Parse("unexpected dataset header".into()));
        }
        let mut contexts = Vec::with_capacity(t.rows.len());
        let mut rewards = Vec::with_capacity(t.rows.len());
        let mut stored = Vec::with_capacity(t.rows.len());
        for (i, row) in t.rows.iter().enumerate() {
            if parse_usize(&row[0])? != i {
                return Err(Error::Parse(format!("row {i}: steps must be consecutive from 0")));
            }
            let q = row[1..=d].iter().map(|s| parse_f64(s)).collect::<Result<Vec<_>>>()?;
            let r = row[d + 1..=d + k].iter().map(|s| parse_f64(s)).collect::<Result<Vec<_>>>()?;
            contexts.push(ContextVector::new(q)?);
            rewards.push(r);
            stored.push(parse_usize(&row[d + k + 1])?);
        }
        let ds = Self::new(contexts, rewards)?;
        if let Some(t) = (0..ds.horizon()).find(|&t| ds.optimal_reward(t) != ds.rewards[t][stored[t].min(k - 1)]) {
            return Err(Error::Parse(format!("row {t}: stored optimal arm is not optimal")));
        }
        Ok(ds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_table().save(DATASET_SCHEMA, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_table(&Table::load(DATASET_SCHEMA, path)?)
    }
}

/// Context and reward row of one coherence interval.
pub fn interval_rewards(
    cfg: &ExperimentConfig,
    dep: &Deployment,
    step: u64,
    seeds: &SeedTree,
) -> Result<(ContextVector, Vec<f64>)> {
    let mode = cfg.mtd_power_mode;
    let htd = draw_htd(cfg, dep, &mut seeds.stream(Domain::Htd, step))?;
    let pw = cfg.power_config(mode)?.with_htd_power(htd.p_c);
    let w = mrc(&htd.h_c)?;
    let mut rng = seeds.stream(Domain::Mtd, step);
    let gamma_ref = cfg.htd_target_sinr();
    let rewards = dep
        .mtds
        .iter()
        .map(|m| {
            let h = m.draw_bs_channel(&mut rng);
            normalized_rate(sinr_htd(&w, &htd.h_c, &h, &pw, m.power(mode)), gamma_ref)
        })
        .collect();
    let w = match cfg.context_phase {
        ContextPhase::Raw => w,
        ContextPhase::Reference => w.with_reference_phase(0),
    };
    Ok((build_context(&w)?, rewards))
}

/// Draws one deployment of `k_devices` MTDs and `horizon` intervals.
///
/// Each step uses its own RNG streams, so the result does not depend on the
/// number of worker threads.
pub fn generate_dataset(cfg: &ExperimentConfig, seeds: &SeedTree) -> Result<Dataset> {
    cfg.validate()?;
    let dep = deploy(cfg, cfg.k_devices, &mut seeds.stream(Domain::Placement, 0))?;
    let steps = (0..cfg.horizon as u64)
        .into_par_iter()
        .map(|t| interval_rewards(cfg, &dep, t, seeds))
        .collect::<Result<Vec<_>>>()?;
    let (contexts, rewards) = steps.into_iter().unzip();
    Dataset::new(contexts, rewards)
}
