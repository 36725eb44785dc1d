//! Monte Carlo sweeps over the number of candidate MTDs.

use rayon::prelude::*;

use super::config::{ExperimentConfig, PowerMode};
use super::csvio::{fmt_f64, Table};
use super::scenario::{deploy, draw_htd};
use crate::airlink::{mrc, residual_interference, sinr_htd, MtdPower, PowerConfig};
use crate::closedform::{empirical_cdf, outage_probability, sample_oso_sinr};
use crate::error::{Error, Result};
use crate::rng::{Domain, SeedTree};
use crate::units::{db_to_lin, lin_to_db};

pub const SINR_SCHEMA: &str = "oso-sinr-vs-k/1";
pub const OUTAGE_SCHEMA: &str = "oso-outage-vs-k/1";

/// MTD transmit-power rule for a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPower {
    /// Same power for every MTD, watts; zero is allowed.
    Fixed(f64),
    /// Distance-based power control towards the aggregator.
    PowerCtl,
}

impl SweepPower {
    pub fn from_config(cfg: &ExperimentConfig, mode: PowerMode) -> Self {
        match (mode, cfg.mtd_power(mode)) {
            (PowerMode::Fixed, MtdPower::Fixed(p)) => Self::Fixed(p),
            _ => Self::PowerCtl,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Fixed(_) => "fixed",
            Self::PowerCtl => "powerctl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrPoint {
    pub mode: &'static str,
    pub k: usize,
    pub mean_db: f64,
    /// Standard error of `mean_db`.
    pub stderr_db: f64,
    pub trials: usize,
}

fn sorted_unique(k_list: &[usize]) -> Result<Vec<usize>> {
    let mut ks = k_list.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() || ks[0] == 0 {
        return Err(Error::domain("k_list must hold positive counts"));
    }
    Ok(ks)
}

/// Mean post-selection HTD SINR (dB) against `K`.
///
/// `trials` intervals are split over `cfg.drops` MTD placements. Each placement
/// holds `max(k_list)` MTDs and every `K` selects among the first `K` of them, so
/// the curves use common random numbers and each trial is non-decreasing in `K`.
pub fn mc_sinr_vs_k(
    cfg: &ExperimentConfig,
    k_list: &[usize],
    modes: &[SweepPower],
    trials: usize,
    seeds: &SeedTree,
) -> Result<Vec<SinrPoint>> {
    cfg.validate()?;
    let ks = sorted_unique(k_list)?;
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let kmax = *ks.last().unwrap();
    let drops = cfg.drops.min(trials);
    let n0 = cfg.noise_power();
    // sums[mode][k] = (Σ dB, Σ dB²)
    type Sums = Vec<Vec<(f64, f64)>>;
    let per_drop: Vec<Result<Sums>> = (0..drops)
        .into_par_iter()
        .map(|d| {
            let dep = deploy(cfg, kmax, &mut seeds.stream(Domain::Drop, d as u64))?;
            let powers: Vec<Vec<f64>> = modes
                .iter()
                .map(|m| match m {
                    SweepPower::Fixed(p) => vec![*p; kmax],
                    SweepPower::PowerCtl => dep.powers(PowerMode::PowerCtl),
                })
                .collect();
            let mut sums = vec![vec![(0.0, 0.0); ks.len()]; modes.len()];
            let n = trials / drops + usize::from(d < trials % drops);
            for i in 0..n {
                let htd = draw_htd(cfg, &dep, &mut seeds.stream2(Domain::Htd, d as u64, i as u64))?;
                let w = mrc(&htd.h_c)?;
                let pw = PowerConfig::new(htd.p_c, MtdPower::Fixed(1.0), n0, 1.0)?;
                let mut rng = seeds.stream2(Domain::Mtd, d as u64, i as u64);
                let h: Vec<_> = dep.mtds.iter().map(|m| m.draw_bs_channel(&mut rng)).collect();
                let res: Vec<f64> = h.iter().map(|h| residual_interference(&w, h)).collect();
                for (mi, p) in powers.iter().enumerate() {
                    let mut best = 0;
                    let mut next = 0;
                    for (ki, &k) in ks.iter().enumerate() {
                        while next < k {
                            if p[next] * res[next] < p[best] * res[best] {
                                best = next;
                            }
                            next += 1;
                        }
                        let db = lin_to_db(sinr_htd(&w, &htd.h_c, &h[best], &pw, p[best]));
                        sums[mi][ki].0 += db;
                        sums[mi][ki].1 += db * db;
                    }
                }
            }
            Ok(sums)
        })
        .collect();
    let mut total = vec![vec![(0.0, 0.0); ks.len()]; modes.len()];
    for sums in per_drop {
        for (t, s) in total.iter_mut().zip(sums?) {
            for (a, b) in t.iter_mut().zip(s) {
                a.0 += b.0;
                a.1 += b.1;
            }
        }
    }
    let n = trials as f64;
    let mut out = Vec::new();
    for (mi, m) in modes.iter().enumerate() {
        for (ki, &k) in ks.iter().enumerate() {
            let (s, s2) = total[mi][ki];
            let mean = s / n;
            let var = if trials > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
            out.push(SinrPoint { mode: m.label(), k, mean_db: mean, stderr_db: (var / n).sqrt(), trials });
        }
    }
    Ok(out)
}

pub fn sinr_table(points: &[SinrPoint]) -> Table {
    let mut t = Table::new(&["mode", "k", "mean_sinr_db", "stderr_db", "trials"]);
    for p in points {
        t.rows.push(vec![
            p.mode.to_string(),
            p.k.to_string(),
            fmt_f64(p.mean_db),
            fmt_f64(p.stderr_db),
            p.trials.to_string(),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutagePoint {
    pub k: usize,
    pub threshold_db: f64,
    pub empirical: f64,
    pub closed_form: f64,
    /// Binomial standard error of `empirical`.
    pub stderr: f64,
}

/// Outage of the i.i.d. Rayleigh model against `K`: Monte Carlo next to the closed form,
/// with powers and noise taken from [`ExperimentConfig::analysis_params`].
pub fn mc_outage_vs_k(
    cfg: &ExperimentConfig,
    k_list: &[usize],
    thresholds_db: &[f64],
    trials: usize,
    seeds: &SeedTree,
) -> Result<Vec<OutagePoint>> {
    cfg.validate()?;
    let ks = sorted_unique(k_list)?;
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let mut out = Vec::new();
    for &k in &ks {
        let params = cfg.analysis_params(k)?;
        let samples = sample_oso_sinr(&params, trials, &seeds.child(Domain::Trial, k as u64))?;
        for &th in thresholds_db {
            let beta = db_to_lin(th);
            let p = empirical_cdf(&samples, beta);
            out.push(OutagePoint {
                k,
                threshold_db: th,
                empirical: p,
                closed_form: outage_probability(beta, &params)?,
                stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            });
        }
    }
    Ok(out)
}

pub fn outage_table(points: &[OutagePoint]) -> Table {
    let mut t = Table::new(&["k", "threshold_db", "empirical", "closed_form", "stderr"]);
    for p in points {
        t.rows.push(vec![
            p.k.to_string(),
            fmt_f64(p.threshold_db),
            fmt_f64(p.empirical),
            fmt_f64(p.closed_form),
            fmt_f64(p.stderr),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::parse("drops = 4").unwrap()
    }

    #[test]
    fn sinr_curve_is_monotone_and_zero_power_is_flat() {
        let c = cfg();
        let modes = [SweepPower::Fixed(0.0), SweepPower::from_config(&c, PowerMode::Fixed), SweepPower::PowerCtl];
        let pts = mc_sinr_vs_k(&c, &[1, 4, 16, 64], &modes, 400, &SeedTree::new(8)).unwrap();
        assert_eq!(pts.len(), 12);
        for p in &pts[..4] {
            assert!((p.mean_db - c.htd_target_sinr_db).abs() < 1e-9);
        }
        for w in pts[4..8].windows(2).chain(pts[8..].windows(2)) {
            assert!(w[1].mean_db >= w[0].mean_db - 1e-12);
            assert!(w[1].mean_db <= c.htd_target_sinr_db + 1e-9);
        }
    }

    #[test]
    fn outage_rows_cover_grid() {
        let pts = mc_outage_vs_k(&cfg(), &[10, 5], &[0.0, 10.0], 2000, &SeedTree::new(9)).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].k, 5);
        for p in &pts {
            assert!((p.empirical - p.closed_form).abs() < 5.0 * p.stderr.max(0.01));
        }
    }
}
