//! Closed-form laws for OSO under i.i.d. Rayleigh fading.
//!
//! Setting: the desired term `x = P‖h_c‖²` is Gamma(M, P); each candidate's
//! post-beamformer interference is exponential with mean `P_m`, so the minimum over
//! `K` candidates is exponential with rate `λ = K / P_m`, and the denominator is
//! `w = σ² + min`. The SINR `x / w` then has density
//!
//! ```text
//! f(y) = λ e^{λσ²} / (P^M Γ(M)) · y^{M-1} / (λ + y/P)^{M+1} · Γ(M+1, (λ + y/P)σ²)
//! ```
//!
//! and CDF (outage probability)
//!
//! ```text
//! F(β) = 1 - Σ_{k=0}^{M-1} λ e^{λσ²} / (P^k k!) · β^k / (λ + β/P)^{k+1} · Γ(k+1, (λ + β/P)σ²)
//! ```
//!
//! Internally both are evaluated with `u = λP` and `c = σ²/P`, which keeps
//! `e^{λσ²} Γ(s, ·)` bounded for any physical scaling of the powers.

use rand::Rng;
use rayon::prelude::*;

use crate::airlink::{mrc, oracle_select, sinr_htd, MtdPower, PowerConfig};
use crate::chanmodel::sample_rayleigh;
use crate::error::{Error, Result};
use crate::rng::{Domain, SeedTree};

/// Parameters of the i.i.d. Rayleigh OSO analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisParams {
    pub m_antennas: u32,
    pub k_devices: u64,
    /// Scale of the desired-signal Gamma term (`P`).
    pub p_signal: f64,
    /// Mean post-beamformer interference power of one MTD (`P_m`).
    pub p_interf: f64,
    /// Noise power (`σ²`).
    pub noise: f64,
    /// Rate of the minimum interference, `K / P_m`.
    pub lambda_int: f64,
}

impl AnalysisParams {
    pub fn new(m_antennas: u32, k_devices: u64, p_signal: f64, p_interf: f64, noise: f64) -> Result<Self> {
        if m_antennas == 0 || k_devices == 0 {
            return Err(Error::domain("M and K must be >= 1"));
        }
        for (name, v) in [("P", p_signal), ("P_m", p_interf), ("sigma^2", noise)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            m_antennas,
            k_devices,
            p_signal,
            p_interf,
            noise,
            lambda_int: k_devices as f64 / p_interf,
        })
    }

    /// Parameterised directly by the minimum's rate `λ`; `P_m` becomes `K / λ`.
    pub fn with_lambda(m_antennas: u32, k_devices: u64, p_signal: f64, lambda: f64, noise: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain("lambda must be positive and finite"));
        }
        let mut p = Self::new(m_antennas, k_devices, p_signal, k_devices as f64 / lambda, noise)?;
        p.lambda_int = lambda;
        Ok(p)
    }

    /// Same parameters with a different number of candidates.
    pub fn with_k(&self, k_devices: u64) -> Result<Self> {
        Self::new(self.m_antennas, k_devices, self.p_signal, self.p_interf, self.noise)
    }

    /// Per-device exponential rate `1 / P_m`.
    pub fn per_device_rate(&self) -> f64 {
        1.0 / self.p_interf
    }

    fn u(&self) -> f64 {
        self.lambda_int * self.p_signal
    }

    fn c(&self) -> f64 {
        self.noise / self.p_signal
    }
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `e^{-(x - shift)} Σ_{j=0}^{n} x^j / j!`, computed term-wise in log space.
fn poisson_tail_sum(n: u32, x: f64, shift: f64) -> f64 {
    let base = shift - x;
    if x == 0.0 {
        return base.exp();
    }
    let lx = x.ln();
    (0..=n)
        .map(|j| (j as f64 * lx - ln_factorial(j) + base).exp())
        .sum()
}

/// Upper incomplete gamma `Γ(s, x) = (s-1)! e^{-x} Σ_{k<s} x^k / k!` for integer `s ≥ 1`.
pub fn upper_inc_gamma(s: u32, x: f64) -> Result<f64> {
    if s == 0 {
        return Err(Error::domain("upper_inc_gamma needs s >= 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("upper_inc_gamma needs x >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(ln_factorial(s - 1).exp() * poisson_tail_sum(s - 1, x, 0.0))
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) {
        return Err(Error::domain(format!("{name} must be >= 0, got {v}")));
    }
    Ok(())
}

/// CDF of the minimum of `k` i.i.d. exponentials with per-device rate `rate`:
/// `1 - exp(-rate · k · y)`.
pub fn min_interference_cdf(y: f64, rate: f64, k: u64) -> Result<f64> {
    check_nonneg("y", y)?;
    Ok(-(-(rate * k as f64 * y)).exp_m1())
}

/// Density of the minimum, `rate·k·exp(-rate·k·y)`.
pub fn min_interference_pdf(y: f64, rate: f64, k: u64) -> Result<f64> {
    check_nonneg("y", y)?;
    let lk = rate * k as f64;
    Ok(lk * (-lk * y).exp())
}

/// Mean and variance of the minimum: `1/(rate·k)` and `1/(rate·k)²`.
pub fn min_interference_moments(rate: f64, k: u64) -> (f64, f64) {
    let m = 1.0 / (rate * k as f64);
    (m, m * m)
}

/// SINR density under full-CSI OSO with MRC.
pub fn sinr_pdf(y: f64, params: &AnalysisParams) -> Result<f64> {
    check_nonneg("SINR", y)?;
    if y.is_infinite() {
        return Ok(0.0);
    }
    let m = params.m_antennas;
    let (u, c) = (params.u(), params.c());
    // u · M · y^{M-1} / (u+y)^{M+1} · e^{-yc} Σ_{j≤M} x^j/j!,   x = (u+y)c
    let ratio = if m == 1 {
        (-(2.0) * (u + y).ln()).exp()
    } else if y == 0.0 {
        0.0
    } else {
        ((m - 1) as f64 * y.ln() - (m + 1) as f64 * (u + y).ln()).exp()
    };
    let x = (u + y) * c;
    Ok(u * m as f64 * ratio * poisson_tail_sum(m, x, u * c))
}

/// Outage probability `Pr{SINR ≤ β}`.
pub fn outage_probability(beta: f64, params: &AnalysisParams) -> Result<f64> {
    check_nonneg("beta", beta)?;
    if beta.is_infinite() {
        return Ok(1.0);
    }
    let (u, c) = (params.u(), params.c());
    let x = (u + beta) * c;
    let mut survival = 0.0;
    for k in 0..params.m_antennas {
        // u β^k / (u+β)^{k+1} · Γ(k+1, x) e^{uc} / k!
        let lead = if k == 0 {
            u / (u + beta)
        } else if beta == 0.0 {
            0.0
        } else {
            u * (k as f64 * beta.ln() - (k + 1) as f64 * (u + beta).ln()).exp()
        };
        survival += lead * poisson_tail_sum(k, x, u * c);
    }
    Ok((1.0 - survival).clamp(0.0, 1.0))
}

const MC_BLOCK: usize = 1024;

/// Post-OSO SINR samples from i.i.d. Rayleigh snapshots: MRC on `h_c ~ CN(0, I_M)`,
/// `K` interferers `h_kb ~ CN(0, I_M)` at power `P_m`, full-CSI selection.
///
/// Trials are drawn in fixed-size blocks, each from its own substream, so the
/// output does not depend on the rayon thread count.
pub fn sample_oso_sinr(params: &AnalysisParams, trials: usize, seeds: &SeedTree) -> Result<Vec<f64>> {
    let m = params.m_antennas as usize;
    let k = params.k_devices as usize;
    let pw = PowerConfig::new(params.p_signal, MtdPower::Fixed(params.p_interf), params.noise, params.p_interf)?;
    let blocks = trials.div_ceil(MC_BLOCK);
    let per_block: Vec<Result<Vec<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeds.stream(Domain::Trial, b as u64);
            let n = MC_BLOCK.min(trials - b * MC_BLOCK);
            let powers = vec![params.p_interf; k];
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                out.push(oso_trial(m, &powers, &pw, &mut rng)?);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(trials);
    for block in per_block {
        all.extend(block?);
    }
    Ok(all)
}

fn oso_trial<R: Rng + ?Sized>(m: usize, powers: &[f64], pw: &PowerConfig, rng: &mut R) -> Result<f64> {
    let h_c = sample_rayleigh(m, rng);
    let w = mrc(&h_c)?;
    let h_kb: Vec<_> = (0..powers.len()).map(|_| sample_rayleigh(m, rng)).collect();
    let best = oracle_select(&w, &h_kb, powers)?;
    Ok(sinr_htd(&w, &h_c, &h_kb[best], pw, powers[best]))
}

/// Empirical outage: fraction of OSO snapshots with SINR ≤ `beta`.
pub fn outage_monte_carlo(params: &AnalysisParams, beta: f64, trials: usize, seeds: &SeedTree) -> Result<f64> {
    check_nonneg("beta", beta)?;
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let s = sample_oso_sinr(params, trials, seeds)?;
    Ok(empirical_cdf(&s, beta))
}

/// Fraction of `samples` that are `≤ x`.
pub fn empirical_cdf(samples: &[f64], x: f64) -> f64 {
    samples.iter().filter(|&&s| s <= x).count() as f64 / samples.len() as f64
}

/// Tabulated density or distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl DistributionCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), actual: values.len() });
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("curve grid must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain("curve values must be finite and non-negative"));
        }
        Ok(Self { grid, values })
    }

    pub fn tabulate<F: Fn(f64) -> Result<f64>>(grid: Vec<f64>, f: F) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    /// Rows as `(x, value)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.values.iter().copied())
    }
}

/// `n` points evenly spaced on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
