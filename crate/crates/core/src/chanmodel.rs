//! One-ring spatial correlation and channel synthesis.
//!
//! A transmitter surrounded by a ring of scatterers is seen from the base station
//! within a narrow window of arrival angles `[θ - Δ, θ + Δ]`. Averaging the
//! planar-wave phase differences across the array over that window gives the
//! spatial covariance `R`; channels are then drawn as `h = U Λ^{1/2} w` from the
//! non-negligible eigenpairs of `R`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// Gauss–Legendre nodes used per covariance entry.
pub const COVARIANCE_NODES: usize = 129;

/// Eigenvalues below this fraction of the largest are dropped before sampling.
pub const EIGEN_CUTOFF: f64 = 1e-10;

fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(COVARIANCE_NODES))
}

/// Antenna positions (meters, 2-D) and carrier wavelength (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<[f64; 2]>,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<[f64; 2]>, wavelength: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::domain("array needs at least one antenna"));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::domain(format!("wavelength must be > 0, got {wavelength}")));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::domain("antenna positions must be finite"));
        }
        for (i, a) in positions.iter().enumerate() {
            for b in &positions[i + 1..] {
                if a == b {
                    return Err(Error::domain("antenna positions must be pairwise distinct"));
                }
            }
        }
        Ok(Self { positions, wavelength })
    }

    /// Antennas on the y-axis at the given ordinates.
    pub fn on_y_axis(ys: &[f64], wavelength: f64) -> Result<Self> {
        Self::new(ys.iter().map(|&y| [0.0, y]).collect(), wavelength)
    }

    /// Uniform line along the y-axis with element `m` at `y = -m * spacing`.
    ///
    /// The negative orientation makes the general planar-wave phase reduce to
    /// `exp(-j 2π (d/λ) (m - p) sin α)`, the usual ULA convention.
    pub fn ula(m: usize, spacing_over_wavelength: f64, wavelength: f64) -> Result<Self> {
        if spacing_over_wavelength <= 0.0 {
            return Err(Error::domain("ULA spacing must be > 0"));
        }
        let d = spacing_over_wavelength * wavelength;
        let ys: Vec<f64> = (0..m).map(|i| -(i as f64) * d).collect();
        Self::on_y_axis(&ys, wavelength)
    }

    pub fn num_antennas(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
}

/// Angular window of a one-ring link: nominal AoA `θ`, half-width `Δ`, mean gain `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingScatterParams {
    pub nominal_aoa: f64,
    pub angular_spread: f64,
    pub mean_gain: f64,
}

impl RingScatterParams {
    pub fn new(nominal_aoa: f64, angular_spread: f64, mean_gain: f64) -> Result<Self> {
        if !(-PI..PI).contains(&nominal_aoa) {
            return Err(Error::domain(format!("nominal AoA {nominal_aoa} outside [-pi, pi)")));
        }
        if !(angular_spread > 0.0 && angular_spread <= PI) {
            return Err(Error::domain(format!(
                "angular spread {angular_spread} outside (0, pi]"
            )));
        }
        if !(mean_gain > 0.0 && mean_gain.is_finite()) {
            return Err(Error::domain(format!("mean gain must be > 0, got {mean_gain}")));
        }
        Ok(Self { nominal_aoa, angular_spread, mean_gain })
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// `PL_dB(d) = intercept + slope * log10(d_km)` plus zero-mean Gaussian shadowing in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScaleFading {
    pub intercept_db: f64,
    pub slope_db: f64,
    pub shadowing_sigma_db: f64,
}

impl LargeScaleFading {
    pub fn new(intercept_db: f64, slope_db: f64, shadowing_sigma_db: f64) -> Result<Self> {
        if !(slope_db > 0.0) {
            return Err(Error::domain("path-loss slope must be > 0"));
        }
        if !(shadowing_sigma_db >= 0.0) {
            return Err(Error::domain("shadowing sigma must be >= 0"));
        }
        Ok(Self { intercept_db, slope_db, shadowing_sigma_db })
    }

    /// `128.1 + 36.7 log10(d[km])` with 10 dB shadowing.
    pub fn table_default() -> Self {
        Self { intercept_db: 128.1, slope_db: 36.7, shadowing_sigma_db: 10.0 }
    }

    pub fn pathloss_db(&self, d_km: f64) -> Result<f64> {
        if !(d_km > 0.0) {
            return Err(Error::domain(format!("distance must be > 0 km, got {d_km}")));
        }
        Ok(self.intercept_db + self.slope_db * d_km.log10())
    }

    /// Deterministic part of the gain, `10^(-PL_dB / 10)`.
    pub fn mean_gain(&self, d_km: f64) -> Result<f64> {
        Ok(10f64.powf(-self.pathloss_db(d_km)? / 10.0))
    }
}

/// Linear large-scale gain `10^(-(PL_dB(d) + X_σ)/10)` with `X_σ ~ N(0, σ²)`.
pub fn large_scale_gain<R: Rng + ?Sized>(
    d_km: f64,
    fading: &LargeScaleFading,
    rng: &mut R,
) -> Result<f64> {
    let pl = fading.pathloss_db(d_km)?;
    let shadow = if fading.shadowing_sigma_db > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        fading.shadowing_sigma_db * z
    } else {
        0.0
    };
    Ok(10f64.powf(-(pl + shadow) / 10.0))
}

/// Hermitian positive semi-definite spatial covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<Complex64>);

impl CovarianceMatrix {
    /// Wraps a matrix after checking it is square, Hermitian and PSD within `1e-10`.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::domain("covariance must be a non-empty square matrix"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::numerical("covariance has non-finite entries"));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-10 * scale {
                    return Err(Error::domain("covariance is not Hermitian"));
                }
            }
        }
        let eig = m.clone().symmetric_eigen();
        let max = eig.eigenvalues.max();
        if eig.eigenvalues.iter().any(|&l| l < -1e-10 * max.abs().max(scale)) {
            return Err(Error::domain("covariance is not positive semi-definite"));
        }
        Ok(Self(m))
    }

    pub fn identity(m: usize) -> Self {
        Self(DMatrix::identity(m, m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, m: usize, p: usize) -> Complex64 {
        self.0[(m, p)]
    }

    /// `c * R` for a positive scalar `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    /// Column-major `re,im` pairs.
    pub fn to_re_im(&self) -> Vec<(f64, f64)> {
        self.0.iter().map(|z| (z.re, z.im)).collect()
    }
}

/// A length-M complex channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector(DVector<Complex64>);

impl ChannelVector {
    pub fn new(v: DVector<Complex64>) -> Result<Self> {
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::numerical("channel has non-finite entries"));
        }
        Ok(Self(v))
    }

    pub fn from_slice(v: &[Complex64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(self.0.map(|z| z * c))
    }
}

impl std::ops::Index<usize> for ChannelVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// One-ring covariance `[R]_{m,p} = (a/2Δ) ∫_{-Δ}^{Δ} exp(-j k(α+θ)ᵀ(u_m - u_p)) dα`
/// with `k(α) = -(2π/λ)(cos α, sin α)`, using the default 129-node rule.
pub fn covariance(geom: &ArrayGeometry, ring: &RingScatterParams) -> Result<CovarianceMatrix> {
    covariance_with_rule(geom, ring, default_rule())
}

/// [`covariance`] with an explicit quadrature rule.
pub fn covariance_with_rule(
    geom: &ArrayGeometry,
    ring: &RingScatterParams,
    rule: &GaussLegendre,
) -> Result<CovarianceMatrix> {
    let n = geom.num_antennas();
    let wavenumber = 2.0 * PI / geom.wavelength();
    // Arrival directions are shared by every entry.
    let dirs: Vec<(f64, f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            let (s, c) = (ring.angular_spread * x + ring.nominal_aoa).sin_cos();
            (c, s, w)
        })
        .collect();
    let pos = geom.positions();
    ring_integral(n, ring.mean_gain, |m, p| {
        let dx = pos[m][0] - pos[p][0];
        let dy = pos[m][1] - pos[p][1];
        let mut acc = Complex64::new(0.0, 0.0);
        for &(c, s, w) in &dirs {
            // -j k(α)ᵀ Δu = +j (2π/λ)(cos α Δx + sin α Δy)
            acc += Complex64::from_polar(w, wavenumber * (c * dx + s * dy));
        }
        acc
    })
}

/// ULA specialization `[R]_{m,p} = (a/2Δ) ∫ exp(-j 2π (d/λ)(m - p) sin(α + θ)) dα`.
pub fn covariance_ula(
    m: usize,
    spacing_over_wavelength: f64,
    ring: &RingScatterParams,
) -> Result<CovarianceMatrix> {
    if m == 0 {
        return Err(Error::domain("ULA needs at least one antenna"));
    }
    if !(spacing_over_wavelength > 0.0) {
        return Err(Error::domain("ULA spacing must be > 0"));
    }
    let rule = default_rule();
    let sines: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| ((ring.angular_spread * x + ring.nominal_aoa).sin(), w))
        .collect();
    ring_integral(m, ring.mean_gain, |i, j| {
        let k = -2.0 * PI * spacing_over_wavelength * (i as f64 - j as f64);
        sines
            .iter()
            .map(|&(s, w)| Complex64::from_polar(w, k * s))
            .sum()
    })
}

/// Fills the upper triangle from `weighted_sum(m, p) = Σ w_i exp(...)` (integral over the
/// unit interval times two), mirrors it, and pins the diagonal to `mean_gain`.
fn ring_integral<F>(n: usize, mean_gain: f64, weighted_sum: F) -> Result<CovarianceMatrix>
where
    F: Fn(usize, usize) -> Complex64,
{
    let mut r = DMatrix::<Complex64>::zeros(n, n);
    for m in 0..n {
        r[(m, m)] = Complex64::new(mean_gain, 0.0);
        for p in m + 1..n {
            // (a / 2Δ) · Δ · Σ w_i f(Δ x_i) = (a / 2) Σ w_i f
            let v = weighted_sum(m, p) * (0.5 * mean_gain);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::numerical("non-finite covariance quadrature"));
            }
            r[(m, p)] = v;
            r[(p, m)] = v.conj();
        }
    }
    Ok(CovarianceMatrix(r))
}

/// Circularly-symmetric standard complex Gaussian, `CN(0, 1)`.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Precomputed colouring factor `U Λ^{1/2}` for repeated draws from one covariance.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    factor: DMatrix<Complex64>,
}

impl ChannelSampler {
    pub fn new(r: &CovarianceMatrix) -> Result<Self> {
        let eig = r.matrix().clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(Error::numerical("eigendecomposition produced non-finite values"));
        }
        let max = eig.eigenvalues.max();
        if !(max > 0.0) {
            return Err(Error::numerical("covariance has no positive eigenvalue"));
        }
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] > EIGEN_CUTOFF * max)
            .collect();
        let n = r.dim();
        let mut factor = DMatrix::<Complex64>::zeros(n, keep.len());
        for (col, &i) in keep.iter().enumerate() {
            let s = eig.eigenvalues[i].sqrt();
            for row in 0..n {
                factor[(row, col)] = eig.eigenvectors[(row, i)] * s;
            }
        }
        Ok(Self { factor })
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelVector {
        let w = DVector::from_fn(self.rank(), |_, _| standard_complex_normal(rng));
        ChannelVector(&self.factor * w)
    }

    /// Draw scaled by `sqrt(gain)`, i.e. from covariance `gain * R`.
    pub fn sample_scaled<R: Rng + ?Sized>(&self, gain: f64, rng: &mut R) -> ChannelVector {
        let mut h = self.sample(rng);
        h.0 *= Complex64::new(gain.sqrt(), 0.0);
        h
    }
}

/// `h = U Λ^{1/2} w` with `w ~ CN(0, I_r)` over the retained eigenpairs of `R`.
pub fn sample_channel<R: Rng + ?Sized>(r: &CovarianceMatrix, rng: &mut R) -> Result<ChannelVector> {
    Ok(ChannelSampler::new(r)?.sample(rng))
}

/// i.i.d. `CN(0, 1)` entries.
pub fn sample_rayleigh<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ChannelVector {
    ChannelVector(DVector::from_fn(m, |_, _| standard_complex_normal(rng)))
}
