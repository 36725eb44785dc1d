//! Per-arm Bayesian linear regression with unknown noise variance.
//!
//! Model: `r = qᵀβ + ε`, `ε ~ N(0, σ²)`, prior `β | σ² ~ N(μ₀, σ² Λ₀⁻¹)`,
//! `σ² ~ IG(a₀, b₀)`. The arm keeps only sufficient statistics (`XᵀX`, `XᵀY`,
//! `YᵀY`, `t`) and derives the posterior from them on demand:
//!
//! ```text
//! Σ_t = (XᵀX + Λ₀)⁻¹
//! μ_t = Σ_t (Λ₀ μ₀ + XᵀY)
//! a_t = a₀ + t/2
//! b_t = b₀ + ½ (YᵀY + μ₀ᵀ Λ₀ μ₀ - μ_tᵀ Σ_t⁻¹ μ_t)
//! ```

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::context::ContextVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearArmPosterior {
    prior_precision: DMatrix<f64>,
    prior_mean: DVector<f64>,
    a0: f64,
    b0: f64,
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
    t: u64,
}

/// Posterior derived from an arm's sufficient statistics.
#[derive(Debug, Clone)]
pub struct PosteriorParams {
    /// `Σ_t⁻¹ = XᵀX + Λ₀`.
    pub precision: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub a: f64,
    pub b: f64,
    chol: Cholesky<f64, Dyn>,
}

impl PosteriorParams {
    /// `Σ_t`.
    pub fn covariance(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    /// One Thompson draw: `σ² ~ IG(a, b)`, then `β ~ N(μ, σ² Σ)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DVector<f64>> {
        let gamma = Gamma::new(self.a, 1.0 / self.b)
            .map_err(|e| Error::numerical(format!("inverse-gamma parameters: {e}")))?;
        let g: f64 = gamma.sample(rng);
        let sigma2 = if g > 0.0 { 1.0 / g } else { f64::MAX };
        let z = DVector::from_fn(self.mean.len(), |_, _| StandardNormal.sample(rng));
        // Σ = (L Lᵀ)⁻¹, so L⁻ᵀ z has covariance Σ.
        let lt = self.chol.l().transpose();
        let dir = lt
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::numerical("singular posterior factor"))?;
        Ok(&self.mean + dir * sigma2.sqrt())
    }
}

impl LinearArmPosterior {
    pub fn new(prior_precision: DMatrix<f64>, prior_mean: DVector<f64>, a0: f64, b0: f64) -> Result<Self> {
        let d = prior_mean.len();
        if d == 0 {
            return Err(Error::domain("posterior dimension must be >= 1"));
        }
        if prior_precision.nrows() != d || prior_precision.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: prior_precision.nrows() });
        }
        if (&prior_precision - prior_precision.transpose()).abs().max() > 1e-12 * prior_precision.abs().max() {
            return Err(Error::domain("prior precision must be symmetric"));
        }
        if Cholesky::new(prior_precision.clone()).is_none() {
            return Err(Error::domain("prior precision must be positive definite"));
        }
        if !(a0 > 0.0 && b0 > 0.0 && a0.is_finite() && b0.is_finite()) {
            return Err(Error::domain("inverse-gamma hyperparameters must be positive"));
        }
        Ok(Self {
            prior_precision,
            prior_mean,
            a0,
            b0,
            xtx: DMatrix::zeros(d, d),
            xty: DVector::zeros(d),
            yty: 0.0,
            t: 0,
        })
    }

    /// `Λ₀ = λ I`, `μ₀ = 0`.
    pub fn isotropic(dim: usize, lambda_prior: f64, a0: f64, b0: f64) -> Result<Self> {
        if !(lambda_prior > 0.0) {
            return Err(Error::domain("lambda_prior must be > 0"));
        }
        Self::new(DMatrix::identity(dim, dim) * lambda_prior, DVector::zeros(dim), a0, b0)
    }

    pub fn dim(&self) -> usize {
        self.prior_mean.len()
    }

    pub fn observations(&self) -> u64 {
        self.t
    }

    pub fn prior_precision(&self) -> &DMatrix<f64> {
        &self.prior_precision
    }

    pub fn prior_mean(&self) -> &DVector<f64> {
        &self.prior_mean
    }

    pub fn hyper(&self) -> (f64, f64) {
        (self.a0, self.b0)
    }

    /// `(XᵀX, XᵀY, YᵀY, t)`.
    pub fn sufficient_stats(&self) -> (&DMatrix<f64>, &DVector<f64>, f64, u64) {
        (&self.xtx, &self.xty, self.yty, self.t)
    }

    /// Rebuilds an arm from stored statistics (used by snapshot restore).
    pub(crate) fn with_stats(mut self, xtx: DMatrix<f64>, xty: DVector<f64>, yty: f64, t: u64) -> Result<Self> {
        let d = self.dim();
        if xtx.nrows() != d || xtx.ncols() != d || xty.len() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: xty.len() });
        }
        self.xtx = xtx;
        self.xty = xty;
        self.yty = yty;
        self.t = t;
        Ok(self)
    }

    pub(crate) fn observe_features(&mut self, q: &[f64], r: f64) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: q.len() });
        }
        if !r.is_finite() || q.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("observation must be finite"));
        }
        let d = self.dim();
        for i in 0..d {
            self.xty[i] += q[i] * r;
            for j in 0..d {
                self.xtx[(i, j)] += q[i] * q[j];
            }
        }
        self.yty += r * r;
        self.t += 1;
        Ok(())
    }

    /// Posterior parameters from a fresh Cholesky solve of `XᵀX + Λ₀`.
    pub fn posterior(&self) -> Result<PosteriorParams> {
        let precision = &self.xtx + &self.prior_precision;
        let chol = Cholesky::new(precision.clone())
            .ok_or_else(|| Error::numerical("posterior precision is not positive definite"))?;
        let prior_term = &self.prior_precision * &self.prior_mean;
        let mean = chol.solve(&(prior_term.clone() + &self.xty));
        let a = self.a0 + self.t as f64 / 2.0;
        let quad_prior = self.prior_mean.dot(&prior_term);
        let quad_post = mean.dot(&(&precision * &mean));
        let b = self.b0 + 0.5 * (self.yty + quad_prior - quad_post);
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::numerical(format!("posterior scale b_t = {b} is not positive")));
        }
        Ok(PosteriorParams { precision, mean, a, b, chol })
    }
}

/// Draws a weight vector from the arm's posterior.
pub fn ts_sample<R: Rng + ?Sized>(arm: &LinearArmPosterior, rng: &mut R) -> Result<DVector<f64>> {
    arm.posterior()?.sample(rng)
}

/// Adds one `(q, r)` observation to the arm's sufficient statistics.
pub fn ts_update(arm: &mut LinearArmPosterior, q: &ContextVector, r: f64) -> Result<()> {
    arm.observe_features(q.features(), r)
}
