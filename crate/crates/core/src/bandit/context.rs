use crate::airlink::Beamformer;
use crate::error::{Error, Result};

/// Real feature vector `[Re(w); Im(w)] / ‖w‖²` of length `2M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextVector(Vec<f64>);

impl ContextVector {
    pub fn new(features: Vec<f64>) -> Result<Self> {
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("context features must be finite"));
        }
        Ok(Self(features))
    }

    pub fn features(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

pub fn build_context(w: &Beamformer) -> Result<ContextVector> {
    let n2 = w.norm_sqr();
    if !(n2 > 0.0) {
        return Err(Error::degenerate("context of a zero beamformer"));
    }
    let weights = w.weights();
    let features = weights
        .iter()
        .map(|z| z.re / n2)
        .chain(weights.iter().map(|z| z.im / n2))
        .collect();
    ContextVector::new(features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airlink::mrc;
    use crate::chanmodel::sample_rayleigh;
    use crate::rng::{Domain, SeedTree};
    use num_complex::Complex64;

    #[test]
    fn stacks_real_then_imaginary() {
        let z = Complex64::new(0.0, 0.0);
        let w = Beamformer::from_slice(&[Complex64::new(1.0, 0.0), z, z, z]).unwrap();
        assert_eq!(build_context(&w).unwrap().features(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let w = Beamformer::from_slice(&[Complex64::new(0.0, 1.0), z, z, z]).unwrap();
        assert_eq!(build_context(&w).unwrap().features(), &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let zero = Beamformer::from_slice(&[z, z]).unwrap();
        assert!(build_context(&zero).is_err());
    }

    #[test]
    fn unit_beamformer_gives_unit_context() {
        let mut rng = SeedTree::new(9).stream(Domain::Diagnostics, 0);
        for _ in 0..50 {
            let w = mrc(&sample_rayleigh(4, &mut rng)).unwrap();
            assert!((build_context(&w).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scales_by_inverse_squared_norm() {
        let w = Beamformer::from_slice(&[Complex64::new(2.0, 0.0), Complex64::new(0.0, 2.0)]).unwrap();
        assert_eq!(build_context(&w).unwrap().features(), &[0.25, 0.0, 0.0, 0.25]);
    }
}
