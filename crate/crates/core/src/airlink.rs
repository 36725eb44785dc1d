//! Beamforming, SINR and full-CSI scheduling.
//!
//! Conventions: a beamformer `w` acts on a channel as the plain (non-conjugating)
//! product `w·h = Σ w_m h_m`, so MRC is `w = conj(h_c) / ‖h_c‖`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::chanmodel::{ChannelVector, LargeScaleFading};
use crate::error::{Error, Result};

/// Receive combining weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer(DVector<Complex64>);

impl Beamformer {
    pub fn new(weights: DVector<Complex64>) -> Result<Self> {
        if weights.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::numerical("beamformer has non-finite weights"));
        }
        Ok(Self(weights))
    }

    pub fn from_slice(weights: &[Complex64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(weights))
    }

    pub fn weights(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `w·h`.
    pub fn apply(&self, h: &ChannelVector) -> Complex64 {
        self.0.iter().zip(h.iter()).map(|(w, h)| w * h).sum()
    }

    /// The same beamformer rotated by a unit-modulus factor so that weight `index`
    /// is real and non-negative. SINRs and residual interference are unchanged.
    pub fn with_reference_phase(&self, index: usize) -> Self {
        let z = self.0[index];
        if z.norm() == 0.0 {
            return self.clone();
        }
        let rot = z.conj() / z.norm();
        let mut v = self.0.map(|w| w * rot);
        v[index] = Complex64::new(v[index].re.max(0.0), 0.0);
        Self(v)
    }
}

/// Maximal ratio combining, `w = conj(h_c) / ‖h_c‖`.
pub fn mrc(h_c: &ChannelVector) -> Result<Beamformer> {
    let n = h_c.norm();
    if !(n > 0.0) {
        return Err(Error::degenerate("MRC of a zero channel"));
    }
    Beamformer::new(h_c.as_vector().map(|z| z.conj() / n))
}

/// Transmit power rule for the scheduled MTD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MtdPower {
    /// Constant transmit power in watts.
    Fixed(f64),
    /// Distance-based power control towards a linear SNR target at the aggregator.
    TargetSnr(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    /// HTD transmit power, watts.
    pub p_c: f64,
    pub p_k_mode: MtdPower,
    /// Noise power per resource block, watts.
    pub n0: f64,
    /// Cap applied by power control, watts.
    pub max_p_k: f64,
    /// The aggregator cancels the HTD signal before decoding the MTD.
    pub sic: bool,
}

impl PowerConfig {
    pub fn new(p_c: f64, p_k_mode: MtdPower, n0: f64, max_p_k: f64) -> Result<Self> {
        let mode_ok = match p_k_mode {
            MtdPower::Fixed(p) => p > 0.0 && p.is_finite(),
            MtdPower::TargetSnr(g) => g > 0.0 && g.is_finite(),
        };
        if !(p_c > 0.0 && n0 > 0.0 && max_p_k > 0.0 && mode_ok)
            || !(p_c.is_finite() && n0.is_finite() && max_p_k.is_finite())
        {
            return Err(Error::domain("powers must be positive and finite"));
        }
        Ok(Self { p_c, p_k_mode, n0, max_p_k, sic: true })
    }

    pub fn with_htd_power(mut self, p_c: f64) -> Self {
        self.p_c = p_c;
        self
    }
}

/// HTD SINR at the BS, `P_c |w·h_c|² / (p_k |w·h_kb|² + ‖w‖² N_0)`.
pub fn sinr_htd(
    w: &Beamformer,
    h_c: &ChannelVector,
    h_kb: &ChannelVector,
    pw: &PowerConfig,
    p_k: f64,
) -> f64 {
    let signal = pw.p_c * w.apply(h_c).norm_sqr();
    signal / (p_k * residual_interference(w, h_kb) + w.norm_sqr() * pw.n0)
}

/// MTD SINR at the aggregator, `p_k |h_k|² / (P_c |h_cm|² + N_0)`; with SIC enabled
/// the HTD term is removed.
pub fn sinr_mta(h_k: Complex64, h_cm: Complex64, pw: &PowerConfig, p_k: f64) -> f64 {
    let htd = if pw.sic { 0.0 } else { pw.p_c * h_cm.norm_sqr() };
    p_k * h_k.norm_sqr() / (htd + pw.n0)
}

/// Interference power surviving the beamformer, `|w·h_kb|²`.
pub fn residual_interference(w: &Beamformer, h_kb: &ChannelVector) -> f64 {
    w.apply(h_kb).norm_sqr()
}

/// Full-CSI OSO choice: the MTD minimising `p_k |w·h_kb|²`, lowest index on ties.
pub fn oracle_select(w: &Beamformer, h_kb: &[ChannelVector], p_k: &[f64]) -> Result<usize> {
    if h_kb.is_empty() {
        return Err(Error::domain("oracle selection needs at least one MTD"));
    }
    if h_kb.len() != p_k.len() {
        return Err(Error::DimensionMismatch { expected: h_kb.len(), actual: p_k.len() });
    }
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for (k, (h, &p)) in h_kb.iter().zip(p_k).enumerate() {
        let v = p * residual_interference(w, h);
        if v < best_v {
            best = k;
            best_v = v;
        }
    }
    Ok(best)
}

/// MTD transmit power. In target-SNR mode this is
/// `min(max_p_k, γ_target N_0 / g(d))` with `g` the deterministic path-loss gain
/// to the aggregator; fixed mode returns the configured power.
pub fn power_control(d_to_mta_km: f64, fading: &LargeScaleFading, pw: &PowerConfig) -> Result<f64> {
    if !(d_to_mta_km > 0.0) {
        return Err(Error::domain(format!("distance must be > 0 km, got {d_to_mta_km}")));
    }
    match pw.p_k_mode {
        MtdPower::Fixed(p) => Ok(p),
        MtdPower::TargetSnr(target) => {
            let gain = fading.mean_gain(d_to_mta_km)?;
            Ok((target * pw.n0 / gain).min(pw.max_p_k))
        }
    }
}

/// `log2(1 + γ) / log2(1 + γ_ref)` clipped to `[0, 1]`.
pub fn normalized_rate(sinr: f64, sinr_ref: f64) -> f64 {
    if !(sinr_ref > 0.0) {
        return 0.0;
    }
    let r = (sinr.max(0.0)).ln_1p() / sinr_ref.ln_1p();
    r.clamp(0.0, 1.0)
}

/// Node layout for one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePlacement {
    pub bs_position: [f64; 2],
    pub mta_position: [f64; 2],
    pub htd_position: [f64; 2],
    pub mtd_positions: Vec<[f64; 2]>,
    pub cell_radius: f64,
    pub mta_radius: f64,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

impl NodePlacement {
    pub fn validate(&self) -> Result<()> {
        if self.mtd_positions.is_empty() {
            return Err(Error::domain("placement needs at least one MTD"));
        }
        let in_range = |d: f64, r: f64| d > 0.0 && d <= r * (1.0 + 1e-12);
        if !in_range(self.htd_distance(), self.cell_radius) {
            return Err(Error::domain("HTD outside the cell"));
        }
        if !in_range(dist(self.bs_position, self.mta_position), self.cell_radius) {
            return Err(Error::domain("MTA outside the cell"));
        }
        for (k, &p) in self.mtd_positions.iter().enumerate() {
            if !in_range(dist(p, self.mta_position), self.mta_radius) {
                return Err(Error::domain(format!("MTD {k} outside the MTA radius")));
            }
            if !(dist(p, self.bs_position) > 0.0) {
                return Err(Error::domain(format!("MTD {k} co-located with the BS")));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.mtd_positions.len()
    }

    pub fn htd_distance(&self) -> f64 {
        dist(self.htd_position, self.bs_position)
    }

    pub fn mtd_bs_distance(&self, k: usize) -> f64 {
        dist(self.mtd_positions[k], self.bs_position)
    }

    pub fn mtd_mta_distance(&self, k: usize) -> f64 {
        dist(self.mtd_positions[k], self.mta_position)
    }

    /// Angle of arrival of MTD `k` at the BS, measured from the x-axis.
    pub fn mtd_aoa(&self, k: usize) -> f64 {
        let p = self.mtd_positions[k];
        (p[1] - self.bs_position[1]).atan2(p[0] - self.bs_position[0])
    }
}

/// Channels of one coherence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotChannels {
    pub h_c: ChannelVector,
    pub h_kb: Vec<ChannelVector>,
    pub h_k: Vec<Complex64>,
    pub h_cm: Complex64,
}

impl SnapshotChannels {
    pub fn new(
        h_c: ChannelVector,
        h_kb: Vec<ChannelVector>,
        h_k: Vec<Complex64>,
        h_cm: Complex64,
    ) -> Result<Self> {
        let m = h_c.len();
        if let Some(bad) = h_kb.iter().find(|h| h.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, actual: bad.len() });
        }
        if h_k.len() != h_kb.len() {
            return Err(Error::DimensionMismatch { expected: h_kb.len(), actual: h_k.len() });
        }
        Ok(Self { h_c, h_kb, h_k, h_cm })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chanmodel::sample_rayleigh;
    use crate::rng::{Domain, SeedTree};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ch(v: &[Complex64]) -> ChannelVector {
        ChannelVector::from_slice(v).unwrap()
    }

    fn unit_power(n0: f64) -> PowerConfig {
        PowerConfig::new(1.0, MtdPower::Fixed(1.0), n0, 1.0).unwrap()
    }

    #[test]
    fn mrc_examples() {
        let w = mrc(&ch(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(w.weights().as_slice(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let w = mrc(&ch(&[c(0.0, 1.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(w.weights().as_slice(), &[c(0.0, -1.0), c(0.0, 0.0)]);
        assert!(matches!(mrc(&ch(&[c(0.0, 0.0); 4])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn mrc_achieves_cauchy_schwarz() {
        let mut rng = SeedTree::new(3).stream(Domain::Diagnostics, 0);
        for _ in 0..100 {
            let h = sample_rayleigh(6, &mut rng);
            let w = mrc(&h).unwrap();
            assert!((w.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((w.apply(&h).norm() - h.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn sinr_htd_hand_example() {
        // h_c = (1,1), h_kb = (1,-1): MRC puts the interferer in the null.
        let h_c = ch(&[c(1.0, 0.0), c(1.0, 0.0)]);
        let h_kb = ch(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let w = mrc(&h_c).unwrap();
        assert!(w.apply(&h_kb).norm() < 1e-15);
        let g = sinr_htd(&w, &h_c, &h_kb, &unit_power(0.1), 1.0);
        assert!((g - 20.0).abs() < 1e-12);
    }

    #[test]
    fn sinr_htd_zero_interference_cases() {
        let mut rng = SeedTree::new(4).stream(Domain::Diagnostics, 0);
        let h_c = sample_rayleigh(4, &mut rng);
        let h_kb = sample_rayleigh(4, &mut rng);
        let w = mrc(&h_c).unwrap();
        let pw = unit_power(0.3);
        let clean = pw.p_c * w.apply(&h_c).norm_sqr() / pw.n0;
        assert!((sinr_htd(&w, &h_c, &h_kb, &pw, 0.0) - clean).abs() < 1e-12 * clean);
        // Orthogonal interferer: any vector v with w·v = 0.
        let wv = w.weights();
        let orth = ch(&[wv[1], -wv[0], c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(residual_interference(&w, &orth) < 1e-28);
        let g = sinr_htd(&w, &h_c, &orth, &pw, 5.0);
        assert!((g - clean).abs() < 1e-10 * clean);
    }

    #[test]
    fn sinr_mta_examples() {
        let pw = unit_power(0.1);
        let no_sic = PowerConfig { sic: false, ..pw };
        let h_k = c(0.5f64.sqrt(), 0.0);
        let h_cm = c(0.0, 0.2f64.sqrt());
        assert!((sinr_mta(h_k, h_cm, &no_sic, 1.0) - 0.5 / 0.3).abs() < 1e-12);
        assert!((sinr_mta(h_k, h_cm, &pw, 1.0) - 0.5 / 0.1).abs() < 1e-12);
        let zero = c(0.0, 0.0);
        assert_eq!(sinr_mta(h_k, zero, &pw, 1.0), sinr_mta(h_k, zero, &no_sic, 1.0));
    }

    #[test]
    fn residual_interference_full_projection() {
        let mut rng = SeedTree::new(5).stream(Domain::Diagnostics, 0);
        let w = mrc(&sample_rayleigh(4, &mut rng)).unwrap();
        // h along conj(w) aligns with the beam: |w·h|² = ‖h‖².
        let h = ChannelVector::new(w.weights().map(|z| z.conj() * 2.5)).unwrap();
        assert!((residual_interference(&w, &h) - h.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn oracle_select_basics() {
        let w = mrc(&ch(&[c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        let a = ch(&[c(1.0, 0.0), c(1.0, 0.0)]);
        let null = ch(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(oracle_select(&w, &[a.clone()], &[1.0]).unwrap(), 0);
        assert_eq!(oracle_select(&w, &[a.clone(), null.clone(), a.clone()], &[1.0; 3]).unwrap(), 1);
        // ties go to the lowest index
        assert_eq!(oracle_select(&w, &[null.clone(), null], &[1.0, 1.0]).unwrap(), 0);
        assert!(oracle_select(&w, &[], &[]).is_err());
        assert!(oracle_select(&w, &[a], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn power_control_examples() {
        // Unit gain at 1 km with a zero-intercept, zero-shadowing model.
        let fading = LargeScaleFading::new(0.0, 36.7, 0.0).unwrap();
        let pw = PowerConfig::new(1.0, MtdPower::TargetSnr(10.0), 1e-13, 1.0).unwrap();
        let p = power_control(1.0, &fading, &pw).unwrap();
        assert!((p - 1e-12).abs() < 1e-24);
        let half = power_control(0.5, &fading, &pw).unwrap();
        assert!((half / p - 10f64.powf(-3.67 * 2f64.log10())).abs() < 1e-12);
        let capped = PowerConfig { max_p_k: 1e-13, ..pw };
        assert_eq!(power_control(10.0, &fading, &capped).unwrap(), 1e-13);
        assert!(power_control(0.0, &fading, &pw).is_err());
        let fixed = PowerConfig::new(1.0, MtdPower::Fixed(0.01), 1e-13, 1.0).unwrap();
        assert_eq!(power_control(0.3, &fading, &fixed).unwrap(), 0.01);
    }

    #[test]
    fn normalized_rate_examples() {
        assert_eq!(normalized_rate(10.0, 10.0), 1.0);
        assert_eq!(normalized_rate(0.0, 10.0), 0.0);
        let r = normalized_rate(5.0, 10.0);
        assert!((r - 6f64.log2() / 11f64.log2()).abs() < 1e-15);
        assert_eq!(normalized_rate(20.0, 10.0), 1.0);
    }

    #[test]
    fn reference_phase_rotation() {
        let w = Beamformer::from_slice(&[c(0.0, 0.6), c(0.8, 0.0)]).unwrap();
        let r = w.with_reference_phase(0);
        assert!((r.weights()[0] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((r.weights()[1] - c(0.0, -0.8)).norm() < 1e-15);
        let h = ch(&[c(0.3, -1.0), c(2.0, 0.5)]);
        assert!((residual_interference(&w, &h) - residual_interference(&r, &h)).abs() < 1e-14);
    }

    #[test]
    fn placement_validation() {
        let p = NodePlacement {
            bs_position: [0.0, 0.0],
            mta_position: [250.0, 0.0],
            htd_position: [100.0, 50.0],
            mtd_positions: vec![[300.0, 10.0]],
            cell_radius: 500.0,
            mta_radius: 250.0,
        };
        p.validate().unwrap();
        assert!((p.mtd_aoa(0) - (10.0f64 / 300.0).atan()).abs() < 1e-15);
        let far = NodePlacement { mtd_positions: vec![[600.0, 0.0]], ..p.clone() };
        assert!(far.validate().is_err());
        let none = NodePlacement { mtd_positions: vec![], ..p };
        assert!(none.validate().is_err());
    }
}
