//! Node drops and per-interval channel draws.
//!
//! The BS sits at the origin with its array on the y-axis, so broadside is the
//! +x direction. The aggregator is placed on broadside at `mta_distance_m`; MTDs
//! are uniform in the disc of radius `mta_radius_m` around it. Large-scale gains
//! and MTD covariances are fixed for a drop; small-scale fading and the HTD are
//! redrawn every coherence interval.

use std::f64::consts::PI;

use rand::Rng;

use super::config::{ExperimentConfig, PowerMode};
use crate::airlink::{power_control, MtdPower, PowerConfig};
use crate::chanmodel::{
    covariance, large_scale_gain, ArrayGeometry, ChannelSampler, ChannelVector, LargeScaleFading,
    RingScatterParams,
};
use crate::error::{Error, Result};
use crate::units::dbm_to_watts;

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// One MTD's drop-level state.
#[derive(Debug, Clone)]
pub struct MtdLink {
    pub position: [f64; 2],
    /// Nominal AoA seen from the BS, radians.
    pub aoa: f64,
    /// Shadowed large-scale gain to the BS.
    pub gain_bs: f64,
    pub power_fixed: f64,
    pub power_ctl: f64,
    sampler: ChannelSampler,
}

impl MtdLink {
    pub fn power(&self, mode: PowerMode) -> f64 {
        match mode {
            PowerMode::Fixed => self.power_fixed,
            PowerMode::PowerCtl => self.power_ctl,
        }
    }

    /// Small-scale draw of the MTD-to-BS channel including the large-scale gain.
    pub fn draw_bs_channel<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelVector {
        self.sampler.sample_scaled(self.gain_bs, rng)
    }
}

/// Drop-level constants shared by every interval.
#[derive(Debug, Clone)]
pub struct Deployment {
    pub mta_position: [f64; 2],
    pub mtds: Vec<MtdLink>,
    geometry: ArrayGeometry,
    fading: LargeScaleFading,
}

impl Deployment {
    pub fn k(&self) -> usize {
        self.mtds.len()
    }

    pub fn powers(&self, mode: PowerMode) -> Vec<f64> {
        self.mtds.iter().map(|m| m.power(mode)).collect()
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }
}

fn uniform_in_disc<R: Rng + ?Sized>(center: [f64; 2], radius: f64, rng: &mut R) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    [center[0] + r * phi.cos(), center[1] + r * phi.sin()]
}

/// Places `k` MTDs and fixes their gains, powers and covariances.
pub fn deploy<R: Rng + ?Sized>(cfg: &ExperimentConfig, k: usize, rng: &mut R) -> Result<Deployment> {
    let geometry = cfg.geometry()?;
    let fading = cfg.fading()?;
    let mta = [cfg.mta_distance_m, 0.0];
    let ctl = PowerConfig::new(
        1.0,
        cfg.mtd_power(PowerMode::PowerCtl),
        cfg.noise_power(),
        dbm_to_watts(cfg.mtd_max_power_dbm),
    )?;
    let fixed = match cfg.mtd_power(PowerMode::Fixed) {
        MtdPower::Fixed(p) => p,
        MtdPower::TargetSnr(_) => unreachable!(),
    };
    let mut mtds = Vec::with_capacity(k);
    for _ in 0..k {
        let mut tries = 0;
        let position = loop {
            let p = uniform_in_disc(mta, cfg.mta_radius_m, rng);
            if dist(p, [0.0, 0.0]) >= cfg.min_distance_m && dist(p, mta) >= cfg.min_distance_m {
                break p;
            }
            tries += 1;
            if tries > 10_000 {
                return Err(Error::Config("cannot place MTDs at the minimum distance".into()));
            }
        };
        let aoa = position[1].atan2(position[0]);
        let d_bs_km = dist(position, [0.0, 0.0]) / 1e3;
        let d_mta_km = dist(position, mta) / 1e3;
        let gain_bs = large_scale_gain(d_bs_km, &fading, rng)?;
        let power_ctl = power_control(d_mta_km, &fading, &ctl)?;
        let ring = RingScatterParams::new(aoa, cfg.mtd_spread_rad(), 1.0)?;
        let sampler = ChannelSampler::new(&covariance(&geometry, &ring)?)?;
        mtds.push(MtdLink { position, aoa, gain_bs, power_fixed: fixed, power_ctl, sampler });
    }
    Ok(Deployment { mta_position: mta, mtds, geometry, fading })
}

/// HTD state for one coherence interval.
#[derive(Debug, Clone)]
pub struct HtdDraw {
    pub aoa: f64,
    pub distance_m: f64,
    pub h_c: ChannelVector,
    /// Channel-inversion power meeting the SINR target without interference.
    pub p_c: f64,
}

/// Draws an HTD position, AoA and channel; the HTD inverts its channel so the
/// interference-free SINR equals `htd_target_sinr_db`.
pub fn draw_htd<R: Rng + ?Sized>(cfg: &ExperimentConfig, dep: &Deployment, rng: &mut R) -> Result<HtdDraw> {
    let range = cfg.htd_aoa_range_rad();
    let aoa = if range > 0.0 { rng.random_range(-range..=range) } else { 0.0 };
    let (r0, r1) = (cfg.min_distance_m, cfg.cell_radius_m);
    let distance_m = (r0 * r0 + rng.random::<f64>() * (r1 * r1 - r0 * r0)).sqrt();
    let gain = large_scale_gain(distance_m / 1e3, &dep.fading, rng)?;
    let ring = RingScatterParams::new(aoa, cfg.htd_spread_rad(), 1.0)?;
    let sampler = ChannelSampler::new(&covariance(&dep.geometry, &ring)?)?;
    let h_c = sampler.sample_scaled(gain, rng);
    let n2 = h_c.norm_sqr();
    if !(n2 > 0.0) {
        return Err(Error::degenerate("HTD channel vanished"));
    }
    Ok(HtdDraw { aoa, distance_m, p_c: cfg.htd_target_sinr() * cfg.noise_power() / n2, h_c })
}
