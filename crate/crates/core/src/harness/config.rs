//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored; unknown keys are errors.
//! Lists are comma separated. Every key is listed in [`KEYS`] together with its
//! meaning, and [`ExperimentConfig::to_text`] writes a file that parses back to
//! the same configuration.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::airlink::{MtdPower, PowerConfig};
use crate::bandit::LinearHyper;
use crate::chanmodel::{ArrayGeometry, LargeScaleFading};
use crate::closedform::AnalysisParams;
use crate::error::{Error, Result};
use crate::units::{db_to_lin, dbm_to_watts, noise_power_watts};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    Fixed,
    PowerCtl,
}

impl FromStr for PowerMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Self::Fixed),
            "powerctl" => Ok(Self::PowerCtl),
            _ => Err(Error::Config(format!("power mode must be fixed|powerctl, got `{s}`"))),
        }
    }
}

impl std::fmt::Display for PowerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Fixed => "fixed",
            Self::PowerCtl => "powerctl",
        })
    }
}

/// How the beamformer's common phase is fixed before it becomes a context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextPhase {
    /// MRC weights as computed from the channel draw.
    Raw,
    /// Rotated so the first antenna's weight is real and non-negative.
    Reference,
}

impl FromStr for ContextPhase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "reference" => Ok(Self::Reference),
            _ => Err(Error::Config(format!("context phase must be raw|reference, got `{s}`"))),
        }
    }
}

impl std::fmt::Display for ContextPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Raw => "raw",
            Self::Reference => "reference",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub antenna_positions: Vec<f64>,
    pub wavelength_m: f64,
    pub cell_radius_m: f64,
    pub mta_radius_m: f64,
    pub mta_distance_m: f64,
    pub min_distance_m: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub noise_psd_dbm_hz: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_slope_db: f64,
    pub shadowing_db: f64,
    pub angular_spread_deg: f64,
    pub mtd_angular_spread_deg: f64,
    pub htd_aoa_range_deg: f64,
    pub htd_target_sinr_db: f64,
    pub mtd_target_snr_db: f64,
    pub mtd_power_mode: PowerMode,
    pub mtd_fixed_power_dbm: f64,
    pub mtd_max_power_dbm: f64,
    pub sic: bool,
    pub k_devices: usize,
    pub horizon: usize,
    pub lambda_prior: f64,
    pub a0: f64,
    pub b0: f64,
    pub intercept: bool,
    pub context_phase: ContextPhase,
    pub seed: u64,
    pub trials: usize,
    pub drops: usize,
    pub k_list: Vec<usize>,
    pub outage_thresholds_db: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            antenna_positions: vec![-0.02, -0.01, 0.01, 0.02],
            wavelength_m: 0.02,
            cell_radius_m: 500.0,
            mta_radius_m: 250.0,
            mta_distance_m: 250.0,
            min_distance_m: 10.0,
            bandwidth_hz: 360e3,
            noise_figure_db: 2.0,
            noise_psd_dbm_hz: -174.0,
            pathloss_intercept_db: 128.1,
            pathloss_slope_db: 36.7,
            shadowing_db: 10.0,
            angular_spread_deg: 10.0,
            mtd_angular_spread_deg: 10.0,
            htd_aoa_range_deg: 60.0,
            htd_target_sinr_db: 10.0,
            mtd_target_snr_db: 10.0,
            mtd_power_mode: PowerMode::Fixed,
            mtd_fixed_power_dbm: 5.0,
            mtd_max_power_dbm: 10.0,
            sic: true,
            k_devices: 80,
            horizon: 20_000,
            lambda_prior: 0.25,
            a0: 6.0,
            b0: 6.0,
            intercept: true,
            context_phase: ContextPhase::Reference,
            seed: 1,
            trials: 100_000,
            drops: 100,
            k_list: vec![10, 50, 100, 200],
            outage_thresholds_db: vec![0.0, 5.0, 10.0, 15.0],
        }
    }
}

/// Documented configuration keys.
pub const KEYS: &[(&str, &str)] = &[
    ("antenna_positions", "BS antenna ordinates on the y-axis, meters (comma list)"),
    ("antennas", "shorthand: half-wavelength ULA with this many elements"),
    ("wavelength_m", "carrier wavelength, meters"),
    ("cell_radius_m", "cell radius, meters"),
    ("mta_radius_m", "radius of the MTD disc around the aggregator, meters"),
    ("mta_distance_m", "BS-to-aggregator distance along the array broadside, meters"),
    ("min_distance_m", "minimum node-to-receiver distance, meters"),
    ("bandwidth_hz", "resource-block bandwidth, Hz"),
    ("noise_figure_db", "receiver noise figure, dB"),
    ("noise_psd_dbm_hz", "thermal noise spectral density, dBm/Hz"),
    ("pathloss_intercept_db", "path loss at 1 km, dB"),
    ("pathloss_slope_db", "path-loss slope per decade of km, dB"),
    ("shadowing_db", "log-normal shadowing standard deviation, dB"),
    ("angular_spread_deg", "HTD one-ring half-width, degrees"),
    ("mtd_angular_spread_deg", "MTD one-ring half-width, degrees"),
    ("htd_aoa_range_deg", "HTD nominal AoA drawn uniformly in [-x, x], degrees"),
    ("htd_target_sinr_db", "interference-free HTD SINR target, dB"),
    ("mtd_target_snr_db", "MTD SNR target at the aggregator (powerctl), dB"),
    ("mtd_power_mode", "fixed | powerctl"),
    ("mtd_fixed_power_dbm", "MTD transmit power in fixed mode, dBm"),
    ("mtd_max_power_dbm", "MTD power cap in powerctl mode, dBm"),
    ("sic", "aggregator cancels the HTD signal (true|false)"),
    ("k_devices", "number of candidate MTDs (bandit arms)"),
    ("horizon", "bandit steps T"),
    ("lambda_prior", "prior precision scale"),
    ("a0", "inverse-gamma shape prior"),
    ("b0", "inverse-gamma scale prior"),
    ("intercept", "append a constant feature to contexts (true|false)"),
    ("context_phase", "raw | reference"),
    ("seed", "master seed"),
    ("trials", "Monte Carlo trials per sweep point"),
    ("drops", "independent MTD placements per sweep"),
    ("k_list", "MTD counts for sweeps (comma list)"),
    ("outage_thresholds_db", "SINR thresholds for outage sweeps, dB (comma list)"),
];

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key; the caller re-validates when done.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "antenna_positions" => self.antenna_positions = parse_list(key, v)?,
            "antennas" => {
                let m: usize = parse(key, v)?;
                let d = 0.5 * self.wavelength_m;
                let c = (m as f64 - 1.0) / 2.0;
                self.antenna_positions = (0..m).map(|i| (i as f64 - c) * d).collect();
            }
            "wavelength_m" => self.wavelength_m = parse(key, v)?,
            "cell_radius_m" => self.cell_radius_m = parse(key, v)?,
            "mta_radius_m" => self.mta_radius_m = parse(key, v)?,
            "mta_distance_m" => self.mta_distance_m = parse(key, v)?,
            "min_distance_m" => self.min_distance_m = parse(key, v)?,
            "bandwidth_hz" => self.bandwidth_hz = parse(key, v)?,
            "noise_figure_db" => self.noise_figure_db = parse(key, v)?,
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz = parse(key, v)?,
            "pathloss_intercept_db" => self.pathloss_intercept_db = parse(key, v)?,
            "pathloss_slope_db" => self.pathloss_slope_db = parse(key, v)?,
            "shadowing_db" => self.shadowing_db = parse(key, v)?,
            "angular_spread_deg" => self.angular_spread_deg = parse(key, v)?,
            "mtd_angular_spread_deg" => self.mtd_angular_spread_deg = parse(key, v)?,
            "htd_aoa_range_deg" => self.htd_aoa_range_deg = parse(key, v)?,
            "htd_target_sinr_db" => self.htd_target_sinr_db = parse(key, v)?,
            "mtd_target_snr_db" => self.mtd_target_snr_db = parse(key, v)?,
            "mtd_power_mode" => self.mtd_power_mode = v.parse()?,
            "mtd_fixed_power_dbm" => self.mtd_fixed_power_dbm = parse(key, v)?,
            "mtd_max_power_dbm" => self.mtd_max_power_dbm = parse(key, v)?,
            "sic" => self.sic = parse(key, v)?,
            "k_devices" => self.k_devices = parse(key, v)?,
            "horizon" => self.horizon = parse(key, v)?,
            "lambda_prior" => self.lambda_prior = parse(key, v)?,
            "a0" => self.a0 = parse(key, v)?,
            "b0" => self.b0 = parse(key, v)?,
            "intercept" => self.intercept = parse(key, v)?,
            "context_phase" => self.context_phase = v.parse()?,
            "seed" => self.seed = parse(key, v)?,
            "trials" => self.trials = parse(key, v)?,
            "drops" => self.drops = parse(key, v)?,
            "k_list" => self.k_list = parse_list(key, v)?,
            "outage_thresholds_db" => self.outage_thresholds_db = parse_list(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.antenna_positions.is_empty() {
            return bad("need at least one antenna");
        }
        self.geometry()?;
        self.fading()?;
        for (name, v) in [
            ("wavelength_m", self.wavelength_m),
            ("cell_radius_m", self.cell_radius_m),
            ("mta_radius_m", self.mta_radius_m),
            ("mta_distance_m", self.mta_distance_m),
            ("min_distance_m", self.min_distance_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("lambda_prior", self.lambda_prior),
            ("a0", self.a0),
            ("b0", self.b0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("`{name}` must be positive, got {v}")));
            }
        }
        let spread_ok = |d: f64| d > 0.0 && d <= 180.0;
        if !spread_ok(self.angular_spread_deg) || !spread_ok(self.mtd_angular_spread_deg) {
            return bad("angular spreads must lie in (0, 180] degrees");
        }
        if !(self.htd_aoa_range_deg >= 0.0 && self.htd_aoa_range_deg < 180.0) {
            return bad("htd_aoa_range_deg must lie in [0, 180)");
        }
        if self.mta_distance_m + self.mta_radius_m > self.cell_radius_m * (1.0 + 1e-12) {
            return bad("the MTA disc must lie inside the cell");
        }
        if self.min_distance_m >= self.mta_radius_m || self.min_distance_m >= self.cell_radius_m {
            return bad("min_distance_m must be below both radii");
        }
        if self.k_devices == 0 || self.horizon == 0 || self.trials == 0 || self.drops == 0 {
            return bad("counts must be positive");
        }
        if self.horizon < self.k_devices {
            return bad("horizon must be >= k_devices (round-robin warm-up)");
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return bad("k_list must hold positive counts");
        }
        if !self.mtd_fixed_power_dbm.is_finite() || !self.mtd_max_power_dbm.is_finite() {
            return bad("MTD powers must be finite");
        }
        Ok(())
    }

    /// Writes every key in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("antenna_positions", join(&self.antenna_positions));
        kv("wavelength_m", self.wavelength_m.to_string());
        kv("cell_radius_m", self.cell_radius_m.to_string());
        kv("mta_radius_m", self.mta_radius_m.to_string());
        kv("mta_distance_m", self.mta_distance_m.to_string());
        kv("min_distance_m", self.min_distance_m.to_string());
        kv("bandwidth_hz", self.bandwidth_hz.to_string());
        kv("noise_figure_db", self.noise_figure_db.to_string());
        kv("noise_psd_dbm_hz", self.noise_psd_dbm_hz.to_string());
        kv("pathloss_intercept_db", self.pathloss_intercept_db.to_string());
        kv("pathloss_slope_db", self.pathloss_slope_db.to_string());
        kv("shadowing_db", self.shadowing_db.to_string());
        kv("angular_spread_deg", self.angular_spread_deg.to_string());
        kv("mtd_angular_spread_deg", self.mtd_angular_spread_deg.to_string());
        kv("htd_aoa_range_deg", self.htd_aoa_range_deg.to_string());
        kv("htd_target_sinr_db", self.htd_target_sinr_db.to_string());
        kv("mtd_target_snr_db", self.mtd_target_snr_db.to_string());
        kv("mtd_power_mode", self.mtd_power_mode.to_string());
        kv("mtd_fixed_power_dbm", self.mtd_fixed_power_dbm.to_string());
        kv("mtd_max_power_dbm", self.mtd_max_power_dbm.to_string());
        kv("sic", self.sic.to_string());
        kv("k_devices", self.k_devices.to_string());
        kv("horizon", self.horizon.to_string());
        kv("lambda_prior", self.lambda_prior.to_string());
        kv("a0", self.a0.to_string());
        kv("b0", self.b0.to_string());
        kv("intercept", self.intercept.to_string());
        kv("context_phase", self.context_phase.to_string());
        kv("seed", self.seed.to_string());
        kv("trials", self.trials.to_string());
        kv("drops", self.drops.to_string());
        kv("k_list", join(&self.k_list));
        kv("outage_thresholds_db", join(&self.outage_thresholds_db));
        s
    }

    pub fn num_antennas(&self) -> usize {
        self.antenna_positions.len()
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::on_y_axis(&self.antenna_positions, self.wavelength_m)
    }

    pub fn fading(&self) -> Result<LargeScaleFading> {
        LargeScaleFading::new(self.pathloss_intercept_db, self.pathloss_slope_db, self.shadowing_db)
    }

    pub fn noise_power(&self) -> f64 {
        noise_power_watts(self.noise_psd_dbm_hz, self.bandwidth_hz, self.noise_figure_db)
    }

    pub fn htd_target_sinr(&self) -> f64 {
        db_to_lin(self.htd_target_sinr_db)
    }

    pub fn htd_spread_rad(&self) -> f64 {
        self.angular_spread_deg * PI / 180.0
    }

    pub fn mtd_spread_rad(&self) -> f64 {
        self.mtd_angular_spread_deg * PI / 180.0
    }

    pub fn htd_aoa_range_rad(&self) -> f64 {
        self.htd_aoa_range_deg * PI / 180.0
    }

    pub fn mtd_power(&self, mode: PowerMode) -> MtdPower {
        match mode {
            PowerMode::Fixed => MtdPower::Fixed(dbm_to_watts(self.mtd_fixed_power_dbm)),
            PowerMode::PowerCtl => MtdPower::TargetSnr(db_to_lin(self.mtd_target_snr_db)),
        }
    }

    /// Power configuration; `p_c` is a placeholder overwritten per interval by
    /// HTD power control.
    pub fn power_config(&self, mode: PowerMode) -> Result<PowerConfig> {
        let mut pw = PowerConfig::new(
            1.0,
            self.mtd_power(mode),
            self.noise_power(),
            dbm_to_watts(self.mtd_max_power_dbm),
        )?;
        pw.sic = self.sic;
        Ok(pw)
    }

    pub fn bandit_hyper(&self) -> LinearHyper {
        LinearHyper {
            lambda_prior: self.lambda_prior,
            a0: self.a0,
            b0: self.b0,
            intercept: self.intercept,
        }
    }

    /// i.i.d. Rayleigh analysis parameters in watts: `σ² = N_0`, `P` such that the
    /// mean interference-free MRC SNR `P·M/σ²` equals the HTD target, and `P_m` the
    /// fixed MTD power through the mean path gain at the aggregator's distance.
    pub fn analysis_params(&self, k: usize) -> Result<AnalysisParams> {
        let n0 = self.noise_power();
        let m = self.num_antennas();
        let p = self.htd_target_sinr() * n0 / m as f64;
        let p_m = dbm_to_watts(self.mtd_fixed_power_dbm) * self.fading()?.mean_gain(self.mta_distance_m / 1e3)?;
        AnalysisParams::new(m as u32, k as u64, p, p_m, n0)
    }
}
