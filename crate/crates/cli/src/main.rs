use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use oso_core::bandit::LinearFullPosterior;
use oso_core::chanmodel::{covariance, ChannelSampler, RingScatterParams};
use oso_core::closedform::{linear_grid, outage_probability, sinr_pdf, DistributionCurve};
use oso_core::harness::csvio::{fmt_f64, Table};
use oso_core::harness::dataset::DATASET_SCHEMA;
use oso_core::harness::report::{
    regret_table, summarize, summary_table, summary_text, trace_from_table, trace_table, REGRET_SCHEMA,
    SUMMARY_SCHEMA, TRACE_SCHEMA,
};
use oso_core::harness::sweeps::{outage_table, sinr_table, OUTAGE_SCHEMA, SINR_SCHEMA};
use oso_core::harness::{
    generate_dataset, make_policy, mc_outage_vs_k, mc_sinr_vs_k, run_bandit, Dataset, ExperimentConfig,
    PolicyKind, PowerMode, SweepPower,
};
use oso_core::rng::{Domain, SeedTree};

const CURVE_SCHEMA: &str = "oso-curve/1";
const COVARIANCE_SCHEMA: &str = "oso-covariance/1";

/// Opportunistic spatial orthogonalization experiments.
#[derive(Parser)]
#[command(name = "oso", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// One-ring covariance and a sample-covariance check.
    Channels {
        /// Nominal AoA, degrees.
        #[arg(long, default_value_t = 0.0)]
        aoa_deg: f64,
        /// Angular spread, degrees (defaults to angular_spread_deg).
        #[arg(long)]
        spread_deg: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Closed-form SINR density and outage curves.
    Analyze {
        #[arg(long)]
        pdf: bool,
        #[arg(long)]
        outage: bool,
        /// Number of MTDs in the analysis.
        #[arg(long, default_value_t = 100)]
        k: usize,
        /// Lowest SINR on the grid, linear.
        #[arg(long, default_value_t = 0.0)]
        x_min: f64,
        /// Highest SINR on the grid, linear.
        #[arg(long, default_value_t = 20.0)]
        x_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Monte Carlo SINR and outage sweeps over K.
    Mc {
        /// fixed | powerctl; both when omitted.
        #[arg(long)]
        mode: Option<PowerMode>,
        /// Comma-separated MTD counts.
        #[arg(long, value_delimiter = ',')]
        k_list: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Generate and save a bandit dataset.
    Dataset {
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Run bandit policies over a dataset and write their traces.
    Bandit {
        /// linear | uniform | oracle; repeatable, all three when omitted.
        #[arg(long = "policy")]
        policies: Vec<PolicyKind>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Read this dataset instead of generating one.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Summarise saved traces: cumulative rewards, regret and reward scatter.
    Report {
        /// Directory holding `trace_<policy>.csv` files (defaults to --out).
        #[arg(long)]
        traces: Option<PathBuf>,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::from_file(p).with_context(|| format!("config {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    for kv in &c.overrides {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects key=value, got `{kv}`"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn save(t: &Table, schema: &str, dir: &Path, name: &str) -> Result<()> {
    let path = dir.join(name);
    t.save(schema, &path).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn curve_table(c: &DistributionCurve) -> Table {
    let mut t = Table::new(&["x", "value"]);
    t.rows.extend(c.rows().map(|(x, v)| vec![fmt_f64(x), fmt_f64(v)]));
    t
}

fn channels(cfg: &ExperimentConfig, out: &Path, aoa_deg: f64, spread_deg: Option<f64>, samples: usize) -> Result<()> {
    if samples == 0 {
        bail!("--samples must be positive");
    }
    let spread = spread_deg.unwrap_or(cfg.angular_spread_deg).to_radians();
    let ring = RingScatterParams::new(aoa_deg.to_radians(), spread, 1.0)?;
    let r = covariance(&cfg.geometry()?, &ring)?;
    let sampler = ChannelSampler::new(&r)?;
    let m = r.dim();
    let mut rng = SeedTree::new(cfg.seed).stream(Domain::Diagnostics, 0);
    let mut acc = vec![oso_core::Complex64::new(0.0, 0.0); m * m];
    for _ in 0..samples {
        let h = sampler.sample(&mut rng);
        let h = h.as_vector();
        for i in 0..m {
            for j in 0..m {
                acc[i * m + j] += h[i] * h[j].conj();
            }
        }
    }
    let mut t = Table::new(&["m", "p", "re", "im", "sample_re", "sample_im"]);
    for i in 0..m {
        for j in 0..m {
            let v = r.get(i, j);
            let s = acc[i * m + j] / samples as f64;
            t.rows.push(vec![
                i.to_string(),
                j.to_string(),
                fmt_f64(v.re),
                fmt_f64(v.im),
                fmt_f64(s.re),
                fmt_f64(s.im),
            ]);
        }
    }
    println!("rank {} of {m}", sampler.rank());
    save(&t, COVARIANCE_SCHEMA, out, "covariance.csv")
}

fn analyze(cfg: &ExperimentConfig, out: &Path, pdf: bool, outage: bool, k: usize, grid: (f64, f64, usize)) -> Result<()> {
    let (lo, hi, n) = grid;
    if !(lo >= 0.0 && hi > lo) || n < 2 {
        bail!("grid needs 0 <= x-min < x-max and at least 2 points");
    }
    let (pdf, outage) = if pdf || outage { (pdf, outage) } else { (true, true) };
    let params = cfg.analysis_params(k)?;
    let xs = linear_grid(lo, hi, n);
    if pdf {
        let c = DistributionCurve::tabulate(xs.clone(), |y| sinr_pdf(y, &params))?;
        save(&curve_table(&c), CURVE_SCHEMA, out, "pdf.csv")?;
    }
    if outage {
        let c = DistributionCurve::tabulate(xs, |b| outage_probability(b, &params))?;
        save(&curve_table(&c), CURVE_SCHEMA, out, "outage.csv")?;
    }
    Ok(())
}

fn mc(cfg: &ExperimentConfig, out: &Path, mode: Option<PowerMode>) -> Result<()> {
    let seeds = SeedTree::new(cfg.seed);
    let modes: Vec<SweepPower> = match mode {
        Some(m) => vec![SweepPower::from_config(cfg, m)],
        None => vec![
            SweepPower::from_config(cfg, PowerMode::Fixed),
            SweepPower::from_config(cfg, PowerMode::PowerCtl),
        ],
    };
    let sinr = mc_sinr_vs_k(cfg, &cfg.k_list, &modes, cfg.trials, &seeds.child(Domain::Drop, 0))?;
    save(&sinr_table(&sinr), SINR_SCHEMA, out, "sinr_vs_k.csv")?;
    let outage = mc_outage_vs_k(cfg, &cfg.k_list, &cfg.outage_thresholds_db, cfg.trials, &seeds.child(Domain::Trial, 0))?;
    save(&outage_table(&outage), OUTAGE_SCHEMA, out, "outage_vs_k.csv")
}

fn bandit(cfg: &ExperimentConfig, out: &Path, policies: &[PolicyKind], dataset: Option<&Path>) -> Result<()> {
    let seeds = SeedTree::new(cfg.seed);
    let ds = match dataset {
        Some(p) => Dataset::load(p).with_context(|| format!("dataset {}", p.display()))?,
        None => generate_dataset(cfg, &seeds)?,
    };
    let kinds = if policies.is_empty() { PolicyKind::ALL.to_vec() } else { policies.to_vec() };
    let mut traces = Vec::new();
    for kind in kinds {
        let mut rng = seeds.stream(Domain::Policy, kind.stream_index());
        let trace = if kind == PolicyKind::Linear {
            let mut p = LinearFullPosterior::new(ds.num_arms(), ds.context_dim(), cfg.bandit_hyper())?;
            let trace = run_bandit(&ds, &mut p, &mut rng)?;
            let path = out.join("posterior_linear.txt");
            fs::write(&path, p.to_snapshot()).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
            trace
        } else {
            let mut p = make_policy(kind, ds.num_arms(), ds.context_dim(), cfg.bandit_hyper())?;
            run_bandit(&ds, p.as_mut(), &mut rng)?
        };
        save(&trace_table(&trace), TRACE_SCHEMA, out, &format!("trace_{}.csv", kind.name()))?;
        traces.push(trace);
    }
    print!("{}", summary_text(&summarize(&traces)));
    Ok(())
}

fn report(out: &Path, traces_dir: &Path) -> Result<()> {
    let mut traces = Vec::new();
    for kind in PolicyKind::ALL {
        let path = traces_dir.join(format!("trace_{}.csv", kind.name()));
        if path.exists() {
            let t = Table::load(TRACE_SCHEMA, &path).with_context(|| format!("reading {}", path.display()))?;
            traces.push(trace_from_table(kind.name(), &t)?);
        }
    }
    if traces.is_empty() {
        bail!("no trace_<policy>.csv files in {}", traces_dir.display());
    }
    let rows = summarize(&traces);
    save(&summary_table(&rows), SUMMARY_SCHEMA, out, "summary.csv")?;
    save(&regret_table(&traces)?, REGRET_SCHEMA, out, "regret.csv")?;
    for t in &traces {
        let mut s = Table::new(&["step", "reward"]);
        s.rows.extend(t.reward_series().into_iter().map(|(i, r)| vec![i.to_string(), fmt_f64(r)]));
        save(&s, "oso-scatter/1", out, &format!("scatter_{}.csv", t.policy))?;
    }
    print!("{}", summary_text(&rows));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli.common)?;
    let out = &cli.common.out;
    match &cli.cmd {
        Cmd::Mc { k_list, trials, .. } => {
            if let Some(k) = k_list {
                cfg.k_list = k.clone();
            }
            if let Some(t) = trials {
                cfg.trials = *t;
            }
        }
        Cmd::Dataset { horizon } | Cmd::Bandit { horizon, .. } => {
            if let Some(h) = horizon {
                cfg.horizon = *h;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    match cli.cmd {
        Cmd::Channels { aoa_deg, spread_deg, samples } => channels(&cfg, out, aoa_deg, spread_deg, samples),
        Cmd::Analyze { pdf, outage, k, x_min, x_max, points } => {
            analyze(&cfg, out, pdf, outage, k, (x_min, x_max, points))
        }
        Cmd::Mc { mode, .. } => mc(&cfg, out, mode),
        Cmd::Dataset { .. } => {
            let ds = generate_dataset(&cfg, &SeedTree::new(cfg.seed))?;
            save(&ds.to_table(), DATASET_SCHEMA, out, "dataset.csv")
        }
        Cmd::Bandit { ref policies, ref dataset, .. } => bandit(&cfg, out, policies, dataset.as_deref()),
        Cmd::Report { ref traces } => report(out, traces.as_deref().unwrap_or(out)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
