//! Episode summaries and their CSV forms.

use super::csvio::{fmt_f64, parse_f64, parse_usize, Table};
use crate::bandit::{cumulative_regret, EpisodeTrace, StepRecord};
use crate::error::{Error, Result};

pub const TRACE_SCHEMA: &str = "oso-trace/1";
pub const SUMMARY_SCHEMA: &str = "oso-summary/1";
pub const REGRET_SCHEMA: &str = "oso-regret/1";

/// Reference ratios of cumulative reward to the oracle's for the linear and
/// uniform policies, used only as a printed comparison.
pub const REFERENCE_RATIO_LINEAR: f64 = 0.902;
pub const REFERENCE_RATIO_UNIFORM: f64 = 0.380;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    pub horizon: usize,
    pub cumulative_reward: f64,
    /// Sum of per-step best rewards (the oracle's cumulative reward).
    pub optimal_reward: f64,
}

impl SummaryRow {
    pub fn ratio(&self) -> f64 {
        self.cumulative_reward / self.optimal_reward
    }
}

pub fn summarize(traces: &[EpisodeTrace]) -> Vec<SummaryRow> {
    traces
        .iter()
        .map(|t| SummaryRow {
            policy: t.policy.clone(),
            horizon: t.horizon(),
            cumulative_reward: t.cumulative_reward(),
            optimal_reward: t.optimal_cumulative_reward(),
        })
        .collect()
}

pub fn summary_table(rows: &[SummaryRow]) -> Table {
    let mut t = Table::new(&["policy", "horizon", "cumulative_reward", "optimal_reward", "ratio"]);
    for r in rows {
        t.rows.push(vec![
            r.policy.clone(),
            r.horizon.to_string(),
            fmt_f64(r.cumulative_reward),
            fmt_f64(r.optimal_reward),
            fmt_f64(r.ratio()),
        ]);
    }
    t
}

pub fn summary_from_table(t: &Table) -> Result<Vec<SummaryRow>> {
    let (p, h, c, o) = (t.column("policy")?, t.column("horizon")?, t.column("cumulative_reward")?, t.column("optimal_reward")?);
    t.rows
        .iter()
        .map(|r| {
            Ok(SummaryRow {
                policy: r[p].clone(),
                horizon: parse_usize(&r[h])?,
                cumulative_reward: parse_f64(&r[c])?,
                optimal_reward: parse_f64(&r[o])?,
            })
        })
        .collect()
}

/// Human-readable comparison against the reference ratios.
pub fn summary_text(rows: &[SummaryRow]) -> String {
    let mut s = String::from("policy    cumulative   oracle       ratio   reference\n");
    for r in rows {
        let reference = match r.policy.as_str() {
            "linear" => format!("{REFERENCE_RATIO_LINEAR:.3}"),
            "uniform" => format!("{REFERENCE_RATIO_UNIFORM:.3}"),
            "oracle" => "1.000".into(),
            _ => "-".into(),
        };
        s.push_str(&format!(
            "{:<9} {:>11.2} {:>11.2} {:>8.4}   {}\n",
            r.policy,
            r.cumulative_reward,
            r.optimal_reward,
            r.ratio(),
            reference
        ));
    }
    s
}

pub fn trace_table(trace: &EpisodeTrace) -> Table {
    let mut t = Table::new(&["step", "context_id", "arm", "reward", "optimal_reward", "regret_cum"]);
    for (r, reg) in trace.records.iter().zip(cumulative_regret(trace)) {
        t.rows.push(vec![
            r.step.to_string(),
            r.context_id.to_string(),
            r.arm.to_string(),
            fmt_f64(r.reward),
            fmt_f64(r.optimal_reward),
            fmt_f64(reg),
        ]);
    }
    t
}

pub fn trace_from_table(policy: &str, t: &Table) -> Result<EpisodeTrace> {
    let cols = ["step", "context_id", "arm", "reward", "optimal_reward"]
        .map(|c| t.column(c))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut trace = EpisodeTrace::new(policy);
    for row in &t.rows {
        trace.push(StepRecord {
            step: parse_usize(&row[cols[0]])?,
            context_id: parse_usize(&row[cols[1]])?,
            arm: parse_usize(&row[cols[2]])?,
            reward: parse_f64(&row[cols[3]])?,
            optimal_reward: parse_f64(&row[cols[4]])?,
        })?;
    }
    Ok(trace)
}

/// Cumulative regret of several traces side by side, one column per policy.
pub fn regret_table(traces: &[EpisodeTrace]) -> Result<Table> {
    let h = traces.first().map_or(0, EpisodeTrace::horizon);
    if let Some(t) = traces.iter().find(|t| t.horizon() != h) {
        return Err(Error::DimensionMismatch { expected: h, actual: t.horizon() });
    }
    let mut header = vec!["step".to_string()];
    header.extend(traces.iter().map(|t| t.policy.clone()));
    let regrets: Vec<Vec<f64>> = traces.iter().map(cumulative_regret).collect();
    let mut t = Table { header, rows: Vec::with_capacity(h) };
    for s in 0..h {
        let mut row = vec![s.to_string()];
        row.extend(regrets.iter().map(|r| fmt_f64(r[s])));
        t.rows.push(row);
    }
    Ok(t)
}

/// Mean per-step regret over the first and last `window` steps.
pub fn regret_rates(trace: &EpisodeTrace, window: usize) -> Result<(f64, f64)> {
    let n = trace.horizon();
    if window == 0 || 2 * window > n {
        return Err(Error::domain(format!("window {window} does not fit horizon {n}")));
    }
    let gap = |r: &StepRecord| (r.optimal_reward - r.reward).max(0.0);
    let early = trace.records[..window].iter().map(gap).sum::<f64>() / window as f64;
    let late = trace.records[n - window..].iter().map(gap).sum::<f64>() / window as f64;
    Ok((early, late))
}
