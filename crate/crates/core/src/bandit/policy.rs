use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};

use super::context::ContextVector;
use super::posterior::{LinearArmPosterior, PosteriorParams};
use crate::error::{Error, Result};

/// A sequential arm-selection rule.
///
/// `revealed` holds every arm's reward for the current step. Only full-information
/// baselines ([`OraclePolicy`]) may read it; learning policies must ignore it.
pub trait Policy {
    fn name(&self) -> &str;

    fn num_arms(&self) -> usize;

    fn select(
        &mut self,
        step: usize,
        ctx: &ContextVector,
        revealed: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<usize>;

    fn observe(&mut self, ctx: &ContextVector, arm: usize, reward: f64) -> Result<()>;
}

/// Arms `0..k` in order, one per step, before any model-based selection.
pub fn round_robin_init(k: usize) -> Vec<usize> {
    (0..k).collect()
}

/// Uniformly random arm.
pub fn uniform_select<R: Rng + ?Sized>(k: usize, rng: &mut R) -> usize {
    assert!(k >= 1, "uniform_select needs at least one arm");
    rng.random_range(0..k)
}

fn argmax_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

fn sample_scores<R: Rng + ?Sized>(posteriors: &[PosteriorParams], q: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let qv = DVector::from_column_slice(q);
    posteriors
        .iter()
        .map(|p| Ok(p.sample(rng)?.dot(&qv)))
        .collect()
}

/// Thompson selection: one posterior draw per arm, score `qᵀβ_k`, argmax with
/// the lowest index winning ties.
pub fn ts_select<R: Rng + ?Sized>(arms: &[LinearArmPosterior], q: &ContextVector, rng: &mut R) -> Result<usize> {
    if arms.is_empty() {
        return Err(Error::domain("ts_select needs at least one arm"));
    }
    let posts = arms.iter().map(|a| a.posterior()).collect::<Result<Vec<_>>>()?;
    let scores = sample_scores(&posts, q.features(), rng)?;
    Ok(argmax_lowest(scores.into_iter()))
}

/// Hyperparameters of the linear full-posterior policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearHyper {
    /// `Λ₀ = lambda_prior · I`.
    pub lambda_prior: f64,
    pub a0: f64,
    pub b0: f64,
    /// Append a constant 1 to every context.
    pub intercept: bool,
}

impl Default for LinearHyper {
    fn default() -> Self {
        Self { lambda_prior: 0.25, a0: 6.0, b0: 6.0, intercept: true }
    }
}

/// Thompson sampling with a normal–inverse-gamma linear model per arm.
#[derive(Debug, Clone)]
pub struct LinearFullPosterior {
    hyper: LinearHyper,
    context_dim: usize,
    arms: Vec<LinearArmPosterior>,
    cache: Vec<Option<PosteriorParams>>,
    plays: usize,
}

const SNAPSHOT_SCHEMA: &str = "#schema=oso-linear-posterior/1";

impl LinearFullPosterior {
    pub fn new(k: usize, context_dim: usize, hyper: LinearHyper) -> Result<Self> {
        if k == 0 || context_dim == 0 {
            return Err(Error::domain("need at least one arm and one feature"));
        }
        let dim = context_dim + usize::from(hyper.intercept);
        let arm = LinearArmPosterior::isotropic(dim, hyper.lambda_prior, hyper.a0, hyper.b0)?;
        Ok(Self {
            hyper,
            context_dim,
            arms: vec![arm; k],
            cache: vec![None; k],
            plays: 0,
        })
    }

    pub fn arms(&self) -> &[LinearArmPosterior] {
        &self.arms
    }

    pub fn hyper(&self) -> LinearHyper {
        self.hyper
    }

    fn features(&self, ctx: &ContextVector) -> Result<Vec<f64>> {
        if ctx.dim() != self.context_dim {
            return Err(Error::DimensionMismatch { expected: self.context_dim, actual: ctx.dim() });
        }
        let mut f = ctx.features().to_vec();
        if self.hyper.intercept {
            f.push(1.0);
        }
        Ok(f)
    }

    fn posterior(&mut self, k: usize) -> Result<&PosteriorParams> {
        if self.cache[k].is_none() {
            self.cache[k] = Some(self.arms[k].posterior()?);
        }
        Ok(self.cache[k].as_ref().expect("filled above"))
    }

    /// Text snapshot: a schema line, then one `key indices... value` line per entry
    /// in a fixed order. Floats use the shortest round-trip representation.
    pub fn to_snapshot(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let h = &self.hyper;
        let _ = writeln!(s, "{SNAPSHOT_SCHEMA}");
        let _ = writeln!(s, "arms {}", self.arms.len());
        let _ = writeln!(s, "context_dim {}", self.context_dim);
        let _ = writeln!(s, "intercept {}", u8::from(h.intercept));
        let _ = writeln!(s, "lambda_prior {}", h.lambda_prior);
        let _ = writeln!(s, "plays {}", self.plays);
        for (k, arm) in self.arms.iter().enumerate() {
            let (a0, b0) = arm.hyper();
            let (xtx, xty, yty, t) = arm.sufficient_stats();
            let _ = writeln!(s, "arm {k}");
            let _ = writeln!(s, "a0 {a0}");
            let _ = writeln!(s, "b0 {b0}");
            let _ = writeln!(s, "t {t}");
            let _ = writeln!(s, "yty {yty}");
            for (i, v) in arm.prior_mean().iter().enumerate() {
                let _ = writeln!(s, "prior_mean {i} {v}");
            }
            for i in 0..arm.dim() {
                for j in 0..arm.dim() {
                    let _ = writeln!(s, "prior_precision {i} {j} {}", arm.prior_precision()[(i, j)]);
                }
            }
            for (i, v) in xty.iter().enumerate() {
                let _ = writeln!(s, "xty {i} {v}");
            }
            for i in 0..arm.dim() {
                for j in 0..arm.dim() {
                    let _ = writeln!(s, "xtx {i} {j} {}", xtx[(i, j)]);
                }
            }
        }
        s
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let mut r = SnapshotReader { lines: text.lines().filter(|l| !l.trim().is_empty()) };
        if r.lines.next() != Some(SNAPSHOT_SCHEMA) {
            return Err(Error::Parse("missing or unknown snapshot schema".into()));
        }
        let k: usize = r.scalar("arms")?;
        let context_dim: usize = r.scalar("context_dim")?;
        let intercept = r.scalar::<u8>("intercept")? == 1;
        let lambda_prior: f64 = r.scalar("lambda_prior")?;
        let plays: usize = r.scalar("plays")?;
        let dim = context_dim + usize::from(intercept);
        let mut arms = Vec::with_capacity(k);
        for arm_idx in 0..k {
            if r.scalar::<usize>("arm")? != arm_idx {
                return Err(Error::Parse("arms out of order".into()));
            }
            let a0: f64 = r.scalar("a0")?;
            let b0: f64 = r.scalar("b0")?;
            let t: u64 = r.scalar("t")?;
            let yty: f64 = r.scalar("yty")?;
            let prior_mean = r.vector("prior_mean", dim)?;
            let prior_precision = r.matrix("prior_precision", dim)?;
            let xty = r.vector("xty", dim)?;
            let xtx = r.matrix("xtx", dim)?;
            arms.push(LinearArmPosterior::new(prior_precision, prior_mean, a0, b0)?.with_stats(xtx, xty, yty, t)?);
        }
        let (a0, b0) = arms.first().map(|a| a.hyper()).unwrap_or((6.0, 6.0));
        Ok(Self {
            hyper: LinearHyper { lambda_prior, a0, b0, intercept },
            context_dim,
            cache: vec![None; k],
            arms,
            plays,
        })
    }
}

struct SnapshotReader<'a, I: Iterator<Item = &'a str>> {
    lines: I,
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

impl<'a, I: Iterator<Item = &'a str>> SnapshotReader<'a, I> {
    /// Next line as `key idx... value`, checking the key and the indices.
    fn entry(&mut self, key: &str, idx: &[usize]) -> Result<&'a str> {
        let line = self
            .lines
            .next()
            .ok_or_else(|| Error::Parse(format!("snapshot ended before `{key}`")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::Parse(format!("expected `{key}`, found `{line}`")));
        }
        for &want in idx {
            let got: usize = parse_num(parts.next().unwrap_or(""))?;
            if got != want {
                return Err(Error::Parse(format!("`{key}` entries out of order")));
            }
        }
        parts.next().ok_or_else(|| Error::Parse(format!("missing value in `{line}`")))
    }

    fn scalar<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        parse_num(self.entry(key, &[])?)
    }

    fn vector(&mut self, key: &str, dim: usize) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(dim);
        for i in 0..dim {
            v[i] = parse_num(self.entry(key, &[i])?)?;
        }
        Ok(v)
    }

    fn matrix(&mut self, key: &str, dim: usize) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = parse_num(self.entry(key, &[i, j])?)?;
            }
        }
        Ok(m)
    }
}

impl Policy for LinearFullPosterior {
    fn name(&self) -> &str {
        "linear"
    }

    fn num_arms(&self) -> usize {
        self.arms.len()
    }

    fn select(
        &mut self,
        _step: usize,
        ctx: &ContextVector,
        _revealed: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<usize> {
        let k = self.arms.len();
        if self.plays < k {
            // Round-robin warm-up, one play per arm regardless of context.
            return Ok(round_robin_init(k)[self.plays]);
        }
        let q = DVector::from_vec(self.features(ctx)?);
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for arm in 0..k {
            let v = self.posterior(arm)?.sample(rng)?.dot(&q);
            if v > best_v {
                best = arm;
                best_v = v;
            }
        }
        Ok(best)
    }

    fn observe(&mut self, ctx: &ContextVector, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.arms.len() {
            return Err(Error::domain(format!("arm {arm} out of range")));
        }
        let f = self.features(ctx)?;
        self.arms[arm].observe_features(&f, reward)?;
        self.cache[arm] = None;
        self.plays += 1;
        Ok(())
    }
}

/// Uniformly random selection.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    k: usize,
}

impl UniformPolicy {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("need at least one arm"));
        }
        Ok(Self { k })
    }
}

impl Policy for UniformPolicy {
    fn name(&self) -> &str {
        "uniform"
    }

    fn num_arms(&self) -> usize {
        self.k
    }

    fn select(&mut self, _: usize, _: &ContextVector, _: &[f64], rng: &mut dyn RngCore) -> Result<usize> {
        Ok(uniform_select(self.k, rng))
    }

    fn observe(&mut self, _: &ContextVector, _: usize, _: f64) -> Result<()> {
        Ok(())
    }
}

/// Full-CSI baseline: plays the best arm of the revealed reward row.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    k: usize,
}

impl OraclePolicy {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("need at least one arm"));
        }
        Ok(Self { k })
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "oracle"
    }

    fn num_arms(&self) -> usize {
        self.k
    }

    fn select(&mut self, _: usize, _: &ContextVector, revealed: &[f64], _: &mut dyn RngCore) -> Result<usize> {
        if revealed.len() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, actual: revealed.len() });
        }
        Ok(argmax_lowest(revealed.iter().copied()))
    }

    fn observe(&mut self, _: &ContextVector, _: usize, _: f64) -> Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Domain, SeedTree};

    fn ctx(v: &[f64]) -> ContextVector {
        ContextVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_arm_always_zero() {
        let arms = vec![LinearArmPosterior::isotropic(2, 1.0, 6.0, 6.0).unwrap()];
        let mut rng = SeedTree::new(1).stream(Domain::Policy, 0);
        for _ in 0..20 {
            assert_eq!(ts_select(&arms, &ctx(&[0.3, 0.1]), &mut rng).unwrap(), 0);
        }
        assert!(ts_select(&[], &ctx(&[0.3, 0.1]), &mut rng).is_err());
    }

    #[test]
    fn separated_posteriors_pick_the_good_arm() {
        let tight = |m: f64| {
            LinearArmPosterior::new(DMatrix::identity(1, 1), DVector::from_vec(vec![m]), 6.0, 1e-12).unwrap()
        };
        let mut arms = vec![tight(0.0); 5];
        arms[3] = tight(1.0);
        let mut rng = SeedTree::new(2).stream(Domain::Policy, 0);
        let hits = (0..1000)
            .filter(|_| ts_select(&arms, &ctx(&[1.0]), &mut rng).unwrap() == 3)
            .count();
        assert!(hits >= 990, "hits={hits}");
    }

    #[test]
    fn identical_posteriors_split_evenly() {
        let arm = LinearArmPosterior::isotropic(2, 1.0, 6.0, 6.0).unwrap();
        let arms = vec![arm.clone(), arm];
        let mut rng = SeedTree::new(3).stream(Domain::Policy, 0);
        let n = 10_000;
        let zeros = (0..n)
            .filter(|_| ts_select(&arms, &ctx(&[0.6, 0.8]), &mut rng).unwrap() == 0)
            .count();
        let f = zeros as f64 / n as f64;
        assert!((f - 0.5).abs() <= 0.05, "f={f}");
    }

    #[test]
    fn round_robin_prefix() {
        assert_eq!(round_robin_init(3), vec![0, 1, 2]);
        let mut p = LinearFullPosterior::new(3, 2, LinearHyper::default()).unwrap();
        let mut rng = SeedTree::new(4).stream(Domain::Policy, 0);
        let q = ctx(&[1.0, 0.0]);
        let mut seen = vec![];
        for step in 0..3 {
            let a = p.select(step, &q, &[], &mut rng).unwrap();
            p.observe(&q, a, 0.5).unwrap();
            seen.push(a);
        }
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn uniform_frequencies() {
        assert_eq!(uniform_select(1, &mut SeedTree::new(0).stream(Domain::Policy, 0)), 0);
        let mut rng = SeedTree::new(5).stream(Domain::Policy, 0);
        let mut counts = [0usize; 4];
        let n = 10_000;
        for _ in 0..n {
            counts[uniform_select(4, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() <= 0.015, "{counts:?}");
        }
    }

    #[test]
    fn uniform_seed_determinism() {
        let draw = |seed| {
            let mut rng = SeedTree::new(seed).stream(Domain::Policy, 0);
            (0..32).map(|_| uniform_select(80, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn oracle_reads_row() {
        let mut p = OraclePolicy::new(3).unwrap();
        let mut rng = SeedTree::new(6).stream(Domain::Policy, 0);
        let q = ctx(&[1.0]);
        assert_eq!(p.select(0, &q, &[0.2, 0.9, 0.9], &mut rng).unwrap(), 1);
        assert!(p.select(0, &q, &[0.2], &mut rng).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let mut p = LinearFullPosterior::new(3, 2, LinearHyper::default()).unwrap();
        let mut rng = SeedTree::new(7).stream(Domain::Policy, 0);
        for step in 0..20 {
            let q = ctx(&[(step as f64).sin(), (step as f64 * 0.3).cos()]);
            let a = p.select(step, &q, &[], &mut rng).unwrap();
            p.observe(&q, a, 0.1 * (step % 7) as f64).unwrap();
        }
        let text = p.to_snapshot();
        let back = LinearFullPosterior::from_snapshot(&text).unwrap();
        assert_eq!(back.arms(), p.arms());
        assert_eq!(back.to_snapshot(), text);
        assert!(LinearFullPosterior::from_snapshot("garbage").is_err());
        let truncated: String = text.lines().take(12).collect::<Vec<_>>().join("\n");
        assert!(LinearFullPosterior::from_snapshot(&truncated).is_err());
    }
}
