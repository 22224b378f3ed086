//! Seeded sampling for every distribution family the generators use.
//!
//! All randomness flows through [`RngState`], a ChaCha8 stream keyed by
//! `(seed, stream)`. Distribution descriptions ([`DistributionSpec`]) are plain
//! data so they can live in config files; each is compiled into a sampler
//! before use, which is where kind/role mismatches are rejected.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Normal, Pareto};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rejection attempts for heavy-tailed index families before falling back to uniform.
pub const MAX_INDEX_RETRIES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("{kind} cannot be used as {role}")]
    WrongKind { kind: &'static str, role: &'static str },
    #[error("invalid parameters for {kind}: {msg}")]
    BadParams { kind: &'static str, msg: String },
    #[error("index range is empty (n = {n})")]
    EmptyRange { n: usize },
    #[error("cannot draw {k} distinct indices from {n}")]
    TooManyIndices { k: usize, n: usize },
    #[error("bias sequences need length at least 1")]
    ZeroLength,
    #[error("weights must be finite, nonnegative, and not all zero")]
    BadWeights,
}

/// Deterministic random stream. Identical `(seed, stream)` pairs produce
/// identical sequences on every platform.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngState { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Draw a key for a family of child streams (see [`RngState::child`]).
    pub fn fork_key(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Child stream `index` under a key obtained from [`fork_key`](Self::fork_key).
    pub fn child(key: u64, index: u64) -> RngState {
        RngState::new(key, index)
    }
}

impl RngCore for RngState {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// A tagged description of one sampling distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DistributionSpec {
    /// Uniform integers in `[low, high]`; as a variable family, intersected with `1..=n`.
    UniformIndex {
        low: i64,
        high: i64,
    },
    Pareto {
        shape: f64,
        scale: f64,
    },
    /// Finite power law `p(r) ∝ r^-beta` on `1..=n`.
    PowerLaw {
        beta: f64,
    },
    /// Parameters of the underlying normal.
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    NormalClipped {
        mean: f64,
        std: f64,
        lo: f64,
        hi: f64,
    },
    Bernoulli {
        p: f64,
    },
    WeightedCategorical {
        weights: Vec<f64>,
    },
    /// Uniform over the `2^l - 1` binary sequences with at least one 1.
    UniformNonZeroBias,
    /// Uniform over sequences with exactly `l - 1` ones (`[1]` when `l = 1`).
    KMinusOneBias,
    /// Weights over bloom choices {0, 1, 2}; normalized before use.
    BloomWeights {
        w0: f64,
        w1: f64,
        w2: f64,
    },
}

impl DistributionSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            DistributionSpec::UniformIndex { .. } => "UniformIndex",
            DistributionSpec::Pareto { .. } => "Pareto",
            DistributionSpec::PowerLaw { .. } => "PowerLaw",
            DistributionSpec::LogNormal { .. } => "LogNormal",
            DistributionSpec::NormalClipped { .. } => "NormalClipped",
            DistributionSpec::Bernoulli { .. } => "Bernoulli",
            DistributionSpec::WeightedCategorical { .. } => "WeightedCategorical",
            DistributionSpec::UniformNonZeroBias => "UniformNonZeroBias",
            DistributionSpec::KMinusOneBias => "KMinusOneBias",
            DistributionSpec::BloomWeights { .. } => "BloomWeights",
        }
    }

    /// Constant `k` as a count distribution.
    pub fn constant(k: i64) -> Self {
        DistributionSpec::UniformIndex { low: k, high: k }
    }

    pub fn uniform_vars() -> Self {
        DistributionSpec::UniformIndex { low: 0, high: i64::MAX }
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        let kind = self.kind_name();
        let bad = |msg: &str| Err(SampleError::BadParams { kind, msg: msg.to_string() });
        match *self {
            DistributionSpec::UniformIndex { low, high } if low > high => bad("low > high"),
            DistributionSpec::Pareto { shape, scale }
                if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) =>
            {
                bad("shape and scale must be positive")
            }
            DistributionSpec::PowerLaw { beta } if !beta.is_finite() => bad("beta must be finite"),
            DistributionSpec::LogNormal { mu, sigma } if !(mu.is_finite() && sigma >= 0.0 && sigma.is_finite()) => {
                bad("mu finite, sigma >= 0")
            }
            DistributionSpec::NormalClipped { mean, std, lo, hi } => {
                if !(mean.is_finite() && std >= 0.0 && std.is_finite()) {
                    bad("mean finite, std >= 0")
                } else if !(lo < hi) {
                    bad("requires lo < hi")
                } else {
                    Ok(())
                }
            }
            DistributionSpec::Bernoulli { p } if !(0.0..=1.0).contains(&p) => bad("p must lie in [0, 1]"),
            DistributionSpec::WeightedCategorical { ref weights } => check_weights(weights),
            DistributionSpec::BloomWeights { w0, w1, w2 } => check_weights(&[w0, w1, w2]),
            _ => Ok(()),
        }
    }
}

fn check_weights(weights: &[f64]) -> Result<(), SampleError> {
    if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().all(|w| *w == 0.0) {
        return Err(SampleError::BadWeights);
    }
    Ok(())
}

/// Draw index `i` with probability `w_i / Σw`.
pub fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize, SampleError> {
    Ok(Categorical::new(weights)?.sample(rng))
}

/// Precompiled weighted choice.
#[derive(Clone, Debug)]
pub struct Categorical {
    dist: WeightedIndex<f64>,
    len: usize,
}

impl Categorical {
    pub fn new(weights: &[f64]) -> Result<Self, SampleError> {
        check_weights(weights)?;
        let dist = WeightedIndex::new(weights).map_err(|_| SampleError::BadWeights)?;
        Ok(Categorical { dist, len: weights.len() })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[derive(Clone, Debug)]
enum IndexKind {
    Uniform {
        lo: usize,
        hi: usize,
    },
    Pareto(Pareto<f64>),
    LogNormal(LogNormal<f64>),
    /// Cumulative weights `r^-beta` for r = 1..=n.
    PowerLaw {
        cdf: Vec<f64>,
        weights: Vec<f64>,
    },
}

/// A variable-index family specialised to `1..=n`.
#[derive(Clone, Debug)]
pub struct IndexSampler {
    n: usize,
    kind: IndexKind,
}

impl IndexSampler {
    pub fn new(spec: &DistributionSpec, n: usize) -> Result<Self, SampleError> {
        spec.validate()?;
        if n == 0 {
            return Err(SampleError::EmptyRange { n });
        }
        let kind = match *spec {
            DistributionSpec::UniformIndex { low, high } => {
                let lo = low.max(1) as usize;
                let hi = high.clamp(0, n as i64) as usize;
                if lo > hi {
                    return Err(SampleError::EmptyRange { n });
                }
                IndexKind::Uniform { lo, hi }
            }
            DistributionSpec::Pareto { shape, scale } => IndexKind::Pareto(
                Pareto::new(scale, shape).map_err(|e| SampleError::BadParams { kind: "Pareto", msg: e.to_string() })?,
            ),
            DistributionSpec::LogNormal { mu, sigma } => IndexKind::LogNormal(
                LogNormal::new(mu, sigma)
                    .map_err(|e| SampleError::BadParams { kind: "LogNormal", msg: e.to_string() })?,
            ),
            DistributionSpec::PowerLaw { beta } => {
                let weights: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-beta)).collect();
                let mut acc = 0.0;
                let cdf = weights
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                IndexKind::PowerLaw { cdf, weights }
            }
            _ => return Err(SampleError::WrongKind { kind: spec.kind_name(), role: "a variable-index family" }),
        };
        Ok(IndexSampler { n, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, IndexKind::Uniform { .. })
    }

    /// One raw draw; `None` when a heavy-tailed draw lands outside `1..=n`.
    #[inline]
    fn draw_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        match &self.kind {
            IndexKind::Uniform { lo, hi } => Some(rng.random_range(*lo..=*hi)),
            IndexKind::Pareto(d) => discretize(d.sample(rng), self.n),
            IndexKind::LogNormal(d) => discretize(d.sample(rng), self.n),
            IndexKind::PowerLaw { cdf, .. } => {
                let total = *cdf.last().unwrap();
                let u = rng.random::<f64>() * total;
                Some(cdf.partition_point(|&c| c <= u).min(self.n - 1) + 1)
            }
        }
    }

    fn in_support(&self, i: usize) -> bool {
        match self.kind {
            IndexKind::Uniform { lo, hi } => (lo..=hi).contains(&i),
            _ => (1..=self.n).contains(&i),
        }
    }

    /// One index in `1..=n`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample_where(rng, |_| true).expect("support is nonempty")
    }

    /// Draw from the family conditioned on `accept`. Rejection first; after
    /// [`MAX_INDEX_RETRIES`] misses the conditional is sampled explicitly
    /// (exactly for uniform and power-law families, uniformly over the accepted
    /// set for the heavy-tailed continuous ones). `None` if nothing is accepted.
    pub fn sample_where<R, F>(&self, rng: &mut R, accept: F) -> Option<usize>
    where
        R: Rng + ?Sized,
        F: Fn(usize) -> bool,
    {
        for _ in 0..MAX_INDEX_RETRIES {
            if let Some(i) = self.draw_raw(rng) {
                if accept(i) {
                    return Some(i);
                }
            }
        }
        let candidates: Vec<usize> = (1..=self.n).filter(|&i| self.in_support(i) && accept(i)).collect();
        if candidates.is_empty() {
            return None;
        }
        match &self.kind {
            IndexKind::PowerLaw { weights, .. } => {
                let total: f64 = candidates.iter().map(|&i| weights[i - 1]).sum();
                let mut u = rng.random::<f64>() * total;
                for &i in &candidates {
                    u -= weights[i - 1];
                    if u < 0.0 {
                        return Some(i);
                    }
                }
                candidates.last().copied()
            }
            _ => Some(candidates[rng.random_range(0..candidates.len())]),
        }
    }

    /// `k` pairwise-distinct indices, drawn sequentially without replacement.
    pub fn sample_unique<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Vec<usize>, SampleError> {
        if let IndexKind::Uniform { lo, hi } = self.kind {
            let span = hi - lo + 1;
            if k > span {
                return Err(SampleError::TooManyIndices { k, n: span });
            }
            return Ok(rand::seq::index::sample(rng, span, k).into_iter().map(|i| i + lo).collect());
        }
        if k > self.n {
            return Err(SampleError::TooManyIndices { k, n: self.n });
        }
        let mut out: Vec<usize> = Vec::with_capacity(k);
        for _ in 0..k {
            let i =
                self.sample_where(rng, |i| !out.contains(&i)).ok_or(SampleError::TooManyIndices { k, n: self.n })?;
            out.push(i);
        }
        Ok(out)
    }
}

#[inline]
fn discretize(x: f64, n: usize) -> Option<usize> {
    let f = x.floor();
    if f >= 1.0 && f <= n as f64 {
        Some(f as usize)
    } else {
        None
    }
}

pub fn sample_var_index<R: Rng + ?Sized>(spec: &DistributionSpec, n: usize, rng: &mut R) -> Result<usize, SampleError> {
    Ok(IndexSampler::new(spec, n)?.sample(rng))
}

pub fn sample_unique_indices<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>, SampleError> {
    if k == 0 || k > n {
        return Err(SampleError::TooManyIndices { k, n });
    }
    IndexSampler::new(spec, n)?.sample_unique(k, rng)
}

/// Distribution over "which literals agree with the hidden assignment".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiasSampler {
    UniformNonZero,
    KMinusOne,
}

impl BiasSampler {
    pub fn new(spec: &DistributionSpec) -> Result<Self, SampleError> {
        match spec {
            DistributionSpec::UniformNonZeroBias => Ok(BiasSampler::UniformNonZero),
            DistributionSpec::KMinusOneBias => Ok(BiasSampler::KMinusOne),
            other => Err(SampleError::WrongKind { kind: other.kind_name(), role: "a polarity-bias family" }),
        }
    }

    /// Sequence of length `l` with at least one `true`.
    pub fn sample<R: Rng + ?Sized>(&self, l: usize, rng: &mut R) -> Result<Vec<bool>, SampleError> {
        if l == 0 {
            return Err(SampleError::ZeroLength);
        }
        Ok(match self {
            BiasSampler::UniformNonZero if l < 64 => {
                let x: u64 = rng.random_range(1..(1u64 << l));
                (0..l).map(|j| x >> j & 1 == 1).collect()
            }
            BiasSampler::UniformNonZero => loop {
                let seq: Vec<bool> = (0..l).map(|_| rng.random::<bool>()).collect();
                if seq.iter().any(|&b| b) {
                    break seq;
                }
            },
            BiasSampler::KMinusOne if l == 1 => vec![true],
            BiasSampler::KMinusOne => {
                let zero = rng.random_range(0..l);
                (0..l).map(|j| j != zero).collect()
            }
        })
    }
}

pub fn sample_bias_seq<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    l: usize,
    rng: &mut R,
) -> Result<Vec<bool>, SampleError> {
    BiasSampler::new(spec)?.sample(l, rng)
}

/// Integer-valued distribution, used for literals-per-clause.
#[derive(Clone, Debug)]
pub enum CountSampler {
    Uniform { low: i64, high: i64 },
    Normal { dist: Normal<f64>, lo: f64, hi: f64 },
}

impl CountSampler {
    pub fn new(spec: &DistributionSpec) -> Result<Self, SampleError> {
        spec.validate()?;
        match *spec {
            DistributionSpec::UniformIndex { low, high } => Ok(CountSampler::Uniform { low, high }),
            DistributionSpec::NormalClipped { mean, std, lo, hi } => Ok(CountSampler::Normal {
                dist: Normal::new(mean, std)
                    .map_err(|e| SampleError::BadParams { kind: "NormalClipped", msg: e.to_string() })?,
                lo,
                hi,
            }),
            ref other => Err(SampleError::WrongKind { kind: other.kind_name(), role: "a count distribution" }),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        match self {
            CountSampler::Uniform { low, high } => rng.random_range(*low..=*high),
            CountSampler::Normal { dist, lo, hi } => dist.sample(rng).clamp(*lo, *hi).round() as i64,
        }
    }

    /// Sample and clamp into `[1, n]`.
    pub fn sample_clamped<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> usize {
        self.sample(rng).clamp(1, n as i64) as usize
    }
}

/// Bernoulli draws, used for assignment polarities and clause selection.
#[derive(Clone, Copy, Debug)]
pub struct BoolSampler {
    p: f64,
}

impl BoolSampler {
    pub fn new(spec: &DistributionSpec) -> Result<Self, SampleError> {
        spec.validate()?;
        match *spec {
            DistributionSpec::Bernoulli { p } => Ok(BoolSampler { p }),
            ref other => Err(SampleError::WrongKind { kind: other.kind_name(), role: "a Bernoulli distribution" }),
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.random::<f64>() < self.p
    }
}

/// Choice over {0, 1, 2}: carry a literal to the positive child, the negative child, or both.
#[derive(Clone, Debug)]
pub struct BloomSampler(Categorical);

impl BloomSampler {
    pub fn new(spec: &DistributionSpec) -> Result<Self, SampleError> {
        match *spec {
            DistributionSpec::BloomWeights { w0, w1, w2 } => Ok(BloomSampler(Categorical::new(&[w0, w1, w2])?)),
            DistributionSpec::WeightedCategorical { ref weights } if weights.len() == 3 => {
                Ok(BloomSampler(Categorical::new(weights)?))
            }
            ref other => Err(SampleError::WrongKind { kind: other.kind_name(), role: "a bloom distribution" }),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        self.0.sample(rng) as u8
    }
}

/// Clause-to-variable ratio: `Normal(mean, std)` clipped to `clip`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseRatioSpec {
    pub mean: f64,
    pub std: f64,
    pub clip: (f64, f64),
}

impl ClauseRatioSpec {
    pub fn validate(&self) -> Result<(), SampleError> {
        let bad = |msg: &str| Err(SampleError::BadParams { kind: "ClauseRatio", msg: msg.to_string() });
        if !(self.mean.is_finite() && self.std.is_finite() && self.std >= 0.0) {
            return bad("mean finite, std >= 0");
        }
        if !(self.clip.0 <= self.clip.1) || !(self.clip.0 >= 0.0) {
            return bad("clip must satisfy 0 <= lo <= hi");
        }
        Ok(())
    }

    pub fn sample_ratio<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let r =
            if self.std == 0.0 { self.mean } else { Normal::new(self.mean, self.std).expect("validated").sample(rng) };
        r.clamp(self.clip.0, self.clip.1)
    }
}

/// `m = round(r · n)` with `r` drawn from `ratio`, at least 1.
pub fn sample_clause_count<R: Rng + ?Sized>(ratio: &ClauseRatioSpec, n: usize, rng: &mut R) -> usize {
    let r = ratio.sample_ratio(rng);
    ((r * n as f64).round() as usize).max(1)
}
