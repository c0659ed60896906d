//! Per-bit sampling distributions and bit-to-client assignment.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::codec::FixedPointCodec;
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Probability `p_j` of asking a client about bit `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution(Vec<f64>);

impl SamplingDistribution {
    /// Accepts probabilities that already sum to one (up to rounding) and
    /// renormalizes them exactly.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let total = validate(&p)?;
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self::normalized(p, total))
    }

    /// L1-normalizes non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total = validate(&weights)?;
        Ok(Self::normalized(weights, total))
    }

    fn normalized(mut p: Vec<f64>, total: f64) -> Self {
        p.iter_mut().for_each(|v| *v /= total);
        Self(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }
}

fn validate(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::InvalidDistribution("no bits".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "weight {w} is negative or not finite"
        )));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDistribution("weights sum to zero".into()));
    }
    Ok(total)
}

pub fn uniform_weights(b: usize) -> Result<SamplingDistribution> {
    SamplingDistribution::from_weights(vec![1.0; b])
}

/// `p_j ∝ 2^(alpha * j)`.
pub fn geometric_weights(b: usize, alpha: f64) -> Result<SamplingDistribution> {
    geometric_over((0..b).collect(), alpha)
}

/// Geometric weights over a codec's logical bits, keyed by each bit's magnitude
/// exponent so both halves of a bit-split codec get matching weights.
pub fn geometric_weights_for(codec: &FixedPointCodec, alpha: f64) -> Result<SamplingDistribution> {
    geometric_over(
        (0..codec.logical_bits())
            .map(|j| codec.magnitude_index(j))
            .collect(),
        alpha,
    )
}

fn geometric_over(exponents: Vec<usize>, alpha: f64) -> Result<SamplingDistribution> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "alpha must be finite and non-negative, got {alpha}"
        )));
    }
    let top = exponents.iter().copied().max().unwrap_or(0) as f64;
    SamplingDistribution::from_weights(
        exponents
            .into_iter()
            .map(|j| (alpha * (j as f64 - top)).exp2())
            .collect(),
    )
}

/// `beta_j = 4^j m_j (1 - m_j)` with means clamped into `[0, 1]`.
pub fn bit_scores(bit_means: &[f64]) -> Vec<f64> {
    bit_means
        .iter()
        .enumerate()
        .map(|(j, &m)| score(4f64.powi(j as i32), m))
        .collect()
}

/// Scores using the codec's reconstruction weights in place of `2^j`.
pub fn bit_scores_for(codec: &FixedPointCodec, bit_means: &[f64]) -> Vec<f64> {
    bit_means
        .iter()
        .enumerate()
        .map(|(j, &m)| score(codec.bit_weight(j).powi(2), m))
        .collect()
}

fn score(weight_sq: f64, mean: f64) -> f64 {
    let m = if mean.is_nan() { 0.0 } else { mean.clamp(0.0, 1.0) };
    weight_sq * m * (1.0 - m)
}

/// Variance-minimizing weights `p_j ∝ beta_j^alpha`; `alpha = 0.5` is the
/// square-root allocation that minimizes the single-round variance.
pub fn optimal_weights(bit_means: &[f64], alpha: f64) -> Result<SamplingDistribution> {
    optimal_from_scores(&bit_scores(bit_means), alpha)
}

pub fn optimal_weights_for(
    codec: &FixedPointCodec,
    bit_means: &[f64],
    alpha: f64,
) -> Result<SamplingDistribution> {
    optimal_from_scores(&bit_scores_for(codec, bit_means), alpha)
}

/// Bits with zero score get probability zero.
pub fn optimal_from_scores(scores: &[f64], alpha: f64) -> Result<SamplingDistribution> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "alpha must be finite and non-negative, got {alpha}"
        )));
    }
    let top = scores
        .iter()
        .copied()
        .filter(|s| s.is_finite())
        .fold(0.0, f64::max);
    if top <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    let weights = scores
        .iter()
        .map(|&s| if s > 0.0 { (s / top).powf(alpha) } else { 0.0 })
        .collect();
    SamplingDistribution::from_weights(weights)
}

/// Bit index requested from each client.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitAssignment {
    assignment: Vec<usize>,
    counts: Vec<usize>,
}

impl BitAssignment {
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Clients assigned to each bit.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// Largest-remainder allocation of `n` reports: each count is within one of
/// `p_j * n` and the counts sum to `n`.
pub fn central_counts(n: usize, dist: &SamplingDistribution) -> Vec<usize> {
    allocate(n, dist.probabilities(), usize::MAX)
}

fn allocate(total: usize, p: &[f64], cap: usize) -> Vec<usize> {
    let mut counts = vec![0usize; p.len()];
    let mut fixed = vec![false; p.len()];
    loop {
        let remaining = total - counts.iter().zip(&fixed).filter(|(_, f)| **f).map(|(c, _)| c).sum::<usize>();
        let free: Vec<usize> = (0..p.len()).filter(|&j| !fixed[j] && p[j] > 0.0).collect();
        let mass: f64 = free.iter().map(|&j| p[j]).sum();
        if free.is_empty() || mass <= 0.0 {
            return counts;
        }
        let mut assigned = 0;
        let mut remainders = Vec::with_capacity(free.len());
        for &j in &free {
            let exact = p[j] / mass * remaining as f64;
            counts[j] = exact.floor() as usize;
            assigned += counts[j];
            remainders.push((exact - exact.floor(), j));
        }
        remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let leftover = remaining.saturating_sub(assigned);
        for k in 0..leftover {
            counts[remainders[k % remainders.len()].1] += 1;
        }
        let over: Vec<usize> = free.iter().copied().filter(|&j| counts[j] > cap).collect();
        if over.is_empty() {
            return counts;
        }
        for j in over {
            counts[j] = cap;
            fixed[j] = true;
        }
    }
}

/// Central (quasi-Monte Carlo) assignment: exact largest-remainder counts per bit,
/// dealt to clients in uniformly random order.
pub fn assign_central<R: Rng + ?Sized>(
    n: usize,
    dist: &SamplingDistribution,
    rng: &mut R,
) -> BitAssignment {
    let counts = central_counts(n, dist);
    let mut assignment: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat(j).take(c))
        .collect();
    assignment.shuffle(rng);
    BitAssignment { assignment, counts }
}

/// Central assignment of `per_client` distinct bits to each of `n` clients.
///
/// Slots are allocated over `n * per_client` reports with no bit exceeding `n`
/// reports; clients receive fewer bits only when too few bits have positive
/// probability.
pub fn assign_central_multi<R: Rng + ?Sized>(
    n: usize,
    per_client: usize,
    dist: &SamplingDistribution,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let counts = allocate(n * per_client, dist.probabilities(), n);
    let slots: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat(j).take(c))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut per = vec![Vec::with_capacity(per_client); n];
    // Each bit's run is at most n slots long, so slots k and k + n never share a bit.
    for (k, bit) in slots.into_iter().enumerate() {
        per[order[k % n]].push(bit);
    }
    per
}

/// Local randomness: the client draws its own bit by inverse-CDF sampling.
pub fn sample_local<R: Rng + ?Sized>(dist: &SamplingDistribution, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last = 0;
    for (j, &p) in dist.probabilities().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last = j;
        if u < cumulative {
            return j;
        }
    }
    last
}

/// Single-round variance `(1/n) Σ w_j² m_j (1 - m_j) / p_j` with integer weights
/// `w_j = 2^j`.
pub fn theoretical_variance(bit_means: &[f64], dist: &SamplingDistribution, n: usize) -> Result<f64> {
    variance_from_scores(&bit_scores(bit_means), dist, n)
}

/// As [`theoretical_variance`], using the codec's reconstruction weights.
pub fn theoretical_variance_for(
    codec: &FixedPointCodec,
    bit_means: &[f64],
    dist: &SamplingDistribution,
    n: usize,
) -> Result<f64> {
    variance_from_scores(&bit_scores_for(codec, bit_means), dist, n)
}

pub fn variance_from_scores(scores: &[f64], dist: &SamplingDistribution, n: usize) -> Result<f64> {
    if scores.len() != dist.len() {
        return Err(Error::LengthMismatch {
            expected: dist.len(),
            actual: scores.len(),
        });
    }
    if n == 0 {
        return Err(Error::InsufficientClients { needed: 1, available: 0 });
    }
    let mut total = 0.0;
    for (j, (&beta, &p)) in scores.iter().zip(dist.probabilities()).enumerate() {
        if beta == 0.0 {
            continue;
        }
        if p <= 0.0 {
            return Err(Error::InfiniteVariance { index: j });
        }
        total += beta / p;
    }
    Ok(total / n as f64)
}
