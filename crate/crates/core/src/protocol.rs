//! Single-round and adaptive two-round bit pushing over a simulated population.
//!
//! Every client discloses one bit (or `b_send` distinct bits) of its fixed-point
//! encoding. The server assigns bits centrally by default, gathers per-bit means
//! and decodes `Σ w_j m_j`. The adaptive protocol spends a `δ` fraction of the
//! clients learning the bit means and samples the rest with the variance-optimal
//! allocation derived from them.
//!
//! Randomness: the caller's generator drives server-side choices (client split,
//! bit assignment) and yields one seed per round; client `i` of that round draws
//! from its own ChaCha stream `i`, so results do not depend on scheduling.

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::FixedPointCodec;
use crate::error::{Error, Result};
use crate::privacy::{squash_bits, PrivacyMeter, RandomizedResponse};
use crate::sampling::{
    assign_central, assign_central_multi, geometric_weights_for, optimal_weights_for, sample_local,
    uniform_weights, SamplingDistribution,
};
use crate::stats::BitStatistics;

pub use crate::sampling::{theoretical_variance, theoretical_variance_for};

pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_DELTA: f64 = 1.0 / 3.0;
pub const DEFAULT_ADAPTIVE_ALPHA: f64 = 1.0;
pub const DEFAULT_WEIGHTED_ALPHA: f64 = 0.5;
pub const DEFAULT_SQUASH_K: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    /// Round-one weight exponent: `p1_j ∝ (2^j)^gamma`.
    pub gamma: f64,
    /// Fraction of clients spent on round one.
    pub delta: f64,
    /// Weight exponent; `None` picks the per-protocol default.
    pub alpha: Option<f64>,
    /// Enables randomized response on every disclosed bit.
    pub epsilon: Option<f64>,
    /// Pool round-one reports into the final means.
    pub caching: bool,
    /// Squash multiplier; `None` means 1 under RR. Ignored without RR.
    pub squash_k: Option<f64>,
    /// Distinct bits disclosed per client per round.
    pub b_send: usize,
    /// Clients pick their own bit instead of the server assigning it.
    pub local_randomness: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            delta: DEFAULT_DELTA,
            alpha: None,
            epsilon: None,
            caching: true,
            squash_k: None,
            b_send: 1,
            local_randomness: false,
        }
    }
}

impl ProtocolConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_caching(mut self, caching: bool) -> Self {
        self.caching = caching;
        self
    }

    pub fn with_squash_k(mut self, k: f64) -> Self {
        self.squash_k = Some(k);
        self
    }

    pub fn with_b_send(mut self, b_send: usize) -> Self {
        self.b_send = b_send;
        self
    }

    pub fn adaptive_alpha(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_ADAPTIVE_ALPHA)
    }

    pub fn weighted_alpha(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_WEIGHTED_ALPHA)
    }

    /// Effective squash multiplier: zero (off) without randomized response.
    pub fn effective_squash_k(&self) -> f64 {
        match self.epsilon {
            Some(_) => self.squash_k.unwrap_or(DEFAULT_SQUASH_K),
            None => 0.0,
        }
    }

    pub fn randomized_response(&self) -> Result<Option<RandomizedResponse>> {
        self.epsilon.map(RandomizedResponse::new).transpose()
    }

    pub fn validate(&self, codec: &FixedPointCodec) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidConfig(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if let Some(alpha) = self.alpha {
            if !(alpha.is_finite() && alpha >= 0.0) {
                return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {alpha}")));
            }
        }
        if self.b_send == 0 || self.b_send > codec.logical_bits() {
            return Err(Error::InvalidConfig(format!(
                "b_send must be in 1..={}, got {}",
                codec.logical_bits(),
                self.b_send
            )));
        }
        self.randomized_response()?;
        Ok(())
    }
}

/// What one client sends: the requested bit index and its (possibly flipped) value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClientReport {
    pub bit_index: usize,
    pub reported_bit: u8,
    pub rr_applied: bool,
}

pub fn client_report<R: Rng + ?Sized>(
    value: f64,
    assigned: usize,
    codec: &FixedPointCodec,
    rr: Option<&RandomizedResponse>,
    rng: &mut R,
) -> Result<ClientReport> {
    let bit = codec.bit_at(value, assigned)?;
    let reported_bit = match rr {
        Some(rr) => rr.perturb(bit, rng),
        None => bit,
    };
    Ok(ClientReport {
        bit_index: assigned,
        reported_bit,
        rr_applied: rr.is_some(),
    })
}

/// Per-bit statistics of a batch of reports, RR reports unbiased before averaging.
pub fn collect_stats(
    reports: &[ClientReport],
    width: usize,
    rr: Option<&RandomizedResponse>,
) -> Result<BitStatistics> {
    let mut stats = BitStatistics::empty(width);
    for r in reports {
        if r.bit_index >= width {
            return Err(Error::BitIndex {
                index: r.bit_index,
                width,
            });
        }
        let value = match (rr, r.rr_applied) {
            (Some(rr), true) => rr.unbias(r.reported_bit as f64),
            _ => r.reported_bit as f64,
        };
        stats.record(r.bit_index, value);
    }
    stats.finish();
    Ok(stats)
}

/// Decode one round of reports. Bits nobody reported on contribute zero.
pub fn aggregate_round(
    reports: &[ClientReport],
    codec: &FixedPointCodec,
    rr: Option<&RandomizedResponse>,
) -> Result<(f64, BitStatistics)> {
    if reports.is_empty() {
        return Err(Error::EmptyReports);
    }
    let stats = collect_stats(reports, codec.logical_bits(), rr)?;
    Ok((codec.decode_means(stats.means())?, stats))
}

/// Result of one protocol execution.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub estimate: f64,
    pub stats: BitStatistics,
    /// Clients whose values were clipped into the codec range.
    pub clipped: usize,
    pub meter: PrivacyMeter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveOutcome {
    pub estimate: f64,
    pub round1: BitStatistics,
    /// `None` when round two was skipped because no bit carried variance.
    pub round2: Option<BitStatistics>,
    /// Means actually decoded (pooled when caching).
    pub final_stats: BitStatistics,
    pub round2_distribution: Option<SamplingDistribution>,
    pub clipped: usize,
    pub meter: PrivacyMeter,
}

impl AdaptiveOutcome {
    pub fn fell_back(&self) -> bool {
        self.round2.is_none()
    }
}

struct Round<'a> {
    codec: &'a FixedPointCodec,
    rr: Option<RandomizedResponse>,
    b_send: usize,
    local: bool,
}

impl Round<'_> {
    /// Collect reports from `clients` (population indices) under `dist`.
    fn run<R: Rng + ?Sized>(
        &self,
        population: &[f64],
        clients: &[usize],
        dist: &SamplingDistribution,
        meter: &mut PrivacyMeter,
        rng: &mut R,
    ) -> Result<(BitStatistics, usize)> {
        let width = self.codec.logical_bits();
        if dist.len() != width {
            return Err(Error::LengthMismatch {
                expected: width,
                actual: dist.len(),
            });
        }
        let seed: u64 = rng.gen();
        let assigned: Vec<Vec<usize>> = if self.local {
            Vec::new()
        } else if self.b_send == 1 {
            assign_central(clients.len(), dist, rng)
                .assignment()
                .iter()
                .map(|&j| vec![j])
                .collect()
        } else {
            assign_central_multi(clients.len(), self.b_send, dist, rng)
        };

        let codec = self.codec;
        let rr = self.rr.as_ref();
        let per_client: Vec<Result<(Vec<ClientReport>, bool)>> = clients
            .par_iter()
            .enumerate()
            .map(|(slot, &client)| {
                let mut crng = ChaCha8Rng::seed_from_u64(seed);
                crng.set_stream(client as u64);
                let bits = if self.local {
                    local_bits(dist, self.b_send, &mut crng)
                } else {
                    assigned[slot].clone()
                };
                let (value, clipped) = codec.clip(population[client]);
                let reports = bits
                    .into_iter()
                    .map(|j| client_report(value, j, codec, rr, &mut crng))
                    .collect::<Result<Vec<_>>>()?;
                Ok((reports, clipped))
            })
            .collect();

        let mut stats = BitStatistics::empty(width);
        let mut clipped = 0;
        for (&client, outcome) in clients.iter().zip(per_client) {
            let (reports, was_clipped) = outcome?;
            clipped += was_clipped as usize;
            for r in reports {
                let value = match rr {
                    Some(rr) => rr.unbias(r.reported_bit as f64),
                    None => r.reported_bit as f64,
                };
                stats.record(r.bit_index, value);
                meter.charge(client, rr);
            }
        }
        stats.finish();
        Ok((stats, clipped))
    }
}

fn local_bits<R: Rng + ?Sized>(dist: &SamplingDistribution, count: usize, rng: &mut R) -> Vec<usize> {
    let mut bits = Vec::with_capacity(count);
    let positive = dist.probabilities().iter().filter(|&&p| p > 0.0).count();
    while bits.len() < count.min(positive) {
        let j = sample_local(dist, rng);
        if !bits.contains(&j) {
            bits.push(j);
        }
    }
    bits
}

fn round_for<'a>(codec: &'a FixedPointCodec, config: &ProtocolConfig) -> Result<Round<'a>> {
    config.validate(codec)?;
    Ok(Round {
        codec,
        rr: config.randomized_response()?,
        b_send: config.b_send,
        local: config.local_randomness,
    })
}

/// Single-round bit pushing with a fixed sampling distribution. Squashing is
/// reserved for the adaptive protocol.
pub fn run_basic<R: Rng + ?Sized>(
    population: &[f64],
    codec: &FixedPointCodec,
    config: &ProtocolConfig,
    dist: &SamplingDistribution,
    rng: &mut R,
) -> Result<RoundOutcome> {
    if population.is_empty() {
        return Err(Error::EmptyReports);
    }
    let round = round_for(codec, config)?;
    let clients: Vec<usize> = (0..population.len()).collect();
    let mut meter = PrivacyMeter::with_clients(population.len());
    let (stats, clipped) = round.run(population, &clients, dist, &mut meter, rng)?;
    Ok(RoundOutcome {
        estimate: codec.decode_means(stats.means())?,
        stats,
        clipped,
        meter,
    })
}

/// Two-round adaptive bit pushing.
pub fn run_adaptive<R: Rng + ?Sized>(
    population: &[f64],
    codec: &FixedPointCodec,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<AdaptiveOutcome> {
    let n = population.len();
    if n < 2 {
        return Err(Error::InsufficientClients { needed: 2, available: n });
    }
    let round = round_for(codec, config)?;
    let squash_k = config.effective_squash_k();
    let n1 = ((config.delta * n as f64).round() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let (first, second) = order.split_at(n1);
    let mut meter = PrivacyMeter::with_clients(n);

    let p1 = geometric_weights_for(codec, config.gamma)?;
    let (mut round1, mut clipped) = round.run(population, first, &p1, &mut meter, rng)?;
    if let Some(rr) = &round.rr {
        round1 = squash_bits(&round1, rr, squash_k);
    }

    let p2 = match optimal_weights_for(codec, round1.means(), config.adaptive_alpha()) {
        Ok(p2) => p2,
        Err(Error::DegenerateDistribution) => {
            warn!("no bit carries variance after round one; returning the round-one estimate");
            return Ok(AdaptiveOutcome {
                estimate: codec.decode_means(round1.means())?,
                final_stats: round1.clone(),
                round1,
                round2: None,
                round2_distribution: None,
                clipped,
                meter,
            });
        }
        Err(e) => return Err(e),
    };
    let (round2, clipped2) = round.run(population, second, &p2, &mut meter, rng)?;
    clipped += clipped2;

    let mut final_stats = if config.caching {
        round1.merge(&round2)
    } else {
        round2.clone()
    };
    if let Some(rr) = &round.rr {
        final_stats = squash_bits(&final_stats, rr, squash_k);
    }
    Ok(AdaptiveOutcome {
        estimate: codec.decode_means(final_stats.means())?,
        round1,
        round2: Some(round2),
        final_stats,
        round2_distribution: Some(p2),
        clipped,
        meter,
    })
}

/// The bit-pushing variants exposed by the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BitPushing {
    /// Single round, every bit equally likely.
    Uniform,
    /// Single round, `p_j ∝ 2^(alpha j)`.
    Weighted,
    /// Two rounds with learned weights.
    Adaptive,
}

/// Outcome shared by all bit-pushing variants.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanOutcome {
    pub estimate: f64,
    pub stats: BitStatistics,
    pub clipped: usize,
    pub meter: PrivacyMeter,
}

impl MeanOutcome {
    /// Plug-in variance of the estimate from the decoded statistics; only
    /// meaningful without randomized response.
    pub fn plug_in_variance(&self, codec: &FixedPointCodec) -> f64 {
        self.stats.plug_in_variance(codec)
    }
}

pub fn estimate_mean<R: Rng + ?Sized>(
    variant: BitPushing,
    population: &[f64],
    codec: &FixedPointCodec,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<MeanOutcome> {
    let single = |dist: SamplingDistribution, rng: &mut R| {
        run_basic(population, codec, config, &dist, rng).map(|o| MeanOutcome {
            estimate: o.estimate,
            stats: o.stats,
            clipped: o.clipped,
            meter: o.meter,
        })
    };
    match variant {
        BitPushing::Uniform => single(uniform_weights(codec.logical_bits())?, rng),
        BitPushing::Weighted => single(geometric_weights_for(codec, config.weighted_alpha())?, rng),
        BitPushing::Adaptive => run_adaptive(population, codec, config, rng).map(|o| MeanOutcome {
            estimate: o.estimate,
            stats: o.final_stats,
            clipped: o.clipped,
            meter: o.meter,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::SignedMode;
    use crate::sampling::geometric_weights;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn client_reports_bits() {
        let codec = FixedPointCodec::unsigned(4).unwrap();
        let mut r = rng(1);
        assert_eq!(client_report(5.0, 0, &codec, None, &mut r).unwrap().reported_bit, 1);
        assert_eq!(client_report(5.0, 3, &codec, None, &mut r).unwrap().reported_bit, 0);
        assert!(client_report(20.0, 0, &codec, None, &mut r).is_err());
        assert!(client_report(5.0, 4, &codec, None, &mut r).is_err());
    }

    #[test]
    fn client_reports_under_rr() {
        let codec = FixedPointCodec::unsigned(4).unwrap();
        let rr = RandomizedResponse::new(3f64.ln()).unwrap();
        let mut r = rng(2);
        let trials = 100_000;
        let ones = (0..trials)
            .filter(|_| client_report(5.0, 0, &codec, Some(&rr), &mut r).unwrap().reported_bit == 1)
            .count();
        let sigma = (0.75f64 * 0.25 / trials as f64).sqrt();
        assert!((ones as f64 / trials as f64 - 0.75).abs() < 3.0 * sigma);
    }

    #[test]
    fn aggregate_zero_variance_population() {
        let codec = FixedPointCodec::unsigned(3).unwrap();
        let report = |j: usize| ClientReport {
            bit_index: j,
            reported_bit: ((5u8 >> j) & 1),
            rr_applied: false,
        };
        let reports = [report(0), report(1), report(2), report(2)];
        let (r, stats) = aggregate_round(&reports, &codec, None).unwrap();
        assert_eq!(stats.means(), &[1.0, 0.0, 1.0]);
        assert_eq!(r, 5.0);
        assert_eq!(aggregate_round(&[], &codec, None), Err(Error::EmptyReports));
    }

    #[test]
    fn zero_population_decodes_zero() {
        let codec = FixedPointCodec::unsigned(8).unwrap();
        let pop = vec![0.0; 500];
        for dist in [uniform_weights(8).unwrap(), geometric_weights(8, 1.0).unwrap()] {
            let out = run_basic(&pop, &codec, &ProtocolConfig::default(), &dist, &mut rng(3)).unwrap();
            assert_eq!(out.estimate, 0.0);
        }
    }

    #[test]
    fn single_client() {
        let codec = FixedPointCodec::unsigned(1).unwrap();
        let out = run_basic(
            &[1.0],
            &codec,
            &ProtocolConfig::default(),
            &uniform_weights(1).unwrap(),
            &mut rng(4),
        )
        .unwrap();
        assert_eq!(out.estimate, 1.0);
        assert_eq!(out.meter.total(), 1.0);
    }

    #[test]
    fn uniform_population_within_three_sigma() {
        let codec = FixedPointCodec::unsigned(10).unwrap();
        let n = 100_000;
        let pop: Vec<f64> = (0..n).map(|i| (i % 1024) as f64).collect();
        let dist = geometric_weights(10, 1.0).unwrap();
        // Every bit mean of 0..=1023 is exactly 1/2.
        let sd = theoretical_variance(&[0.5; 10], &dist, n).unwrap().sqrt();
        let out = run_basic(&pop, &codec, &ProtocolConfig::default(), &dist, &mut rng(5)).unwrap();
        assert!((out.estimate - 511.5).abs() < 3.0 * sd, "{} vs sd {sd}", out.estimate);
    }

    #[test]
    fn clipping_is_counted() {
        let codec = FixedPointCodec::unsigned(4).unwrap();
        let pop = [3.0, 40.0, 15.0, -2.0];
        let out = run_basic(&pop, &codec, &ProtocolConfig::default(), &uniform_weights(4).unwrap(), &mut rng(6))
            .unwrap();
        assert_eq!(out.clipped, 2);
    }

    #[test]
    fn adaptive_constant_population_is_exact() {
        let codec = FixedPointCodec::unsigned(10).unwrap();
        let pop = vec![357.0; 3000];
        let out = run_adaptive(&pop, &codec, &ProtocolConfig::default(), &mut rng(7)).unwrap();
        assert_eq!(out.estimate, 357.0);
        assert!(out.fell_back());
    }

    #[test]
    fn adaptive_rounds_partition_clients() {
        let codec = FixedPointCodec::unsigned(10).unwrap();
        let pop: Vec<f64> = (0..3000).map(|i| (300 + i % 100) as f64).collect();
        let out = run_adaptive(&pop, &codec, &ProtocolConfig::default(), &mut rng(8)).unwrap();
        assert_eq!(out.round1.total_reports(), 1000);
        assert_eq!(out.round2.as_ref().unwrap().total_reports(), 2000);
        assert_eq!(out.final_stats.total_reports(), 3000);
        assert_eq!(out.meter.total(), 3000.0);
        assert_eq!(out.meter.max_client(), 1.0);
        // Bits 9 is never set, so round two never asks for it.
        assert_eq!(out.round2_distribution.unwrap().get(9), 0.0);
    }

    #[test]
    fn uncached_uses_round_two_only() {
        let codec = FixedPointCodec::unsigned(10).unwrap();
        let pop: Vec<f64> = (0..3000).map(|i| (300 + i % 100) as f64).collect();
        let config = ProtocolConfig::default().with_caching(false);
        let out = run_adaptive(&pop, &codec, &config, &mut rng(9)).unwrap();
        assert_eq!(out.final_stats, *out.round2.as_ref().unwrap());
    }

    #[test]
    fn deterministic_for_seed() {
        let codec = FixedPointCodec::unsigned(10).unwrap();
        let pop: Vec<f64> = (0..5000).map(|i| ((i * 37) % 1000) as f64).collect();
        let config = ProtocolConfig::default().with_epsilon(1.0);
        let a = run_adaptive(&pop, &codec, &config, &mut rng(10)).unwrap();
        let b = run_adaptive(&pop, &codec, &config, &mut rng(10)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn b_send_charges_and_counts() {
        let codec = FixedPointCodec::unsigned(6).unwrap();
        let pop: Vec<f64> = (0..600).map(|i| (i % 64) as f64).collect();
        let config = ProtocolConfig::default().with_b_send(3);
        let out = run_basic(&pop, &codec, &config, &uniform_weights(6).unwrap(), &mut rng(11)).unwrap();
        assert_eq!(out.stats.total_reports(), 1800);
        assert_eq!(out.meter.max_client(), 3.0);
        let too_many = ProtocolConfig::default().with_b_send(7);
        assert!(run_basic(&pop, &codec, &too_many, &uniform_weights(6).unwrap(), &mut rng(11)).is_err());
    }

    #[test]
    fn rr_meter_is_fractional() {
        let codec = FixedPointCodec::unsigned(6).unwrap();
        let pop = vec![10.0; 100];
        let config = ProtocolConfig::default().with_epsilon(3f64.ln());
        let out = run_basic(&pop, &codec, &config, &uniform_weights(6).unwrap(), &mut rng(12)).unwrap();
        assert!((out.meter.per_client_average() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn local_randomness_is_unbiased() {
        let codec = FixedPointCodec::unsigned(8).unwrap();
        let pop: Vec<f64> = (0..20_000).map(|i| (i % 200) as f64).collect();
        let truth = pop.iter().sum::<f64>() / pop.len() as f64;
        let config = ProtocolConfig {
            local_randomness: true,
            ..ProtocolConfig::default()
        };
        let dist = geometric_weights(8, 1.0).unwrap();
        let mut r = rng(13);
        let reps = 200;
        let mean = (0..reps)
            .map(|_| run_basic(&pop, &codec, &config, &dist, &mut r).unwrap().estimate)
            .sum::<f64>()
            / reps as f64;
        assert!((mean - truth).abs() < 2.0, "{mean} vs {truth}");
    }

    #[test]
    fn bit_split_adaptive_signed_mean() {
        let codec = FixedPointCodec::new(10, 0, SignedMode::BitSplit).unwrap();
        let pop: Vec<f64> = (0..4000).map(|i| if i % 2 == 0 { -3.0 } else { 3.0 }).collect();
        let out = run_adaptive(&pop, &codec, &ProtocolConfig::default(), &mut rng(14)).unwrap();
        // Only the exact-0/1 bits are set; both lanes have mean 1/2 on bits 0 and 1.
        assert!(out.estimate.abs() < 0.3, "{}", out.estimate);
    }

    #[test]
    fn config_validation() {
        let codec = FixedPointCodec::unsigned(4).unwrap();
        assert!(ProtocolConfig::default().with_delta(1.0).validate(&codec).is_err());
        assert!(ProtocolConfig::default().with_delta(0.0).validate(&codec).is_err());
        assert!(ProtocolConfig::default().with_epsilon(0.0).validate(&codec).is_err());
        assert!(ProtocolConfig::default().validate(&codec).is_ok());
        let c = ProtocolConfig::default();
        assert_eq!(c.adaptive_alpha(), 1.0);
        assert_eq!(c.weighted_alpha(), 0.5);
        assert_eq!(c.effective_squash_k(), 0.0);
        assert_eq!(c.with_epsilon(2.0).effective_squash_k(), 1.0);
    }
}
