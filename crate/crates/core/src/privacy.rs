//! Randomized response on single bits, squashing of noise-dominated bits, and
//! fractional private-bit metering.

use rand::Rng;

use crate::error::{Error, Result};
use crate::stats::BitStatistics;

/// Reports a bit truthfully with probability `p = e^ε / (1 + e^ε)`, else flips it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedResponse {
    epsilon: f64,
    truth_probability: f64,
    report_variance: f64,
}

impl RandomizedResponse {
    /// `epsilon = +inf` is accepted and never flips.
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        // 1 / (1 + e^-ε) and e^ε / (e^ε - 1)² = 1 / (4 sinh²(ε/2)) stay finite for large ε.
        let truth_probability = 1.0 / (1.0 + (-epsilon).exp());
        let report_variance = 1.0 / (4.0 * (epsilon / 2.0).sinh().powi(2));
        Ok(Self {
            epsilon,
            truth_probability,
            report_variance,
        })
    }

    /// Builds the mechanism from its truth probability `p ∈ (0.5, 1]`.
    pub fn from_truth_probability(p: f64) -> Result<Self> {
        if !(p > 0.5 && p <= 1.0) {
            return Err(Error::InvalidEpsilon((p / (1.0 - p)).ln()));
        }
        Self::new((p / (1.0 - p)).ln())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn truth_probability(&self) -> f64 {
        self.truth_probability
    }

    /// Variance of one unbiased report, `e^ε / (e^ε - 1)²`.
    pub fn report_variance(&self) -> f64 {
        self.report_variance
    }

    /// Fraction of a private bit disclosed per report, `2p - 1`.
    pub fn disclosed_fraction(&self) -> f64 {
        2.0 * self.truth_probability - 1.0
    }

    /// `Pr[output | input]`.
    pub fn transition_probability(&self, input: u8, output: u8) -> f64 {
        if input == output {
            self.truth_probability
        } else {
            1.0 - self.truth_probability
        }
    }

    pub fn perturb<R: Rng + ?Sized>(&self, bit: u8, rng: &mut R) -> u8 {
        if rng.gen::<f64>() < self.truth_probability {
            bit
        } else {
            1 - bit
        }
    }

    /// `(r - (1 - p)) / (2p - 1)`; affine, so it also unbiases averages of reports.
    pub fn unbias(&self, reported: f64) -> f64 {
        let p = self.truth_probability;
        (reported - (1.0 - p)) / (2.0 * p - 1.0)
    }
}

pub fn rr_perturb<R: Rng + ?Sized>(bit: u8, rr: &RandomizedResponse, rng: &mut R) -> u8 {
    rr.perturb(bit, rng)
}

pub fn rr_unbias(reported: f64, rr: &RandomizedResponse) -> f64 {
    rr.unbias(reported)
}

/// Expected noise scale of an unbiased bit mean built from `count` RR reports.
pub fn noise_scale(rr: &RandomizedResponse, count: u64) -> f64 {
    (rr.report_variance() / count as f64).sqrt()
}

/// Zero out and exclude bits whose mean falls below `k` times the expected RR
/// noise scale. `k <= 0` disables squashing. Bits with no reports are excluded.
pub fn squash_bits(stats: &BitStatistics, rr: &RandomizedResponse, k: f64) -> BitStatistics {
    let mut out = stats.clone();
    if k <= 0.0 {
        return out;
    }
    for j in 0..out.len() {
        let count = out.counts()[j];
        let squash = count == 0 || out.means()[j] < k * noise_scale(rr, count);
        if squash {
            out.exclude(j);
        }
    }
    out
}

/// Cumulative private bits disclosed per client.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrivacyMeter {
    charges: Vec<f64>,
}

impl PrivacyMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_clients(n: usize) -> Self {
        Self {
            charges: vec![0.0; n],
        }
    }

    /// Charge one disclosed bit: a full bit when sent truthfully, `2p - 1` under RR.
    pub fn charge(&mut self, client: usize, rr: Option<&RandomizedResponse>) {
        if client >= self.charges.len() {
            self.charges.resize(client + 1, 0.0);
        }
        self.charges[client] += rr.map_or(1.0, RandomizedResponse::disclosed_fraction);
    }

    pub fn client(&self, client: usize) -> f64 {
        self.charges.get(client).copied().unwrap_or(0.0)
    }

    pub fn clients(&self) -> usize {
        self.charges.len()
    }

    pub fn total(&self) -> f64 {
        self.charges.iter().sum()
    }

    pub fn per_client_average(&self) -> f64 {
        if self.charges.is_empty() {
            0.0
        } else {
            self.total() / self.charges.len() as f64
        }
    }

    pub fn max_client(&self) -> f64 {
        self.charges.iter().copied().fold(0.0, f64::max)
    }

    /// Adds another meter's charges client-by-client.
    pub fn merge(&mut self, other: &PrivacyMeter) {
        if other.charges.len() > self.charges.len() {
            self.charges.resize(other.charges.len(), 0.0);
        }
        for (a, b) in self.charges.iter_mut().zip(&other.charges) {
            *a += b;
        }
    }
}

pub fn meter_charge(
    mut meter: PrivacyMeter,
    client: usize,
    used_rr: bool,
    rr: Option<&RandomizedResponse>,
) -> PrivacyMeter {
    meter.charge(client, if used_rr { rr } else { None });
    meter
}
