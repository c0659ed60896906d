//! Competing one-value and one-bit LDP mechanisms for head-to-head comparisons.
//!
//! All mechanisms work on inputs scaled into `[0, 1]` (or `[-1, 1]` for the
//! piecewise mechanism) through a public [`ValueRange`], and map their server
//! estimate back to the original scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::privacy::RandomizedResponse;

/// Public bounds `[L, H]` used to scale inputs into the unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueRange {
    low: f64,
    high: f64,
}

impl ValueRange {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && high > low) {
            return Err(Error::InvalidConfig(format!(
                "value range needs finite low < high, got [{low}, {high}]"
            )));
        }
        Ok(Self { low, high })
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    /// `f(x) = (x - L) / (H - L)`.
    pub fn scale(&self, x: f64) -> f64 {
        (x - self.low) / self.width()
    }

    pub fn unscale(&self, f: f64) -> f64 {
        self.low + f * self.width()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.low && x <= self.high
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.low, self.high)
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                value: x,
                low: self.low,
                high: self.high,
            })
        }
    }
}

fn positive_epsilon(epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        Err(Error::InvalidEpsilon(epsilon))
    } else {
        Ok(epsilon)
    }
}

/// Draw from Laplace(0, scale) by inverting the CDF.
pub fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let u = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u - 0.5;
        }
    };
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// `x + Laplace((H - L) / ε)`. Reports are not clipped after noising.
pub fn laplace_report<R: Rng + ?Sized>(x: f64, range: &ValueRange, epsilon: f64, rng: &mut R) -> Result<f64> {
    range.check(x)?;
    let epsilon = positive_epsilon(epsilon)?;
    Ok(x + sample_laplace(range.width() / epsilon, rng))
}

/// Randomized rounding: send 1 with probability `f(x)`, optionally through RR.
pub fn randomized_rounding_report<R: Rng + ?Sized>(
    x: f64,
    range: &ValueRange,
    rr: Option<&RandomizedResponse>,
    rng: &mut R,
) -> Result<u8> {
    range.check(x)?;
    let bit = (rng.gen::<f64>() < range.scale(x)) as u8;
    Ok(match rr {
        Some(rr) => rr.perturb(bit, rng),
        None => bit,
    })
}

pub fn randomized_rounding_estimate(bits: &[u8], range: &ValueRange, rr: Option<&RandomizedResponse>) -> Result<f64> {
    if bits.is_empty() {
        return Err(Error::EmptyReports);
    }
    let mean = bits.iter().map(|&b| b as f64).sum::<f64>() / bits.len() as f64;
    let mean = rr.map_or(mean, |rr| rr.unbias(mean));
    Ok(range.unscale(mean))
}

/// One subtractive-dithering report: the threshold `h` is shared randomness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DitherReport {
    pub bit: u8,
    pub h: f64,
}

impl DitherReport {
    /// Per-report estimate of `f(x)`: `b + h - 0.5`, with `b` unbiased first under RR.
    pub fn unit_estimate(&self, rr: Option<&RandomizedResponse>) -> f64 {
        let b = self.bit as f64;
        rr.map_or(b, |rr| rr.unbias(b)) + self.h - 0.5
    }
}

/// Subtractive dithering with a given shared threshold `h`.
pub fn dither_with_threshold<R: Rng + ?Sized>(
    x: f64,
    h: f64,
    range: &ValueRange,
    rr: Option<&RandomizedResponse>,
    rng: &mut R,
) -> Result<DitherReport> {
    range.check(x)?;
    let bit = (range.scale(x) >= h) as u8;
    let bit = match rr {
        Some(rr) => rr.perturb(bit, rng),
        None => bit,
    };
    Ok(DitherReport { bit, h })
}

pub fn dithering_report<R: Rng + ?Sized>(
    x: f64,
    range: &ValueRange,
    rr: Option<&RandomizedResponse>,
    rng: &mut R,
) -> Result<DitherReport> {
    let h = rng.gen::<f64>();
    dither_with_threshold(x, h, range, rr, rng)
}

pub fn dithering_estimate(reports: &[DitherReport], range: &ValueRange, rr: Option<&RandomizedResponse>) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::EmptyReports);
    }
    let mean = reports.iter().map(|r| r.unit_estimate(rr)).sum::<f64>() / reports.len() as f64;
    Ok(range.unscale(mean))
}

/// Piecewise mechanism on `t ∈ [-1, 1]`: with probability `e^(ε/2) / (e^(ε/2) + 1)`
/// output uniformly from `[ℓ(t), r(t)]`, otherwise uniformly from the rest of
/// `[-C, C]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piecewise {
    epsilon: f64,
    c: f64,
    p_center: f64,
}

impl Piecewise {
    pub fn new(epsilon: f64) -> Result<Self> {
        let epsilon = positive_epsilon(epsilon)?;
        let half = (epsilon / 2.0).exp();
        Ok(Self {
            epsilon,
            c: (half + 1.0) / (half - 1.0),
            p_center: half / (half + 1.0),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Output bound `C`.
    pub fn bound(&self) -> f64 {
        self.c
    }

    /// Central interval `[ℓ(t), r(t)]`, of width `C - 1`.
    pub fn interval(&self, t: f64) -> (f64, f64) {
        let left = (self.c + 1.0) / 2.0 * t - (self.c - 1.0) / 2.0;
        (left, left + self.c - 1.0)
    }

    /// Output density at `y` given input `t`.
    pub fn density(&self, t: f64, y: f64) -> f64 {
        if y.abs() > self.c {
            return 0.0;
        }
        let (l, r) = self.interval(t);
        if y >= l && y <= r {
            self.p_center / (self.c - 1.0)
        } else {
            (1.0 - self.p_center) / (self.c + 1.0)
        }
    }

    pub fn perturb<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        let (l, r) = self.interval(t);
        if rng.gen::<f64>() < self.p_center {
            rng.gen_range(l..=r)
        } else {
            // The two outer pieces have total length C + 1.
            let u = rng.gen::<f64>() * (self.c + 1.0);
            let left_len = l + self.c;
            if u < left_len {
                -self.c + u
            } else {
                r + (u - left_len)
            }
        }
    }
}

/// Piecewise report for `x`, scaled to `[-1, 1]` first.
pub fn piecewise_report<R: Rng + ?Sized>(x: f64, range: &ValueRange, epsilon: f64, rng: &mut R) -> Result<f64> {
    range.check(x)?;
    let mech = Piecewise::new(epsilon)?;
    Ok(mech.perturb(2.0 * range.scale(x) - 1.0, rng))
}

pub fn piecewise_estimate(reports: &[f64], range: &ValueRange) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::EmptyReports);
    }
    let t = reports.iter().sum::<f64>() / reports.len() as f64;
    Ok(range.unscale((t + 1.0) / 2.0))
}

/// Population-level runners for the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Laplace,
    Rounding,
    Dithering,
    Piecewise,
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Laplace => "laplace",
            Baseline::Rounding => "rounding",
            Baseline::Dithering => "dithering",
            Baseline::Piecewise => "piecewise",
        }
    }

    pub fn requires_epsilon(&self) -> bool {
        matches!(self, Baseline::Laplace | Baseline::Piecewise)
    }

    /// Mean estimate over the whole population. Values outside `range` are
    /// clipped first. Client `i` draws from ChaCha stream `i` of a seed taken
    /// from `rng`.
    pub fn estimate_mean<R: Rng + ?Sized>(
        &self,
        population: &[f64],
        range: &ValueRange,
        epsilon: Option<f64>,
        rng: &mut R,
    ) -> Result<f64> {
        if population.is_empty() {
            return Err(Error::EmptyReports);
        }
        if self.requires_epsilon() && epsilon.is_none() {
            return Err(Error::InvalidConfig(format!("{} requires epsilon", self.name())));
        }
        let rr = epsilon.map(RandomizedResponse::new).transpose()?;
        let piecewise = match (self, epsilon) {
            (Baseline::Piecewise, Some(e)) => Some(Piecewise::new(e)?),
            _ => None,
        };
        if let Some(e) = epsilon {
            positive_epsilon(e)?;
        }
        let seed: u64 = rng.gen();
        let unit: Vec<f64> = population
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let mut crng = ChaCha8Rng::seed_from_u64(seed);
                crng.set_stream(i as u64);
                let x = range.clip(x);
                // Each branch yields the client's unbiased estimate on the original scale.
                match self {
                    Baseline::Laplace => laplace_report(x, range, epsilon.unwrap_or(f64::NAN), &mut crng),
                    Baseline::Rounding => randomized_rounding_report(x, range, rr.as_ref(), &mut crng)
                        .map(|b| range.unscale(rr.as_ref().map_or(b as f64, |rr| rr.unbias(b as f64)))),
                    Baseline::Dithering => dithering_report(x, range, rr.as_ref(), &mut crng)
                        .map(|r| range.unscale(r.unit_estimate(rr.as_ref()))),
                    Baseline::Piecewise => {
                        let mech = piecewise.expect("checked above");
                        Ok(range.unscale((mech.perturb(2.0 * range.scale(x) - 1.0, &mut crng) + 1.0) / 2.0))
                    }
                }
            })
            .collect::<Result<_>>()?;
        Ok(unit.iter().sum::<f64>() / unit.len() as f64)
    }
}

impl std::str::FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace" => Ok(Baseline::Laplace),
            "rounding" => Ok(Baseline::Rounding),
            "dithering" => Ok(Baseline::Dithering),
            "piecewise" => Ok(Baseline::Piecewise),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}
