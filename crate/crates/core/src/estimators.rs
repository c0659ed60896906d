//! Statistics built from bit-pushed means: signed means, variances and
//! geometric means.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::codec::{FixedPointCodec, SignedMode, MAX_BITS};
use crate::error::{Error, Result};
use crate::protocol::{estimate_mean, BitPushing, MeanOutcome, ProtocolConfig};

/// Default share of clients spent on the first phase of a variance estimate.
pub const DEFAULT_VARIANCE_SPLIT: f64 = 0.5;
/// Fractional bits kept for logarithms.
pub const DEFAULT_LOG_FRACTIONAL_BITS: u32 = 8;

/// Signed mean through a shifted or sign-split codec. Values below `-C` are a
/// range error in shift mode; everything else is clipped into the codec range.
pub fn estimate_signed_mean<R: Rng + ?Sized>(
    population: &[f64],
    codec: &FixedPointCodec,
    mode: SignedMode,
    variant: BitPushing,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<MeanOutcome> {
    if mode == SignedMode::Unsigned {
        return Err(Error::InvalidCodec("signed means need a shift or bit-split codec".into()));
    }
    let codec = codec.with_mode(mode)?;
    if let SignedMode::AdditiveShift(c) = mode {
        if let Some(&x) = population.iter().find(|&&x| x < -c) {
            let (low, high) = codec.range();
            return Err(Error::OutOfRange { value: x, low, high });
        }
    }
    estimate_mean(variant, population, &codec, config, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceMethod {
    /// Case 1: estimate `x̂` on one group, then the mean of `(x - x̂)²` on the other.
    CenteredSquare,
    /// Case 2: estimate the means of `x` and `x²` on disjoint groups.
    SquareMinusSquaredMean,
}

impl VarianceMethod {
    pub fn name(&self) -> &'static str {
        match self {
            VarianceMethod::CenteredSquare => "centered",
            VarianceMethod::SquareMinusSquaredMean => "raw",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceOutcome {
    /// Clamped at zero.
    pub estimate: f64,
    pub mean_estimate: f64,
    /// Mean of the squared quantity before corrections.
    pub second_moment: f64,
    /// Subtracted estimator variance of `x̂` (Case 1 without randomized response).
    pub correction: f64,
}

/// Unsigned codec for squares of values spanning `width`, with twice the
/// fractional precision where the 62-bit budget allows it.
pub fn square_codec(codec: &FixedPointCodec, span: f64) -> Result<FixedPointCodec> {
    let square = span * span;
    let mut integer_bits = square.log2().ceil().max(1.0) as u32;
    if (integer_bits as f64).exp2() <= square {
        integer_bits += 1;
    }
    if integer_bits > MAX_BITS {
        return Err(Error::InvalidCodec(format!(
            "squares of values spanning {span} need {integer_bits} integer bits"
        )));
    }
    let fractional_bits = (2 * codec.fractional_bits()).min(MAX_BITS - integer_bits);
    FixedPointCodec::new(integer_bits, fractional_bits, SignedMode::Unsigned)
}

fn split_clients<R: Rng + ?Sized>(n: usize, split: f64, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InsufficientClients { needed: 2, available: n });
    }
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::InvalidConfig(format!("variance split must lie in (0, 1), got {split}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let first = ((split * n as f64).round() as usize).clamp(1, n - 1);
    let second = order.split_off(first);
    Ok((order, second))
}

/// Variance of the population. Each client takes part in exactly one phase;
/// `split` is the share of clients in the first phase.
pub fn estimate_variance<R: Rng + ?Sized>(
    population: &[f64],
    codec: &FixedPointCodec,
    method: VarianceMethod,
    variant: BitPushing,
    config: &ProtocolConfig,
    split: f64,
    rng: &mut R,
) -> Result<VarianceOutcome> {
    let (first, second) = split_clients(population.len(), split, rng)?;
    let (low, high) = codec.range();
    let clip = |x: f64| x.clamp(low, high);
    let pick = |idx: &[usize]| idx.iter().map(|&i| clip(population[i])).collect::<Vec<f64>>();

    let phase_a = pick(&first);
    let mean = estimate_mean(variant, &phase_a, codec, config, rng)?;
    let x_hat = mean.estimate;

    let (second_moment, correction) = match method {
        VarianceMethod::CenteredSquare => {
            let sq_codec = square_codec(codec, high - low)?;
            let (_, sq_high) = sq_codec.range();
            // Clients square against the broadcast estimate.
            let deviations: Vec<f64> = pick(&second)
                .into_iter()
                .map(|x| (x - x_hat).powi(2).min(sq_high))
                .collect();
            let z = estimate_mean(variant, &deviations, &sq_codec, config, rng)?.estimate;
            // E[Z] = σ² + Var(x̂); the plug-in is only valid for truthful reports.
            let correction = if config.epsilon.is_none() {
                mean.plug_in_variance(codec)
            } else {
                0.0
            };
            (z, correction)
        }
        VarianceMethod::SquareMinusSquaredMean => {
            let span = low.abs().max(high.abs());
            let sq_codec = square_codec(codec, span)?;
            let (_, sq_high) = sq_codec.range();
            let squares: Vec<f64> = pick(&second).into_iter().map(|x| (x * x).min(sq_high)).collect();
            let m2 = estimate_mean(variant, &squares, &sq_codec, config, rng)?.estimate;
            (m2 - x_hat * x_hat, 0.0)
        }
    };
    Ok(VarianceOutcome {
        estimate: (second_moment - correction).max(0.0),
        mean_estimate: x_hat,
        second_moment,
        correction,
    })
}

/// Shifted codec covering logarithms of values in `[low, high]`.
pub fn log_codec(low: f64, high: f64, fractional_bits: u32) -> Result<FixedPointCodec> {
    if !(low > 0.0) {
        return Err(Error::NonPositive(low));
    }
    if !(high >= low && high.is_finite()) {
        return Err(Error::InvalidCodec(format!("invalid log range [{low}, {high}]")));
    }
    let shift = (-low.ln()).ceil().max(0.0);
    let top = high.ln() + shift;
    let mut integer_bits = 1u32;
    while (integer_bits as f64).exp2() <= top {
        integer_bits += 1;
    }
    FixedPointCodec::new(integer_bits, fractional_bits, SignedMode::AdditiveShift(shift))
}

/// `exp` of the bit-pushed mean of `ln x`.
pub fn estimate_geometric_mean<R: Rng + ?Sized>(
    population: &[f64],
    log_codec: &FixedPointCodec,
    variant: BitPushing,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<f64> {
    if let Some(&x) = population.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::NonPositive(x));
    }
    let logs: Vec<f64> = population.iter().map(|x| x.ln()).collect();
    Ok(estimate_mean(variant, &logs, log_codec, config, rng)?.estimate.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, LogNormal, Normal};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn exact_means(codec: &FixedPointCodec, pop: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; codec.logical_bits()];
        for &x in pop {
            for (s, b) in sums.iter_mut().zip(codec.encode(x).unwrap().bits()) {
                *s += *b as f64;
            }
        }
        sums.iter().map(|s| s / pop.len() as f64).collect()
    }

    fn rmse(xs: &[f64], truth: f64) -> f64 {
        (xs.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
    }

    #[test]
    fn signed_constant_is_exact() {
        let codec = FixedPointCodec::unsigned(4).unwrap();
        let pop = vec![-3.0; 100];
        let cfg = ProtocolConfig::default();
        for mode in [SignedMode::AdditiveShift(8.0), SignedMode::BitSplit] {
            for variant in [BitPushing::Uniform, BitPushing::Adaptive] {
                let est = estimate_signed_mean(&pop, &codec, mode, variant, &cfg, &mut rng(1)).unwrap();
                assert_eq!(est.estimate, -3.0, "{mode:?} {variant:?}");
            }
        }
    }

    #[test]
    fn signed_symmetric_population() {
        let codec = FixedPointCodec::unsigned(4).unwrap();
        let pop: Vec<f64> = (0..20_000).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let cfg = ProtocolConfig::default();
        for mode in [SignedMode::AdditiveShift(8.0), SignedMode::BitSplit] {
            let est = estimate_signed_mean(&pop, &codec, mode, BitPushing::Uniform, &cfg, &mut rng(2)).unwrap();
            assert!(est.estimate.abs() < 0.2, "{mode:?}: {}", est.estimate);
        }
    }

    #[test]
    fn signed_rejects_shift_violation() {
        let codec = FixedPointCodec::unsigned(4).unwrap();
        let cfg = ProtocolConfig::default();
        let err = estimate_signed_mean(&[-9.0, 1.0], &codec, SignedMode::AdditiveShift(8.0), BitPushing::Uniform, &cfg, &mut rng(0));
        assert!(matches!(err, Err(Error::OutOfRange { .. })));
        assert!(estimate_signed_mean(&[1.0], &codec, SignedMode::Unsigned, BitPushing::Uniform, &cfg, &mut rng(0)).is_err());
    }

    #[test]
    fn split_and_shift_agree_with_tight_bound() {
        let codec = FixedPointCodec::unsigned(10).unwrap();
        let normal = Normal::new(0.0, 50.0).unwrap();
        let mut g = rng(3);
        let pop: Vec<f64> = (0..10_000).map(|_| Distribution::<f64>::sample(&normal, &mut g).round().clamp(-511.0, 511.0)).collect();
        let cfg = ProtocolConfig::default();
        let reps = 40;
        let run = |mode| -> Vec<f64> {
            (0..reps)
                .map(|r| {
                    estimate_signed_mean(&pop, &codec, mode, BitPushing::Adaptive, &cfg, &mut rng(100 + r))
                        .unwrap()
                        .estimate
                })
                .collect()
        };
        let stats = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            (m, v / xs.len() as f64)
        };
        let (ms, vs) = stats(&run(SignedMode::AdditiveShift(512.0)));
        let (mb, vb) = stats(&run(SignedMode::BitSplit));
        assert!((ms - mb).abs() < 3.0 * (vs + vb).sqrt(), "{ms} vs {mb}");
    }

    #[test]
    fn square_codec_widths() {
        let c = FixedPointCodec::unsigned(10).unwrap();
        let sq = square_codec(&c, 1023.0).unwrap();
        assert_eq!(sq.integer_bits(), 20);
        let f = FixedPointCodec::new(4, 3, SignedMode::Unsigned).unwrap();
        let sq = square_codec(&f, 15.875).unwrap();
        assert_eq!((sq.integer_bits(), sq.fractional_bits()), (8, 6));
        assert!(square_codec(&c, 2f64.powi(40)).is_err());
    }

    #[test]
    fn constant_population_has_zero_variance() {
        let codec = FixedPointCodec::unsigned(10).unwrap();
        let pop = vec![350.0; 1000];
        let cfg = ProtocolConfig::default();
        for method in [VarianceMethod::CenteredSquare, VarianceMethod::SquareMinusSquaredMean] {
            let v = estimate_variance(&pop, &codec, method, BitPushing::Adaptive, &cfg, 0.5, &mut rng(4)).unwrap();
            assert_eq!(v.estimate, 0.0, "{method:?}");
            assert_eq!(v.mean_estimate, 350.0);
        }
    }

    #[test]
    fn variance_needs_two_clients() {
        let codec = FixedPointCodec::unsigned(4).unwrap();
        let cfg = ProtocolConfig::default();
        let err = estimate_variance(&[1.0], &codec, VarianceMethod::CenteredSquare, BitPushing::Uniform, &cfg, 0.5, &mut rng(0));
        assert_eq!(err.unwrap_err(), Error::InsufficientClients { needed: 2, available: 1 });
        assert!(estimate_variance(&[1.0, 2.0], &codec, VarianceMethod::CenteredSquare, BitPushing::Uniform, &cfg, 1.0, &mut rng(0)).is_err());
    }

    #[test]
    fn centered_beats_raw_and_improves_with_n() {
        let codec = FixedPointCodec::unsigned(10).unwrap();
        let normal = Normal::new(350.0, 100.0).unwrap();
        let mut g = rng(5);
        let cfg = ProtocolConfig::default();
        let make = |n: usize, g: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n).map(|_| Distribution::<f64>::sample(&normal, g).trunc().clamp(0.0, 1023.0)).collect()
        };
        let truth = |pop: &[f64]| {
            let m = pop.iter().sum::<f64>() / pop.len() as f64;
            pop.iter().map(|x| (x - m).powi(2)).sum::<f64>() / pop.len() as f64
        };
        let errs = |pop: &[f64], method| -> f64 {
            let t = truth(pop);
            let xs: Vec<f64> = (0..30)
                .map(|r| {
                    estimate_variance(pop, &codec, method, BitPushing::Adaptive, &cfg, 0.5, &mut rng(200 + r))
                        .unwrap()
                        .estimate
                })
                .collect();
            rmse(&xs, t)
        };
        let small = make(10_000, &mut g);
        let large = make(40_000, &mut g);
        for method in [VarianceMethod::CenteredSquare, VarianceMethod::SquareMinusSquaredMean] {
            assert!(errs(&large, method) < errs(&small, method), "{method:?}");
        }
        assert!(errs(&small, VarianceMethod::CenteredSquare) < errs(&small, VarianceMethod::SquareMinusSquaredMean));
    }

    #[test]
    fn log_codec_layout() {
        let c = log_codec(1.0, 100.0, 8).unwrap();
        assert_eq!(c.mode(), SignedMode::AdditiveShift(0.0));
        assert_eq!(c.integer_bits(), 3);
        let c = log_codec(0.01, 1.0, 8).unwrap();
        assert_eq!(c.mode(), SignedMode::AdditiveShift(5.0));
        assert!(log_codec(0.0, 1.0, 8).is_err());
    }

    #[test]
    fn geometric_mean_closed_forms() {
        let codec = log_codec(1.0, 10.0, DEFAULT_LOG_FRACTIONAL_BITS).unwrap();
        let logs = [0.0, 2.0];
        let means = exact_means(&codec, &logs);
        assert!((codec.decode_means(&means).unwrap().exp() - 1f64.exp()).abs() < 1e-12);

        let cfg = ProtocolConfig::default();
        let g = 7.3;
        let est = estimate_geometric_mean(&vec![g; 500], &codec, BitPushing::Adaptive, &cfg, &mut rng(6)).unwrap();
        assert!((est / g - 1.0).abs() < codec.resolution(), "{est}");
        assert!(matches!(
            estimate_geometric_mean(&[1.0, 0.0], &codec, BitPushing::Adaptive, &cfg, &mut rng(6)),
            Err(Error::NonPositive(_))
        ));
    }

    #[test]
    fn geometric_mean_of_lognormal() {
        let dist = LogNormal::new(3.0, 0.5).unwrap();
        let mut g = rng(7);
        let pop: Vec<f64> = (0..10_000).map(|_| Distribution::<f64>::sample(&dist, &mut g).clamp(1.0, 1000.0)).collect();
        let codec = log_codec(1.0, 1000.0, DEFAULT_LOG_FRACTIONAL_BITS).unwrap();
        let quantized: Vec<f64> = pop.iter().map(|x| codec.quantize(x.ln()).unwrap()).collect();
        let truth = quantized.iter().sum::<f64>() / quantized.len() as f64;
        let cfg = ProtocolConfig::default();
        let reps: Vec<f64> = (0..30)
            .map(|r| {
                estimate_geometric_mean(&pop, &codec, BitPushing::Adaptive, &cfg, &mut rng(300 + r))
                    .unwrap()
                    .ln()
            })
            .collect();
        let se = rmse(&reps, truth);
        let est = estimate_geometric_mean(&pop, &codec, BitPushing::Adaptive, &cfg, &mut rng(9)).unwrap();
        assert!((est.ln() - truth).abs() < 3.0 * se.max(codec.resolution()), "{est} vs {}", truth.exp());
    }

    #[test]
    fn geometric_mean_scale_equivariance() {
        let codec = log_codec(0.5, 4000.0, DEFAULT_LOG_FRACTIONAL_BITS).unwrap();
        let pop = [1.5, 2.0, 7.0, 30.0, 900.0];
        let logs = |s: f64| -> Vec<f64> { pop.iter().map(|x| (s * x).ln()).collect() };
        let m1 = codec.decode_means(&exact_means(&codec, &logs(1.0))).unwrap();
        let m4 = codec.decode_means(&exact_means(&codec, &logs(4.0))).unwrap();
        assert!((m4 - m1 - 4f64.ln()).abs() <= codec.resolution(), "{}", m4 - m1);
    }
}
