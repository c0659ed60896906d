//! Repeated-trial experiments and one-parameter sweeps.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::output::fmt_g6;
use super::population::{generate, PopulationSpec, Source};
use crate::baselines::{Baseline, ValueRange};
use crate::codec::{FixedPointCodec, SignedMode};
use crate::error::{Error, Result};
use crate::estimators::{estimate_variance, VarianceMethod, DEFAULT_VARIANCE_SPLIT};
use crate::protocol::{estimate_mean, BitPushing, ProtocolConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Single-round bit pushing with uniform bit probabilities.
    Basic,
    Weighted,
    Adaptive,
    Laplace,
    Rounding,
    Dithering,
    Piecewise,
    /// Full disclosure: the exact statistic of the participating clients.
    Oracle,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Basic,
        Method::Weighted,
        Method::Adaptive,
        Method::Laplace,
        Method::Rounding,
        Method::Dithering,
        Method::Piecewise,
        Method::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Basic => "basic",
            Method::Weighted => "weighted",
            Method::Adaptive => "adaptive",
            Method::Laplace => "laplace",
            Method::Rounding => "rounding",
            Method::Dithering => "dithering",
            Method::Piecewise => "piecewise",
            Method::Oracle => "oracle",
        }
    }

    pub fn bit_pushing(&self) -> Option<BitPushing> {
        match self {
            Method::Basic => Some(BitPushing::Uniform),
            Method::Weighted => Some(BitPushing::Weighted),
            Method::Adaptive => Some(BitPushing::Adaptive),
            _ => None,
        }
    }

    pub fn baseline(&self) -> Option<Baseline> {
        match self {
            Method::Laplace => Some(Baseline::Laplace),
            Method::Rounding => Some(Baseline::Rounding),
            Method::Dithering => Some(Baseline::Dithering),
            Method::Piecewise => Some(Baseline::Piecewise),
            _ => None,
        }
    }

    pub fn requires_epsilon(&self) -> bool {
        self.baseline().is_some_and(|b| b.requires_epsilon())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Mean,
    Variance(VarianceMethod),
}

/// Which clients take part in a repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClientDraw {
    /// The whole fixed population, every repetition.
    #[default]
    Fixed,
    /// `n` clients drawn with replacement from the population, afresh each
    /// repetition; errors then include sampling error, as in i.i.d. analyses.
    Bootstrap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub method: Method,
    pub population: PopulationSpec,
    pub integer_bits: u32,
    pub fractional_bits: u32,
    pub protocol: ProtocolConfig,
    pub target: Target,
    pub draw: ClientDraw,
    /// Share of clients in the first phase of a variance estimate.
    pub variance_split: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Experiment {
    pub fn new(method: Method, population: PopulationSpec, integer_bits: u32) -> Self {
        Self {
            method,
            population,
            integer_bits,
            fractional_bits: 0,
            protocol: ProtocolConfig::default(),
            target: Target::Mean,
            draw: ClientDraw::Fixed,
            variance_split: DEFAULT_VARIANCE_SPLIT,
            reps: 100,
            seed: 0,
        }
    }

    pub fn codec(&self) -> Result<FixedPointCodec> {
        FixedPointCodec::new(self.integer_bits, self.fractional_bits, SignedMode::Unsigned)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 repetitions, got {}", self.reps)));
        }
        let codec = self.codec()?;
        self.protocol.validate(&codec)?;
        if self.method.requires_epsilon() && self.protocol.epsilon.is_none() {
            return Err(Error::InvalidConfig(format!("{} requires an epsilon", self.method.name())));
        }
        if matches!(self.target, Target::Variance(_))
            && self.method.bit_pushing().is_none()
            && self.method != Method::Oracle
        {
            return Err(Error::InvalidConfig(format!(
                "variance estimation is not available for {}",
                self.method.name()
            )));
        }
        Ok(())
    }
}

/// Population on the codec grid together with its true target value.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub values: Vec<f64>,
    pub truth: f64,
    pub clipped: usize,
    pub skipped_rows: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
}

fn target_value(target: Target, xs: &[f64]) -> f64 {
    match target {
        Target::Mean => mean(xs),
        Target::Variance(_) => population_variance(xs),
    }
}

/// Generate the population, clip it into the codec range and truncate onto the
/// codec grid, so encoding loss is not counted as protocol error.
pub fn prepare(experiment: &Experiment) -> Result<Prepared> {
    let codec = experiment.codec()?;
    let population = generate(&experiment.population)?;
    let mut clipped = population.clipped;
    let values = population
        .values
        .iter()
        .map(|&x| {
            let (c, was) = codec.clip(x);
            clipped += was as usize;
            codec.quantize(c)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Prepared {
        truth: target_value(experiment.target, &values),
        values,
        clipped,
        skipped_rows: population.skipped_rows,
    })
}

/// Averages of the privacy meter over repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeterSummary {
    pub total: f64,
    pub per_client: f64,
    pub max_client: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub method: String,
    pub param_name: Option<String>,
    pub param_value: Option<String>,
    pub n: usize,
    pub bits: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    /// RMSE divided by `|truth|`, or the raw RMSE when `normalized` is false.
    pub nrmse: f64,
    pub stderr: f64,
    pub reps: usize,
    pub wall_time_ms: f64,
    pub normalized: bool,
    pub truth: f64,
    pub estimates: Vec<f64>,
    pub clipped: usize,
    pub skipped_rows: usize,
    pub meter: Option<MeterSummary>,
}

impl ExperimentResult {
    pub fn rmse(&self) -> f64 {
        if self.normalized {
            self.nrmse * self.truth.abs()
        } else {
            self.nrmse
        }
    }
}

/// `(nrmse, stderr, normalized)`. The standard error of the RMSE comes from the
/// spread of squared errors by the delta method; a zero truth leaves both
/// unnormalized.
pub fn nrmse(estimates: &[f64], truth: f64) -> (f64, f64, bool) {
    let r = estimates.len() as f64;
    let sq: Vec<f64> = estimates.iter().map(|x| (x - truth).powi(2)).collect();
    let mse = sq.iter().sum::<f64>() / r;
    let rmse = mse.sqrt();
    let se_mse = if estimates.len() > 1 {
        (sq.iter().map(|s| (s - mse).powi(2)).sum::<f64>() / (r - 1.0) / r).sqrt()
    } else {
        0.0
    };
    let se = if rmse > 0.0 { se_mse / (2.0 * rmse) } else { 0.0 };
    if truth == 0.0 {
        (rmse, se, false)
    } else {
        (rmse / truth.abs(), se / truth.abs(), true)
    }
}

struct RepOutcome {
    estimate: f64,
    meter: Option<MeterSummary>,
}

fn run_rep(experiment: &Experiment, codec: &FixedPointCodec, values: &[f64], rep: usize) -> Result<RepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(experiment.seed);
    rng.set_stream(rep as u64);
    let drawn: Vec<f64>;
    let clients = match experiment.draw {
        ClientDraw::Fixed => values,
        ClientDraw::Bootstrap => {
            drawn = (0..values.len()).map(|_| values[rng.gen_range(0..values.len())]).collect();
            &drawn
        }
    };
    let config = &experiment.protocol;
    if experiment.method == Method::Oracle {
        return Ok(RepOutcome {
            estimate: target_value(experiment.target, clients),
            meter: None,
        });
    }
    if let Some(variant) = experiment.method.bit_pushing() {
        return match experiment.target {
            Target::Mean => {
                let out = estimate_mean(variant, clients, codec, config, &mut rng)?;
                Ok(RepOutcome {
                    estimate: out.estimate,
                    meter: Some(MeterSummary {
                        total: out.meter.total(),
                        per_client: out.meter.per_client_average(),
                        max_client: out.meter.max_client(),
                    }),
                })
            }
            Target::Variance(method) => {
                let out = estimate_variance(clients, codec, method, variant, config, experiment.variance_split, &mut rng)?;
                Ok(RepOutcome {
                    estimate: out.estimate,
                    meter: None,
                })
            }
        };
    }
    let baseline = experiment.method.baseline().expect("every other method is a baseline");
    let (low, high) = codec.range();
    let range = ValueRange::new(low, high)?;
    Ok(RepOutcome {
        estimate: baseline.estimate_mean(clients, &range, config.epsilon, &mut rng)?,
        meter: None,
    })
}

/// Run `reps` independently seeded repetitions on one fixed population.
/// Repetition `r` draws from ChaCha stream `r` of the master seed.
pub fn run_experiment(experiment: &Experiment) -> Result<ExperimentResult> {
    experiment.validate()?;
    let start = Instant::now();
    let codec = experiment.codec()?;
    let prepared = prepare(experiment)?;
    let outcomes = (0..experiment.reps)
        .into_par_iter()
        .map(|rep| run_rep(experiment, &codec, &prepared.values, rep))
        .collect::<Result<Vec<_>>>()?;
    let estimates: Vec<f64> = outcomes.iter().map(|o| o.estimate).collect();
    let (value, stderr, normalized) = nrmse(&estimates, prepared.truth);
    if !normalized {
        log::warn!("true target is zero; reporting unnormalized RMSE");
    }
    let meter = outcomes.iter().map(|o| o.meter).collect::<Option<Vec<_>>>().map(|ms| {
        let r = ms.len() as f64;
        MeterSummary {
            total: ms.iter().map(|m| m.total).sum::<f64>() / r,
            per_client: ms.iter().map(|m| m.per_client).sum::<f64>() / r,
            max_client: ms.iter().map(|m| m.max_client).fold(0.0, f64::max),
        }
    });

    let method = experiment.method;
    let config = &experiment.protocol;
    let adaptive = method == Method::Adaptive;
    Ok(ExperimentResult {
        method: method.name().to_string(),
        param_name: None,
        param_value: None,
        n: prepared.values.len(),
        bits: codec.total_bits(),
        epsilon: if method == Method::Oracle { None } else { config.epsilon },
        delta: adaptive.then_some(config.delta),
        gamma: adaptive.then_some(config.gamma),
        alpha: match method {
            Method::Adaptive => Some(config.adaptive_alpha()),
            Method::Weighted => Some(config.weighted_alpha()),
            _ => None,
        },
        nrmse: value,
        stderr,
        reps: experiment.reps,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        normalized,
        truth: prepared.truth,
        estimates,
        clipped: prepared.clipped,
        skipped_rows: prepared.skipped_rows,
        meter,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Gamma,
    Delta,
    Alpha,
    Mu,
    Bits,
    N,
    Epsilon,
    SquashK,
    Method,
}

impl SweepParam {
    pub const ALL: [SweepParam; 9] = [
        SweepParam::Gamma,
        SweepParam::Delta,
        SweepParam::Alpha,
        SweepParam::Mu,
        SweepParam::Bits,
        SweepParam::N,
        SweepParam::Epsilon,
        SweepParam::SquashK,
        SweepParam::Method,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Gamma => "gamma",
            SweepParam::Delta => "delta",
            SweepParam::Alpha => "alpha",
            SweepParam::Mu => "mu",
            SweepParam::Bits => "bits",
            SweepParam::N => "n",
            SweepParam::Epsilon => "epsilon",
            SweepParam::SquashK => "squash_k",
            SweepParam::Method => "method",
        }
    }

    /// The base experiment with this parameter set to `value`, plus the value
    /// as written to the output.
    pub fn apply(&self, base: &Experiment, value: &str) -> Result<(Experiment, String)> {
        let mut e = base.clone();
        let value = value.trim();
        let bad = || Error::InvalidConfig(format!("invalid value `{value}` for {}", self.name()));
        let real = || value.parse::<f64>().map_err(|_| bad());
        let count = || value.parse::<usize>().map_err(|_| bad());
        let shown = match self {
            SweepParam::Method => {
                e.method = value.parse()?;
                return Ok((e, value.to_string()));
            }
            SweepParam::Epsilon if value == "none" => {
                e.protocol.epsilon = None;
                return Ok((e, String::new()));
            }
            SweepParam::Gamma => {
                e.protocol.gamma = real()?;
                e.protocol.gamma
            }
            SweepParam::Delta => {
                e.protocol.delta = real()?;
                e.protocol.delta
            }
            SweepParam::Alpha => {
                e.protocol.alpha = Some(real()?);
                real()?
            }
            SweepParam::Epsilon => {
                e.protocol.epsilon = Some(real()?);
                real()?
            }
            SweepParam::SquashK => {
                e.protocol.squash_k = Some(real()?);
                real()?
            }
            SweepParam::Mu => match &mut e.population.source {
                Source::Normal { mean, .. } => {
                    *mean = real()?;
                    *mean
                }
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "mu sweeps need a normal population, not {}",
                        other.name()
                    )))
                }
            },
            SweepParam::Bits => {
                e.integer_bits = u32::try_from(count()?).map_err(|_| bad())?;
                e.integer_bits as f64
            }
            SweepParam::N => {
                e.population.n = Some(count()?);
                count()? as f64
            }
        };
        Ok((e, fmt_g6(shown)))
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownParameter(s.to_string()))
    }
}

/// One result per value, all from the base experiment's master seed so the
/// curves share randomness where they can.
pub fn sweep(param: SweepParam, values: &[String], base: &Experiment) -> Result<Vec<ExperimentResult>> {
    let points = values
        .iter()
        .map(|v| param.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    for (e, _) in &points {
        e.validate()?;
    }
    points
        .into_par_iter()
        .map(|(e, shown)| {
            let mut r = run_experiment(&e)?;
            r.param_name = Some(param.name().to_string());
            r.param_value = Some(shown);
            Ok(r)
        })
        .collect()
}
