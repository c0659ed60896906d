use std::path::PathBuf;

use bitpush::estimators::VarianceMethod;
use bitpush::protocol::{DEFAULT_DELTA, DEFAULT_GAMMA};
use bitpush::simharness::{ClientDraw, Column, Experiment, Method, PopulationSpec, Source, Target};
use bitpush::ProtocolConfig;
use clap::{Args, ValueEnum};

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 => Ok(v),
        Ok(v) => Err(format!("must be > 0, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: bitpush::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Dist {
    Normal,
    Uniform,
    Exponential,
    File,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TargetArg {
    Mean,
    Variance,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VarianceArg {
    /// Mean of squared deviations from a first-phase mean.
    Centered,
    /// Mean of squares minus the squared mean.
    Raw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DrawArg {
    Fixed,
    Bootstrap,
}

#[derive(Debug, Args)]
pub struct PopulationArgs {
    /// Population source.
    #[arg(long, value_enum, default_value = "normal")]
    pub dist: Dist,
    /// Normal mean.
    #[arg(long, default_value_t = 350.0)]
    pub mu: f64,
    /// Normal standard deviation.
    #[arg(long, default_value_t = 50.0)]
    pub sigma: f64,
    /// Uniform lower bound.
    #[arg(long, default_value_t = 0.0)]
    pub low: f64,
    /// Uniform upper bound.
    #[arg(long, default_value_t = 1023.0)]
    pub high: f64,
    /// Exponential rate.
    #[arg(long, default_value_t = 0.01)]
    pub rate: f64,
    /// Comma-separated input file for --dist file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column name, or zero-based index, of the input file.
    #[arg(long, default_value = "0")]
    pub column: String,
    /// Population size; for file input, keeps the first n rows [default: 10000, all rows for files].
    #[arg(long)]
    pub n: Option<usize>,
    /// Population seed [default: --seed].
    #[arg(long)]
    pub pop_seed: Option<u64>,
}

impl PopulationArgs {
    pub fn spec(&self, seed: u64) -> PopulationSpec {
        let source = match self.dist {
            Dist::Normal => Source::Normal {
                mean: self.mu,
                sd: self.sigma,
            },
            Dist::Uniform => Source::Uniform {
                low: self.low,
                high: self.high,
            },
            Dist::Exponential => Source::Exponential { rate: self.rate },
            Dist::File => Source::FromFile {
                path: self.input.clone().unwrap_or_default(),
                column: self.column.parse().unwrap_or(Column::Index(0)),
            },
        };
        let n = match self.dist {
            Dist::File => self.n,
            _ => Some(self.n.unwrap_or(10_000)),
        };
        PopulationSpec {
            source,
            n,
            clip: None,
            seed: self.pop_seed.unwrap_or(seed),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// basic, weighted, adaptive, laplace, rounding, dithering, piecewise or oracle.
    #[arg(long, default_value = "adaptive", value_parser = method)]
    pub method: Method,
    #[command(flatten)]
    pub population: PopulationArgs,
    /// Integer bits of the fixed-point codec.
    #[arg(long, default_value_t = 10)]
    pub bits: u32,
    /// Fractional bits of the fixed-point codec.
    #[arg(long, default_value_t = 0)]
    pub frac_bits: u32,
    /// Round-one weight exponent.
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Fraction of clients in round one.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Weight exponent [default: 1 adaptive, 0.5 weighted].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Enables local differential privacy with this epsilon (> 0).
    #[arg(long, value_parser = positive)]
    pub epsilon: Option<f64>,
    /// Disables pooling of round-one reports.
    #[arg(long)]
    pub no_caching: bool,
    /// Squash multiplier under DP; 0 disables [default: 1].
    #[arg(long)]
    pub squash_k: Option<f64>,
    /// Distinct bits disclosed per client per round.
    #[arg(long, default_value_t = 1)]
    pub b_send: usize,
    /// Clients sample their own bit instead of the server assigning it.
    #[arg(long)]
    pub local_randomness: bool,
    /// Statistic to estimate.
    #[arg(long, value_enum, default_value = "mean")]
    pub target: TargetArg,
    /// Variance estimator.
    #[arg(long, value_enum, default_value = "centered")]
    pub variance_method: VarianceArg,
    /// Share of clients in the first phase of a variance estimate.
    #[arg(long, default_value_t = 0.5)]
    pub variance_split: f64,
    /// Whether repetitions reuse the population or resample it with replacement.
    #[arg(long, value_enum, default_value = "fixed")]
    pub draw: DrawArg,
    /// Repetitions.
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Master seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl ExperimentArgs {
    pub fn experiment(&self) -> Experiment {
        Experiment {
            method: self.method,
            population: self.population.spec(self.seed),
            integer_bits: self.bits,
            fractional_bits: self.frac_bits,
            protocol: ProtocolConfig {
                gamma: self.gamma,
                delta: self.delta,
                alpha: self.alpha,
                epsilon: self.epsilon,
                caching: !self.no_caching,
                squash_k: self.squash_k,
                b_send: self.b_send,
                local_randomness: self.local_randomness,
            },
            target: match (self.target, self.variance_method) {
                (TargetArg::Mean, _) => Target::Mean,
                (TargetArg::Variance, VarianceArg::Centered) => Target::Variance(VarianceMethod::CenteredSquare),
                (TargetArg::Variance, VarianceArg::Raw) => Target::Variance(VarianceMethod::SquareMinusSquaredMean),
            },
            draw: match self.draw {
                DrawArg::Fixed => ClientDraw::Fixed,
                DrawArg::Bootstrap => ClientDraw::Bootstrap,
            },
            variance_split: self.variance_split,
            reps: self.reps,
            seed: self.seed,
        }
    }

    /// Usage-level checks that clap cannot express.
    pub fn check(&self) -> Result<(), String> {
        if matches!(self.population.dist, Dist::File) && self.population.input.is_none() {
            return Err("--dist file requires --input".into());
        }
        if !(self.variance_split > 0.0 && self.variance_split < 1.0) {
            return Err(format!("--variance-split must lie in (0, 1), got {}", self.variance_split));
        }
        self.experiment().validate().map_err(|e| e.to_string())
    }
}
