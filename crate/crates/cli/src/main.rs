//! `bitpush`: run bit-pushing and baseline experiments and write CSV results.
//!
//! Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.

mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bitpush::protocol::estimate_mean;
use bitpush::simharness::{
    fmt_g6, generate, prepare, read_column, run_experiment, sweep, write_csv, Column, ExperimentResult, SweepParam,
};
use clap::{CommandFactory, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use args::ExperimentArgs;

#[derive(Debug, Parser)]
#[command(name = "bitpush", version, about = "One-bit-per-client private mean estimation experiments")]
struct Cli {
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write a single CSV row.
    Run {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one experiment per value of a parameter.
    Sweep {
        /// gamma, delta, alpha, mu, bits, n, epsilon, squash_k or method.
        #[arg(long)]
        param: String,
        /// Comma-separated values; `none` turns epsilon off.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Parse an input file and summarize the selected column.
    IngestCheck {
        #[arg(long)]
        input: PathBuf,
        /// Column name or zero-based index.
        #[arg(long, default_value = "0")]
        column: String,
        /// Report how many values fall outside [0, 2^bits - 1].
        #[arg(long)]
        bits: Option<u32>,
    },
    /// Run one protocol execution; report disclosed private bits and final bit means.
    MeterReport {
        #[command(flatten)]
        experiment: ExperimentArgs,
    },
}

#[derive(Debug, clap::Args)]
struct OutputArgs {
    /// Output CSV path [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the wall_time_ms column (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    /// Print fractional private bits per run to standard error.
    #[arg(long)]
    meter: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<bitpush::Error> for Failure {
    fn from(e: bitpush::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage_error(message: &str) -> ExitCode {
    let mut cmd = Cli::command();
    cmd.error(clap::error::ErrorKind::ValueValidation, message).print().ok();
    ExitCode::from(2)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return usage_error("--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => usage_error(&message),
        Err(Failure::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { experiment, output } => {
            experiment.check().map_err(Failure::Usage)?;
            let result = run_experiment(&experiment.experiment())?;
            emit(&[result], &output)
        }
        Command::Sweep {
            param,
            values,
            experiment,
            output,
        } => {
            experiment.check().map_err(Failure::Usage)?;
            let param: SweepParam = param.parse().map_err(|e: bitpush::Error| Failure::Usage(e.to_string()))?;
            let base = experiment.experiment();
            for v in &values {
                let (e, _) = param.apply(&base, v).map_err(|e| Failure::Usage(e.to_string()))?;
                e.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            }
            let results = sweep(param, &values, &base)?;
            emit(&results, &output)
        }
        Command::IngestCheck { input, column, bits } => ingest_check(input, &column, bits),
        Command::MeterReport { experiment } => meter_report(&experiment),
    }
}

fn emit(results: &[ExperimentResult], output: &OutputArgs) -> Result<(), Failure> {
    for r in results {
        if r.clipped > 0 {
            log::warn!("{}: {} values clipped into the codec range", r.method, r.clipped);
        }
        if output.meter {
            match r.meter {
                Some(m) => eprintln!(
                    "meter method={} param={} total_bits={:.6} per_client_bits={:.6} max_client_bits={:.6}",
                    r.method,
                    r.param_value.as_deref().unwrap_or(""),
                    m.total,
                    m.per_client,
                    m.max_client
                ),
                None => eprintln!("meter method={} not metered", r.method),
            }
        }
    }
    let written = match &output.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            write_csv(results, BufWriter::new(file), output.timing)
        }
        None => write_csv(results, io::stdout().lock(), output.timing),
    };
    written.map_err(Failure::from)
}

fn ingest_check(input: PathBuf, column: &str, bits: Option<u32>) -> Result<(), Failure> {
    let column: Column = column.parse().unwrap_or(Column::Index(0));
    let (values, skipped) = read_column(&input, &column)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = io::stdout().lock();
    let write = |out: &mut io::StdoutLock, line: String| {
        writeln!(out, "{line}").map_err(|e| Failure::Runtime(e.to_string()))
    };
    write(&mut out, format!("rows {}", values.len()))?;
    write(&mut out, format!("skipped {skipped}"))?;
    write(&mut out, format!("min {min}"))?;
    write(&mut out, format!("max {max}"))?;
    write(&mut out, format!("mean {mean}"))?;
    if let Some(b) = bits {
        let high = (2f64).powi(b as i32) - 1.0;
        let outside = values.iter().filter(|&&v| v < 0.0 || v > high).count();
        write(&mut out, format!("outside_{b}_bits {outside}"))?;
    }
    Ok(())
}

fn meter_report(args: &ExperimentArgs) -> Result<(), Failure> {
    let mut experiment = args.experiment();
    // One execution is enough here; validation still wants two repetitions.
    experiment.reps = experiment.reps.max(2);
    args.check().map_err(Failure::Usage)?;
    let variant = experiment
        .method
        .bit_pushing()
        .ok_or_else(|| Failure::Usage(format!("meter-report needs a bit-pushing method, not {}", args.method.name())))?;
    // Surface file errors before the codec pass.
    generate(&experiment.population)?;
    let prepared = prepare(&experiment)?;
    let codec = experiment.codec()?;
    let mut rng = ChaCha8Rng::seed_from_u64(experiment.seed);
    let outcome = estimate_mean(variant, &prepared.values, &codec, &experiment.protocol, &mut rng)?;
    let m = &outcome.meter;
    let join = |xs: Vec<String>| xs.join(" ");
    let means = join(outcome.stats.means().iter().map(|&x| fmt_g6(x)).collect());
    let counts = join(outcome.stats.counts().iter().map(u64::to_string).collect());
    let excluded = join(outcome.stats.excluded().iter().map(|&e| (e as u8).to_string()).collect());
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "method {}\nclients {}\ntotal_bits {:.6}\nper_client_bits {:.6}\nmax_client_bits {:.6}\nestimate {}\ntruth {}\n\
         bit_means {means}\nbit_counts {counts}\nbit_excluded {excluded}",
        args.method.name(),
        m.clients(),
        m.total(),
        m.per_client_average(),
        m.max_client(),
        outcome.estimate,
        prepared.truth
    )
    .map_err(|e| Failure::Runtime(e.to_string()))
}
