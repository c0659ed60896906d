//! Populations, repeated-trial experiments, sweeps and their CSV output.

pub mod experiment;
pub mod output;
pub mod population;

pub use experiment::{
    nrmse, prepare, run_experiment, sweep, ClientDraw, Experiment, ExperimentResult, MeterSummary, Method, Prepared,
    SweepParam, Target,
};
pub use output::{fmt_g6, write_csv, CSV_HEADER};
pub use population::{generate, read_column, Column, Population, PopulationSpec, Source};
