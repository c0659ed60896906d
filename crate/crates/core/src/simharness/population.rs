//! Synthetic and file-backed populations.

use std::fs::File;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Uniform};

use crate::error::{Error, Result};

/// Column selector for file input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    /// Numbers select by zero-based index, anything else by header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(s.parse().map(Column::Index).unwrap_or_else(|_| Column::Name(s.to_string())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    FromFile { path: PathBuf, column: Column },
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Normal { .. } => "normal",
            Source::Uniform { .. } => "uniform",
            Source::Exponential { .. } => "exponential",
            Source::FromFile { .. } => "file",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub source: Source,
    /// Required for synthetic sources; truncates file input when set.
    pub n: Option<usize>,
    /// Inclusive clip range applied after generation.
    pub clip: Option<(f64, f64)>,
    pub seed: u64,
}

impl PopulationSpec {
    pub fn synthetic(source: Source, n: usize, seed: u64) -> Self {
        Self {
            source,
            n: Some(n),
            clip: None,
            seed,
        }
    }

    pub fn with_clip(mut self, low: f64, high: f64) -> Self {
        self.clip = Some((low, high));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub values: Vec<f64>,
    /// Values moved by the clip range.
    pub clipped: usize,
    /// Malformed file rows that were skipped.
    pub skipped_rows: usize,
}

pub fn generate(spec: &PopulationSpec) -> Result<Population> {
    if spec.n == Some(0) {
        return Err(Error::InvalidDistribution("population size must be positive".into()));
    }
    let (mut values, skipped_rows) = match &spec.source {
        Source::FromFile { path, column } => {
            let (mut values, skipped) = read_column(path, column)?;
            if let Some(n) = spec.n {
                values.truncate(n);
            }
            (values, skipped)
        }
        synthetic => {
            let n = spec
                .n
                .ok_or_else(|| Error::InvalidDistribution("synthetic populations need n".into()))?;
            (sample(synthetic, n, spec.seed)?, 0)
        }
    };
    let mut clipped = 0;
    if let Some((low, high)) = spec.clip {
        if !(low <= high) {
            return Err(Error::InvalidDistribution(format!("invalid clip range [{low}, {high}]")));
        }
        for v in &mut values {
            let c = v.clamp(low, high);
            if c != *v {
                clipped += 1;
                *v = c;
            }
        }
    }
    Ok(Population {
        values,
        clipped,
        skipped_rows,
    })
}

fn sample(source: &Source, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bad = |msg: String| Error::InvalidDistribution(msg);
    Ok(match *source {
        Source::Normal { mean, sd } => {
            if !(sd >= 0.0 && sd.is_finite() && mean.is_finite()) {
                return Err(bad(format!("normal needs finite mean and sd >= 0, got ({mean}, {sd})")));
            }
            let d = Normal::new(mean, sd).map_err(|e| bad(format!("normal({mean}, {sd}): {e}")))?;
            d.sample_iter(&mut rng).take(n).collect()
        }
        Source::Uniform { low, high } => {
            if !(low < high && low.is_finite() && high.is_finite()) {
                return Err(bad(format!("uniform needs low < high, got [{low}, {high}]")));
            }
            Uniform::new_inclusive(low, high).sample_iter(&mut rng).take(n).collect()
        }
        Source::Exponential { rate } => {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(bad(format!("exponential rate must be positive, got {rate}")));
            }
            let d = Exp::new(rate).map_err(|e| bad(format!("exponential({rate}): {e}")))?;
            d.sample_iter(&mut rng).take(n).collect()
        }
        Source::FromFile { .. } => unreachable!("file sources are read, not sampled"),
    })
}

/// Numeric values of one column. A first row whose selected field is not
/// numeric is treated as a header; later malformed rows are counted and skipped.
pub fn read_column(path: &Path, column: &Column) -> Result<(Vec<f64>, usize)> {
    let input_err = |message: String| Error::Input {
        path: path.to_path_buf(),
        message,
    };
    let file = File::open(path).map_err(|e| input_err(e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r.map_err(|e| input_err(e.to_string()))?,
        None => return Err(input_err("file is empty".into())),
    };
    let (index, first_is_data) = match column {
        Column::Name(name) => {
            let idx = first
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| input_err(format!("no column named '{name}'")))?;
            (idx, false)
        }
        Column::Index(idx) => {
            if first.len() <= *idx {
                return Err(input_err(format!("no column {idx}; first row has {} fields", first.len())));
            }
            (*idx, first[*idx].parse::<f64>().is_ok())
        }
    };

    let mut values = Vec::new();
    let mut skipped = 0;
    let rest = records.map(|r| r.ok());
    for record in first_is_data.then_some(Some(first)).into_iter().chain(rest) {
        match record.as_ref().and_then(|r| r.get(index)).map(str::parse::<f64>) {
            Some(Ok(v)) if v.is_finite() => values.push(v),
            _ => skipped += 1,
        }
    }
    if values.is_empty() {
        return Err(input_err(format!("no numeric values in column {index}")));
    }
    Ok((values, skipped))
}
