//! CSV serialization of experiment results.

use std::io::Write;

use super::experiment::ExperimentResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 13] = [
    "method",
    "param_name",
    "param_value",
    "n",
    "bits",
    "epsilon",
    "delta",
    "gamma",
    "alpha",
    "nrmse",
    "stderr",
    "reps",
    "wall_time_ms",
];

/// Six significant digits in the style of C's `%g`: fixed notation for
/// exponents in `[-4, 6)`, scientific otherwise, trailing zeros removed.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Round first so the exponent reflects the printed mantissa.
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_g6).unwrap_or_default()
}

/// One CSV row per result. Wall time is left empty unless `timing` is set, so
/// that identical inputs give byte-identical files.
pub fn write_csv<W: Write>(results: &[ExperimentResult], out: W, timing: bool) -> Result<()> {
    let err = |e: csv::Error| Error::Output(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in results {
        w.write_record([
            r.method.clone(),
            r.param_name.clone().unwrap_or_default(),
            r.param_value.clone().unwrap_or_default(),
            r.n.to_string(),
            r.bits.to_string(),
            opt(r.epsilon),
            opt(r.delta),
            opt(r.gamma),
            opt(r.alpha),
            fmt_g6(r.nrmse),
            fmt_g6(r.stderr),
            r.reps.to_string(),
            if timing { fmt_g6(r.wall_time_ms) } else { String::new() },
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}
