//! Shared fixtures for the benchmarks.

use bitpush::simharness::{generate, PopulationSpec, Source};

/// Normal(350, 50) population truncated onto the 10-bit integer grid.
pub fn normal_population(n: usize) -> Vec<f64> {
    let spec = PopulationSpec::synthetic(Source::Normal { mean: 350.0, sd: 50.0 }, n, 42).with_clip(0.0, 1023.0);
    generate(&spec)
        .expect("valid spec")
        .values
        .into_iter()
        .map(f64::trunc)
        .collect()
}
