use bitpush::baselines::{Baseline, ValueRange};
use bitpush::protocol::{estimate_mean, BitPushing, ProtocolConfig};
use bitpush::FixedPointCodec;
use bitpush_bench::normal_population;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn codec(c: &mut Criterion) {
    let codec = FixedPointCodec::unsigned(10).unwrap();
    let values = normal_population(1024);
    c.bench_function("encode_1024_values", |b| {
        b.iter(|| {
            for &x in &values {
                black_box(codec.encode(black_box(x)).unwrap());
            }
        })
    });
}

fn mean_estimation(c: &mut Criterion) {
    let codec = FixedPointCodec::unsigned(10).unwrap();
    let mut group = c.benchmark_group("estimate_mean");
    for n in [10_000usize, 100_000] {
        let pop = normal_population(n);
        group.throughput(Throughput::Elements(n as u64));
        for (name, variant, epsilon) in [
            ("basic", BitPushing::Uniform, None),
            ("adaptive", BitPushing::Adaptive, None),
            ("adaptive_dp", BitPushing::Adaptive, Some(2.0)),
        ] {
            let config = ProtocolConfig {
                epsilon,
                ..ProtocolConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &pop, |b, pop| {
                let mut rng = ChaCha8Rng::seed_from_u64(1);
                b.iter(|| estimate_mean(variant, pop, &codec, &config, &mut rng).unwrap().estimate)
            });
        }
    }
    group.finish();
}

fn baselines(c: &mut Criterion) {
    let pop = normal_population(10_000);
    let range = ValueRange::new(0.0, 1023.0).unwrap();
    let mut group = c.benchmark_group("baselines");
    group.throughput(Throughput::Elements(pop.len() as u64));
    for baseline in [Baseline::Laplace, Baseline::Rounding, Baseline::Dithering, Baseline::Piecewise] {
        group.bench_function(baseline.name(), |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            b.iter(|| baseline.estimate_mean(&pop, &range, Some(1.0), &mut rng).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, codec, mean_estimation, baselines);
criterion_main!(benches);
