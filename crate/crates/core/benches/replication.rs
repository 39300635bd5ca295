use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use yule_bins_core::par::replicate_sequential;
#[cfg(feature = "parallel")]
use yule_bins_core::par::{replicate_parallel, with_threads};
use yule_bins_core::rng::RngStream;
use yule_bins_core::yule::{bin_probabilities, first_empty_index, sample_splits, throw_balls, ThrowMode};

fn one_replication(seed: u64, r: u64, n: u64) -> f64 {
    let mut rng = RngStream::new(seed, r).rng();
    let bins = (4.0 * (n as f64).powf(1.0 / 3.0)).ceil() as usize + 64;
    let splits = sample_splits(bins, &mut rng).unwrap();
    let pv = bin_probabilities(&splits, 1.0).unwrap();
    let occ = throw_balls(&pv, n, ThrowMode::Poissonized, &mut rng);
    first_empty_index(&occ).map_or(f64::NAN, |i| i as f64)
}

fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("first-empty");
    group.sample_size(10);
    for &reps in &[256usize, 1024] {
        group.bench_with_input(BenchmarkId::new("sequential", reps), &reps, |b, &reps| {
            b.iter(|| replicate_sequential(reps, |r| one_replication(7, r, 100_000)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", reps), &reps, |b, &reps| {
            b.iter(|| {
                with_threads(None, || {
                    replicate_parallel(reps, |r| one_replication(7, r, 100_000))
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
