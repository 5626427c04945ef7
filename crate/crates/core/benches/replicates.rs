// Replicate loop on the rayon pool versus the sequential fallback. The
// workload is one Monte Carlo replicate: a Poisson sample and its edge and
// critical point counts.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rgc::geograph::{count_subgraphs, GraphPattern, Mode};
use rgc::morse::critical_points;
use rgc::par;
use rgc::pointproc::{sample, ModelSpec, Window};

fn replicate(i: usize, n: f64) -> u64 {
    let cfg = sample(&ModelSpec::Poisson, Window::new(2, n).unwrap(), 0.0, par::derive_seed(7, i as u64)).unwrap();
    let e = count_subgraphs(&cfg, 0.5, &GraphPattern::edge()).unwrap();
    let cp = critical_points(&cfg, 0.5, 2, Mode::InteriorOnly).unwrap();
    e + cp.counts.iter().sum::<u64>()
}

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("replicates");
    g.sample_size(20);
    for n in [500.0, 2000.0] {
        g.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| black_box(par::map(32, |i| replicate(i, n))))
        });
        g.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| black_box(par::map_seq(32, |i| replicate(i, n))))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
