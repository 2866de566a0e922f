use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use groupiq::experiments::Protocol;
use groupiq::{evaluate_with, Execution, GroupNotation};

fn episodes(c: &mut Criterion) {
    let protocol = Protocol::default();
    let mut g = c.benchmark_group("evaluate_100_episodes");
    g.sample_size(10);
    for notation in ["SL10&O10", "SL10&TL10", "IL10&TL10"] {
        let config = protocol.config(&GroupNotation::parse(notation).unwrap());
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            g.bench_with_input(BenchmarkId::new(label, notation), &config, |b, config| {
                b.iter(|| evaluate_with(config, 100, 1, exec).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, episodes);
criterion_main!(benches);
