//! Compares the data-parallel suite runner against the sequential one.
//!
//! Trials are independent, so the parallel runner splits them across
//! threads; on a single-core host the two curves coincide. Run with
//! `cargo bench` and, for the no-rayon build, with
//! `cargo bench --no-default-features`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use covergroup::{run_suite, run_suite_sequential, Suite, SuiteConfig};

fn bench_runners(c: &mut Criterion) {
    let cases = [
        (Suite::Cocycle, 2, 40),
        (Suite::SectionClosedForms, 2, 60),
        (Suite::ActionHomomorphism, 2, 10),
        (Suite::Domain, 4, 60),
    ];

    let mut group = c.benchmark_group("suite_runner");
    group.sample_size(10);
    for (suite, n, samples) in cases {
        let config = SuiteConfig::new(n, samples, 7);
        let label = format!("{}_n{n}_s{samples}", suite.name());
        group.bench_with_input(
            BenchmarkId::new("dispatch", &label),
            &config,
            |b, config| {
                b.iter(|| {
                    let report = run_suite(suite, config).expect("suite should run");
                    assert!(report.passed);
                    report
                })
            },
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", &label),
            &config,
            |b, config| {
                b.iter(|| {
                    let report = run_suite_sequential(suite, config).expect("suite should run");
                    assert!(report.passed);
                    report
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_runners);
criterion_main!(benches);
