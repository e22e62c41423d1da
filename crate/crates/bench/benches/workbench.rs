use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use preq::calibration::adversarial_outcomes;
use preq::experiments::{run_definetti, ExchangeableSource};
use preq::processes::{gen_polya, polya_sequence_prob};
use preq::rule::default_h_family;
use preq::{
    align_run, h_calibration, run_forecaster, wilson_interval, CovariateTable, ForecasterSpec, InformationBase,
    ProcessKind, ProcessSpec, ZTest,
};

fn generate(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    for kind in [ProcessKind::Bernoulli { p: 0.3 }, ProcessKind::Polya { r0: 1, b0: 1 }] {
        let spec = ProcessSpec::new(kind, 100_000, 1);
        group.bench_function(BenchmarkId::from_parameter(spec.label()), |b| {
            b.iter(|| black_box(spec.generate().unwrap()))
        });
    }
    group.finish();
}

fn forecast(c: &mut Criterion) {
    let outcomes = ProcessSpec::new(ProcessKind::Bernoulli { p: 0.3 }, 100_000, 1).generate().unwrap().outcomes;
    let info = InformationBase::history_only(&outcomes.outcomes);
    c.bench_function("laplace 100k", |b| {
        b.iter(|| black_box(run_forecaster(&ForecasterSpec::Laplace, &outcomes, &info).unwrap()))
    });
}

fn calibrate(c: &mut Criterion) {
    let outcomes = ProcessSpec::new(ProcessKind::Bernoulli { p: 0.3 }, 10_000, 1).generate().unwrap().outcomes;
    let info = InformationBase::history_only(&outcomes.outcomes);
    let series = run_forecaster(&ForecasterSpec::Laplace, &outcomes, &info).unwrap();
    let run = align_run(outcomes, series).unwrap();
    let rules = default_h_family(None);
    c.bench_function("h_calibration default family 10k", |b| {
        b.iter(|| black_box(h_calibration(&run, &info, &rules, &ZTest::default()).unwrap()))
    });
}

fn adversary(c: &mut Criterion) {
    c.bench_function("adversary laplace 10k", |b| {
        b.iter(|| black_box(adversarial_outcomes(&ForecasterSpec::Laplace, 10_000, &CovariateTable::new()).unwrap()))
    });
}

fn polya_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("polya_sequence_prob");
    for n in [20usize, 200, 2000] {
        let (seq, _) = gen_polya(1, 1, n, 3).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &seq.outcomes, |b, s| {
            b.iter(|| black_box(polya_sequence_prob(s, 1, 1).unwrap()))
        });
    }
    group.finish();
}

fn experiments(c: &mut Criterion) {
    let mut group = c.benchmark_group("experiments");
    group.sample_size(10);
    group.bench_function("definetti 200x1000", |b| {
        b.iter(|| black_box(run_definetti(&ExchangeableSource::Polya { r0: 1, b0: 1 }, 1000, 200, 1).unwrap()))
    });
    group.finish();
    c.bench_function("wilson", |b| b.iter(|| black_box(wilson_interval(black_box(0.75), 100, 0.95).unwrap())));
}

criterion_group!(benches, generate, forecast, calibrate, adversary, polya_exact, experiments);
criterion_main!(benches);
