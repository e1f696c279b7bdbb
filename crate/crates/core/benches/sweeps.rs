use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use riesz_endpoint::certify::{certify_lower_bound, nonimprove_experiment, weak_type_sweep, NonimproveConfig};
use riesz_endpoint::corpus::{two_ball_profiles, DEFAULT_SEED};
use riesz_endpoint::{
    CalderonOp, CertifyConfig, Exec, ExtremalSequence, LorentzIndex, OutputWindow, RnOperator, SigmaTriple,
};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn riesz() -> RnOperator {
    RnOperator::Riesz { gamma: 0.5, with_constant: false }
}

fn bench_certify(c: &mut Criterion) {
    let sigma = SigmaTriple::new(1.0, 2.0, 1.0).unwrap();
    let fam = ExtremalSequence::shrinking(1.0, 1, 10).unwrap();
    let cfg = CertifyConfig::new(riesz(), CalderonOp::R, sigma, fam, (1e-3, 1e3), 193).unwrap();
    let mut g = c.benchmark_group("certify_lower_bound");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| certify_lower_bound(&cfg, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let corpus = two_ball_profiles(DEFAULT_SEED, 1, 50).unwrap();
    let domain = LorentzIndex::new(1.0, 1.0).unwrap();
    let target = LorentzIndex::new(2.0, f64::INFINITY).unwrap();
    let window = OutputWindow::default();
    let mut g = c.benchmark_group("weak_type_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| weak_type_sweep(&riesz(), domain, target, &corpus, &window, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_nonimprove(c: &mut Criterion) {
    let cfg = NonimproveConfig::new(0.5, 0.5, 1.0, 64);
    let mut g = c.benchmark_group("nonimprove_experiment");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| nonimprove_experiment(&cfg, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_certify, bench_sweep, bench_nonimprove);
criterion_main!(benches);
