use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use specshare::policy::PolicyEvaluator;
use specshare::ratio::{ratio_pdf, RatioMode, RatioParams};
use specshare::solver::{solve, SolverSettings};
use specshare::specfun::{gauss_2f1, reg_inc_gamma};
use specshare::{ConstraintSet, DualPair, InterferenceMode, Policy};
use specshare_bench::sweep_config;

fn special_functions(c: &mut Criterion) {
    c.bench_function("gauss_2f1 near one", |b| {
        b.iter(|| gauss_2f1(black_box(1.0), black_box(6.0), black_box(5.0), black_box(0.93)))
    });
    c.bench_function("gauss_2f1 negative argument", |b| {
        b.iter(|| gauss_2f1(black_box(2.0), black_box(4.0), black_box(3.0), black_box(-7.5)))
    });
    c.bench_function("reg_inc_gamma", |b| {
        b.iter(|| reg_inc_gamma(black_box(2.5), black_box(3.7)))
    });
}

fn distributions(c: &mut Criterion) {
    let closed = RatioParams::new(2.0, 2, RatioMode::PaperClosedForm).unwrap();
    let exact = RatioParams::new(2.0, 3, RatioMode::ExactQuadrature).unwrap();
    c.bench_function("ratio pdf closed form", |b| {
        b.iter(|| ratio_pdf(&closed, black_box(1.7)))
    });
    c.bench_function("ratio pdf quadrature", |b| b.iter(|| ratio_pdf(&exact, black_box(1.7))));
}

fn expectations(c: &mut Criterion) {
    let ev = PolicyEvaluator::new(sweep_config(2, 1.0)).unwrap();
    let aip = Policy::Aip(DualPair { lambda: 0.15, mu: 0.1 });
    let pip = Policy::Pip { mu: 0.2, i_pk: 3.0 };
    c.bench_function("aip expectations", |b| b.iter(|| ev.expectations(black_box(&aip))));
    c.bench_function("pip expectations", |b| b.iter(|| ev.expectations(black_box(&pip))));
    c.bench_function("aip rate and outage", |b| b.iter(|| ev.rate_outage(black_box(&aip))));
}

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let cfg = sweep_config(2, 1.0);
    let s = SolverSettings::default();
    for mode in [InterferenceMode::Average, InterferenceMode::Peak] {
        let constraints = ConstraintSet::from_db(5.0, 5.0, mode).unwrap();
        group.bench_function(format!("{mode:?}"), |b| {
            b.iter(|| solve(&cfg, black_box(&constraints), &s))
        });
    }
    group.finish();
}

criterion_group!(benches, special_functions, distributions, expectations, solvers);
criterion_main!(benches);
