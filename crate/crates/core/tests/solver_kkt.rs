//! Dual solvers against optimality conditions, a closed-form Rayleigh grid
//! scan, limiting cases and reproducibility.

mod common;

use common::{distance_to_cells, kkt_cells, RayleighOracle};
use specshare::metrics::{evaluate_metrics, Formulation};
use specshare::montecarlo::{simulate_metrics, SimMode, SimSpec};
use specshare::numerics::bisect_root;
use specshare::policy::PolicyEvaluator;
use specshare::solver::{
    bracket_lambda, solve, solve_duals_aip, solve_mu_pip, BindingSet, SolveReport, SolverSettings,
};
use specshare::{db_to_linear, ConstraintSet, DualPair, FadingSpec, InterferenceMode, Policy, SystemConfig};

fn config(k: u32, l: u32, m: f64) -> SystemConfig {
    let f = FadingSpec::with_shape(m).unwrap();
    SystemConfig::new(k, l, 1.0, f, f).unwrap()
}

fn check_kkt(r: &SolveReport, s: &SolverSettings) {
    assert!(r.residual_p <= s.inner_tol, "{r:?}");
    assert!(r.residual_i <= s.inner_tol, "{r:?}");
    if r.duals.lambda > s.epsilon {
        assert!(r.residual_i.abs() <= 10.0 * s.inner_tol, "{r:?}");
    }
    if r.duals.mu > s.inner_tol {
        assert!(r.residual_p.abs() <= 10.0 * s.inner_tol, "{r:?}");
    }
    if r.outer_iters > 0 {
        let bound = (r.lambda_bar / s.epsilon).log2().ceil() as u32;
        assert!(r.outer_iters <= bound, "{r:?}");
    }
}

/// Smallest `mu` with `E[P] <= p_av` at fixed `lambda`, by plain bisection.
fn oracle_mu(ev: &PolicyEvaluator, lambda: f64, p_av: f64) -> f64 {
    let g = |mu: f64| ev.expectations(&Policy::Aip(DualPair { lambda, mu })).unwrap().e_p - p_av;
    let (mut lo, mut hi) = (1e-12, 1.0 / p_av);
    if g(lo) <= 0.0 {
        return lo;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[test]
fn oracle_matches_evaluator() {
    for l in [1, 2] {
        let oracle = RayleighOracle::new(5, l, 1.0);
        let ev = PolicyEvaluator::new(config(5, l, 1.0)).unwrap();
        for (lambda, mu) in [(0.0, 0.3), (0.15, 0.1), (0.4, 0.02), (1.0, 0.5)] {
            let (p, i) = oracle.aip(lambda, mu);
            let e = ev.expectations(&Policy::Aip(DualPair { lambda, mu })).unwrap();
            assert!(
                (p - e.e_p).abs() <= 1e-8 * p.max(1.0),
                "L={l} ({lambda}, {mu}): {p} vs {}",
                e.e_p
            );
            assert!(
                (i - e.e_i).abs() <= 1e-8 * i.max(1.0),
                "L={l} ({lambda}, {mu}): {i} vs {}",
                e.e_i
            );
        }
        for (mu, i_pk) in [(0.25, 3.0), (0.05, 0.5), (1.0, 10.0)] {
            let (p, i) = oracle.pip(mu, i_pk);
            let e = ev.expectations(&Policy::Pip { mu, i_pk }).unwrap();
            assert!(
                (p - e.e_p).abs() <= 1e-8 * p.max(1.0),
                "L={l} pip ({mu}, {i_pk}): {p} vs {}",
                e.e_p
            );
            assert!(
                (i - e.e_i).abs() <= 1e-8 * i.max(1.0),
                "L={l} pip ({mu}, {i_pk}): {i} vs {}",
                e.e_i
            );
        }
    }
}

#[test]
fn section_v_instances_satisfy_kkt() {
    let s = SolverSettings::default();
    for l in [1, 2] {
        for m in [1.0, 2.0] {
            let cfg = config(5, l, m);
            for mode in [InterferenceMode::Average, InterferenceMode::Peak] {
                let c = ConstraintSet::from_db(5.0, 5.0, mode).unwrap();
                let r = solve(&cfg, &c, &s).unwrap();
                check_kkt(&r, &s);
                if mode == InterferenceMode::Peak {
                    assert_eq!(r.duals.lambda, 0.0);
                }
            }
        }
    }
}

#[test]
fn capacity_is_monotone_in_power_budget() {
    let s = SolverSettings::default();
    let p = db_to_linear(5.0);
    for l in [1, 2] {
        for m in [1.0, 2.0] {
            let cfg = config(5, l, m);
            let ev = PolicyEvaluator::new(cfg).unwrap();
            for mode in [InterferenceMode::Average, InterferenceMode::Peak] {
                let capacity = |p_av: f64| {
                    let c = ConstraintSet::new(p_av, p, mode).unwrap();
                    let r = solve(&cfg, &c, &s).unwrap();
                    ev.rate_outage(&r.policy).unwrap().capacity
                };
                let (a, b) = (capacity(p), capacity(1.01 * p));
                assert!(b >= a - 1e-9, "L={l} m={m} {mode:?}: {a} -> {b}");
            }
        }
    }
}

#[test]
fn grid_scan_locates_aip_duals() {
    let s = SolverSettings::default();
    let p = db_to_linear(5.0);
    let (window, cells) = (0.5, 200);
    let h = window / cells as f64;
    for l in [1, 2] {
        let oracle = RayleighOracle::new(5, l, 1.0);
        let found = kkt_cells(&oracle, p, p, window, window, cells);
        assert!(!found.is_empty(), "L={l}");
        let r = solve_duals_aip(&config(5, l, 1.0), &ConstraintSet::average(p, p).unwrap(), &s).unwrap();
        let d = distance_to_cells(&found, r.duals.lambda, r.duals.mu);
        assert!(d <= s.epsilon + h, "L={l}: {:?} is {d} from the nearest cell", r.duals);
    }
}

#[test]
fn grid_scan_locates_pip_multiplier() {
    let s = SolverSettings::default();
    let p = db_to_linear(5.0);
    let oracle = RayleighOracle::new(5, 1, 1.0);
    let (window, cells) = (0.5, 200);
    let h = window / cells as f64;
    let r: Vec<f64> = (1..=cells).map(|j| oracle.pip(h * j as f64, p).0 - p).collect();
    let crossing: Vec<f64> = r
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > 0.0 && w[1] <= 0.0)
        .map(|(j, _)| h * (j + 1) as f64)
        .collect();
    assert_eq!(crossing.len(), 1, "{crossing:?}");
    let rep = solve_mu_pip(&config(5, 1, 1.0), &ConstraintSet::peak(p, p).unwrap(), &s).unwrap();
    let mu = rep.duals.mu;
    assert!(
        mu >= crossing[0] - s.epsilon && mu <= crossing[0] + h + s.epsilon,
        "{mu} vs {crossing:?}"
    );
}

#[test]
fn loose_interference_limit_is_water_filling() {
    let s = SolverSettings::default();
    let p = db_to_linear(5.0);
    for l in [1, 2] {
        let r = solve_duals_aip(&config(5, l, 1.0), &ConstraintSet::average(p, 1e6).unwrap(), &s).unwrap();
        assert!(r.duals.lambda <= s.epsilon, "{r:?}");
        let oracle = RayleighOracle::new(5, l, 1.0);
        let level = bisect_root(|mu| oracle.tail_power(mu) - p, 1e-3, 10.0, 1e-14).unwrap();
        assert!(
            (r.duals.mu - level).abs() <= 10.0 * s.inner_tol,
            "{} vs {level}",
            r.duals.mu
        );
        check_kkt(&r, &s);
    }
}

#[test]
fn loose_power_limit_binds_interference() {
    let s = SolverSettings::default();
    let i = db_to_linear(5.0);
    for (l, m) in [(1, 1.0), (2, 1.0), (2, 2.0)] {
        let r = solve_duals_aip(&config(5, l, m), &ConstraintSet::average(1e6, i).unwrap(), &s).unwrap();
        assert!(r.duals.mu <= s.inner_tol, "{r:?}");
        assert!((r.e_i - i).abs() <= 10.0 * s.inner_tol, "{r:?}");
        assert_eq!(r.binding_set, BindingSet::AipOnly);
        check_kkt(&r, &s);
    }
    let r = solve_mu_pip(&config(5, 2, 1.0), &ConstraintSet::peak(1e6, i).unwrap(), &s).unwrap();
    assert_eq!(r.duals.mu, 0.0);
}

#[test]
fn vanishing_peak_cap_crushes_power() {
    let s = SolverSettings::default();
    let cfg = config(5, 2, 1.0);
    let r = solve_mu_pip(&cfg, &ConstraintSet::peak(db_to_linear(5.0), 1e-6).unwrap(), &s).unwrap();
    assert!(r.e_p <= 1e-4, "{r:?}");
    let c = evaluate_metrics(&cfg, &r.policy, Formulation::Joint2D)
        .unwrap()
        .capacity;
    assert!(c <= 1e-4, "{c}");
}

#[test]
fn lambda_bracket() {
    let p = db_to_linear(5.0);
    let cfg = config(1, 1, 1.0);
    let huge = bracket_lambda(&cfg, &ConstraintSet::average(p, 1e6).unwrap()).unwrap();
    assert_eq!(huge, 1e-6);

    let c = ConstraintSet::average(p, p).unwrap();
    let bar = bracket_lambda(&cfg, &c).unwrap();
    assert!(bar.is_finite() && bar > 0.0);
    let ev = PolicyEvaluator::new(cfg).unwrap();
    let at = |lambda: f64| {
        Policy::Aip(DualPair {
            lambda,
            mu: oracle_mu(&ev, lambda, p),
        })
    };
    let e1 = ev.expectations(&at(bar)).unwrap().e_i;
    let e2 = ev.expectations(&at(2.0 * bar)).unwrap().e_i;
    assert!(e1 < p, "{e1}");
    assert!(e2 < e1, "{e2} vs {e1}");
    let sim = simulate_metrics(
        &cfg,
        &at(bar),
        &SimSpec::new(1_000_000, 77, SimMode::Physical, 8).unwrap(),
    )
    .unwrap();
    assert!(sim.e_i.mean - 3.0 * sim.e_i.std_error < p, "{:?}", sim.e_i);
}

#[test]
fn repeated_solves_are_identical() {
    let s = SolverSettings::default();
    let cfg = config(5, 2, 1.0);
    for mode in [InterferenceMode::Average, InterferenceMode::Peak] {
        let c = ConstraintSet::from_db(5.0, 5.0, mode).unwrap();
        assert_eq!(solve(&cfg, &c, &s).unwrap(), solve(&cfg, &c, &s).unwrap());
    }
}
