//! Capacity and outage: both formulations against their simulation modes,
//! orderings in the user counts and limiting cases.

use specshare::metrics::{evaluate_metrics, Formulation};
use specshare::montecarlo::{simulate_metrics, SimMode, SimResult, SimSpec};
use specshare::solver::{solve, SolverSettings};
use specshare::{ConstraintSet, DualPair, FadingSpec, InterferenceMode, Policy, SystemConfig};

fn config(k: u32, l: u32, m: f64) -> SystemConfig {
    let f = FadingSpec::with_shape(m).unwrap();
    SystemConfig::new(k, l, 1.0, f, f).unwrap()
}

fn solved(cfg: &SystemConfig, p_db: f64, i_db: f64, mode: InterferenceMode) -> Policy {
    let c = ConstraintSet::from_db(p_db, i_db, mode).unwrap();
    solve(cfg, &c, &SolverSettings::default()).unwrap().policy
}

fn within_3se(analytic: f64, sim: &SimResult) -> bool {
    if sim.std_error == 0.0 {
        return (analytic - sim.mean).abs() <= 1e-9;
    }
    (analytic - sim.mean).abs() <= 3.0 * sim.std_error
}

#[test]
fn joint_formulation_matches_physical_simulation() {
    let spec = SimSpec::new(1_000_000, 5, SimMode::Physical, 8).unwrap();
    for l in [1, 2] {
        for m in [1.0, 2.0] {
            let cfg = config(5, l, m);
            for mode in [InterferenceMode::Average, InterferenceMode::Peak] {
                let policy = solved(&cfg, 5.0, 5.0, mode);
                let a = evaluate_metrics(&cfg, &policy, Formulation::Joint2D).unwrap();
                let s = simulate_metrics(&cfg, &policy, &spec).unwrap();
                assert!(
                    within_3se(a.capacity, &s.capacity),
                    "L={l} m={m} {mode:?}: {a:?} vs {:?}",
                    s.capacity
                );
                assert!(
                    within_3se(a.outage, &s.outage),
                    "L={l} m={m} {mode:?}: {a:?} vs {:?}",
                    s.outage
                );
            }
        }
    }
}

#[test]
fn ratio_formulation_matches_independent_simulation() {
    let spec = SimSpec::new(1_000_000, 6, SimMode::IidRatio, 8).unwrap();
    let policy = Policy::Aip(DualPair { lambda: 0.5, mu: 0.0 });
    for l in [1, 2] {
        for m in [1.0, 2.0] {
            let cfg = config(5, l, m);
            let a = evaluate_metrics(&cfg, &policy, Formulation::Ratio1D).unwrap();
            let s = simulate_metrics(&cfg, &policy, &spec).unwrap();
            assert!(
                within_3se(a.capacity, &s.capacity),
                "L={l} m={m}: {a:?} vs {:?}",
                s.capacity
            );
            assert!(within_3se(a.outage, &s.outage), "L={l} m={m}: {a:?} vs {:?}", s.outage);
        }
    }
}

#[test]
fn formulation_gap() {
    let policy = Policy::Aip(DualPair { lambda: 0.5, mu: 0.0 });
    for l in [1, 2] {
        for m in [1.0, 2.0] {
            let cfg = config(5, l, m);
            let j = evaluate_metrics(&cfg, &policy, Formulation::Joint2D).unwrap();
            let r = evaluate_metrics(&cfg, &policy, Formulation::Ratio1D).unwrap();
            println!(
                "K=5 L={l} m={m}: joint2d - ratio1d capacity {:+.6}, outage {:+.6}",
                j.capacity - r.capacity,
                j.outage - r.outage
            );
            // Independent cross gains per candidate give a better best ratio.
            assert!(r.capacity > j.capacity && r.outage < j.outage, "{j:?} {r:?}");
        }
    }
}

#[test]
fn orderings_in_user_counts() {
    let metrics = |k: u32, l: u32| {
        let cfg = config(k, l, 1.0);
        let p = solved(&cfg, 5.0, 5.0, InterferenceMode::Average);
        evaluate_metrics(&cfg, &p, Formulation::Joint2D).unwrap()
    };
    let by_k: Vec<_> = [1, 2, 5, 10].iter().map(|&k| metrics(k, 1)).collect();
    for w in by_k.windows(2) {
        assert!(w[1].capacity > w[0].capacity && w[1].outage < w[0].outage, "{w:?}");
    }
    let by_l: Vec<_> = [1, 2, 4].iter().map(|&l| metrics(5, l)).collect();
    for w in by_l.windows(2) {
        assert!(w[1].capacity < w[0].capacity && w[1].outage > w[0].outage, "{w:?}");
    }
}

#[test]
fn vanishing_interference_limit_silences_the_link() {
    let cfg = config(5, 2, 1.0);
    let p = solved(&cfg, 5.0, -60.0, InterferenceMode::Average);
    let a = evaluate_metrics(&cfg, &p, Formulation::Joint2D).unwrap();
    assert!(a.capacity < 1e-3 && a.outage > 0.99, "{a:?}");
}

#[test]
fn average_limit_beats_peak_limit() {
    for l in [1, 2] {
        let cfg = config(5, l, 1.0);
        for p_db in [-5.0, 5.0, 15.0] {
            let aip = solved(&cfg, p_db, 5.0, InterferenceMode::Average);
            let pip = solved(&cfg, p_db, 5.0, InterferenceMode::Peak);
            let a = evaluate_metrics(&cfg, &aip, Formulation::Joint2D).unwrap().capacity;
            let b = evaluate_metrics(&cfg, &pip, Formulation::Joint2D).unwrap().capacity;
            assert!(a >= b, "L={l} P={p_db} dB: {a} < {b}");
        }
    }
}
