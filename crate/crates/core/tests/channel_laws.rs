//! Gain laws: normalization, cdf consistency and sampling statistics.

use specshare::channel::{gain_density, max_gain_density, sample_gains, FadingSpec, MaxGainLaw};
use specshare::montecarlo::ks_against;
use specshare::numerics::{integrate, integrate_semi_infinite, QuadratureSettings};

const SHAPES: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 4.0];
const COUNTS: [u32; 3] = [1, 2, 4];

#[test]
fn densities_integrate_to_one() {
    let s = QuadratureSettings::new(1e-12, 1e-11, 60).unwrap();
    for m in SHAPES {
        let spec = FadingSpec::with_shape(m).unwrap();
        for l in COUNTS {
            let v = integrate_semi_infinite(|x| max_gain_density(spec, l, x).unwrap().pdf, 0.0, &s).unwrap();
            assert!((v.value - 1.0).abs() <= 1e-9, "m={m} L={l}: {}", v.value);
        }
    }
}

#[test]
fn cdf_is_integral_of_pdf() {
    let s = QuadratureSettings::new(1e-12, 1e-11, 60).unwrap();
    for m in SHAPES {
        let spec = FadingSpec::with_shape(m).unwrap();
        for l in COUNTS {
            for i in 1..=20 {
                let x = 0.25 * i as f64;
                // Substituting x = s^2 absorbs the origin singularity for m < 1.
                let v = integrate(
                    |s| 2.0 * s * max_gain_density(spec, l, s * s).unwrap().pdf,
                    0.0,
                    x.sqrt(),
                    &s,
                )
                .unwrap();
                let cdf = max_gain_density(spec, l, x).unwrap().cdf;
                assert!((v.value - cdf).abs() <= 1e-8, "m={m} L={l} x={x}: {} vs {cdf}", v.value);
            }
        }
    }
}

#[test]
fn single_link_is_max_of_one() {
    for m in SHAPES {
        let spec = FadingSpec::with_shape(m).unwrap();
        for x in [0.1, 0.7, 2.0, 6.0] {
            assert_eq!(gain_density(spec, x).unwrap(), max_gain_density(spec, 1, x).unwrap());
        }
    }
}

#[test]
fn sample_moments() {
    let n = 1_000_000;
    let xs = sample_gains(FadingSpec::rayleigh(), n, 1).unwrap();
    let mean = xs.iter().sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() <= 0.005, "{mean}");
    assert!(xs.iter().all(|&x| x >= 0.0));

    let xs = sample_gains(FadingSpec::nakagami(2.0).unwrap(), n, 1).unwrap();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((var - 0.5).abs() <= 0.01, "{var}");
}

#[test]
fn samples_match_cdf() {
    for m in SHAPES {
        let spec = FadingSpec::with_shape(m).unwrap();
        let law = MaxGainLaw::new(spec, 1).unwrap();
        let mut xs = sample_gains(spec, 1_000_000, 5).unwrap();
        let v = ks_against(&mut xs, |x| law.cdf(x)).unwrap();
        assert!(v.ks_distance < 0.005, "m={m}: {v:?}");
    }
}
