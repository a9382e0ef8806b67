//! Ergodic capacity and outage of a solved policy.
//!
//! `Joint2D` integrates over the joint law of the selected secondary gain and
//! the worst-case cross gain. `Ratio1D` treats the best-of-K ratio
//! `z = g_s / g_sp` as the maximum of K independent ratios and integrates
//! over `z` alone; it applies only when the transmit-power price is zero.

use std::f64::consts::LN_2;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::numerics::{integrate_semi_infinite_vec, QuadratureSettings};
use crate::policy::{DualPair, Policy, PolicyEvaluator};
use crate::ratio::{ratio_cdf, MudParams, RatioMode, RatioParams};

/// Largest `mu` accepted by the ratio formulation.
pub const RATIO1D_MU_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    Joint2D,
    Ratio1D,
}

impl Formulation {
    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Joint2D => "joint2d",
            Formulation::Ratio1D => "ratio1d",
        }
    }
}

impl std::str::FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "joint2d" | "joint" => Ok(Formulation::Joint2D),
            "ratio1d" | "ratio" => Ok(Formulation::Ratio1D),
            _ => Err(Error::Precondition(format!("unknown formulation '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsResult {
    /// Bits/s/Hz.
    pub capacity: f64,
    pub outage: f64,
    pub formulation: Formulation,
    pub duals: DualPair,
}

/// Ratio law used by the one-dimensional formulation: the closed forms where
/// they are exact (equal shapes with `m = 1` or `L <= 2`), quadrature
/// elsewhere.
pub fn ratio1d_params(config: &SystemConfig) -> Result<RatioParams> {
    let (s, c, l) = (config.secondary(), config.cross(), config.l());
    let exact_closed = s.m() == c.m() && (s.m() == 1.0 || l <= 2);
    let mode = if exact_closed {
        RatioMode::PaperClosedForm
    } else {
        RatioMode::ExactQuadrature
    };
    RatioParams::with_specs(s, c, l, mode)
}

fn ratio_threshold(config: &SystemConfig, policy: &Policy) -> Result<f64> {
    match *policy {
        Policy::Aip(d) if d.mu <= RATIO1D_MU_TOL && d.lambda > 0.0 => Ok(d.lambda * config.noise_var()),
        _ => Err(Error::Precondition(format!(
            "the ratio formulation needs the interference-aware policy with lambda > 0 and \
             mu <= {RATIO1D_MU_TOL}, got {policy:?}"
        ))),
    }
}

fn ratio1d(config: &SystemConfig, policy: &Policy) -> Result<(f64, f64)> {
    let t = ratio_threshold(config, policy)?;
    let params = ratio1d_params(config)?;
    let k = MudParams::new(config.k())?.k() as i32;
    let settings = QuadratureSettings::new(1e-12, 1e-10, 60)?;
    // log2(z / t) integrated against the max-ratio density equals, by parts,
    // (1 / ln 2) int_{ln t}^inf (1 - F(e^u)^K) du.
    let [c] = integrate_semi_infinite_vec(
        |u| Ok([1.0 - ratio_cdf(&params, u.exp())?.powi(k)]),
        t.ln(),
        &[0.0],
        &settings,
    )?;
    let outage = ratio_cdf(&params, t)?.powi(k);
    Ok((c.value.max(0.0) / LN_2, outage))
}

/// Capacity and outage of `policy` using a prepared evaluator.
pub fn evaluate_with(ev: &PolicyEvaluator, policy: &Policy, formulation: Formulation) -> Result<MetricsResult> {
    let (capacity, outage) = match formulation {
        Formulation::Joint2D => {
            let r = ev.rate_outage(policy)?;
            (r.capacity, r.outage)
        }
        Formulation::Ratio1D => ratio1d(ev.config(), policy)?,
    };
    Ok(MetricsResult {
        capacity,
        outage,
        formulation,
        duals: policy.duals(),
    })
}

pub fn evaluate_metrics(config: &SystemConfig, policy: &Policy, formulation: Formulation) -> Result<MetricsResult> {
    match formulation {
        Formulation::Joint2D => evaluate_with(&PolicyEvaluator::new(*config)?, policy, formulation),
        Formulation::Ratio1D => {
            let (capacity, outage) = ratio1d(config, policy)?;
            Ok(MetricsResult {
                capacity,
                outage,
                formulation,
                duals: policy.duals(),
            })
        }
    }
}

/// `E[log2(1 + P g_s / n)]` in bits/s/Hz.
pub fn ergodic_capacity(config: &SystemConfig, policy: &Policy, formulation: Formulation) -> Result<f64> {
    Ok(evaluate_metrics(config, policy, formulation)?.capacity)
}

/// `Pr{P = 0}`.
pub fn outage_probability(config: &SystemConfig, policy: &Policy, formulation: Formulation) -> Result<f64> {
    if formulation == Formulation::Ratio1D {
        let t = ratio_threshold(config, policy)?;
        let params = ratio1d_params(config)?;
        return Ok(ratio_cdf(&params, t)?.powi(config.k() as i32));
    }
    Ok(evaluate_metrics(config, policy, formulation)?.outage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::FadingSpec;

    fn config(k: u32, l: u32, m: f64) -> SystemConfig {
        let f = FadingSpec::with_shape(m).unwrap();
        SystemConfig::new(k, l, 1.0, f, f).unwrap()
    }

    fn aip(lambda: f64, mu: f64) -> Policy {
        Policy::Aip(DualPair { lambda, mu })
    }

    #[test]
    fn ratio_capacity_single_user() {
        let c = ergodic_capacity(&config(1, 1, 1.0), &aip(1.0, 0.0), Formulation::Ratio1D).unwrap();
        assert!((c - 1.0).abs() < 1e-9, "{c}");
    }

    #[test]
    fn ratio_outage_five_users() {
        let o = outage_probability(&config(5, 1, 1.0), &aip(1.0, 0.0), Formulation::Ratio1D).unwrap();
        assert!((o - 0.03125).abs() < 1e-15);
        let j = outage_probability(&config(5, 1, 1.0), &aip(1.0, 0.0), Formulation::Joint2D).unwrap();
        // Sharing g_sp makes the candidates dependent: 1 - 5 B(1, 5)... differs.
        assert!(j > o);
    }

    #[test]
    fn formulations_agree_without_selection() {
        for (l, m) in [(1, 1.0), (2, 1.0), (2, 2.0)] {
            let cfg = config(1, l, m);
            let p = aip(0.8, 0.0);
            let a = evaluate_metrics(&cfg, &p, Formulation::Joint2D).unwrap();
            let b = evaluate_metrics(&cfg, &p, Formulation::Ratio1D).unwrap();
            assert!((a.capacity - b.capacity).abs() < 1e-7, "{a:?} {b:?}");
            assert!((a.outage - b.outage).abs() < 1e-9, "{a:?} {b:?}");
        }
    }

    #[test]
    fn ratio_requires_zero_mu() {
        let r = ergodic_capacity(&config(1, 1, 1.0), &aip(1.0, 0.5), Formulation::Ratio1D);
        assert!(matches!(r, Err(Error::Precondition(_))));
        let r = ergodic_capacity(
            &config(1, 1, 1.0),
            &Policy::Pip { mu: 0.0, i_pk: 1.0 },
            Formulation::Ratio1D,
        );
        assert!(r.is_err());
    }

    #[test]
    fn more_users_more_capacity() {
        let p = aip(0.5, 0.1);
        let c1 = ergodic_capacity(&config(1, 1, 1.0), &p, Formulation::Joint2D).unwrap();
        let c5 = ergodic_capacity(&config(5, 1, 1.0), &p, Formulation::Joint2D).unwrap();
        assert!(c5 > c1);
    }
}
