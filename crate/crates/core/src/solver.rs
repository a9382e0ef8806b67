//! Dual solvers: nested bisection on `(lambda, mu)` for the interference-aware
//! policy and a single bisection on `mu` for the peak-capped baseline.
//!
//! For fixed `lambda` the inner step finds the smallest `mu` whose average
//! transmit power fits the budget; the outer step bisects `lambda` until the
//! average interference at `(lambda, mu(lambda))` meets its limit.

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::numerics::{bisect, BisectOptions};
use crate::policy::{ConstraintSet, DualPair, Expectations, InterferenceMode, Policy, PolicyEvaluator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Target width of the final `lambda` bracket.
    pub epsilon: f64,
    /// Tolerance on the transmit-power residual of the inner search.
    pub inner_tol: f64,
    pub max_outer_iter: u32,
    /// Starting upper bracket for `lambda`; zero picks `1 / i_av`.
    pub lambda_bar_hint: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            epsilon: 1e-9,
            inner_tol: 1e-7,
            max_outer_iter: 200,
            lambda_bar_hint: 0.0,
        }
    }
}

impl SolverSettings {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !(self.inner_tol > 0.0) || !(self.lambda_bar_hint >= 0.0) {
            return Err(Error::Precondition(format!(
                "solver tolerances must be positive and the hint non-negative: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Which constraints are active at the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BindingSet {
    /// Only the interference constraint binds.
    AipOnly,
    /// Only the transmit-power constraint binds.
    AtpOnly,
    Both,
}

impl BindingSet {
    pub fn name(&self) -> &'static str {
        match self {
            BindingSet::AipOnly => "aip_only",
            BindingSet::AtpOnly => "atp_only",
            BindingSet::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub policy: Policy,
    pub duals: DualPair,
    pub e_p: f64,
    pub e_i: f64,
    /// `e_p - p_av`.
    pub residual_p: f64,
    /// `e_i - interference limit`.
    pub residual_i: f64,
    pub outer_iters: u32,
    /// Upper `lambda` bracket used by the outer loop; zero when it never ran.
    pub lambda_bar: f64,
    pub binding_set: BindingSet,
}

/// Largest number of doublings tried when bracketing `lambda`.
const MAX_DOUBLINGS: u32 = 40;

struct Inner<'a> {
    ev: &'a PolicyEvaluator,
    p_av: f64,
    settings: SolverSettings,
}

impl Inner<'_> {
    /// Smallest `mu >= 0` with `E[P] <= p_av` for the policy family `make`.
    /// Since `P <= 1 / mu` pointwise, `mu = 1 / p_av` is always feasible.
    fn min_mu<F>(&self, make: F) -> Result<(f64, Expectations)>
    where
        F: Fn(f64) -> Policy,
    {
        if !self.ev.zero_mu_power_diverges() {
            let zero = make(0.0);
            let finite = match zero {
                Policy::Aip(d) => d.lambda > 0.0,
                Policy::Pip { .. } => true,
            };
            if finite {
                let e = self.ev.expectations(&zero)?;
                if e.e_p <= self.p_av {
                    return Ok((0.0, e));
                }
            }
        }
        let mut seen: Vec<(f64, Expectations)> = Vec::with_capacity(64);
        let hi = 1.0 / self.p_av;
        let opts = BisectOptions {
            x_tol: 1e-3 * self.settings.inner_tol,
            feasible_tol: Some(self.settings.inner_tol),
            max_iter: 2000,
        };
        let out = bisect(
            |mu| {
                let e = self.ev.expectations(&make(mu))?;
                seen.push((mu, e));
                Ok(e.e_p - self.p_av)
            },
            (0.0, Some(f64::INFINITY)),
            (hi, None),
            &opts,
        )?;
        let (mu, _) = out.nonpositive_end();
        let e = seen
            .iter()
            .rev()
            .find(|(m, _)| *m == mu)
            .map(|(_, e)| *e)
            .expect("feasible end was evaluated");
        Ok((mu, e))
    }
}

fn report(
    policy: Policy,
    e: Expectations,
    c: &ConstraintSet,
    outer_iters: u32,
    lambda_bar: f64,
    tol: f64,
) -> SolveReport {
    let duals = policy.duals();
    let binding_set = if matches!(policy, Policy::Aip(_)) && duals.lambda == 0.0 {
        BindingSet::AtpOnly
    } else if duals.mu <= tol {
        BindingSet::AipOnly
    } else {
        BindingSet::Both
    };
    SolveReport {
        policy,
        duals,
        e_p: e.e_p,
        e_i: e.e_i,
        residual_p: e.e_p - c.p_av(),
        residual_i: e.e_i - c.interference(),
        outer_iters,
        lambda_bar,
        binding_set,
    }
}

fn aip(lambda: f64) -> impl Fn(f64) -> Policy {
    move |mu| Policy::Aip(DualPair { lambda, mu })
}

fn bracket_with(inner: &Inner, i_av: f64, hint: f64) -> Result<f64> {
    let mut lambda = if hint > 0.0 { hint } else { 1.0 / i_av };
    for _ in 0..=MAX_DOUBLINGS {
        let (_, e) = inner.min_mu(aip(lambda))?;
        if e.e_i < i_av {
            return Ok(lambda);
        }
        lambda *= 2.0;
    }
    Err(Error::Bracket {
        lo: 0.0,
        hi: lambda / 2.0,
        g_lo: f64::NAN,
        g_hi: f64::NAN,
    })
}

fn require_mode(c: &ConstraintSet, mode: InterferenceMode) -> Result<()> {
    if c.mode() != mode {
        return Err(Error::Precondition(format!(
            "solver expects {mode:?} interference constraints, got {:?}",
            c.mode()
        )));
    }
    Ok(())
}

/// Upper bracket `lambda_bar` with `E[g_sp P] < i_av` at `(lambda_bar,
/// mu(lambda_bar))`, found by doubling from `1 / i_av`.
pub fn bracket_lambda(config: &SystemConfig, constraints: &ConstraintSet) -> Result<f64> {
    require_mode(constraints, InterferenceMode::Average)?;
    let ev = PolicyEvaluator::new(*config)?;
    let inner = Inner {
        ev: &ev,
        p_av: constraints.p_av(),
        settings: SolverSettings::default(),
    };
    bracket_with(&inner, constraints.interference(), 0.0)
}

/// Joint `(lambda, mu)` for average interference and transmit-power limits.
pub fn solve_duals_aip(
    config: &SystemConfig,
    constraints: &ConstraintSet,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    let ev = PolicyEvaluator::new(*config)?;
    solve_duals_aip_with(&ev, constraints, settings)
}

/// `solve_duals_aip` reusing a prepared evaluator.
pub fn solve_duals_aip_with(
    ev: &PolicyEvaluator,
    constraints: &ConstraintSet,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    require_mode(constraints, InterferenceMode::Average)?;
    settings.validate()?;
    let i_av = constraints.interference();
    let inner = Inner {
        ev,
        p_av: constraints.p_av(),
        settings: *settings,
    };

    let (mu0, e0) = inner.min_mu(aip(0.0))?;
    if e0.e_i <= i_av {
        let policy = Policy::Aip(DualPair { lambda: 0.0, mu: mu0 });
        return Ok(report(policy, e0, constraints, 0, 0.0, settings.inner_tol));
    }

    let lambda_bar = bracket_with(&inner, i_av, settings.lambda_bar_hint)?;
    let (mut lo, mut hi) = (0.0, lambda_bar);
    let (mut mu_hi, mut e_hi) = inner.min_mu(aip(hi))?;
    let mut iters = 0;
    while hi - lo > settings.epsilon && iters < settings.max_outer_iter {
        let lambda = 0.5 * (lo + hi);
        if lambda <= lo || lambda >= hi {
            break;
        }
        iters += 1;
        let (mu, e) = inner.min_mu(aip(lambda))?;
        if e.e_i > i_av {
            lo = lambda;
        } else {
            hi = lambda;
            mu_hi = mu;
            e_hi = e;
        }
    }
    let policy = Policy::Aip(DualPair { lambda: hi, mu: mu_hi });
    Ok(report(policy, e_hi, constraints, iters, lambda_bar, settings.inner_tol))
}

/// Smallest `mu` meeting the transmit-power budget under a peak
/// interference cap.
pub fn solve_mu_pip(
    config: &SystemConfig,
    constraints: &ConstraintSet,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    let ev = PolicyEvaluator::new(*config)?;
    solve_mu_pip_with(&ev, constraints, settings)
}

/// `solve_mu_pip` reusing a prepared evaluator.
pub fn solve_mu_pip_with(
    ev: &PolicyEvaluator,
    constraints: &ConstraintSet,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    require_mode(constraints, InterferenceMode::Peak)?;
    settings.validate()?;
    let i_pk = constraints.interference();
    let inner = Inner {
        ev,
        p_av: constraints.p_av(),
        settings: *settings,
    };
    let (mu, e) = inner.min_mu(|mu| Policy::Pip { mu, i_pk })?;
    Ok(report(
        Policy::Pip { mu, i_pk },
        e,
        constraints,
        0,
        0.0,
        settings.inner_tol,
    ))
}

/// Dispatches on the interference mode of `constraints`.
pub fn solve(config: &SystemConfig, constraints: &ConstraintSet, settings: &SolverSettings) -> Result<SolveReport> {
    let ev = PolicyEvaluator::new(*config)?;
    match constraints.mode() {
        InterferenceMode::Average => solve_duals_aip_with(&ev, constraints, settings),
        InterferenceMode::Peak => solve_mu_pip_with(&ev, constraints, settings),
    }
}
