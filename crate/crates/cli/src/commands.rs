//! Single-scenario commands, each rendering a CSV table.

use rayon::prelude::*;
use specshare::metrics::evaluate_with;
use specshare::montecarlo::simulate_metrics;
use specshare::policy::PolicyEvaluator;
use specshare::ratio::{max_ratio, selected_ratio_law, MudParams, RatioParams};
use specshare::solver::{solve_duals_aip_with, solve_mu_pip_with, SolveReport};
use specshare::{DualPair, Policy, PolicyKind};

use crate::config::RunConfig;
use crate::csv::{push_record, sig10};
use crate::Result;

fn scenario_fields(c: &RunConfig) -> Vec<String> {
    vec![
        c.system.k().to_string(),
        c.system.l().to_string(),
        sig10(c.system.secondary().m()),
        sig10(c.system.cross().m()),
        c.policy.name().to_string(),
    ]
}

const SCENARIO_HEADER: [&str; 5] = ["K", "L", "m_s", "m_sp", "policy"];

fn run_solver(ev: &PolicyEvaluator, c: &RunConfig) -> Result<SolveReport> {
    Ok(match c.policy {
        PolicyKind::Aip => solve_duals_aip_with(ev, &c.constraints, &c.solver)?,
        PolicyKind::Pip => solve_mu_pip_with(ev, &c.constraints, &c.solver)?,
    })
}

/// The fixed multipliers when given, else the solved ones.
fn resolve_policy(ev: &PolicyEvaluator, c: &RunConfig) -> Result<Policy> {
    match (c.policy, c.lambda, c.mu) {
        (PolicyKind::Aip, lambda, Some(mu)) => Ok(Policy::Aip(DualPair::new(lambda.unwrap_or(0.0), mu)?)),
        (PolicyKind::Pip, _, Some(mu)) => Ok(Policy::Pip {
            mu,
            i_pk: c.constraints.interference(),
        }),
        _ => Ok(run_solver(ev, c)?.policy),
    }
}

/// Dual solution and constraint residuals.
pub fn solve_csv(c: &RunConfig) -> Result<String> {
    let ev = PolicyEvaluator::new(c.system)?;
    let r = run_solver(&ev, c)?;
    let mut out = String::new();
    let mut header: Vec<&str> = SCENARIO_HEADER.to_vec();
    header.extend([
        "p_av",
        "interference",
        "lambda",
        "mu",
        "eP",
        "eI",
        "residual_p",
        "residual_i",
        "outer_iters",
        "lambda_bar",
        "binding_set",
    ]);
    push_record(&mut out, &header);
    let mut row = scenario_fields(c);
    row.extend([
        sig10(c.constraints.p_av()),
        sig10(c.constraints.interference()),
        sig10(r.duals.lambda),
        sig10(r.duals.mu),
        sig10(r.e_p),
        sig10(r.e_i),
        sig10(r.residual_p),
        sig10(r.residual_i),
        r.outer_iters.to_string(),
        sig10(r.lambda_bar),
        r.binding_set.name().to_string(),
    ]);
    push_record(&mut out, &row);
    Ok(out)
}

/// Capacity and outage, optionally with a Monte Carlo estimate.
pub fn metrics_csv(c: &RunConfig, simulate: bool) -> Result<String> {
    let ev = PolicyEvaluator::new(c.system)?;
    let policy = resolve_policy(&ev, c)?;
    let m = evaluate_with(&ev, &policy, c.formulation)?;
    let mut header: Vec<&str> = SCENARIO_HEADER.to_vec();
    header.extend(["formulation", "lambda", "mu", "capacity_bps_hz", "outage"]);
    let mut row = scenario_fields(c);
    row.extend([
        c.formulation.name().to_string(),
        sig10(m.duals.lambda),
        sig10(m.duals.mu),
        sig10(m.capacity),
        sig10(m.outage),
    ]);
    if simulate {
        let s = simulate_metrics(&c.system, &policy, &c.sim)?;
        header.extend([
            "sim_mode",
            "samples",
            "seed",
            "capacity_mc",
            "capacity_se",
            "outage_mc",
            "outage_se",
        ]);
        row.extend([
            c.sim.mode.name().to_string(),
            c.sim.samples.to_string(),
            c.sim.seed.to_string(),
            sig10(s.capacity.mean),
            sig10(s.capacity.std_error),
            sig10(s.outage.mean),
            sig10(s.outage.std_error),
        ]);
    }
    let mut out = String::new();
    push_record(&mut out, &header);
    push_record(&mut out, &row);
    Ok(out)
}

/// Served-ratio law on `z_points` evenly spaced points of `(0, z_max]`: the
/// best of K independent ratios, and the selected ratio under a shared cross
/// gain.
pub fn dist_csv(c: &RunConfig) -> Result<String> {
    let (s, x) = (c.system.secondary(), c.system.cross());
    let params = RatioParams::with_specs(s, x, c.system.l(), c.ratio_mode)?;
    let mud = MudParams::new(c.system.k())?;
    let shared = selected_ratio_law(s, x, c.system.k(), c.system.l(), params.quadrature())?;
    let rows = (1..=c.z_points)
        .into_par_iter()
        .map(|i| -> Result<[String; 5]> {
            let z = c.z_max * i as f64 / c.z_points as f64;
            let iid = max_ratio(&params, mud, z)?;
            Ok([
                sig10(z),
                sig10(iid.pdf),
                sig10(iid.cdf),
                sig10(shared.pdf(z)?),
                sig10(shared.cdf(z)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::new();
    push_record(&mut out, &["z", "pdf", "cdf", "shared_pdf", "shared_cdf"]);
    for r in rows {
        push_record(&mut out, &r);
    }
    Ok(out)
}
