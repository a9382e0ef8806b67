//! Constraint sweeps over a list of scenarios, one CSV row per
//! (axis value, scenario) in spec order.
//!
//! Spec keys: `axis` (`iav_db` or `pav_db`), `from_db`, `to_db`, `step_db`,
//! the fixed level (`p_av_db` when sweeping the interference level,
//! `interference_db` when sweeping the transmit power), repeated
//! `scenario=K,L,m,policy`, plus optional `formulation`, `noise_var[_db]`
//! and solver tolerances. The interference level is `I_av` for `aip`
//! scenarios and `I_pk` for `pip` scenarios.

use std::path::Path;

use rayon::prelude::*;
use specshare::metrics::evaluate_with;
use specshare::policy::PolicyEvaluator;
use specshare::solver::{solve_duals_aip_with, solve_mu_pip_with, SolverSettings};
use specshare::{db_to_linear, ConstraintSet, FadingSpec, Formulation, PolicyKind, SystemConfig};

use crate::config::{noise_var, parse_pairs, solver_settings, Entry, Pairs};
use crate::csv::{push_record, sig10};
use crate::{read_file, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    IavDb,
    PavDb,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::IavDb => "Iav_dB",
            Axis::PavDb => "Pav_dB",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "iav_db" => Ok(Axis::IavDb),
            "pav_db" => Ok(Axis::PavDb),
            _ => Err(format!("unknown axis '{s}' (iav_db|pav_db)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub k: u32,
    pub l: u32,
    pub m: f64,
    pub policy: PolicyKind,
}

impl Scenario {
    fn parse(e: &Entry) -> Result<Self> {
        let bad = |why: &str| CliError::Config(format!("{}: scenario = {}: {why}", e.origin, e.value));
        let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
        let [k, l, m, policy] = parts[..] else {
            return Err(bad("expected K,L,m,policy"));
        };
        let s = Scenario {
            k: k.parse().map_err(|_| bad("K must be a positive integer"))?,
            l: l.parse().map_err(|_| bad("L must be a positive integer"))?,
            m: m.parse().map_err(|_| bad("m must be a number"))?,
            policy: policy.parse().map_err(|_| bad("policy must be aip or pip"))?,
        };
        s.system(1.0).map_err(|err| bad(&err.to_string()))?;
        Ok(s)
    }

    fn system(&self, noise_var: f64) -> specshare::Result<SystemConfig> {
        let f = FadingSpec::with_shape(self.m)?;
        SystemConfig::new(self.k, self.l, noise_var, f, f)
    }
}

const SWEEP_KEYS: &[&str] = &[
    "axis",
    "from_db",
    "to_db",
    "step_db",
    "p_av_db",
    "interference_db",
    "scenario",
    "formulation",
    "noise_var",
    "noise_var_db",
    "epsilon",
    "inner_tol",
    "max_outer_iter",
    "lambda_bar",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub from_db: f64,
    pub to_db: f64,
    pub step_db: f64,
    /// Level of the constraint not on the axis, in dB.
    pub fixed_db: f64,
    pub scenarios: Vec<Scenario>,
    pub formulation: Formulation,
    pub noise_var: f64,
    pub solver: SolverSettings,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_pairs(text)?;
        let (scenarios, rest): (Vec<Entry>, Vec<Entry>) = entries.into_iter().partition(|e| e.key == "scenario");
        let scenarios = scenarios.iter().map(Scenario::parse).collect::<Result<Vec<_>>>()?;
        if scenarios.is_empty() {
            return Err(CliError::Config(
                "sweep spec: at least one scenario=K,L,m,policy is required".into(),
            ));
        }
        let p = Pairs::new(rest, Vec::new(), SWEEP_KEYS)?;
        let require = |key: &str| -> Result<f64> {
            p.real(key)?
                .ok_or_else(|| CliError::Config(format!("sweep spec: missing key '{key}'")))
        };
        let axis: Axis = p
            .get("axis")?
            .ok_or_else(|| CliError::Config("sweep spec: missing key 'axis'".into()))?;
        let (fixed, unused) = match axis {
            Axis::IavDb => ("p_av_db", "interference_db"),
            Axis::PavDb => ("interference_db", "p_av_db"),
        };
        if let Some(e) = p.entry(unused) {
            return Err(CliError::Config(format!(
                "{}: {unused} is the swept quantity for axis {}",
                e.origin,
                axis.name()
            )));
        }
        let spec = SweepSpec {
            axis,
            from_db: require("from_db")?,
            to_db: require("to_db")?,
            step_db: require("step_db")?,
            fixed_db: require(fixed)?,
            scenarios,
            formulation: p.get("formulation")?.unwrap_or(Formulation::Joint2D),
            noise_var: noise_var(&p)?,
            solver: solver_settings(&p)?,
        };
        if !(spec.step_db > 0.0) {
            return Err(p.blame("step_db", "must be positive"));
        }
        if spec.from_db > spec.to_db {
            return Err(p.blame("to_db", "must not be below from_db"));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_file(path)?)
    }

    /// Axis values `from + i step` up to `to`, computed without accumulation.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.to_db - self.from_db) / self.step_db + 1e-9).floor() as usize;
        (0..=n).map(|i| self.from_db + i as f64 * self.step_db).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowValues {
    pub lambda: f64,
    pub mu: f64,
    pub capacity: f64,
    pub outage: f64,
    pub e_p: f64,
    pub e_i: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis_db: f64,
    pub scenario: Scenario,
    pub outcome: std::result::Result<RowValues, String>,
}

fn evaluate_row(spec: &SweepSpec, axis_db: f64, s: &Scenario) -> Result<RowValues> {
    let (p_db, i_db) = match spec.axis {
        Axis::IavDb => (spec.fixed_db, axis_db),
        Axis::PavDb => (axis_db, spec.fixed_db),
    };
    let (p, i) = (db_to_linear(p_db), db_to_linear(i_db));
    let ev = PolicyEvaluator::new(s.system(spec.noise_var)?)?;
    let r = match s.policy {
        PolicyKind::Aip => solve_duals_aip_with(&ev, &ConstraintSet::average(p, i)?, &spec.solver)?,
        PolicyKind::Pip => solve_mu_pip_with(&ev, &ConstraintSet::peak(p, i)?, &spec.solver)?,
    };
    let m = evaluate_with(&ev, &r.policy, spec.formulation)?;
    Ok(RowValues {
        lambda: r.duals.lambda,
        mu: r.duals.mu,
        capacity: m.capacity,
        outage: m.outage,
        e_p: r.e_p,
        e_i: r.e_i,
    })
}

/// Evaluates every row concurrently; the result is in spec order.
pub fn run_sweep(spec: &SweepSpec) -> Vec<Row> {
    let cells: Vec<(f64, Scenario)> = spec
        .points()
        .into_iter()
        .flat_map(|x| spec.scenarios.iter().map(move |s| (x, *s)))
        .collect();
    cells
        .into_par_iter()
        .map(|(axis_db, scenario)| Row {
            axis_db,
            scenario,
            outcome: evaluate_row(spec, axis_db, &scenario).map_err(|e| e.to_string()),
        })
        .collect()
}

pub const SWEEP_HEADER: [&str; 13] = [
    "axis_name",
    "axis_dB",
    "K",
    "L",
    "m",
    "policy",
    "lambda",
    "mu",
    "capacity_bps_hz",
    "outage",
    "eP",
    "eI",
    "formulation",
];

/// CSV table of `rows`; an `error` column is appended only when a row failed.
pub fn render_csv(spec: &SweepSpec, rows: &[Row]) -> String {
    let with_error = rows.iter().any(|r| r.outcome.is_err());
    let mut out = String::new();
    let mut header = SWEEP_HEADER.to_vec();
    if with_error {
        header.push("error");
    }
    push_record(&mut out, &header);
    for r in rows {
        let s = &r.scenario;
        let mut fields = vec![
            spec.axis.name().to_string(),
            sig10(r.axis_db),
            s.k.to_string(),
            s.l.to_string(),
            sig10(s.m),
            s.policy.name().to_string(),
        ];
        match &r.outcome {
            Ok(v) => fields.extend([v.lambda, v.mu, v.capacity, v.outage, v.e_p, v.e_i].map(sig10)),
            Err(_) => fields.extend(std::iter::repeat_n(String::new(), 6)),
        }
        fields.push(spec.formulation.name().to_string());
        if with_error {
            fields.push(r.outcome.as_ref().err().cloned().unwrap_or_default());
        }
        push_record(&mut out, &fields);
    }
    out
}
