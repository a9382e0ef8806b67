//! Flat `key=value` configuration with `#` comments. Keys ending in `_db`
//! are power levels in decibels, `linear = 10^(dB / 10)`. Command-line
//! pairs override the file; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use specshare::montecarlo::{SimMode, SimSpec};
use specshare::ratio::RatioMode;
use specshare::solver::SolverSettings;
use specshare::{db_to_linear, ConstraintSet, FadingSpec, Formulation, InterferenceMode, PolicyKind, SystemConfig};

use crate::{read_file, CliError, Result};

/// Where a pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Arg(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Arg(n) => write!(f, "argument {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

fn split_pair(text: &str, origin: Origin) -> Result<Entry> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("{origin}: expected key=value, got '{text}'")))?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() || value.is_empty() {
        return Err(CliError::Config(format!("{origin}: expected key=value, got '{text}'")));
    }
    Ok(Entry {
        key: key.to_ascii_lowercase(),
        value: value.to_string(),
        origin,
    })
}

/// Pairs of a config file; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<Entry>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let body = line.split('#').next().unwrap_or("").trim();
            (!body.is_empty()).then(|| split_pair(body, Origin::Line(i + 1)))
        })
        .collect()
}

/// Pairs given as command-line arguments.
pub fn parse_args<S: AsRef<str>>(args: &[S]) -> Result<Vec<Entry>> {
    args.iter()
        .enumerate()
        .map(|(i, a)| split_pair(a.as_ref(), Origin::Arg(i + 1)))
        .collect()
}

/// Validated key lookup over a set of pairs.
#[derive(Debug, Default)]
pub struct Pairs {
    map: BTreeMap<String, Entry>,
}

impl Pairs {
    /// Merges file and argument pairs after checking keys against `known`;
    /// arguments win over the file, repeats within one source are errors.
    pub fn new(file: Vec<Entry>, args: Vec<Entry>, known: &[&str]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for source in [file, args] {
            let mut seen = BTreeMap::new();
            for e in source {
                if !known.contains(&e.key.as_str()) {
                    return Err(CliError::Config(format!("{}: unknown key '{}'", e.origin, e.key)));
                }
                if let Some(first) = seen.insert(e.key.clone(), e.origin) {
                    return Err(CliError::Config(format!(
                        "{}: duplicate key '{}' (first set at {first})",
                        e.origin, e.key
                    )));
                }
                map.insert(e.key.clone(), e);
            }
        }
        Ok(Pairs { map })
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        self.map.get(key)
    }

    fn bad(e: &Entry, reason: impl fmt::Display) -> CliError {
        CliError::Config(format!("{}: {} = {}: {reason}", e.origin, e.key, e.value))
    }

    /// Parses `key` when present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.entry(key)
            .map(|e| e.value.parse::<T>().map_err(|err| Self::bad(e, err)))
            .transpose()
    }

    /// A finite real.
    pub fn real(&self, key: &str) -> Result<Option<f64>> {
        match self.get::<f64>(key)? {
            Some(v) if !v.is_finite() => Err(Self::bad(self.entry(key).unwrap(), "must be finite")),
            v => Ok(v),
        }
    }

    /// A power given either linearly as `key` or in decibels as `key_db`.
    pub fn power(&self, key: &str) -> Result<Option<f64>> {
        let db_key = format!("{key}_db");
        match (self.real(key)?, self.real(&db_key)?) {
            (Some(_), Some(_)) => Err(Self::bad(
                self.entry(&db_key).unwrap(),
                format!("conflicts with '{key}' at {}", self.entry(key).unwrap().origin),
            )),
            (Some(v), None) => Ok(Some(v)),
            (None, Some(db)) => Ok(Some(db_to_linear(db))),
            (None, None) => Ok(None),
        }
    }

    /// Maps a library error to one naming the offending entry, or `fallback`
    /// when the key was defaulted.
    pub fn blame(&self, key: &str, err: impl fmt::Display) -> CliError {
        match self.entry(key) {
            Some(e) => Self::bad(e, err),
            None => CliError::Config(format!("{key}: {err}")),
        }
    }
}

/// Keys accepted by `solve`, `metrics` and `dist`.
pub const RUN_KEYS: &[&str] = &[
    "k",
    "l",
    "m",
    "m_s",
    "m_sp",
    "noise_var",
    "noise_var_db",
    "p_av",
    "p_av_db",
    "i_av",
    "i_av_db",
    "i_pk",
    "i_pk_db",
    "policy",
    "formulation",
    "lambda",
    "mu",
    "epsilon",
    "inner_tol",
    "max_outer_iter",
    "lambda_bar",
    "samples",
    "seed",
    "streams",
    "sim_mode",
    "ratio_mode",
    "z_max",
    "z_points",
];

/// Default level of every power constraint, in dB.
pub const DEFAULT_LEVEL_DB: f64 = 5.0;

/// Everything a single-scenario command needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub constraints: ConstraintSet,
    pub policy: PolicyKind,
    pub formulation: Formulation,
    /// Fixed multipliers that bypass the solver.
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub solver: SolverSettings,
    pub sim: SimSpec,
    pub ratio_mode: RatioMode,
    pub z_max: f64,
    pub z_points: u32,
}

fn parse_ratio_mode(s: &str) -> std::result::Result<RatioMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "closed" | "closed_form" => Ok(RatioMode::PaperClosedForm),
        "exact" | "quadrature" => Ok(RatioMode::ExactQuadrature),
        _ => Err(format!("unknown ratio mode '{s}' (closed|exact)")),
    }
}

/// Shape from `key`, falling back to `m`, then Rayleigh.
fn shape(p: &Pairs, key: &str) -> Result<FadingSpec> {
    let (used, m) = match p.real(key)? {
        Some(v) => (key, v),
        None => ("m", p.real("m")?.unwrap_or(1.0)),
    };
    FadingSpec::with_shape(m).map_err(|e| p.blame(used, e))
}

/// Solver tolerances shared by single runs and sweeps.
pub fn solver_settings(p: &Pairs) -> Result<SolverSettings> {
    let d = SolverSettings::default();
    let s = SolverSettings {
        epsilon: p.real("epsilon")?.unwrap_or(d.epsilon),
        inner_tol: p.real("inner_tol")?.unwrap_or(d.inner_tol),
        max_outer_iter: p.get("max_outer_iter")?.unwrap_or(d.max_outer_iter),
        lambda_bar_hint: p.real("lambda_bar")?.unwrap_or(d.lambda_bar_hint),
    };
    for (key, v) in [("epsilon", s.epsilon), ("inner_tol", s.inner_tol)] {
        if !(v > 0.0) {
            return Err(p.blame(key, "must be positive"));
        }
    }
    if s.lambda_bar_hint < 0.0 {
        return Err(p.blame("lambda_bar", "must be non-negative"));
    }
    Ok(s)
}

/// Noise variance, defaulting to 1.
pub fn noise_var(p: &Pairs) -> Result<f64> {
    let n = p.power("noise_var")?.unwrap_or(1.0);
    if !(n > 0.0) {
        return Err(p.blame("noise_var", "must be positive"));
    }
    Ok(n)
}

impl RunConfig {
    pub fn from_pairs(p: &Pairs) -> Result<Self> {
        let k: u32 = p.get("k")?.unwrap_or(1);
        let l: u32 = p.get("l")?.unwrap_or(1);
        let system = SystemConfig::new(k, l, noise_var(p)?, shape(p, "m_s")?, shape(p, "m_sp")?)
            .map_err(|e| p.blame(if k == 0 { "k" } else { "l" }, e))?;

        let policy: PolicyKind = p.get("policy")?.unwrap_or(PolicyKind::Aip);
        let p_av = p.power("p_av")?.unwrap_or(db_to_linear(DEFAULT_LEVEL_DB));
        let (key, mode) = match policy {
            PolicyKind::Aip => ("i_av", InterferenceMode::Average),
            PolicyKind::Pip => ("i_pk", InterferenceMode::Peak),
        };
        let other = if key == "i_av" { "i_pk" } else { "i_av" };
        for k in [other.to_string(), format!("{other}_db")] {
            if let Some(e) = p.entry(&k) {
                return Err(CliError::Config(format!(
                    "{}: {} does not apply to policy {}",
                    e.origin,
                    e.key,
                    policy.name()
                )));
            }
        }
        let level = p.power(key)?.unwrap_or(db_to_linear(DEFAULT_LEVEL_DB));
        let constraints = ConstraintSet::new(p_av, level, mode).map_err(|e| p.blame(key, e))?;

        let lambda = p.real("lambda")?;
        let mu = p.real("mu")?;
        if lambda.is_some() && policy == PolicyKind::Pip {
            return Err(p.blame("lambda", "does not apply to policy pip"));
        }
        if lambda.is_some() && mu.is_none() {
            return Err(p.blame("lambda", "fixed multipliers need mu as well"));
        }
        for (key, v) in [("lambda", lambda), ("mu", mu)] {
            if v.is_some_and(|v| v < 0.0) {
                return Err(p.blame(key, "must be non-negative"));
            }
        }

        let d = SimSpec::new(1_000_000, 1, SimMode::Physical, 8)?;
        let sim = SimSpec::new(
            p.get("samples")?.unwrap_or(d.samples),
            p.get("seed")?.unwrap_or(d.seed),
            p.get("sim_mode")?.unwrap_or(d.mode),
            p.get("streams")?.unwrap_or(d.streams),
        )
        .map_err(|e| p.blame("samples", e))?;

        let ratio_mode = match p.entry("ratio_mode") {
            Some(e) => parse_ratio_mode(&e.value).map_err(|err| Pairs::bad(e, err))?,
            None => RatioMode::PaperClosedForm,
        };
        let z_max = p.real("z_max")?.unwrap_or(20.0);
        if !(z_max > 0.0) {
            return Err(p.blame("z_max", "must be positive"));
        }
        let z_points: u32 = p.get("z_points")?.unwrap_or(200);
        if z_points == 0 {
            return Err(p.blame("z_points", "must be at least 1"));
        }

        Ok(RunConfig {
            system,
            constraints,
            policy,
            formulation: p.get("formulation")?.unwrap_or(Formulation::Joint2D),
            lambda,
            mu,
            solver: solver_settings(p)?,
            sim,
            ratio_mode,
            z_max,
            z_points,
        })
    }

    /// Reads an optional file and overriding argument pairs.
    pub fn load<S: AsRef<str>>(path: Option<&Path>, args: &[S]) -> Result<Self> {
        let file = match path {
            Some(p) => parse_pairs(&read_file(p)?)?,
            None => Vec::new(),
        };
        Self::from_pairs(&Pairs::new(file, parse_args(args)?, RUN_KEYS)?)
    }
}
