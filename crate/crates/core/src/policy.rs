//! Transmit-power policies and their expectations under the joint law of the
//! selected secondary gain `g` (best of K) and the worst-case cross gain `y`
//! (max over L).
//!
//! Every expectation is reduced by parts to an integral of the survival
//! function `S(x) = Pr{g > x}`. With threshold `t(y)` below which the policy
//! is silent:
//!
//! * `E[P | y] = n int_t^inf S(x) / x^2 dx` for the interference-aware policy;
//! * `E[log2(1 + P g / n) | y] = (1 / ln 2) int_t^inf S(x) / x dx`;
//! * `Pr{P = 0 | y} = 1 - S(t)`.
//!
//! The peak-capped policy adds a cap point `x_c` past which the power is
//! constant. Inner integrals run in `u = ln x`, the outer one over `y`.

use std::f64::consts::LN_2;

use crate::channel::{MaxGainLaw, SystemConfig};
use crate::error::{Error, Result};
use crate::numerics::{integrate_semi_infinite_vec, integrate_vec, QuadratureSettings};

/// Lagrange multipliers: `lambda` prices average interference, `mu` average
/// transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPair {
    pub lambda: f64,
    pub mu: f64,
}

impl DualPair {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite() && mu >= 0.0 && mu.is_finite()) {
            return Err(Error::Precondition(format!(
                "multipliers must be finite and non-negative (lambda={lambda}, mu={mu})"
            )));
        }
        Ok(DualPair { lambda, mu })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterferenceMode {
    Average,
    Peak,
}

/// Average transmit-power budget and an interference limit, all linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSet {
    p_av: f64,
    interference: f64,
    mode: InterferenceMode,
}

/// `10^(db / 10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ConstraintSet {
    pub fn new(p_av: f64, interference: f64, mode: InterferenceMode) -> Result<Self> {
        for (name, v) in [("average transmit power", p_av), ("interference limit", interference)] {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(ConstraintSet {
            p_av,
            interference,
            mode,
        })
    }

    pub fn from_db(p_av_db: f64, interference_db: f64, mode: InterferenceMode) -> Result<Self> {
        Self::new(db_to_linear(p_av_db), db_to_linear(interference_db), mode)
    }

    pub fn average(p_av: f64, i_av: f64) -> Result<Self> {
        Self::new(p_av, i_av, InterferenceMode::Average)
    }

    pub fn peak(p_av: f64, i_pk: f64) -> Result<Self> {
        Self::new(p_av, i_pk, InterferenceMode::Peak)
    }

    pub fn p_av(&self) -> f64 {
        self.p_av
    }

    pub fn interference(&self) -> f64 {
        self.interference
    }

    pub fn mode(&self) -> InterferenceMode {
        self.mode
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Aip,
    Pip,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Aip => "aip",
            PolicyKind::Pip => "pip",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aip" => Ok(PolicyKind::Aip),
            "pip" => Ok(PolicyKind::Pip),
            _ => Err(Error::Precondition(format!(
                "unknown policy '{s}' (expected aip or pip)"
            ))),
        }
    }
}

/// A fully specified power policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// `P = [1 / (mu + lambda g_sp) - n / g_s]^+`.
    Aip(DualPair),
    /// `P = min([1 / mu - n / g_s]^+, i_pk / g_sp)`.
    Pip { mu: f64, i_pk: f64 },
}

impl Policy {
    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::Aip(_) => PolicyKind::Aip,
            Policy::Pip { .. } => PolicyKind::Pip,
        }
    }

    /// Multipliers as reported; the peak policy has no interference price.
    pub fn duals(&self) -> DualPair {
        match *self {
            Policy::Aip(d) => d,
            Policy::Pip { mu, .. } => DualPair { lambda: 0.0, mu },
        }
    }

    pub fn power(&self, g_s: f64, g_sp: f64, noise_var: f64) -> Result<f64> {
        match *self {
            Policy::Aip(d) => transmit_power_aip(d, g_s, g_sp, noise_var),
            Policy::Pip { mu, i_pk } => transmit_power_pip(mu, i_pk, g_s, g_sp, noise_var),
        }
    }
}

fn check_gains(func: &'static str, g_s: f64, g_sp: f64, noise_var: f64) -> Result<()> {
    if !(g_s >= 0.0) || !(g_sp >= 0.0) || !(noise_var > 0.0) {
        return Err(Error::domain(
            func,
            format!("need g_s >= 0, g_sp >= 0, noise_var > 0 (got {g_s}, {g_sp}, {noise_var})"),
        ));
    }
    Ok(())
}

/// Optimal power under joint average interference and transmit-power limits.
pub fn transmit_power_aip(duals: DualPair, g_s: f64, g_sp: f64, noise_var: f64) -> Result<f64> {
    check_gains("transmit_power_aip", g_s, g_sp, noise_var)?;
    let level = duals.mu + duals.lambda * g_sp;
    if !(level > 0.0) {
        return Err(Error::domain(
            "transmit_power_aip",
            format!("water level is unbounded: mu + lambda g_sp = {level}"),
        ));
    }
    if g_s == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 / level - noise_var / g_s).max(0.0))
}

/// Water-filling under an average transmit-power limit, capped by a peak
/// interference limit.
pub fn transmit_power_pip(mu: f64, i_pk: f64, g_s: f64, g_sp: f64, noise_var: f64) -> Result<f64> {
    check_gains("transmit_power_pip", g_s, g_sp, noise_var)?;
    if !(mu >= 0.0) || !(i_pk > 0.0) {
        return Err(Error::domain(
            "transmit_power_pip",
            format!("need mu >= 0 and i_pk > 0 (got {mu}, {i_pk})"),
        ));
    }
    if mu == 0.0 && g_sp == 0.0 {
        return Err(Error::domain(
            "transmit_power_pip",
            "unbounded power: mu = 0 and g_sp = 0",
        ));
    }
    let cap = i_pk / g_sp;
    if g_s == 0.0 {
        return Ok(0.0);
    }
    let water = if mu == 0.0 {
        f64::INFINITY
    } else {
        (1.0 / mu - noise_var / g_s).max(0.0)
    };
    Ok(water.min(cap))
}

/// `E[P]` and `E[g_sp P]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectations {
    pub e_p: f64,
    pub e_i: f64,
}

/// Ergodic rate in bits/s/Hz and probability of a silent slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOutage {
    pub capacity: f64,
    pub outage: f64,
}

/// Threshold and cap of one conditional slice `y`.
#[derive(Debug, Clone, Copy)]
struct Slice {
    /// Transmission starts above `t`.
    t: f64,
    /// Power stops growing above `x_c = t + width`. Kept as a width since
    /// `x_c` and `t` nearly coincide when the cap is tight.
    width: f64,
    /// Constant power past `x_c`.
    cap: f64,
}

impl Slice {
    fn x_c(&self) -> f64 {
        self.t + self.width
    }
}

/// Evaluates policy expectations for one system configuration.
#[derive(Debug, Clone, Copy)]
pub struct PolicyEvaluator {
    config: SystemConfig,
    secondary: MaxGainLaw,
    cross: MaxGainLaw,
    mean_cross: f64,
    outer: QuadratureSettings,
    inner: QuadratureSettings,
}

impl PolicyEvaluator {
    pub fn new(config: SystemConfig) -> Result<Self> {
        let cross = config.cross_law()?;
        Ok(PolicyEvaluator {
            config,
            secondary: config.secondary_law()?,
            cross,
            mean_cross: cross.mean()?,
            outer: QuadratureSettings::new(1e-12, 1e-10, 60)?,
            inner: QuadratureSettings::new(1e-15, 1e-12, 60)?,
        })
    }

    /// Overrides the outer quadrature tolerances.
    pub fn with_quadrature(mut self, outer: QuadratureSettings) -> Self {
        self.outer = outer;
        self
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    /// `E[g_sp]`.
    pub fn mean_cross(&self) -> f64 {
        self.mean_cross
    }

    /// Whether `E[P]` is infinite for a zero transmit-power price. Near the
    /// origin the cross-gain density behaves as `y^(mL - 1)` while the
    /// conditional power grows as `1 / y`.
    pub fn zero_mu_power_diverges(&self) -> bool {
        self.cross.spec().m() * self.cross.count() as f64 <= 1.0
    }

    fn survival(&self, x: f64) -> Result<f64> {
        self.secondary.survival(x)
    }

    fn slice(&self, policy: &Policy, y: f64) -> Slice {
        let n = self.config.noise_var();
        match *policy {
            Policy::Aip(d) => Slice {
                t: n * (d.mu + d.lambda * y),
                width: f64::INFINITY,
                cap: 0.0,
            },
            Policy::Pip { mu, i_pk } => {
                let cap = i_pk / y;
                // x_c - t = n / (1/mu - cap) - n mu = n mu^2 cap / (1 - mu cap).
                let width = if mu == 0.0 {
                    0.0
                } else if mu * cap < 1.0 {
                    n * mu * mu * cap / (1.0 - mu * cap)
                } else {
                    f64::INFINITY
                };
                Slice { t: n * mu, width, cap }
            }
        }
    }

    /// `int_t^x_c S(x) x^-p dx` for `p` in {1, 2}.
    fn head(&self, s: Slice, p: i32) -> Result<f64> {
        let in_log = |u: f64| -> Result<[f64; 1]> {
            let x = u.exp();
            Ok([self.survival(x)? * x.powi(1 - p)])
        };
        let lo = s.t.ln();
        let v = if s.width.is_infinite() {
            integrate_semi_infinite_vec(in_log, lo, &[0.0], &self.inner)?[0].value
        } else if s.width < s.t {
            let linear = |d: f64| -> Result<[f64; 1]> {
                let x = s.t + d;
                Ok([self.survival(x)? * x.powi(-p)])
            };
            integrate_vec(linear, &[0.0, s.width], &self.inner)?[0].value
        } else {
            integrate_vec(in_log, &[lo, s.x_c().ln()], &self.inner)?[0].value
        };
        Ok(v)
    }

    /// `n int_t^x_c S / x^2 dx`; the power is flat past `x_c`.
    fn conditional_power(&self, s: Slice) -> Result<f64> {
        if s.t == 0.0 && s.width == 0.0 {
            return Ok(s.cap);
        }
        if s.t == 0.0 {
            return Err(Error::Divergent {
                quantity: "conditional transmit power",
                detail: "threshold is zero".into(),
            });
        }
        if self.survival(s.t)? == 0.0 {
            return Ok(0.0);
        }
        Ok(self.config.noise_var() * self.head(s, 2)?)
    }

    /// Conditional ergodic rate in bits/s/Hz.
    fn conditional_rate(&self, s: Slice) -> Result<f64> {
        let n = self.config.noise_var();
        if s.t == 0.0 && s.width == 0.0 {
            let [v] = integrate_semi_infinite_vec(
                |x| Ok([self.survival(x)? * s.cap / (n + s.cap * x)]),
                0.0,
                &[1.0],
                &self.inner,
            )?;
            return Ok(v.value / LN_2);
        }
        if s.t == 0.0 {
            return Err(Error::Divergent {
                quantity: "conditional rate",
                detail: "threshold is zero".into(),
            });
        }
        if self.survival(s.t)? == 0.0 {
            return Ok(0.0);
        }
        let mut v = self.head(s, 1)?;
        if s.width.is_finite() {
            let [tail] = integrate_semi_infinite_vec(
                |u| {
                    // x c / (n + c x) written to stay finite as x grows.
                    let x = u.exp();
                    let sx = self.survival(x)?;
                    Ok([if sx == 0.0 { 0.0 } else { sx * s.cap / (n / x + s.cap) }])
                },
                s.x_c().ln(),
                &[0.0],
                &self.inner,
            )?;
            v += tail.value;
        }
        Ok(v / LN_2)
    }

    fn outer_breaks(&self, policy: &Policy) -> Vec<f64> {
        let mut b = vec![1.0];
        match *policy {
            Policy::Aip(d) if d.lambda > 0.0 && d.mu > 0.0 => b.push(d.mu / d.lambda),
            // The cap stops binding for y below i_pk mu.
            Policy::Pip { mu, i_pk } if mu > 0.0 => b.push(i_pk * mu),
            _ => {}
        }
        b
    }

    fn check_power_finite(&self, policy: &Policy) -> Result<()> {
        let diverges = match *policy {
            Policy::Aip(d) if d.lambda == 0.0 && d.mu == 0.0 => true,
            Policy::Aip(d) => d.mu == 0.0 && self.zero_mu_power_diverges(),
            Policy::Pip { mu, .. } => mu == 0.0 && self.zero_mu_power_diverges(),
        };
        if diverges {
            return Err(Error::Divergent {
                quantity: "average transmit power",
                detail: format!(
                    "{policy:?} with cross-gain shape {} over L = {}",
                    self.cross.spec().m(),
                    self.cross.count()
                ),
            });
        }
        if let Policy::Pip { mu, i_pk } = *policy {
            if !(mu >= 0.0 && mu.is_finite() && i_pk > 0.0) {
                return Err(Error::Precondition(format!("invalid peak policy mu={mu}, i_pk={i_pk}")));
            }
        }
        Ok(())
    }

    /// `E[P]` and `E[g_sp P]` for `policy`.
    pub fn expectations(&self, policy: &Policy) -> Result<Expectations> {
        self.check_power_finite(policy)?;
        if let Policy::Aip(d) = policy {
            if d.lambda == 0.0 {
                // The power ignores g_sp.
                let e_p = self.conditional_power(self.slice(policy, 0.0))?;
                return Ok(Expectations {
                    e_p,
                    e_i: e_p * self.mean_cross,
                });
            }
        }
        let [p, i] = integrate_semi_infinite_vec(
            |y| {
                if y == 0.0 {
                    return Ok([0.0, 0.0]);
                }
                let f = self.cross.pdf(y)?;
                if f == 0.0 {
                    return Ok([0.0, 0.0]);
                }
                let g = self.conditional_power(self.slice(policy, y))?;
                Ok([f * g, y * f * g])
            },
            0.0,
            &self.outer_breaks(policy),
            &self.outer,
        )?;
        Ok(Expectations {
            e_p: p.value,
            e_i: i.value,
        })
    }

    /// Ergodic capacity and outage of `policy`.
    pub fn rate_outage(&self, policy: &Policy) -> Result<RateOutage> {
        match *policy {
            Policy::Aip(d) if d.lambda == 0.0 && d.mu == 0.0 => {
                return Err(Error::Divergent {
                    quantity: "ergodic capacity",
                    detail: "both multipliers are zero".into(),
                })
            }
            Policy::Aip(d) if d.lambda == 0.0 => {
                let s = self.slice(policy, 0.0);
                return Ok(RateOutage {
                    capacity: self.conditional_rate(s)?,
                    outage: 1.0 - self.survival(s.t)?,
                });
            }
            Policy::Pip { mu, i_pk } if !(mu >= 0.0 && mu.is_finite() && i_pk > 0.0) => {
                return Err(Error::Precondition(format!("invalid peak policy mu={mu}, i_pk={i_pk}")))
            }
            _ => {}
        }
        let [c, o] = integrate_semi_infinite_vec(
            |y| {
                if y == 0.0 {
                    return Ok([0.0, 0.0]);
                }
                let f = self.cross.pdf(y)?;
                if f == 0.0 {
                    return Ok([0.0, 0.0]);
                }
                let s = self.slice(policy, y);
                let silent = if s.t == 0.0 { 0.0 } else { 1.0 - self.survival(s.t)? };
                Ok([f * self.conditional_rate(s)?, f * silent])
            },
            0.0,
            &self.outer_breaks(policy),
            &self.outer,
        )?;
        Ok(RateOutage {
            capacity: c.value.max(0.0),
            outage: o.value.clamp(0.0, 1.0),
        })
    }
}

/// `E[P]` and `E[g_sp P]` of the interference-aware policy.
pub fn constraint_expectations(duals: DualPair, config: &SystemConfig) -> Result<Expectations> {
    PolicyEvaluator::new(*config)?.expectations(&Policy::Aip(duals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::FadingSpec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn rayleigh(k: u32, l: u32) -> SystemConfig {
        let r = FadingSpec::rayleigh();
        SystemConfig::new(k, l, 1.0, r, r).unwrap()
    }

    #[test]
    fn aip_power_examples() {
        let d = DualPair::new(0.0, 1.0).unwrap();
        assert!(close(transmit_power_aip(d, 2.0, 7.0, 1.0).unwrap(), 0.5, 1e-15));
        let d = DualPair::new(0.3, 0.2).unwrap();
        let edge = 1.0 * (0.2 + 0.3 * 1.5);
        assert_eq!(transmit_power_aip(d, edge, 1.5, 1.0).unwrap(), 0.0);
        let big = DualPair::new(1e12, 0.0).unwrap();
        assert!(transmit_power_aip(big, 10.0, 1.0, 1.0).unwrap() < 1e-11);
        assert!(transmit_power_aip(DualPair::new(0.0, 0.0).unwrap(), 1.0, 1.0, 1.0).is_err());
        assert_eq!(transmit_power_aip(d, 0.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn pip_power_examples() {
        assert!(close(transmit_power_pip(0.0, 1.0, 3.0, 2.0, 1.0).unwrap(), 0.5, 1e-15));
        assert!(close(
            transmit_power_pip(1.0, 10.0, 2.0, 0.01, 1.0).unwrap(),
            0.5,
            1e-15
        ));
        assert!(transmit_power_pip(1.0, 1.0, 2.0, 1e300, 1.0).unwrap() < 1e-299);
        assert!(transmit_power_pip(0.0, 1.0, 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn db_constraints() {
        let c = ConstraintSet::from_db(5.0, 0.0, InterferenceMode::Average).unwrap();
        assert!(close(c.p_av(), 10f64.sqrt(), 1e-12));
        assert!(close(c.interference(), 1.0, 0.0));
        assert!(ConstraintSet::average(0.0, 1.0).is_err());
    }

    #[test]
    fn single_user_power_expectation() {
        // E[(1 - 1/g)^+] for a unit exponential gain is e^-1 - E1(1).
        let e = constraint_expectations(DualPair::new(0.0, 1.0).unwrap(), &rayleigh(1, 1)).unwrap();
        assert!(close(e.e_p, 0.14849550677592183, 1e-10), "{}", e.e_p);
        assert!(close(e.e_i, e.e_p, 1e-10));
    }

    #[test]
    fn lambda_shortcut_matches_outer_integral() {
        let ev = PolicyEvaluator::new(rayleigh(2, 2)).unwrap();
        let a = ev.expectations(&Policy::Aip(DualPair::new(0.0, 0.7).unwrap())).unwrap();
        let b = ev
            .expectations(&Policy::Aip(DualPair::new(1e-13, 0.7).unwrap()))
            .unwrap();
        assert!(close(a.e_p, b.e_p, 1e-9) && close(a.e_i, b.e_i, 1e-9));
        assert!(close(ev.mean_cross(), 1.5, 1e-9));
    }

    #[test]
    fn divergence_is_reported() {
        let ev = PolicyEvaluator::new(rayleigh(1, 1)).unwrap();
        assert!(ev.zero_mu_power_diverges());
        let r = ev.expectations(&Policy::Aip(DualPair::new(1.0, 0.0).unwrap()));
        assert!(matches!(r, Err(Error::Divergent { .. })));
        let ev2 = PolicyEvaluator::new(rayleigh(1, 2)).unwrap();
        assert!(!ev2.zero_mu_power_diverges());
        assert!(ev2.expectations(&Policy::Aip(DualPair::new(1.0, 0.0).unwrap())).is_ok());
    }

    #[test]
    fn large_prices_silence_the_link() {
        let ev = PolicyEvaluator::new(rayleigh(2, 1)).unwrap();
        let e = ev.expectations(&Policy::Aip(DualPair::new(1e6, 1e6).unwrap())).unwrap();
        assert!(e.e_p < 1e-12 && e.e_i < 1e-12);
        let r = ev.rate_outage(&Policy::Aip(DualPair::new(1e6, 1e6).unwrap())).unwrap();
        assert!(r.capacity < 1e-12 && r.outage > 1.0 - 1e-12);
    }

    #[test]
    fn peak_policy_with_zero_mu_spends_the_cap() {
        // mu = 0: P = i_pk / y, so E[g_sp P] = i_pk whenever g > 0.
        let ev = PolicyEvaluator::new(rayleigh(1, 2)).unwrap();
        let e = ev.expectations(&Policy::Pip { mu: 0.0, i_pk: 2.0 }).unwrap();
        assert!(close(e.e_i, 2.0, 1e-8));
        let r = ev.rate_outage(&Policy::Pip { mu: 0.0, i_pk: 2.0 }).unwrap();
        assert_eq!(r.outage, 0.0);
    }

    #[test]
    fn ratio_form_capacity() {
        // K = L = 1, mu = 0, lambda n = 1: int_1^inf log2(z) / (1 + z)^2 dz = 1.
        let ev = PolicyEvaluator::new(rayleigh(1, 1)).unwrap();
        let r = ev.rate_outage(&Policy::Aip(DualPair::new(1.0, 0.0).unwrap())).unwrap();
        assert!(close(r.capacity, 1.0, 1e-8), "{}", r.capacity);
        assert!(close(r.outage, 0.5, 1e-9));
    }
}
