//! Distributions of the ratio `z = g_s / g_sp` between a secondary gain and
//! the maximum of `L` cross gains, and the best-of-K transform.
//!
//! Two evaluation paths exist. The closed forms cover single and multiple
//! primary receivers under Rayleigh and Nakagami-m fading; the multi-receiver
//! Nakagami expression is exact only for `m = 1` or `L <= 2`, and deviates
//! elsewhere. The quadrature path integrates the joint law directly and is
//! exact for any shapes.

use crate::channel::{FadingSpec, MaxGainLaw, PdfCdf};
use crate::error::{Error, Result};
use crate::numerics::{integrate_semi_infinite_vec, integrate_vec, QuadratureSettings};
use crate::specfun::{binom, gauss_2f1, ln_beta, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RatioMode {
    PaperClosedForm,
    ExactQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioParams {
    secondary: FadingSpec,
    cross: FadingSpec,
    l: u32,
    mode: RatioMode,
    quadrature: QuadratureSettings,
}

impl RatioParams {
    /// Equal shape `m` on the secondary and cross links.
    pub fn new(m: f64, l: u32, mode: RatioMode) -> Result<Self> {
        let spec = FadingSpec::with_shape(m)?;
        Self::with_specs(spec, spec, l, mode)
    }

    pub fn with_specs(secondary: FadingSpec, cross: FadingSpec, l: u32, mode: RatioMode) -> Result<Self> {
        if l == 0 {
            return Err(Error::Precondition("L must be >= 1".into()));
        }
        Ok(RatioParams {
            secondary,
            cross,
            l,
            mode,
            quadrature: QuadratureSettings::default(),
        })
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureSettings) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn secondary(&self) -> FadingSpec {
        self.secondary
    }

    pub fn cross(&self) -> FadingSpec {
        self.cross
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn mode(&self) -> RatioMode {
        self.mode
    }

    pub fn quadrature(&self) -> QuadratureSettings {
        self.quadrature
    }

    fn common_shape(&self) -> Result<f64> {
        if self.secondary.m() != self.cross.m() {
            return Err(Error::Precondition(format!(
                "closed forms need equal shapes, got m_s = {} and m_sp = {}",
                self.secondary.m(),
                self.cross.m()
            )));
        }
        Ok(self.secondary.m())
    }

    fn joint(&self) -> Result<JointRatioLaw> {
        JointRatioLaw::new(
            MaxGainLaw::new(self.secondary, 1)?,
            MaxGainLaw::new(self.cross, self.l)?,
            self.quadrature,
        )
    }
}

/// Number of candidate secondary receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MudParams {
    k: u32,
}

impl MudParams {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("K must be >= 1".into()));
        }
        Ok(MudParams { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

fn check_z(func: &'static str, z: f64) -> Result<()> {
    if z >= 0.0 && !z.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("z = {z} must be >= 0")))
    }
}

/// `z^(m-1)` with the origin handled explicitly.
fn origin_power(func: &'static str, m: f64, z: f64) -> Result<f64> {
    if z > 0.0 {
        Ok(((m - 1.0) * z.ln()).exp())
    } else if m > 1.0 {
        Ok(0.0)
    } else if m == 1.0 {
        Ok(1.0)
    } else {
        Err(Error::domain(
            func,
            format!("density is unbounded at z = 0 for m = {m}"),
        ))
    }
}

/// `f(z) = 1 / (1 + z)^2`.
pub fn rayleigh_single_pdf(z: f64) -> Result<f64> {
    check_z("rayleigh_single_pdf", z)?;
    Ok((1.0 + z).powi(-2))
}

/// `F(z) = z / (1 + z)`.
pub fn rayleigh_single_cdf(z: f64) -> Result<f64> {
    check_z("rayleigh_single_cdf", z)?;
    Ok(if z.is_infinite() { 1.0 } else { z / (1.0 + z) })
}

/// Beta-prime density `z^(m-1) / (B(m, m) (1 + z)^(2m))`.
pub fn nakagami_single_pdf(m: f64, z: f64) -> Result<f64> {
    check_z("nakagami_single_pdf", z)?;
    let lead = origin_power("nakagami_single_pdf", m, z)?;
    if lead == 0.0 {
        return Ok(0.0);
    }
    Ok(lead * (-ln_beta(m, m)? - 2.0 * m * z.ln_1p()).exp())
}

/// `F(z) = z^m 2F1(m, 2m; 1 + m; -z) / (m B(m, m))`.
pub fn nakagami_single_cdf(m: f64, z: f64) -> Result<f64> {
    check_z("nakagami_single_cdf", z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    if z > 1.0 {
        // z and 1/z share one law.
        return Ok(1.0 - nakagami_single_cdf(m, 1.0 / z)?);
    }
    let h = gauss_2f1(m, 2.0 * m, 1.0 + m, -z)?.require("nakagami_single_cdf")?;
    let v = (m * z.ln() - m.ln() - ln_beta(m, m)?).exp() * h;
    Ok(v.clamp(0.0, 1.0))
}

fn alternating_binomials(l: u32) -> Result<Vec<f64>> {
    (0..l as u64)
        .map(|k| {
            let c = binom(l as u64 - 1, k)?;
            Ok(if k % 2 == 0 { c } else { -c })
        })
        .collect()
}

/// Rayleigh, `L` primary receivers:
/// `f(z) = L sum_k (-1)^k C(L-1, k) / (1 + z + k)^2`.
pub fn rayleigh_multi_pdf(l: u32, z: f64) -> Result<f64> {
    check_z("rayleigh_multi_pdf", z)?;
    let coef = alternating_binomials(l)?;
    let s: f64 = coef
        .iter()
        .enumerate()
        .map(|(k, c)| c / (1.0 + z + k as f64).powi(2))
        .sum();
    Ok((l as f64 * s).max(0.0))
}

/// `F(z) = L sum_k (-1)^k C(L-1, k) (1/(1+k) - 1/(1+z+k))`.
pub fn rayleigh_multi_cdf(l: u32, z: f64) -> Result<f64> {
    check_z("rayleigh_multi_cdf", z)?;
    let coef = alternating_binomials(l)?;
    let s: f64 = coef
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let k = k as f64;
            let tail = if z.is_infinite() { 0.0 } else { 1.0 / (1.0 + z + k) };
            c * (1.0 / (1.0 + k) - tail)
        })
        .sum();
    Ok((l as f64 * s).clamp(0.0, 1.0))
}

/// Nakagami-m, `L` primary receivers, via the binomial expansion of the
/// cross-gain cdf. The `k = 0` term is used in its pre-integrated form
/// `L Gamma(2m) z^(m-1) / (Gamma(m)^L (1+z)^(2m))`; the `k >= 1` terms are
/// `L Gamma(3m) / Gamma(m)^(L+1) z^(m-1) / (2m) (-1)^k C(L-1, k) k^m
/// (z+k+1)^(-3m) 2F1(1, 3m; 2m+1; (z+1)/(z+k+1))`.
pub fn multi_pu_nakagami_pdf(m: f64, l: u32, z: f64) -> Result<f64> {
    check_z("multi_pu_nakagami_pdf", z)?;
    let lead = origin_power("multi_pu_nakagami_pdf", m, z)?;
    if lead == 0.0 || z.is_infinite() {
        return Ok(0.0);
    }
    let lf = l as f64;
    let lg_m = ln_gamma(m)?;
    let k0 = (lf.ln() + ln_gamma(2.0 * m)? - lf * lg_m - 2.0 * m * z.ln_1p()).exp();
    let pref = (lf.ln() + ln_gamma(3.0 * m)? - (lf + 1.0) * lg_m).exp() / (2.0 * m);
    let coef = alternating_binomials(l)?;
    let mut rest = 0.0;
    for (k, c) in coef.iter().enumerate().skip(1) {
        let k = k as f64;
        let zk = z + k + 1.0;
        let u = (z + 1.0) / zk;
        let h = gauss_2f1(1.0, 3.0 * m, 2.0 * m + 1.0, u)?.require("multi_pu_nakagami_pdf")?;
        rest += c * (m * k.ln() - 3.0 * m * zk.ln()).exp() * h;
    }
    Ok(lead * (k0 + pref * rest))
}

/// Closed-form cdf for `m = 2` and `L` primary receivers.
pub fn multi_pu_nakagami_m2_cdf(l: u32, z: f64) -> Result<f64> {
    check_z("multi_pu_nakagami_m2_cdf", z)?;
    let coef = alternating_binomials(l)?;
    // L Gamma(6) / (Gamma(2)^(L+1) 20) = 6L.
    let pref = 6.0 * l as f64;
    let s: f64 = coef
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let k = k as f64;
            let head = (1.0 + 3.0 * k * k + 4.0 * k) / (6.0 * (1.0 + k).powi(4));
            // (1 + 3k^2 + 4z + 3z^2 + 4k(1 + 3z)) / (6 a^4) with a = 1 + k + z,
            // expanded in powers of 1 / a so that large z cannot overflow.
            let w = 1.0 / (1.0 + k + z);
            let tail = w * w * (3.0 + w * ((6.0 * k - 2.0) - w * 6.0 * k * (1.0 + k))) / 6.0;
            c * (head - tail)
        })
        .sum();
    Ok(pref * s)
}

/// Law of `X / Y` for independent `X ~ num` and `Y ~ den`, by quadrature over
/// `y`: `f(z) = int y f_X(zy) f_Y(y) dy`, `F(z) = int f_Y(y) F_X(zy) dy`.
#[derive(Debug, Clone, Copy)]
pub struct JointRatioLaw {
    num: MaxGainLaw,
    den: MaxGainLaw,
    quadrature: QuadratureSettings,
}

impl JointRatioLaw {
    pub fn new(num: MaxGainLaw, den: MaxGainLaw, quadrature: QuadratureSettings) -> Result<Self> {
        Ok(JointRatioLaw { num, den, quadrature })
    }

    fn breaks(z: f64) -> Vec<f64> {
        if z > 0.0 && z.is_finite() {
            vec![1.0 / z, 1.0]
        } else {
            vec![1.0]
        }
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        check_z("JointRatioLaw::pdf", z)?;
        if z.is_infinite() {
            return Ok(0.0);
        }
        if z == 0.0 {
            // f(0) = f_X(0) E[Y]; finite only when f_X(0) is.
            let f0 = self.num.pdf(0.0)?;
            return if f0 == 0.0 { Ok(0.0) } else { Ok(f0 * self.den.mean()?) };
        }
        let [e] = integrate_semi_infinite_vec(
            |y| {
                if y == 0.0 {
                    return Ok([0.0]);
                }
                let fy = self.den.pdf(y)?;
                if fy == 0.0 {
                    return Ok([0.0]);
                }
                Ok([y * self.num.pdf(z * y)? * fy])
            },
            0.0,
            &Self::breaks(z),
            &self.quadrature,
        )?;
        Ok(e.value.max(0.0))
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        check_z("JointRatioLaw::cdf", z)?;
        if z == 0.0 {
            return Ok(0.0);
        }
        if z.is_infinite() {
            return Ok(1.0);
        }
        let [e] = integrate_semi_infinite_vec(
            |y| {
                let fy = if y == 0.0 { 0.0 } else { self.den.pdf(y)? };
                if fy == 0.0 {
                    return Ok([0.0]);
                }
                Ok([fy * self.num.cdf(z * y)?])
            },
            0.0,
            &Self::breaks(z),
            &self.quadrature,
        )?;
        Ok(e.value.clamp(0.0, 1.0))
    }
}

/// `int_0^z f` through `x = s^2`, which absorbs a `x^(m-1)` singularity at 0.
fn integrate_from_origin<F>(mut f: F, z: f64, settings: &QuadratureSettings) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let [e] = integrate_vec(
        |s| {
            if s == 0.0 {
                return Ok([0.0]);
            }
            Ok([2.0 * s * f(s * s)?])
        },
        &[0.0, z.sqrt()],
        settings,
    )?;
    Ok(e.value)
}

/// Density of `z`.
pub fn ratio_pdf(params: &RatioParams, z: f64) -> Result<f64> {
    check_z("ratio_pdf", z)?;
    match params.mode {
        RatioMode::ExactQuadrature => params.joint()?.pdf(z),
        RatioMode::PaperClosedForm => {
            let m = params.common_shape()?;
            match (m == 1.0, params.l) {
                (true, 1) => rayleigh_single_pdf(z),
                (false, 1) => nakagami_single_pdf(m, z),
                (true, l) => rayleigh_multi_pdf(l, z),
                (false, l) => multi_pu_nakagami_pdf(m, l, z),
            }
        }
    }
}

/// Distribution function of `z`.
pub fn ratio_cdf(params: &RatioParams, z: f64) -> Result<f64> {
    check_z("ratio_cdf", z)?;
    match params.mode {
        RatioMode::ExactQuadrature => params.joint()?.cdf(z),
        RatioMode::PaperClosedForm => {
            let m = params.common_shape()?;
            match (m == 1.0, params.l) {
                (true, 1) => rayleigh_single_cdf(z),
                (false, 1) => nakagami_single_cdf(m, z),
                (true, l) => rayleigh_multi_cdf(l, z),
                (false, l) if m == 2.0 => multi_pu_nakagami_m2_cdf(l, z),
                (false, l) => {
                    if z == 0.0 {
                        return Ok(0.0);
                    }
                    integrate_from_origin(|x| multi_pu_nakagami_pdf(m, l, x), z, &params.quadrature)
                }
            }
        }
    }
}

/// Best-of-K transform of a base law: `pdf = K f F^(K-1)`, `cdf = F^K`.
pub fn mud_transform<F, G>(base_pdf: F, base_cdf: G, mud: MudParams, z: f64) -> Result<PdfCdf>
where
    F: FnOnce(f64) -> Result<f64>,
    G: FnOnce(f64) -> Result<f64>,
{
    check_z("mud_transform", z)?;
    let f = base_pdf(z)?;
    let cdf = base_cdf(z)?;
    let k = mud.k as i32;
    let pdf = if k == 1 { f } else { k as f64 * f * cdf.powi(k - 1) };
    Ok(PdfCdf { pdf, cdf: cdf.powi(k) })
}

/// `mud_transform` of the ratio law selected by `params`.
pub fn max_ratio(params: &RatioParams, mud: MudParams, z: f64) -> Result<PdfCdf> {
    mud_transform(|z| ratio_pdf(params, z), |z| ratio_cdf(params, z), mud, z)
}

/// Law of the ratio seen by the selected receiver when all K candidates share
/// one cross gain: `F(z) = int f_sp(y) P(m_s, m_s z y)^K dy`.
pub fn selected_ratio_law(
    secondary: FadingSpec,
    cross: FadingSpec,
    k: u32,
    l: u32,
    quadrature: QuadratureSettings,
) -> Result<JointRatioLaw> {
    JointRatioLaw::new(MaxGainLaw::new(secondary, k)?, MaxGainLaw::new(cross, l)?, quadrature)
}
