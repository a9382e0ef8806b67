//! Adaptive Gauss-Kronrod quadrature on finite and semi-infinite domains, and
//! guarded bisection for monotone scalar functions.
//!
//! The quadrature engine is vector-valued: several integrands that share one
//! expensive evaluation (for instance an inner integral) are integrated on a
//! common subdivision, and an interval is refined until every component meets
//! its tolerance.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to any initial interval.
    pub max_depth: u32,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_depth: 60,
        }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_depth < 1 {
            return Err(Error::Precondition(format!(
                "quadrature tolerances must be positive and max_depth >= 1 \
                 (abs_tol={abs_tol}, rel_tol={rel_tol}, max_depth={max_depth})"
            )));
        }
        Ok(QuadratureSettings {
            abs_tol,
            rel_tol,
            max_depth,
        })
    }

    pub fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Hard cap on the number of live subintervals.
const MAX_SEGMENTS: usize = 4000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

#[derive(Debug, Clone, Copy)]
struct Segment<const N: usize> {
    lo: f64,
    hi: f64,
    depth: u32,
    value: [f64; N],
    error: [f64; N],
}

fn check_finite<const N: usize>(v: &[f64; N], x: f64) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain(
            "quadrature",
            format!("integrand is not finite at x = {x:e}"),
        ))
    }
}

fn gk21<const N: usize, F>(f: &mut F, lo: f64, hi: f64, depth: u32) -> Result<Segment<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];

    let fc = f(center)?;
    check_finite(&fc, center)?;
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut res_abs = [0.0; N];
    for i in 0..N {
        kronrod[i] = fc[i] * WGK[10];
        res_abs[i] = kronrod[i].abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let v1 = f(x1)?;
        check_finite(&v1, x1)?;
        let v2 = f(x2)?;
        check_finite(&v2, x2)?;
        for i in 0..N {
            let sum = v1[i] + v2[i];
            kronrod[i] += WGK[j] * sum;
            res_abs[i] += WGK[j] * (v1[i].abs() + v2[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * sum;
            }
        }
        fv1[j] = v1;
        fv2[j] = v2;
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * kronrod[i];
        let mut res_asc = WGK[10] * (fc[i] - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        let err = (kronrod[i] - gauss[i]) * half;
        value[i] = kronrod[i] * half;
        error[i] = rescale_error(err, res_abs[i] * half.abs(), res_asc * half.abs());
    }
    Ok(Segment {
        lo,
        hi,
        depth,
        value,
        error,
    })
}

struct Adaptive<const N: usize> {
    value: [Estimate; N],
    worst: Option<(f64, f64)>,
    converged: bool,
}

fn adaptive<const N: usize, F>(mut f: F, breaks: &[f64], settings: &QuadratureSettings) -> Result<Adaptive<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let mut segments: Vec<Segment<N>> = Vec::with_capacity(64);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            segments.push(gk21(&mut f, w[0], w[1], 0)?);
        }
    }

    loop {
        let mut total = [0.0; N];
        let mut total_err = [0.0; N];
        for s in &segments {
            for i in 0..N {
                total[i] += s.value[i];
                total_err[i] += s.error[i];
            }
        }
        let tol: [f64; N] = std::array::from_fn(|i| settings.tolerance(total[i]));
        let estimate = std::array::from_fn(|i| Estimate {
            value: total[i],
            error: total_err[i],
        });
        if (0..N).all(|i| total_err[i] <= tol[i]) {
            return Ok(Adaptive {
                value: estimate,
                worst: None,
                converged: true,
            });
        }

        let score = |s: &Segment<N>| -> f64 { (0..N).map(|i| s.error[i] / tol[i]).fold(0.0, f64::max) };
        let (worst_idx, worst) = segments
            .iter()
            .enumerate()
            .max_by(|a, b| score(a.1).total_cmp(&score(b.1)))
            .map(|(i, s)| (i, *s))
            .expect("at least one segment");

        let mid = 0.5 * (worst.lo + worst.hi);
        let splittable = mid > worst.lo && mid < worst.hi;
        if worst.depth >= settings.max_depth || !splittable || segments.len() >= MAX_SEGMENTS {
            return Ok(Adaptive {
                value: estimate,
                worst: Some((worst.lo, worst.hi)),
                converged: false,
            });
        }
        let left = gk21(&mut f, worst.lo, mid, worst.depth + 1)?;
        let right = gk21(&mut f, mid, worst.hi, worst.depth + 1)?;
        segments[worst_idx] = left;
        segments.push(right);
    }
}

fn quadrature_error<const N: usize>(context: &'static str, result: &Adaptive<N>, map: impl Fn(f64) -> f64) -> Error {
    let (lo, hi) = result.worst.unwrap_or((f64::NAN, f64::NAN));
    let worst = result
        .value
        .iter()
        .max_by(|a, b| a.error.total_cmp(&b.error))
        .copied()
        .unwrap_or(Estimate {
            value: f64::NAN,
            error: f64::NAN,
        });
    Error::Quadrature {
        context,
        value: worst.value,
        error: worst.error,
        worst_lo: map(lo),
        worst_hi: map(hi),
    }
}

fn validate_breaks(breaks: &[f64]) -> Result<()> {
    if breaks.len() < 2 {
        return Err(Error::Precondition("need at least two integration limits".into()));
    }
    if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition(format!(
            "integration limits must be finite and nondecreasing: {breaks:?}"
        )));
    }
    Ok(())
}

/// Integrates a vector-valued integrand over `[breaks[0], breaks[last]]`,
/// starting from the subdivision given by `breaks`.
pub fn integrate_vec<const N: usize, F>(f: F, breaks: &[f64], settings: &QuadratureSettings) -> Result<[Estimate; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    validate_breaks(breaks)?;
    let result = adaptive(f, breaks, settings)?;
    if result.converged {
        Ok(result.value)
    } else {
        Err(quadrature_error("integrate", &result, |x| x))
    }
}

/// Integrates a vector-valued integrand over `[a, inf)` through the map
/// `x = a + (t / (1 - t))^2`, `t` in `(0, 1)`. Squaring the rational map
/// turns an integrable `(x - a)^(p - 1)` singularity with `p >= 1/2` into a
/// bounded integrand. `interior` lists optional breakpoints in `x`.
pub fn integrate_semi_infinite_vec<const N: usize, F>(
    mut f: F,
    a: f64,
    interior: &[f64],
    settings: &QuadratureSettings,
) -> Result<[Estimate; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    if !a.is_finite() {
        return Err(Error::Precondition(format!("lower limit {a} must be finite")));
    }
    let to_t = |x: f64| {
        let d = (x - a).sqrt();
        d / (1.0 + d)
    };
    let mut breaks = Vec::with_capacity(interior.len() + 2);
    breaks.push(0.0);
    for &x in interior {
        if x.is_finite() && x > a {
            breaks.push(to_t(x));
        }
    }
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mapped = |t: f64| -> Result<[f64; N]> {
        let s = 1.0 - t;
        let r = t / s;
        let x = a + r * r;
        let jac = 2.0 * r / (s * s);
        let v = f(x)?;
        Ok(std::array::from_fn(|i| if v[i] == 0.0 { 0.0 } else { v[i] * jac }))
    };
    let result = adaptive(mapped, &breaks, settings)?;
    if result.converged {
        Ok(result.value)
    } else {
        Err(quadrature_error("integrate_semi_infinite", &result, |t| {
            let r = t / (1.0 - t);
            a + r * r
        }))
    }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, settings: &QuadratureSettings) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    let [e] = integrate_vec(|x| Ok([f(x)]), &[a, b], settings)?;
    Ok(e)
}

/// Adaptive integral of `f` over `[a, inf)`.
pub fn integrate_semi_infinite<F>(mut f: F, a: f64, settings: &QuadratureSettings) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    let [e] = integrate_semi_infinite_vec(|x| Ok([f(x)]), a, &[], settings)?;
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectOptions {
    /// Stop once the bracket is no wider than this.
    pub x_tol: f64,
    /// Stop early once the endpoint with `g <= 0` satisfies `|g| <= tol`.
    pub feasible_tol: Option<f64>,
    pub max_iter: u32,
}

impl BisectOptions {
    pub fn width(x_tol: f64) -> Self {
        BisectOptions {
            x_tol,
            feasible_tol: None,
            max_iter: 2000,
        }
    }
}

/// Final bracket of a bisection run. `g_lo` and `g_hi` keep opposite signs
/// (or one is zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectOutcome {
    pub lo: f64,
    pub hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
    pub iterations: u32,
}

impl BisectOutcome {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// The endpoint where `g <= 0`.
    pub fn nonpositive_end(&self) -> (f64, f64) {
        if self.g_lo <= 0.0 {
            (self.lo, self.g_lo)
        } else {
            (self.hi, self.g_hi)
        }
    }
}

/// Bisection on a monotone function. Known end values may be passed in to
/// avoid re-evaluation; they may be infinite.
pub fn bisect<G>(
    mut g: G,
    lo: (f64, Option<f64>),
    hi: (f64, Option<f64>),
    opts: &BisectOptions,
) -> Result<BisectOutcome>
where
    G: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (lo, hi);
    if !(lo.0 <= hi.0) {
        return Err(Error::Precondition(format!("empty bracket [{}, {}]", lo.0, hi.0)));
    }
    if !(opts.x_tol > 0.0) {
        return Err(Error::Precondition("bisection tolerance must be positive".into()));
    }
    let mut g_lo = match lo.1.take() {
        Some(v) => v,
        None => g(lo.0)?,
    };
    let mut g_hi = match hi.1.take() {
        Some(v) => v,
        None => g(hi.0)?,
    };
    let (mut lo, mut hi) = (lo.0, hi.0);
    if g_lo.is_nan() || g_hi.is_nan() || (g_lo.signum() == g_hi.signum() && g_lo != 0.0 && g_hi != 0.0) {
        return Err(Error::Bracket { lo, hi, g_lo, g_hi });
    }

    let done = |g_lo: f64, g_hi: f64, lo: f64, hi: f64| -> bool {
        if g_lo == 0.0 || g_hi == 0.0 || hi - lo <= opts.x_tol {
            return true;
        }
        if let Some(tol) = opts.feasible_tol {
            let feasible = if g_lo <= 0.0 { g_lo } else { g_hi };
            return feasible.abs() <= tol;
        }
        false
    };

    let mut iterations = 0;
    while !done(g_lo, g_hi, lo, hi) && iterations < opts.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if gm.is_nan() {
            return Err(Error::domain("bisect", format!("g({mid:e}) is NaN")));
        }
        iterations += 1;
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            g_lo = 0.0;
            g_hi = 0.0;
        } else if gm.signum() == g_lo.signum() {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
            g_hi = gm;
        }
    }
    Ok(BisectOutcome {
        lo,
        hi,
        g_lo,
        g_hi,
        iterations,
    })
}

/// Root of a monotone `g` bracketed by `[lo, hi]`, to bracket width `tol`.
pub fn bisect_root<G>(mut g: G, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let out = bisect(|x| Ok(g(x)), (lo, None), (hi, None), &BisectOptions::width(tol))?;
    Ok(out.midpoint())
}
