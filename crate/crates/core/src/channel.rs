//! Channel power-gain laws: unit-mean Gamma(m, 1/m) gains (Rayleigh when
//! m = 1), the maximum over several i.i.d. links, and seeded sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::specfun::{ln_gamma, reg_inc_gamma};

/// Smallest supported Nakagami shape.
pub const MIN_SHAPE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FadingFamily {
    Rayleigh,
    Nakagami,
}

/// Fading family and shape of a power-gain distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    family: FadingFamily,
    m: f64,
}

impl FadingSpec {
    pub fn rayleigh() -> Self {
        FadingSpec {
            family: FadingFamily::Rayleigh,
            m: 1.0,
        }
    }

    pub fn nakagami(m: f64) -> Result<Self> {
        if !(m >= MIN_SHAPE) || !m.is_finite() {
            return Err(Error::domain(
                "FadingSpec::nakagami",
                format!("shape m = {m} must be finite and >= {MIN_SHAPE}"),
            ));
        }
        Ok(FadingSpec {
            family: FadingFamily::Nakagami,
            m,
        })
    }

    /// Rayleigh for `m == 1`, Nakagami-m otherwise.
    pub fn with_shape(m: f64) -> Result<Self> {
        if m == 1.0 {
            Ok(Self::rayleigh())
        } else {
            Self::nakagami(m)
        }
    }

    pub fn family(&self) -> FadingFamily {
        self.family
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn is_exponential(&self) -> bool {
        self.m == 1.0
    }
}

/// Density and distribution function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfCdf {
    pub pdf: f64,
    pub cdf: f64,
}

fn check_x(func: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("x = {x} must be >= 0")))
    }
}

/// Law of the maximum of `count` i.i.d. unit-mean Gamma(m, 1/m) gains.
/// `count = 1` is the single-link gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxGainLaw {
    spec: FadingSpec,
    count: u32,
    ln_gamma_m: f64,
}

impl MaxGainLaw {
    pub fn new(spec: FadingSpec, count: u32) -> Result<Self> {
        if count == 0 {
            return Err(Error::Precondition("order-statistic count must be >= 1".into()));
        }
        Ok(MaxGainLaw {
            spec,
            count,
            ln_gamma_m: ln_gamma(spec.m)?,
        })
    }

    pub fn spec(&self) -> FadingSpec {
        self.spec
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    fn base(&self, x: f64) -> Result<(f64, f64)> {
        let m = self.spec.m;
        if self.spec.is_exponential() {
            return Ok((-(-x).exp_m1(), (-x).exp()));
        }
        let ig = reg_inc_gamma(m, m * x)?;
        Ok((ig.p, ig.q))
    }

    fn ln_base_pdf(&self, x: f64) -> f64 {
        let m = self.spec.m;
        m * m.ln() + (m - 1.0) * x.ln() - m * x - self.ln_gamma_m
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_x("MaxGainLaw::cdf", x)?;
        if x == f64::INFINITY {
            return Ok(1.0);
        }
        let (p, _) = self.base(x)?;
        Ok(p.powi(self.count as i32))
    }

    /// `1 - cdf`, accurate when the cdf is close to one.
    pub fn survival(&self, x: f64) -> Result<f64> {
        check_x("MaxGainLaw::survival", x)?;
        if x == f64::INFINITY {
            return Ok(0.0);
        }
        let (p, q) = self.base(x)?;
        Ok(if p < 0.5 {
            1.0 - p.powi(self.count as i32)
        } else {
            -(self.count as f64 * (-q).ln_1p()).exp_m1()
        })
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_x("MaxGainLaw::pdf", x)?;
        if x == f64::INFINITY {
            return Ok(0.0);
        }
        let m = self.spec.m;
        let n = self.count as f64;
        if x == 0.0 {
            // Near the origin pdf ~ c x^(m n - 1).
            let order = m * n - 1.0;
            if order > 0.0 {
                return Ok(0.0);
            }
            if order < 0.0 {
                return Err(Error::domain(
                    "MaxGainLaw::pdf",
                    format!("density is unbounded at x = 0 for m = {m}, count = {}", self.count),
                ));
            }
            let ln_c = n.ln() + m * n * m.ln() - (n - 1.0) * ln_gamma(m + 1.0)? - self.ln_gamma_m;
            return Ok(ln_c.exp());
        }
        let (p, _) = self.base(x)?;
        if p == 0.0 {
            return Ok(if self.count == 1 {
                self.ln_base_pdf(x).exp()
            } else {
                0.0
            });
        }
        let ln = n.ln() + (n - 1.0) * p.ln() + self.ln_base_pdf(x);
        Ok(ln.exp())
    }

    pub fn density(&self, x: f64) -> Result<PdfCdf> {
        Ok(PdfCdf {
            pdf: self.pdf(x)?,
            cdf: self.cdf(x)?,
        })
    }

    /// `E[g]` of the maximum.
    pub fn mean(&self) -> Result<f64> {
        let settings = crate::numerics::QuadratureSettings::default();
        let mut err = None;
        let e = crate::numerics::integrate_semi_infinite(
            |x| match self.survival(x) {
                Ok(s) => s,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            &settings,
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(e.value),
        }
    }
}

/// Density and cdf of a single gain: `pdf = m^m x^(m-1) e^(-mx) / Gamma(m)`,
/// `cdf = P(m, mx)`.
pub fn gain_density(spec: FadingSpec, x: f64) -> Result<PdfCdf> {
    check_x("gain_density", x)?;
    MaxGainLaw::new(spec, 1)?.density(x)
}

/// Density and cdf of the maximum of `l` i.i.d. gains: `cdf = P(m, mx)^l`.
pub fn max_gain_density(spec: FadingSpec, l: u32, x: f64) -> Result<PdfCdf> {
    check_x("max_gain_density", x)?;
    MaxGainLaw::new(spec, l)?.density(x)
}

/// K secondary receivers, L primary receivers, noise variance and fading of
/// the secondary and cross links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    k: u32,
    l: u32,
    noise_var: f64,
    secondary: FadingSpec,
    cross: FadingSpec,
}

impl SystemConfig {
    pub fn new(k: u32, l: u32, noise_var: f64, secondary: FadingSpec, cross: FadingSpec) -> Result<Self> {
        if k == 0 || l == 0 {
            return Err(Error::Precondition(format!("K = {k} and L = {l} must both be >= 1")));
        }
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(Error::Precondition(format!(
                "noise variance {noise_var} must be positive"
            )));
        }
        Ok(SystemConfig {
            k,
            l,
            noise_var,
            secondary,
            cross,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn secondary(&self) -> FadingSpec {
        self.secondary
    }

    pub fn cross(&self) -> FadingSpec {
        self.cross
    }

    /// Law of the selected (best of K) secondary gain.
    pub fn secondary_law(&self) -> Result<MaxGainLaw> {
        MaxGainLaw::new(self.secondary, self.k)
    }

    /// Law of the worst-case (max over L) cross gain.
    pub fn cross_law(&self) -> Result<MaxGainLaw> {
        MaxGainLaw::new(self.cross, self.l)
    }
}

/// Sampler for one fading spec. Exponential gains use the inverse cdf;
/// other shapes use the Marsaglia-Tsang Gamma sampler.
#[derive(Debug, Clone, Copy)]
pub struct GainSampler {
    inner: SamplerKind,
}

#[derive(Debug, Clone, Copy)]
enum SamplerKind {
    Exponential,
    Gamma(Gamma<f64>),
}

impl GainSampler {
    pub fn new(spec: FadingSpec) -> Result<Self> {
        let inner = if spec.is_exponential() {
            SamplerKind::Exponential
        } else {
            let g = Gamma::new(spec.m, 1.0 / spec.m).map_err(|e| Error::domain("GainSampler::new", e.to_string()))?;
            SamplerKind::Gamma(g)
        };
        Ok(GainSampler { inner })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.inner {
            SamplerKind::Exponential => {
                let u: f64 = rng.random();
                -(-u).ln_1p()
            }
            SamplerKind::Gamma(g) => g.sample(rng),
        }
    }

    /// Maximum of `count` independent draws.
    pub fn sample_max<R: Rng + ?Sized>(&self, rng: &mut R, count: u32) -> f64 {
        (0..count).map(|_| self.sample(rng)).fold(0.0, f64::max)
    }
}

/// Independent generator for stream `stream` of a seeded experiment.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` gains drawn from stream 0 of `seed`.
pub fn sample_gains(spec: FadingSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be >= 1".into()));
    }
    let sampler = GainSampler::new(spec)?;
    let mut rng = stream_rng(seed, 0);
    Ok((0..count).map(|_| sampler.sample(&mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn shape_validation() {
        assert!(FadingSpec::nakagami(0.3).is_err());
        assert!(FadingSpec::nakagami(f64::NAN).is_err());
        assert_eq!(FadingSpec::with_shape(1.0).unwrap().family(), FadingFamily::Rayleigh);
        assert_eq!(FadingSpec::with_shape(2.0).unwrap().family(), FadingFamily::Nakagami);
    }

    #[test]
    fn exponential_points() {
        let r = FadingSpec::rayleigh();
        let d = gain_density(r, 0.0).unwrap();
        assert_eq!((d.pdf, d.cdf), (1.0, 0.0));
        assert!(close(gain_density(r, 2f64.ln()).unwrap().cdf, 0.5, 1e-15));
        assert!(close(max_gain_density(r, 2, 2f64.ln()).unwrap().cdf, 0.25, 1e-15));
    }

    #[test]
    fn nakagami_points() {
        let s = FadingSpec::nakagami(2.0).unwrap();
        assert!(close(gain_density(s, 1.0).unwrap().pdf, 4.0 * (-2.0f64).exp(), 1e-14));
        let p22 = 1.0 - 3.0 * (-2.0f64).exp();
        assert!(close(max_gain_density(s, 3, 1.0).unwrap().cdf, p22.powi(3), 1e-14));
    }

    #[test]
    fn origin_density() {
        let half = FadingSpec::nakagami(0.5).unwrap();
        assert!(gain_density(half, 0.0).is_err());
        let two = max_gain_density(half, 2, 0.0).unwrap().pdf;
        assert!(close(two, 2.0 / std::f64::consts::PI, 1e-13));
        assert!(close(max_gain_density(half, 2, 1e-12).unwrap().pdf, two, 1e-5));
        assert_eq!(max_gain_density(half, 3, 0.0).unwrap().pdf, 0.0);
        assert!(gain_density(FadingSpec::rayleigh(), -1.0).is_err());
    }

    #[test]
    fn survival_is_complement() {
        let law = MaxGainLaw::new(FadingSpec::nakagami(1.5).unwrap(), 4).unwrap();
        for x in [0.0, 0.1, 1.0, 3.0, 10.0] {
            assert!(close(law.survival(x).unwrap() + law.cdf(x).unwrap(), 1.0, 1e-14));
        }
        // Far tail: 1 - cdf underflows to zero while the survival does not.
        assert!(law.survival(40.0).unwrap() > 0.0);
    }

    #[test]
    fn max_mean() {
        // E[max of 2 exponentials] = 1 + 1/2.
        let law = MaxGainLaw::new(FadingSpec::rayleigh(), 2).unwrap();
        assert!(close(law.mean().unwrap(), 1.5, 1e-9));
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = FadingSpec::nakagami(2.0).unwrap();
        assert_eq!(sample_gains(s, 100, 9).unwrap(), sample_gains(s, 100, 9).unwrap());
        assert_ne!(sample_gains(s, 100, 9).unwrap(), sample_gains(s, 100, 10).unwrap());
        assert!(sample_gains(s, 0, 1).is_err());
        let a: f64 = stream_rng(3, 0).random();
        let b: f64 = stream_rng(3, 1).random();
        assert_ne!(a, b);
    }
}
