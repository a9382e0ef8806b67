//! Seeded Monte Carlo estimates of policy expectations, capacity and outage,
//! and empirical checks of the ratio distributions.
//!
//! `Physical` draws K secondary gains and L cross gains per slot and serves
//! the best secondary receiver against the shared worst-case cross gain.
//! `IidRatio` gives each candidate its own cross draw and serves the
//! candidate with the largest ratio, which makes the K ratios independent.
//!
//! Samples are split over `streams` independent generators that run in
//! parallel and are merged in stream order, so results do not depend on the
//! thread schedule.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{stream_rng, GainSampler, SystemConfig};
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::ratio::{ratio_cdf, selected_ratio_law, MudParams, RatioParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    Physical,
    IidRatio,
}

impl SimMode {
    pub fn name(&self) -> &'static str {
        match self {
            SimMode::Physical => "physical",
            SimMode::IidRatio => "iid_ratio",
        }
    }
}

impl std::str::FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "physical" => Ok(SimMode::Physical),
            "iid_ratio" | "iidratio" | "iid" => Ok(SimMode::IidRatio),
            _ => Err(Error::Precondition(format!("unknown simulation mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimSpec {
    pub samples: u64,
    pub seed: u64,
    pub mode: SimMode,
    pub streams: u32,
}

impl SimSpec {
    pub fn new(samples: u64, seed: u64, mode: SimMode, streams: u32) -> Result<Self> {
        if samples == 0 || streams == 0 {
            return Err(Error::Precondition(format!(
                "samples ({samples}) and streams ({streams}) must be >= 1"
            )));
        }
        Ok(SimSpec {
            samples,
            seed,
            mode,
            streams,
        })
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.samples, self.seed, self.mode, self.streams).map(|_| ())
    }

    /// Sample count of stream `i`; the remainder goes to the first streams.
    fn stream_len(&self, i: u32) -> u64 {
        let s = self.streams as u64;
        self.samples / s + u64::from((i as u64) < self.samples % s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub mean: f64,
    pub std_error: f64,
    pub per_stream: Vec<f64>,
}

/// Monte Carlo counterparts of the analytic metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub e_p: SimResult,
    pub e_i: SimResult,
    pub capacity: SimResult,
    pub outage: SimResult,
}

/// Streaming mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

fn merge(parts: &[Welford]) -> SimResult {
    let mut total = Welford::default();
    for p in parts {
        total.merge(p);
    }
    SimResult {
        mean: total.mean,
        std_error: total.std_error(),
        per_stream: parts.iter().map(|p| p.mean).collect(),
    }
}

/// Draws `(g_s, g_sp)` of the served receiver for one slot.
#[derive(Debug, Clone, Copy)]
struct SlotSampler {
    secondary: GainSampler,
    cross: GainSampler,
    k: u32,
    l: u32,
    mode: SimMode,
}

impl SlotSampler {
    fn new(config: &SystemConfig, mode: SimMode) -> Result<Self> {
        Ok(SlotSampler {
            secondary: GainSampler::new(config.secondary())?,
            cross: GainSampler::new(config.cross())?,
            k: config.k(),
            l: config.l(),
            mode,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.mode {
            SimMode::Physical => {
                let g = self.secondary.sample_max(rng, self.k);
                let y = self.cross.sample_max(rng, self.l);
                (g, y)
            }
            SimMode::IidRatio => {
                let mut best = (0.0, 1.0);
                let mut best_z = f64::NEG_INFINITY;
                for _ in 0..self.k {
                    let g = self.secondary.sample(rng);
                    let y = self.cross.sample_max(rng, self.l);
                    let z = g / y;
                    if z > best_z {
                        best_z = z;
                        best = (g, y);
                    }
                }
                best
            }
        }
    }
}

/// Monte Carlo estimates of `E[P]`, `E[g_sp P]`, capacity and outage.
pub fn simulate_metrics(config: &SystemConfig, policy: &Policy, spec: &SimSpec) -> Result<SimMetrics> {
    spec.validate()?;
    let sampler = SlotSampler::new(config, spec.mode)?;
    let n = config.noise_var();
    let parts = (0..spec.streams)
        .into_par_iter()
        .map(|i| -> Result<[Welford; 4]> {
            let mut rng = stream_rng(spec.seed, i as u64);
            let mut acc = [Welford::default(); 4];
            for _ in 0..spec.stream_len(i) {
                let (g, y) = sampler.draw(&mut rng);
                let p = policy.power(g, y, n)?;
                acc[0].push(p);
                acc[1].push(y * p);
                acc[2].push((p * g / n).ln_1p() / std::f64::consts::LN_2);
                acc[3].push(if p == 0.0 { 1.0 } else { 0.0 });
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let column = |j: usize| merge(&parts.iter().map(|p| p[j]).collect::<Vec<_>>());
    Ok(SimMetrics {
        e_p: column(0),
        e_i: column(1),
        capacity: column(2),
        outage: column(3),
    })
}

/// Ratios `g_s / g_sp` of the served receiver, one per slot, in stream order.
pub fn sample_served_ratios(config: &SystemConfig, spec: &SimSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let sampler = SlotSampler::new(config, spec.mode)?;
    let parts: Vec<Vec<f64>> = (0..spec.streams)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i as u64);
            (0..spec.stream_len(i))
                .map(|_| {
                    let (g, y) = sampler.draw(&mut rng);
                    g / y
                })
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Distance between an empirical and an analytic distribution function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistValidation {
    /// Upper bound on the Kolmogorov-Smirnov distance.
    pub ks_distance: f64,
    /// Largest gap observed at the evaluated order statistics.
    pub max_abs_cdf_gap: f64,
    pub samples: usize,
}

/// Number of order statistics at which the analytic cdf is evaluated.
const KS_POINTS: usize = 4000;

/// Compares sorted samples with a cdf evaluated at every `stride`-th order
/// statistic. Between two evaluated points both functions are monotone, so
/// the distance is bounded from the end values alone.
pub fn ks_against<F>(samples: &mut [f64], cdf: F) -> Result<DistValidation>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let n = samples.len();
    if n == 0 {
        return Err(Error::Precondition("no samples".into()));
    }
    samples.sort_by(f64::total_cmp);
    let stride = n.div_ceil(KS_POINTS).max(1);
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if *idx.last().expect("non-empty") != n - 1 {
        idx.push(n - 1);
    }
    let values = idx.par_iter().map(|&i| cdf(samples[i])).collect::<Result<Vec<f64>>>()?;
    let nf = n as f64;
    let mut gap: f64 = 0.0;
    let mut bound: f64 = 0.0;
    for (j, (&i, &f)) in idx.iter().zip(&values).enumerate() {
        let at = ((i + 1) as f64 / nf - f).abs().max((f - i as f64 / nf).abs());
        gap = gap.max(at);
        bound = bound.max(at);
        if let (Some(&b), Some(&fb)) = (idx.get(j + 1), values.get(j + 1)) {
            if b > i + 1 {
                bound = bound.max(b as f64 / nf - f).max(fb - (i + 1) as f64 / nf);
            }
        }
    }
    Ok(DistValidation {
        ks_distance: bound,
        max_abs_cdf_gap: gap,
        samples: n,
    })
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn two_sample_ks(a: &mut [f64], b: &mut [f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("no samples".into()));
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Empirical best-of-K ratio against its analytic law: `F(z)^K` of `params`
/// for `IidRatio`, and the shared-cross-gain law for `Physical`.
pub fn validate_distribution(params: &RatioParams, mud: MudParams, spec: &SimSpec) -> Result<DistValidation> {
    let config = SystemConfig::new(mud.k(), params.l(), 1.0, params.secondary(), params.cross())?;
    let mut z = sample_served_ratios(&config, spec)?;
    match spec.mode {
        SimMode::IidRatio => {
            let k = mud.k() as i32;
            ks_against(&mut z, |x| Ok(ratio_cdf(params, x)?.powi(k)))
        }
        SimMode::Physical => {
            let law = selected_ratio_law(
                params.secondary(),
                params.cross(),
                mud.k(),
                params.l(),
                params.quadrature(),
            )?;
            ks_against(&mut z, |x| law.cdf(x))
        }
    }
}
