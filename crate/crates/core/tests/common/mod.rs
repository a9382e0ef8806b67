//! Independent Rayleigh-fading oracle for the dual solvers.
//!
//! With unit-mean exponential gains the best-of-K survival function expands
//! as `S(x) = sum_j c_j e^(-jx)`, `c_j = (-1)^(j+1) C(K, j)`, so every
//! conditional expectation has a closed form in the exponential integral.
//! The outer integral over the worst-case cross gain uses the trapezoid rule
//! in `ln y`.

#![allow(dead_code)]

/// Exponential integral `E1(x)`, `x > 0`.
pub fn e1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 1.0 {
        const EULER: f64 = 0.577_215_664_901_532_9;
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        -EULER - x.ln() - sum
    } else {
        // Modified Lentz on the continued fraction of e^x E1(x).
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Trapezoid nodes `(y, weight)` in `s = ln y` over `[lo, hi]`, weights
/// carrying the max-of-L exponential density.
fn trapezoid_nodes(l: u32, lo: f64, hi: f64, count: usize) -> Vec<(f64, f64)> {
    let h = (hi - lo) / count as f64;
    (0..=count)
        .map(|i| {
            let y = (lo + h * i as f64).exp();
            let w = if i == 0 || i == count { 0.5 * h } else { h };
            (y, w * y * max_exp_density(l, y))
        })
        .collect()
}

fn max_exp_density(l: u32, y: f64) -> f64 {
    l as f64 * (-(-y).exp_m1()).powi(l as i32 - 1) * (-y).exp()
}

/// Tanh-sinh nodes in `s = ln y` over `[lo, hi]`; unlike the trapezoid rule
/// they stay exponentially accurate when the integrand is not smooth at the
/// ends.
fn tanh_sinh_nodes(l: u32, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    let h = 1.0 / 64.0;
    (-256..=256)
        .map(|k| {
            let t = h * k as f64;
            let u = std::f64::consts::FRAC_PI_2 * t.sinh();
            let x = u.tanh();
            let w = h * std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
            let y = (mid + half * x).exp();
            (y, half * w * y * max_exp_density(l, y))
        })
        .collect()
}

fn choose(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub struct RayleighOracle {
    coef: Vec<f64>,
    l: u32,
    n: f64,
    nodes: Vec<(f64, f64)>,
}

impl RayleighOracle {
    pub fn new(k: u32, l: u32, noise_var: f64) -> Self {
        let coef = (1..=k)
            .map(|j| if j % 2 == 1 { choose(k, j) } else { -choose(k, j) })
            .collect();
        let nodes = trapezoid_nodes(l, -30.0, 4.0, 300);
        RayleighOracle {
            coef,
            l,
            n: noise_var,
            nodes,
        }
    }

    /// `int_a^inf S(x) / x^2 dx`.
    pub fn tail_power(&self, a: f64) -> f64 {
        self.coef
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let j = (j + 1) as f64;
                c * ((-j * a).exp() / a - j * e1(j * a))
            })
            .sum()
    }

    /// `E[P]` and `E[g_sp P]` of the interference-aware policy.
    pub fn aip(&self, lambda: f64, mu: f64) -> (f64, f64) {
        let (mut p, mut i) = (0.0, 0.0);
        for &(y, w) in &self.nodes {
            let t = self.n * (mu + lambda * y);
            if t == 0.0 {
                return (f64::INFINITY, f64::INFINITY);
            }
            let g = self.n * self.tail_power(t);
            p += w * g;
            i += w * y * g;
        }
        (p, i)
    }

    /// `E[P]` and `E[g_sp P]` of the peak-capped policy, `mu > 0`.
    pub fn pip(&self, mu: f64, i_pk: f64) -> (f64, f64) {
        // The cap starts to bind at y = mu i_pk; split the rule there.
        let kink = (mu * i_pk).ln().clamp(-30.0, 4.0);
        let mut nodes = tanh_sinh_nodes(self.l, -30.0, kink);
        nodes.extend(tanh_sinh_nodes(self.l, kink, 4.0));
        let (mut p, mut i) = (0.0, 0.0);
        for &(y, w) in &nodes {
            let cap = i_pk / y;
            let t = self.n * mu;
            let mut g = self.tail_power(t);
            if mu * cap < 1.0 {
                g -= self.tail_power(self.n / (1.0 / mu - cap));
            }
            g *= self.n;
            p += w * g;
            i += w * y * g;
        }
        (p, i)
    }

    pub fn l(&self) -> u32 {
        self.l
    }
}

/// Cells of a `(lambda, mu)` grid whose corners bracket the optimality
/// conditions: the power residual changes sign, and either the interference
/// residual changes sign or the cell touches `lambda = 0` with a feasible
/// interference residual there.
pub fn kkt_cells(
    oracle: &RayleighOracle,
    p_av: f64,
    i_av: f64,
    lambda_max: f64,
    mu_max: f64,
    cells: usize,
) -> Vec<(f64, f64, f64, f64)> {
    let hl = lambda_max / cells as f64;
    let hm = mu_max / cells as f64;
    let r: Vec<Vec<(f64, f64)>> = (0..=cells)
        .map(|i| {
            (0..=cells)
                .map(|j| {
                    let (p, q) = oracle.aip(hl * i as f64, hm * j as f64);
                    (p - p_av, q - i_av)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..cells {
        for j in 0..cells {
            let corners = [r[i][j], r[i + 1][j], r[i][j + 1], r[i + 1][j + 1]];
            let spans = |f: fn(&(f64, f64)) -> f64| {
                let lo = corners.iter().map(f).fold(f64::INFINITY, f64::min);
                let hi = corners.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            let power = spans(|c| c.0);
            let interference = spans(|c| c.1) || (i == 0 && (r[0][j].1 <= 0.0 || r[0][j + 1].1 <= 0.0));
            if power && interference {
                out.push((hl * i as f64, hl * (i + 1) as f64, hm * j as f64, hm * (j + 1) as f64));
            }
        }
    }
    out
}

/// Distance from `(x, y)` to the nearest cell.
pub fn distance_to_cells(cells: &[(f64, f64, f64, f64)], x: f64, y: f64) -> f64 {
    cells
        .iter()
        .map(|&(x0, x1, y0, y1)| {
            let dx = (x0 - x).max(x - x1).max(0.0);
            let dy = (y0 - y).max(y - y1).max(0.0);
            dx.hypot(dy)
        })
        .fold(f64::INFINITY, f64::min)
}
