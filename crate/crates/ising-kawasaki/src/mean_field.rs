//! Annealed first-moment landscape on random Δ-regular graphs.
//!
//! With a = (1+η)/2, c = (1−η)/2 and edge fractions b₊ = a − b₀, b₋ = c − b₀,
//!
//!   g(η, b₀) = −(Δ−1)H(a) − (Δ/2)(b₊ln b₊ + 2b₀ln b₀ + b₋ln b₋)
//!              + (βΔ/2)(b₊ + b₋) + a ln λ
//!
//! and f(η) = max_{b₀} g. Stationarity reads b₀²/(b₊b₋) = e^{−2β}, a quadratic
//! in b₀ with one root in (0, min(a, c)).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{self, log_sum_exp};

pub const ETA_CLIP: f64 = 1e-6;
pub const MARGINAL_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeStatistics {
    pub b_plus: f64,
    pub b_zero: f64,
    pub b_minus: f64,
    /// Set when η = ±1 and the maximizer sits on the boundary.
    pub boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    LocalMax,
    LocalMin,
    Inflection,
    InteriorCriticalNone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub eta: f64,
    #[serde(rename = "B_star")]
    pub b_star: EdgeStatistics,
    pub f_value: f64,
    pub f_second: f64,
    pub classification: Classification,
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn binary_entropy(x: f64) -> f64 {
    -xlnx(x) - xlnx(1.0 - x)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta must be in [-1, 1], got {eta}")));
    }
    Ok(())
}

/// Closed-form b₀ solving b₀² = q(a−b₀)(c−b₀), q = e^{−2β}.
fn b_zero_closed(a: f64, c: f64, beta: f64) -> f64 {
    let q = (-2.0 * beta).exp();
    2.0 * q * a * c / (q + (q * q + 4.0 * (1.0 - q) * q * a * c).sqrt())
}

fn stationarity(a: f64, c: f64, b0: f64, beta: f64) -> f64 {
    2.0 * b0.ln() - (a - b0).ln() - (c - b0).ln() + 2.0 * beta
}

pub fn maximize_b(eta: f64, delta: usize, beta: f64, _lambda: f64) -> Result<EdgeStatistics> {
    check_eta(eta)?;
    let _ = delta;
    let a = (1.0 + eta) / 2.0;
    let c = (1.0 - eta) / 2.0;
    if a <= 0.0 || c <= 0.0 {
        return Ok(EdgeStatistics {
            b_plus: a,
            b_zero: 0.0,
            b_minus: c,
            boundary: true,
        });
    }
    let mut b0 = b_zero_closed(a, c, beta);
    for _ in 0..3 {
        let s = stationarity(a, c, b0, beta);
        let ds = 2.0 / b0 + 1.0 / (a - b0) + 1.0 / (c - b0);
        let next = b0 - s / ds;
        if next > 0.0 && next < a.min(c) && stationarity(a, c, next, beta).abs() < s.abs() {
            b0 = next;
        } else {
            break;
        }
    }
    Ok(EdgeStatistics {
        b_plus: a - b0,
        b_zero: b0,
        b_minus: c - b0,
        boundary: false,
    })
}

pub fn g_value(eta: f64, b0: f64, delta: usize, beta: f64, lambda: f64) -> f64 {
    let dl = delta as f64;
    let a = (1.0 + eta) / 2.0;
    let c = (1.0 - eta) / 2.0;
    let (bp, bm) = (a - b0, c - b0);
    -(dl - 1.0) * binary_entropy(a) - dl / 2.0 * (xlnx(bp) + 2.0 * xlnx(b0) + xlnx(bm))
        + beta * dl / 2.0 * (bp + bm)
        + a * lambda.ln()
}

/// Golden-section maximizer of g over b₀; an oracle for [`maximize_b`].
pub fn maximize_b_golden(eta: f64, delta: usize, beta: f64) -> f64 {
    let a = (1.0 + eta) / 2.0;
    let c = (1.0 - eta) / 2.0;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, a.min(c));
    let g = |b: f64| g_value(eta, b, delta, beta, 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..200 {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + phi * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - phi * (hi - lo);
            g1 = g(x1);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn f_eta(eta: f64, delta: usize, beta: f64, lambda: f64) -> Result<f64> {
    let b = maximize_b(eta, delta, beta, lambda)?;
    Ok(g_value(eta, b.b_zero, delta, beta, lambda))
}

/// f′(η) by the envelope theorem:
/// (Δ−1)/2 · ln(a/c) − (Δ/4) ln(b₊/b₋) + ½ ln λ.
pub fn f_prime(eta: f64, delta: usize, beta: f64, lambda: f64) -> Result<f64> {
    let b = maximize_b(eta, delta, beta, lambda)?;
    if b.boundary {
        return Err(Error::Degenerate("f' is singular at eta = +-1".into()));
    }
    let dl = delta as f64;
    let a = (1.0 + eta) / 2.0;
    let c = (1.0 - eta) / 2.0;
    Ok((dl - 1.0) / 2.0 * (a / c).ln() - dl / 4.0 * (b.b_plus / b.b_minus).ln() + 0.5 * lambda.ln())
}

fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn step_for(eta: f64) -> f64 {
    (1e-3f64).min((1.0 - eta.abs()) / 4.0)
}

/// f′ by central differences with one Richardson step.
pub fn f_prime_numeric(eta: f64, delta: usize, beta: f64, lambda: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(richardson(
        |x| f_eta(x, delta, beta, lambda).unwrap_or(f64::NAN),
        eta,
        step_for(eta),
    ))
}

/// f″ by central differences (with Richardson) of the envelope f′.
pub fn f_second(eta: f64, delta: usize, beta: f64, lambda: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(richardson(
        |x| f_prime(x, delta, beta, lambda).unwrap_or(f64::NAN),
        eta,
        step_for(eta),
    ))
}

fn classify(f2: f64) -> Classification {
    if f2.abs() < MARGINAL_BAND {
        Classification::Inflection
    } else if f2 < 0.0 {
        Classification::LocalMax
    } else {
        Classification::LocalMin
    }
}

pub fn landscape_point(eta: f64, delta: usize, beta: f64, lambda: f64) -> Result<LandscapePoint> {
    let b = maximize_b(eta, delta, beta, lambda)?;
    let fp = f_prime(eta, delta, beta, lambda)?;
    let f2 = f_second(eta, delta, beta, lambda)?;
    Ok(LandscapePoint {
        eta,
        b_star: b,
        f_value: g_value(eta, b.b_zero, delta, beta, lambda),
        f_second: f2,
        classification: if fp.abs() < 1e-6 {
            classify(f2)
        } else {
            Classification::InteriorCriticalNone
        },
    })
}

/// Interior critical points of f, by a sign-change scan of f′ at spacing
/// `resolution` followed by bisection.
pub fn critical_points(delta: usize, beta: f64, lambda: f64, resolution: f64) -> Result<Vec<LandscapePoint>> {
    if !(resolution >= 1e-4 && resolution < 1.0) {
        return Err(Error::invalid("resolution must be in [1e-4, 1)"));
    }
    crate::ising_measures::IsingParams::new(beta, lambda)?;
    let (lo, hi) = (-1.0 + ETA_CLIP, 1.0 - ETA_CLIP);
    let steps = ((hi - lo) / resolution).ceil() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| (lo + i as f64 * (hi - lo) / steps as f64).min(hi))
        .collect();
    let fp = |x: f64| f_prime(x, delta, beta, lambda).unwrap_or(f64::NAN);
    let vals: Vec<f64> = grid.iter().map(|&x| fp(x)).collect();
    let mut out = Vec::new();
    for i in 0..steps {
        let (mut a, mut b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 && i > 0 {
            continue; // recorded as the right end of the previous cell
        }
        if fa.signum() == fb.signum() && fa != 0.0 && fb != 0.0 {
            continue;
        }
        let sa = fa.signum();
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = fp(m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        let eta = 0.5 * (a + b);
        let mut pt = landscape_point(eta, delta, beta, lambda)?;
        pt.classification = classify(pt.f_second);
        out.push(pt);
    }
    Ok(out)
}

/// (η, f(η)) on `points` evenly spaced η in the clipped interval.
pub fn landscape_curve(delta: usize, beta: f64, lambda: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    crate::ising_measures::IsingParams::new(beta, lambda)?;
    let (lo, hi) = (-1.0 + ETA_CLIP, 1.0 - ETA_CLIP);
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let eta = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            Ok((eta, f_eta(eta, delta, beta, lambda)?))
        })
        .collect()
}

/// log E Z_{G,k}(β,λ) over the configuration model on n vertices.
///
/// With h₊ = kΔ plus half-edges and h₋ = (n−k)Δ minus half-edges, a matching
/// with x bichromatic edges has count
/// C(h₊,x) C(h₋,x) x! (h₊−x−1)!! (h₋−x−1)!! out of (nΔ−1)!! and
/// (nΔ − 2x)/2 monochromatic edges.
pub fn annealed_log_ez_per_k(n: usize, k: usize, delta: usize, beta: f64, lambda: f64) -> Result<f64> {
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    if (n * delta) % 2 != 0 {
        return Err(Error::invalid("n * delta must be even"));
    }
    let total = (n * delta) as u64;
    let hp = (k * delta) as u64;
    let hm = total - hp;
    let denom = util::ln_double_factorial_odd(total);
    let mut terms = Vec::new();
    let mut x = hp % 2;
    while x <= hp.min(hm) {
        let t = util::ln_binom(hp, x)
            + util::ln_binom(hm, x)
            + util::ln_factorial(x)
            + util::ln_double_factorial_odd(hp - x)
            + util::ln_double_factorial_odd(hm - x)
            - denom
            + beta * (total - 2 * x) as f64 / 2.0;
        terms.push(t);
        x += 2;
    }
    Ok(util::ln_binom(n as u64, k as u64) + k as f64 * lambda.ln() + log_sum_exp(&terms))
}
