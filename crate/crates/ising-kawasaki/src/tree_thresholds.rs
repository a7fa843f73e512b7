//! Tree recursion on the Δ-regular tree and the thresholds derived from it.
//!
//! Fixed points of R ↦ λ((Re^β+1)/(R+e^β))^{Δ−1} are located as positive
//! roots of ĥ(r) = r^{d+1} − λ^{1/d}e^β r^d + e^β r − λ^{1/d} with d = Δ−1 and
//! R = r^d. ĥ'' has a single positive root, so ĥ' has at most two and ĥ is
//! monotone between consecutive critical points; each monotone piece holds
//! at most one root and is bracketed exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const R_MIN: f64 = 1e-9;
pub const R_MAX: f64 = 1e9;
pub const MARGINAL_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeFixedPoint {
    #[serde(rename = "R")]
    pub r: f64,
    pub stable: bool,
    pub marginal: bool,
    pub derivative: f64,
    /// 2 for a tangential (double) root.
    pub multiplicity: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub points: Vec<TreeFixedPoint>,
    pub tangency: bool,
}

impl FixedPointSet {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Root count of ĥ with multiplicity.
    pub fn count_with_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity as usize).sum()
    }

    pub fn largest(&self) -> &TreeFixedPoint {
        self.points.last().expect("at least one fixed point")
    }

    pub fn smallest(&self) -> &TreeFixedPoint {
        &self.points[0]
    }
}

fn check_delta(delta: usize) -> Result<()> {
    if delta < 3 {
        return Err(Error::invalid(format!("delta must be >= 3, got {delta}")));
    }
    Ok(())
}

fn check_params(delta: usize, beta: f64, lambda: f64) -> Result<()> {
    check_delta(delta)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta must be finite and >= 0"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be finite and > 0"));
    }
    Ok(())
}

pub fn beta_u(delta: usize) -> Result<f64> {
    check_delta(delta)?;
    Ok((delta as f64 / (delta as f64 - 2.0)).ln())
}

pub fn tree_map(delta: usize, beta: f64, lambda: f64, r: f64) -> f64 {
    let eb = beta.exp();
    lambda * ((r * eb + 1.0) / (r + eb)).powi(delta as i32 - 1)
}

/// h'(R) evaluated at a fixed point, where h(R) = R.
pub fn tree_map_derivative_at_fixed_point(delta: usize, beta: f64, r: f64) -> f64 {
    let eb = beta.exp();
    (delta as f64 - 1.0) * (eb * eb - 1.0) * r / ((eb * r + 1.0) * (r + eb))
}

/// h'(R) at any R.
pub fn tree_map_derivative(delta: usize, beta: f64, lambda: f64, r: f64) -> f64 {
    let eb = beta.exp();
    (delta as f64 - 1.0) * (eb * eb - 1.0) * tree_map(delta, beta, lambda, r)
        / ((eb * r + 1.0) * (r + eb))
}

struct Hhat {
    d: i32,
    a: f64,
    eb: f64,
    c0: f64,
}

impl Hhat {
    fn new(delta: usize, beta: f64, lambda: f64) -> Self {
        let d = delta as i32 - 1;
        let c0 = lambda.powf(1.0 / d as f64);
        let eb = beta.exp();
        Hhat { d, a: c0 * eb, eb, c0 }
    }

    /// ĥ(r) / (1+r)^{d+1}
    fn scaled(&self, r: f64) -> f64 {
        let s = 1.0 / (1.0 + r);
        let q = r * s;
        let d = self.d;
        q.powi(d + 1) - self.a * q.powi(d) * s + self.eb * q * s.powi(d) - self.c0 * s.powi(d + 1)
    }

    /// ĥ'(r) / (1+r)^d
    fn scaled_prime(&self, r: f64) -> f64 {
        let s = 1.0 / (1.0 + r);
        let q = r * s;
        let d = self.d;
        (d + 1) as f64 * q.powi(d) - self.a * d as f64 * q.powi(d - 1) * s + self.eb * s.powi(d)
    }

    fn value(&self, r: f64) -> f64 {
        let d = self.d;
        r.powi(d + 1) - self.a * r.powi(d) + self.eb * r - self.c0
    }

    fn prime(&self, r: f64) -> f64 {
        let d = self.d;
        (d + 1) as f64 * r.powi(d) - self.a * d as f64 * r.powi(d - 1) + self.eb
    }

    fn inflection(&self) -> f64 {
        self.a * (self.d - 1) as f64 / (self.d + 1) as f64
    }
}

/// Bisection in log r for a sign change of `f` on [lo, hi].
fn bisect_log(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let slo = flo.signum();
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 4.0 * f64::EPSILON {
            break;
        }
    }
    (lo * hi).sqrt()
}

fn sign_change(a: f64, b: f64) -> bool {
    a == 0.0 || b == 0.0 || a.signum() != b.signum()
}

pub fn tree_fixed_points(delta: usize, beta: f64, lambda: f64) -> Result<FixedPointSet> {
    check_params(delta, beta, lambda)?;
    let h = Hhat::new(delta, beta, lambda);
    let d = h.d as f64;

    let mut crit = Vec::new();
    let r0 = h.inflection().clamp(R_MIN, R_MAX);
    for (lo, hi) in [(R_MIN, r0), (r0, R_MAX)] {
        if hi > lo && sign_change(h.scaled_prime(lo), h.scaled_prime(hi)) {
            let c = bisect_log(|r| h.scaled_prime(r), lo, hi);
            if c > R_MIN && c < R_MAX {
                crit.push(c);
            }
        }
    }

    let mut breaks = vec![R_MIN];
    breaks.extend(crit.iter().copied());
    breaks.push(R_MAX);
    let mut roots: Vec<(f64, u8)> = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if sign_change(h.scaled(lo), h.scaled(hi)) {
            roots.push((bisect_log(|r| h.scaled(r), lo, hi), 1));
        }
    }
    let mut tangency = false;
    for &c in &crit {
        let scale = c.powi(h.d + 1) + h.a * c.powi(h.d) + h.eb * c + h.c0;
        if h.value(c).abs() <= 1e-12 * scale {
            tangency = true;
            roots.retain(|&(r, _)| (r / c - 1.0).abs() > 1e-6);
            roots.push((c, 2));
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    roots.dedup_by(|a, b| (a.0 / b.0 - 1.0).abs() < 1e-8);

    let points = roots
        .into_iter()
        .map(|(mut r, mult)| {
            if mult == 1 {
                // Newton polish, keeping only improving steps
                for _ in 0..3 {
                    let (f, fp) = (h.value(r), h.prime(r));
                    if fp == 0.0 {
                        break;
                    }
                    let next = r - f / fp;
                    if next > 0.0 && h.value(next).abs() < f.abs() {
                        r = next;
                    } else {
                        break;
                    }
                }
            }
            let big_r = r.powf(d);
            let derivative = tree_map_derivative_at_fixed_point(delta, beta, big_r);
            let marginal = (derivative - 1.0).abs() < MARGINAL_BAND || mult == 2;
            TreeFixedPoint {
                r: big_r,
                stable: derivative.abs() < 1.0 && !marginal,
                marginal,
                derivative,
                multiplicity: mult,
            }
        })
        .collect();
    Ok(FixedPointSet { points, tangency })
}

fn l_equation(delta: usize, beta: f64, lambda: f64, l: f64) -> f64 {
    0.5 * lambda.ln() + (delta as f64 - 1.0) * (l.tanh() * (beta / 2.0).tanh()).atanh() - l
}

/// All real solutions L of L = ½ ln λ + (Δ−1) artanh(tanh L · tanh(β/2)),
/// ascending. They are L = ½ ln R over the tree fixed points R.
pub fn l_solutions(delta: usize, beta: f64, lambda: f64) -> Result<Vec<f64>> {
    let fps = tree_fixed_points(delta, beta, lambda)?;
    let t = (beta / 2.0).tanh();
    let d = delta as f64 - 1.0;
    Ok(fps
        .points
        .iter()
        .map(|p| {
            let mut l = 0.5 * p.r.ln();
            if p.multiplicity == 1 {
                for _ in 0..3 {
                    let f = l_equation(delta, beta, lambda, l);
                    let th = l.tanh();
                    let fp = d * t * (1.0 - th * th) / (1.0 - th * th * t * t) - 1.0;
                    if fp == 0.0 {
                        break;
                    }
                    let next = l - f / fp;
                    if l_equation(delta, beta, lambda, next).abs() < f.abs() {
                        l = next;
                    } else {
                        break;
                    }
                }
            }
            l
        })
        .collect())
}

pub fn l_star(delta: usize, beta: f64, lambda: f64) -> Result<f64> {
    Ok(*l_solutions(delta, beta, lambda)?.last().expect("nonempty"))
}

pub fn eta_of_l(beta: f64, l: f64) -> f64 {
    (l + (l.tanh() * (beta / 2.0).tanh()).atanh()).tanh()
}

pub fn eta_of_fixed_point(beta: f64, r: f64) -> f64 {
    eta_of_l(beta, 0.5 * r.ln())
}

pub fn eta_plus(delta: usize, beta: f64, lambda: f64) -> Result<f64> {
    Ok(eta_of_l(beta, l_star(delta, beta, lambda)?))
}

pub fn eta_minus(delta: usize, beta: f64, lambda: f64) -> Result<f64> {
    Ok(eta_of_l(beta, l_solutions(delta, beta, lambda)?[0]))
}

fn nonunique(delta: usize, beta: f64, lambda: f64) -> Result<bool> {
    Ok(tree_fixed_points(delta, beta, lambda)?.count() >= 2)
}

/// λ_u by bisection on the fixed-point count, to `tol` in λ.
pub fn lambda_u_bisection(delta: usize, beta: f64, tol: f64) -> Result<f64> {
    let bu = beta_u(delta)?;
    if beta <= bu {
        return Err(Error::NoNonuniqueness { beta, beta_u: bu });
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while nonunique(delta, beta, hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Degenerate("no uniqueness found for large lambda".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if nonunique(delta, beta, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// λ_u from the tangency system h(x) = x, h'(x) = 1. The second condition is
/// the quadratic e^β x² + (e^{2β}+1 − d(e^{2β}−1)) x + e^β = 0, after which
/// λ = x((x+e^β)/(xe^β+1))^d.
pub fn lambda_u_tangency(delta: usize, beta: f64) -> Result<f64> {
    let bu = beta_u(delta)?;
    if beta <= bu {
        return Err(Error::NoNonuniqueness { beta, beta_u: bu });
    }
    let d = delta as f64 - 1.0;
    let eb = beta.exp();
    let b = eb * eb + 1.0 - d * (eb * eb - 1.0);
    let disc = (b * b - 4.0 * eb * eb).max(0.0).sqrt();
    let lam = |x: f64| x * ((x + eb) / (x * eb + 1.0)).powf(d);
    let x1 = (-b + disc) / (2.0 * eb);
    let x0 = (-b - disc) / (2.0 * eb);
    Ok(lam(x0).max(lam(x1)))
}

/// λ_u: bisection on the fixed-point count to 1e−10, refined by the
/// tangency system when the two agree.
pub fn lambda_u(delta: usize, beta: f64) -> Result<f64> {
    let coarse = lambda_u_bisection(delta, beta, 1e-10)?;
    let fine = lambda_u_tangency(delta, beta)?;
    Ok(if (fine - coarse).abs() < 1e-8 * coarse.max(1.0) {
        fine
    } else {
        coarse
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaABar {
    pub value: f64,
    /// ((Δ−2)e^{2β} − Δ) e^{β(Δ−2)}, absent when non-positive.
    pub first_branch: Option<f64>,
    /// e^{βΔ}
    pub second_branch: f64,
}

pub fn lambda_a_bar(delta: usize, beta: f64) -> Result<LambdaABar> {
    check_delta(delta)?;
    let dl = delta as f64;
    let first = ((dl - 2.0) * (2.0 * beta).exp() - dl) / (beta * (2.0 - dl)).exp();
    let second = (beta * dl).exp();
    let first_branch = (first > 0.0).then_some(first);
    Ok(LambdaABar {
        value: first_branch.map_or(second, |f| f.min(second)),
        first_branch,
        second_branch: second,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub delta: usize,
    pub beta: f64,
    pub beta_u: f64,
    pub lambda_u: Option<f64>,
    pub lambda_a_bar: f64,
    pub lambda_a_bar_first_branch: Option<f64>,
    pub eta_c: f64,
    pub eta_u: Option<f64>,
    pub eta_a_bar: f64,
    pub lambda: Option<f64>,
    pub eta_plus: Option<f64>,
    pub eta_minus: Option<f64>,
    #[serde(rename = "L_star")]
    pub l_star: Option<f64>,
    pub fixed_points: Option<FixedPointSet>,
}

pub fn thresholds(delta: usize, beta: f64, lambda: Option<f64>) -> Result<ThresholdSet> {
    check_params(delta, beta, lambda.unwrap_or(1.0))?;
    let bu = beta_u(delta)?;
    let lu = if beta > bu { Some(lambda_u(delta, beta)?) } else { None };
    let la = lambda_a_bar(delta, beta)?;
    let at = |l: Option<f64>| -> Result<Option<f64>> {
        l.map(|l| eta_plus(delta, beta, l)).transpose()
    };
    Ok(ThresholdSet {
        delta,
        beta,
        beta_u: bu,
        lambda_u: lu,
        lambda_a_bar: la.value,
        lambda_a_bar_first_branch: la.first_branch,
        eta_c: eta_plus(delta, beta, 1.0)?,
        eta_u: at(lu)?,
        eta_a_bar: eta_plus(delta, beta, la.value)?,
        lambda,
        eta_plus: at(lambda)?,
        eta_minus: lambda.map(|l| eta_minus(delta, beta, l)).transpose()?,
        l_star: lambda.map(|l| l_star(delta, beta, l)).transpose()?,
        fixed_points: lambda.map(|l| tree_fixed_points(delta, beta, l)).transpose()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub beta: f64,
    pub lambda_u: Option<f64>,
    pub lambda_a_bar: f64,
    pub eta_c: f64,
    pub eta_u: Option<f64>,
    pub eta_a_bar: f64,
}

/// Threshold curves against β.
pub fn phase_diagram(delta: usize, betas: &[f64]) -> Result<Vec<PhaseRow>> {
    betas
        .iter()
        .map(|&beta| {
            let t = thresholds(delta, beta, None)?;
            Ok(PhaseRow {
                beta,
                lambda_u: t.lambda_u,
                lambda_a_bar: t.lambda_a_bar,
                eta_c: t.eta_c,
                eta_u: t.eta_u,
                eta_a_bar: t.eta_a_bar,
            })
        })
        .collect()
}
