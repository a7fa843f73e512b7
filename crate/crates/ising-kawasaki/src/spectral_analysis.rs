//! Spectral gaps, mixing times, influence matrices, local walks and the
//! Edgeworth expansion of the plus count.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_transition_matrix, ChainKernel, TransitionMatrix};
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::ising_measures::{
    cumulants_of_size, enumerate_masks, exact_partition_table, monochromatic_edges, size_distribution,
    IsingParams, Pinning, DEFAULT_ENUMERATION_CAP,
};
use crate::util::{self, log_sum_exp};

/// Detailed-balance tolerance for accepting a kernel as reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-10;
/// Largest state space for exact matrix-power mixing times.
pub const EXACT_MIXING_CAP: usize = 4000;

fn symmetrized(p: &TransitionMatrix) -> Result<DMatrix<f64>> {
    let residual = p.detailed_balance_residual();
    if residual > REVERSIBILITY_TOL {
        return Err(Error::NotReversible(residual));
    }
    let n = p.len();
    let sq: Vec<f64> = p.pi.iter().map(|x| x.sqrt()).collect();
    let mut a = DMatrix::zeros(n, n);
    for (i, row) in p.rows.iter().enumerate() {
        for &(j, pij) in row {
            a[(i, j)] += sq[i] / sq[j] * pij;
        }
    }
    Ok((&a + a.transpose()) * 0.5)
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Eigenvalues of a reversible kernel, largest first.
pub fn spectrum(p: &TransitionMatrix) -> Result<Vec<f64>> {
    let a = symmetrized(p)?;
    Ok(sorted_desc(SymmetricEigen::new(a).eigenvalues.iter().copied().collect()))
}

/// 1 − λ₂ of a reversible kernel.
pub fn spectral_gap(p: &TransitionMatrix) -> Result<f64> {
    let ev = spectrum(p)?;
    Ok(match ev.get(1) {
        Some(l2) => 1.0 - l2,
        None => 1.0,
    })
}

/// E(f, f) = ½ Σ π(x) P(x,y) (f(x) − f(y))²
pub fn dirichlet_form(p: &TransitionMatrix, f: &[f64]) -> f64 {
    let mut e = 0.0;
    for (i, row) in p.rows.iter().enumerate() {
        for &(j, pij) in row {
            let d = f[i] - f[j];
            e += p.pi[i] * pij * d * d;
        }
    }
    0.5 * e
}

pub fn variance(pi: &[f64], f: &[f64]) -> f64 {
    let mean: f64 = pi.iter().zip(f).map(|(p, x)| p * x).sum();
    pi.iter().zip(f).map(|(p, x)| p * (x - mean) * (x - mean)).sum()
}

/// E(f, f) / Var(f), or None for constant f.
pub fn dirichlet_quotient(p: &TransitionMatrix, f: &[f64]) -> Option<f64> {
    let v = variance(&p.pi, f);
    let scale = f.iter().fold(0.0f64, |m, x| m.max(x * x));
    (v > 1e-24 * scale && v > 0.0).then(|| dirichlet_form(p, f) / v)
}

/// gap⁻¹ · ln(4 / min π)
pub fn mixing_time_upper(p: &TransitionMatrix) -> Result<f64> {
    let gap = spectral_gap(p)?;
    if gap <= 1e-14 {
        return Err(Error::Degenerate("zero spectral gap".into()));
    }
    let min_pi = p.pi.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((4.0 / min_pi).ln() / gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    /// First t with worst-start TV ≤ 1/4, if reached before the horizon.
    pub tau: Option<usize>,
    pub lazy: bool,
    pub horizon: usize,
}

/// Exact τ_mix by evolving every row of P (or (I+P)/2).
pub fn exact_mixing_time(p: &TransitionMatrix, lazy: bool, horizon: usize) -> Result<MixingReport> {
    if p.len() > EXACT_MIXING_CAP {
        return Err(Error::TooLarge {
            what: "states for exact mixing",
            size: p.len(),
            cap: EXACT_MIXING_CAP,
        });
    }
    let kernel = if lazy { p.lazy() } else { p.clone() };
    let n = p.len();
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    for t in 1..=horizon {
        rows = rows.iter().map(|r| kernel.apply_left(r)).collect();
        let worst = rows
            .iter()
            .map(|r| 0.5 * r.iter().zip(&p.pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if worst <= 0.25 {
            return Ok(MixingReport {
                tau: Some(t),
                lazy,
                horizon,
            });
        }
    }
    Ok(MixingReport {
        tau: None,
        lazy,
        horizon,
    })
}

/// Best α₁, α₂ with α₁·P₁(x,y) ≤ P₂(x,y) ≤ α₂·P₁(x,y) off the diagonal.
/// α₂ is infinite if P₂ has a move P₁ lacks, α₁ zero in the converse case.
pub fn comparison_constants(p1: &TransitionMatrix, p2: &TransitionMatrix) -> Result<(f64, f64)> {
    if p1.states != p2.states {
        return Err(Error::invalid("kernels live on different state spaces"));
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..p1.len() {
        let mut cols: Vec<usize> = p1.rows[i].iter().chain(&p2.rows[i]).map(|&(j, _)| j).collect();
        cols.sort_unstable();
        cols.dedup();
        for j in cols.into_iter().filter(|&j| j != i) {
            let (a, b) = (p1.entry(i, j), p2.entry(i, j));
            if a > 0.0 {
                lo = lo.min(b / a);
                hi = hi.max(b / a);
            } else if b > 0.0 {
                hi = f64::INFINITY;
            }
        }
    }
    Ok((if lo.is_finite() { lo } else { 0.0 }, hi))
}

/// Explicit pmf over plus-set bitmasks.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub n: usize,
    pub states: Vec<u64>,
    pub probs: Vec<f64>,
}

impl ExactDistribution {
    fn from_log_weights(n: usize, states: Vec<u64>, logw: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Degenerate("empty support".into()));
        }
        let lz = log_sum_exp(&logw);
        let probs = logw.iter().map(|w| (w - lz).exp()).collect();
        Ok(ExactDistribution { n, states, probs })
    }

    fn log_weight(g: &Graph, beta: f64, log_lambda: f64, mask: u64) -> f64 {
        let spins: Vec<i8> = (0..g.n()).map(|v| if mask >> v & 1 == 1 { 1 } else { -1 }).collect();
        beta * monochromatic_edges(g, &spins).expect("sized") as f64 + mask.count_ones() as f64 * log_lambda
    }

    pub fn grand_canonical(g: &Graph, params: IsingParams, pinning: &Pinning) -> Result<Self> {
        let states = enumerate_masks(g, pinning, None, 1 << DEFAULT_ENUMERATION_CAP)?;
        let ll = params.lambda.ln();
        let logw = states.iter().map(|&s| Self::log_weight(g, params.beta, ll, s)).collect();
        Self::from_log_weights(g.n(), states, logw)
    }

    pub fn fixed_magnetization(g: &Graph, beta: f64, k: usize, pinning: &Pinning) -> Result<Self> {
        let states = enumerate_masks(g, pinning, Some(k), 1 << DEFAULT_ENUMERATION_CAP)?;
        let logw = states.iter().map(|&s| Self::log_weight(g, beta, 0.0, s)).collect();
        Self::from_log_weights(g.n(), states, logw)
    }

    /// P(v is plus)
    pub fn marginal(&self, v: usize) -> f64 {
        self.states
            .iter()
            .zip(&self.probs)
            .filter(|(s, _)| *s >> v & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    /// Conditioned on every vertex of `mask` being plus.
    pub fn condition_plus(&self, mask: u64) -> Option<ExactDistribution> {
        let (states, probs): (Vec<u64>, Vec<f64>) = self
            .states
            .iter()
            .zip(&self.probs)
            .filter(|(s, _)| *s & mask == mask)
            .map(|(&s, &p)| (s, p))
            .unzip();
        let z: f64 = probs.iter().sum();
        (z > 0.0).then(|| ExactDistribution {
            n: self.n,
            states,
            probs: probs.into_iter().map(|p| p / z).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceMatrix {
    pub vertices: Vec<usize>,
    /// m[i][j] = π(v_j | v_i) − π(v_j)
    pub m: Vec<Vec<f64>>,
    /// Largest real part among the eigenvalues.
    pub largest_eigenvalue: f64,
    /// Largest modulus among the eigenvalues.
    pub spectral_radius: f64,
    pub linf_norm: f64,
    /// Set when some eigenvalue has a non-negligible imaginary part.
    pub complex_eigenvalues: bool,
}

/// Influence matrix over `ground` (all vertices when None).
pub fn influence_matrix(dist: &ExactDistribution, ground: Option<&[usize]>) -> InfluenceMatrix {
    let vertices: Vec<usize> = ground.map_or_else(|| (0..dist.n).collect(), <[usize]>::to_vec);
    let marg: Vec<f64> = vertices.iter().map(|&v| dist.marginal(v)).collect();
    let size = vertices.len();
    let mut m = vec![vec![0.0; size]; size];
    for (i, &u) in vertices.iter().enumerate() {
        if marg[i] <= 0.0 {
            continue;
        }
        for (j, &v) in vertices.iter().enumerate() {
            let both: f64 = dist
                .states
                .iter()
                .zip(&dist.probs)
                .filter(|(s, _)| *s >> u & 1 == 1 && *s >> v & 1 == 1)
                .map(|(_, p)| p)
                .sum();
            m[i][j] = both / marg[i] - marg[j];
        }
    }
    let linf_norm = m
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let (largest_eigenvalue, spectral_radius, complex_eigenvalues) = if size == 0 {
        (0.0, 0.0, false)
    } else {
        let dm = DMatrix::from_fn(size, size, |i, j| m[i][j]);
        let ev = dm.schur().complex_eigenvalues();
        let largest = ev.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let radius = ev.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let complex = ev.iter().any(|c| c.im.abs() > 1e-9);
        (largest, radius, complex)
    };
    InfluenceMatrix {
        vertices,
        m,
        largest_eigenvalue,
        spectral_radius,
        linf_norm,
        complex_eigenvalues,
    }
}

/// Second-largest eigenvalue of a kernel reversible w.r.t. `weights`.
fn second_eigenvalue(q: &DMatrix<f64>, weights: &[f64]) -> f64 {
    let n = q.nrows();
    let sq: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let a = DMatrix::from_fn(n, n, |i, j| sq[i] / sq[j] * q[(i, j)]);
    let sym = (&a + a.transpose()) * 0.5;
    let ev = sorted_desc(SymmetricEigen::new(sym).eigenvalues.iter().copied().collect());
    ev.get(1).copied().unwrap_or(f64::NEG_INFINITY)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalWalk {
    pub pinned: Vec<usize>,
    pub ground: Vec<usize>,
    pub q: DMatrix<f64>,
    pub second_eigenvalue: f64,
}

/// Q^U(u,v) = π^U(v|u)/(k−|U|−1) on V∖U for a distribution over Ω_k.
pub fn local_walk(dist: &ExactDistribution, k: usize, u: &[usize]) -> Result<LocalWalk> {
    if u.len() + 2 > k {
        return Err(Error::invalid(format!("need |U| <= k-2, got |U| = {}, k = {k}", u.len())));
    }
    let umask = util::mask_of(u);
    let cond = dist
        .condition_plus(umask)
        .ok_or_else(|| Error::Degenerate("pinned set has zero mass".into()))?;
    let ground: Vec<usize> = (0..dist.n)
        .filter(|v| umask >> v & 1 == 0 && cond.marginal(*v) > 0.0)
        .collect();
    let marg: Vec<f64> = ground.iter().map(|&v| cond.marginal(v)).collect();
    let denom = (k - u.len() - 1) as f64;
    let size = ground.len();
    let mut q = DMatrix::zeros(size, size);
    for i in 0..size {
        for j in 0..size {
            if i == j {
                continue;
            }
            let (a, b) = (ground[i], ground[j]);
            let both: f64 = cond
                .states
                .iter()
                .zip(&cond.probs)
                .filter(|(s, _)| *s >> a & 1 == 1 && *s >> b & 1 == 1)
                .map(|(_, p)| p)
                .sum();
            q[(i, j)] = both / marg[i] / denom;
        }
    }
    let second = second_eigenvalue(&q, &marg);
    Ok(LocalWalk {
        pinned: u.to_vec(),
        ground,
        q,
        second_eigenvalue: second,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalWalkFamily {
    pub k: usize,
    /// ζ_m = max over |U| = m of the local walk's second eigenvalue.
    pub zetas: Vec<f64>,
    /// Γ_m for m = 0..k−1
    pub gammas: Vec<f64>,
    /// max over U of ζ_U − (C_U − 1)/(k−|U|−1), C_U the top influence eigenvalue of π^U.
    pub independence_excess: f64,
    /// Smallest |ζ_U − (C_U − 1)/(k−|U|−1)| over U.
    pub independence_min_slack: f64,
}

pub fn gammas(zetas: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    for z in zetas {
        let last = *out.last().expect("nonempty");
        out.push(last * (1.0 - z) / (1.0 + z));
    }
    out
}

/// Local walks at every pinned set of size ≤ k−2 of a distribution over Ω_k.
pub fn local_walk_family(dist: &ExactDistribution, k: usize) -> Result<LocalWalkFamily> {
    if k < 2 {
        return Err(Error::invalid("local walks need k >= 2"));
    }
    let mut zetas = Vec::with_capacity(k - 1);
    let mut excess = f64::NEG_INFINITY;
    let mut min_slack = f64::INFINITY;
    let all: Vec<usize> = (0..dist.n).collect();
    for m in 0..=k - 2 {
        let mut zeta = f64::NEG_INFINITY;
        for u in util::combinations(&all, m) {
            let Some(cond) = dist.condition_plus(util::mask_of(&u)) else {
                continue;
            };
            let walk = local_walk(dist, k, &u)?;
            zeta = zeta.max(walk.second_eigenvalue);
            let c = influence_matrix(&cond, Some(&walk.ground)).largest_eigenvalue;
            let bound = (c - 1.0) / (k - m - 1) as f64;
            excess = excess.max(walk.second_eigenvalue - bound);
            min_slack = min_slack.min((walk.second_eigenvalue - bound).abs());
        }
        zetas.push(zeta);
    }
    Ok(LocalWalkFamily {
        k,
        gammas: gammas(&zetas),
        zetas,
        independence_excess: excess,
        independence_min_slack: min_slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    pub value: f64,
    /// Some ζ_m reached 1 and the product collapsed.
    pub collapsed: bool,
}

/// (Σ_{m=ℓ}^{k−1} Γ_m) / (Σ_{m=0}^{k−1} Γ_m) with k = zetas.len() + 1.
pub fn local_to_global_gap_bound(zetas: &[f64], ell: usize) -> Result<GapBound> {
    let k = zetas.len() + 1;
    if ell >= k {
        return Err(Error::invalid(format!("need ell < k, got ell = {ell}, k = {k}")));
    }
    if zetas.iter().any(|z| !(-1.0..=1.0).contains(z)) {
        return Err(Error::invalid("zetas must lie in [-1, 1]"));
    }
    if zetas.iter().any(|&z| z >= 1.0 - 1e-15) {
        return Ok(GapBound {
            value: 0.0,
            collapsed: true,
        });
    }
    // log Γ_m, with ζ = −1 clamped so the ratio stays finite
    let mut log_g = vec![0.0];
    for z in zetas {
        let z = z.max(-1.0 + 1e-15);
        let last = *log_g.last().expect("nonempty");
        log_g.push(last + (1.0 - z).ln() - (1.0 + z).ln());
    }
    let value = (log_sum_exp(&log_g[ell..]) - log_sum_exp(&log_g)).exp();
    Ok(GapBound {
        value,
        collapsed: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub k: usize,
    pub ell: usize,
    pub beta: f64,
    /// Gap of the +1 down-up walk.
    pub gap_downup: f64,
    /// inf over |U| = ℓ of the pinned down-up gap.
    pub inf_pinned_gap: f64,
    pub worst_pinning: Vec<usize>,
    /// Gap of the (k,ℓ)-down-up walk.
    pub gap_kl: f64,
    pub product: f64,
    pub holds: bool,
}

/// gap(down-up) ≥ inf_U gap(pinned down-up) · gap((k,ℓ)-down-up), all exact.
pub fn gap_factorization_check(g: &Graph, beta: f64, k: usize, ell: usize) -> Result<FactorizationReport> {
    if ell >= k {
        return Err(Error::invalid(format!("need ell < k, got ell = {ell}, k = {k}")));
    }
    let gap_downup = spectral_gap(&build_transition_matrix(&ChainKernel::downup(beta, k, Pinning::none()), g)?)?;
    let gap_kl = spectral_gap(&build_transition_matrix(&ChainKernel::kl_downup(beta, k, ell), g)?)?;
    let all: Vec<usize> = (0..g.n()).collect();
    let mut inf_pinned_gap = f64::INFINITY;
    let mut worst_pinning = Vec::new();
    for u in util::combinations(&all, ell) {
        let p = build_transition_matrix(&ChainKernel::downup(beta, k, Pinning::plus(&u)), g)?;
        let gap = spectral_gap(&p)?;
        if gap < inf_pinned_gap {
            inf_pinned_gap = gap;
            worst_pinning = u;
        }
    }
    let product = inf_pinned_gap * gap_kl;
    Ok(FactorizationReport {
        k,
        ell,
        beta,
        gap_downup,
        inf_pinned_gap,
        worst_pinning,
        gap_kl,
        product,
        holds: gap_downup >= product - 1e-12,
    })
}

/// Probabilists' Hermite polynomials He_0..=He_max at x.
pub fn hermite(max: usize, x: f64) -> Vec<f64> {
    let mut h = vec![1.0, x];
    for r in 1..max {
        h.push(x * h[r] - r as f64 * h[r - 1]);
    }
    h.truncate(max + 1);
    h
}

/// Coefficients c_r (r ≥ 3) of H_r in the order-d expansion.
fn edgeworth_coefficients(betas: &[f64], d: usize) -> Vec<f64> {
    let jmax = 2 * d + 1;
    // r ≤ Σ k_j·j with Σ k_j(j−2) ≤ 2d, so r ≤ 3·2d
    let rmax = 6 * d.max(1);
    let mut coef = vec![0.0; rmax + 1];
    fn rec(j: usize, jmax: usize, budget: usize, r: usize, prod: f64, betas: &[f64], coef: &mut [f64]) {
        if j > jmax {
            if r >= 3 {
                coef[r] += prod;
            }
            return;
        }
        let mut kj = 0usize;
        let mut term = 1.0;
        let mut fact = 1.0;
        while kj * (j - 2) <= budget {
            rec(j + 1, jmax, budget - kj * (j - 2), r + kj * j, prod * term / fact, betas, coef);
            kj += 1;
            term *= betas[j];
            fact *= kj as f64;
        }
    }
    if d > 0 {
        rec(3, jmax, 2 * d, 0, 1.0, betas, &mut coef);
    }
    coef
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthApprox {
    pub mean: f64,
    pub s: f64,
    /// betas[j] = κ_j/(j! s^j) for j ≤ 2d+1 (indices below 3 unused).
    pub betas: Vec<f64>,
    pub order: usize,
    pub ells: Vec<f64>,
    pub values: Vec<f64>,
}

/// Order-d expansion of P(X − E X = ℓ) from κ_1..κ_{2d+1}.
pub fn edgeworth_pmf(kappas: &[f64], ells: &[f64], d: usize) -> Result<EdgeworthApprox> {
    if d > 2 {
        return Err(Error::invalid("edgeworth order must be <= 2"));
    }
    let need = (2 * d + 1).max(2);
    if kappas.len() < need {
        return Err(Error::invalid(format!("order {d} needs {need} cumulants")));
    }
    let var = kappas[1];
    if !(var > 1e-300) {
        return Err(Error::Degenerate("zero variance".into()));
    }
    let s = var.sqrt();
    let mut betas = vec![0.0; 2 * d + 2];
    let mut fact = 1.0;
    for (j, b) in betas.iter_mut().enumerate().skip(1) {
        fact *= j as f64;
        if j <= kappas.len() && j >= 3 {
            *b = kappas[j - 1] / (fact * s.powi(j as i32));
        }
    }
    let coef = edgeworth_coefficients(&betas, d);
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * s);
    let values = ells
        .iter()
        .map(|&l| {
            let x = l / s;
            let h = hermite(coef.len() - 1, x);
            let corr: f64 = coef.iter().zip(&h).map(|(c, hr)| c * hr).sum();
            norm * (-x * x / 2.0).exp() * (1.0 + corr)
        })
        .collect();
    Ok(EdgeworthApprox {
        mean: kappas[0],
        s,
        betas,
        order: d,
        ells: ells.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcltError {
    pub s: f64,
    pub sup_error: f64,
    /// s · sup_error
    pub scaled_sup_error: f64,
}

/// sup over the support (or |ℓ| ≤ window) of |exact − expansion|.
pub fn lclt_error(pmf: &[f64], d: usize, window: Option<f64>) -> Result<LcltError> {
    let cum = crate::ising_measures::cumulants_from_pmf(pmf, (2 * d + 1).max(2))?;
    if cum.degenerate {
        return Err(Error::Degenerate("zero variance".into()));
    }
    let mean = cum.kappa(1);
    let (ks, ells): (Vec<usize>, Vec<f64>) = (0..pmf.len())
        .map(|k| (k, k as f64 - mean))
        .filter(|(_, l)| window.is_none_or(|w| l.abs() <= w))
        .unzip();
    let approx = edgeworth_pmf(&cum.kappas, &ells, d)?;
    let sup_error = ks
        .iter()
        .zip(&approx.values)
        .map(|(&k, a)| (pmf[k] - a).abs())
        .fold(0.0, f64::max);
    Ok(LcltError {
        s: approx.s,
        sup_error,
        scaled_sup_error: approx.s * sup_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub k: usize,
    pub p_k: f64,
    pub p_k_plus: f64,
    pub delta_p: f64,
    /// |κ_j(X⁺) − κ_j(X)| for j = 1, 2, 3
    pub kappa_deltas: [f64; 3],
}

/// Effect of additionally pinning v to plus on P(X = k) and κ_1..κ_3.
pub fn stability_probe(
    g: &Graph,
    params: IsingParams,
    pinning: &Pinning,
    v: usize,
    k: usize,
) -> Result<StabilityReport> {
    let plus = match pinning.get(v) {
        Some(1) => pinning.clone(),
        Some(_) => return Err(Error::invalid(format!("vertex {v} is pinned minus"))),
        None => pinning.with(v, 1)?,
    };
    let base = exact_partition_table(g, params.beta, pinning)?;
    let pinned = exact_partition_table(g, params.beta, &plus)?;
    let p = size_distribution(&base, params.lambda)?;
    let pp = size_distribution(&pinned, params.lambda)?;
    let c = cumulants_of_size(&base, params.lambda, 3)?;
    let cp = cumulants_of_size(&pinned, params.lambda, 3)?;
    let (p_k, p_k_plus) = (p.get(k).copied().unwrap_or(0.0), pp.get(k).copied().unwrap_or(0.0));
    Ok(StabilityReport {
        k,
        p_k,
        p_k_plus,
        delta_p: (p_k - p_k_plus).abs(),
        kappa_deltas: [
            (cp.kappa(1) - c.kappa(1)).abs(),
            (cp.kappa(2) - c.kappa(2)).abs(),
            (cp.kappa(3) - c.kappa(3)).abs(),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicReport {
    /// Largest c with |E e^{itX}| ≤ e^{−c t² n} on the grid.
    pub c: f64,
    /// X is almost surely constant.
    pub degenerate: bool,
    pub grid_points: usize,
}

/// |E e^{itX}| for a pmf on {0, 1, ..}.
pub fn characteristic_modulus(pmf: &[f64], t: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (k, p) in pmf.iter().enumerate() {
        re += p * (t * k as f64).cos();
        im += p * (t * k as f64).sin();
    }
    re.hypot(im)
}

pub fn characteristic_bound_probe(
    g: &Graph,
    params: IsingParams,
    pinning: &Pinning,
    grid_points: usize,
) -> Result<CharacteristicReport> {
    if grid_points < 2 {
        return Err(Error::invalid("grid needs at least 2 points"));
    }
    let pmf = size_distribution(&exact_partition_table(g, params.beta, pinning)?, params.lambda)?;
    let n = g.n() as f64;
    let mut c = f64::INFINITY;
    for i in 1..=grid_points {
        let t = std::f64::consts::PI * i as f64 / grid_points as f64;
        let m = characteristic_modulus(&pmf, t);
        if m > 0.0 {
            c = c.min(-m.ln() / (t * t * n));
        }
    }
    let c = c.max(0.0);
    Ok(CharacteristicReport {
        c,
        degenerate: c <= 1e-12,
        grid_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_matrix_gap_is_two() {
        let g = Graph::complete(2);
        let p = build_transition_matrix(&ChainKernel::kawasaki(0.4, 1, Pinning::none()), &g).unwrap();
        assert!((spectral_gap(&p).unwrap() - 2.0).abs() < 1e-12);
        let r = exact_mixing_time(&p, false, 50).unwrap();
        assert_eq!(r.tau, None);
        assert_eq!(exact_mixing_time(&p, true, 50).unwrap().tau, Some(1));
    }

    #[test]
    fn k3_gap() {
        let g = Graph::complete(3);
        let p = build_transition_matrix(&ChainKernel::kawasaki(1.3, 1, Pinning::none()), &g).unwrap();
        assert!((spectral_gap(&p).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn hermite_values() {
        let h = hermite(4, 2.0);
        assert_eq!(h, vec![1.0, 2.0, 3.0, 2.0, -5.0]);
    }

    #[test]
    fn gaussian_order_zero() {
        let a = edgeworth_pmf(&[5.0, 4.0], &[0.0, 2.0], 0).unwrap();
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * 2.0);
        assert!((a.values[0] - norm).abs() < 1e-15);
        assert!((a.values[1] - norm * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn order_one_coefficients() {
        // d = 1 uses j = 3 only: β3 H3 + β3²/2 H6
        let betas = [0.0, 0.0, 0.0, 0.3];
        let c = edgeworth_coefficients(&betas, 1);
        assert!((c[3] - 0.3).abs() < 1e-15);
        assert!((c[6] - 0.045).abs() < 1e-15);
        assert_eq!(c[4], 0.0);
        // d = 2 adds β4 H4, β5 H5, β3β4 H7, β3β5 H8, β4²/2 H8, β3²β4/2 H10, ...
        let betas = [0.0, 0.0, 0.0, 0.3, 0.2, 0.1];
        let c = edgeworth_coefficients(&betas, 2);
        assert!((c[4] - 0.2).abs() < 1e-15);
        assert!((c[5] - 0.1).abs() < 1e-15);
        assert!((c[7] - 0.06).abs() < 1e-15);
        assert!((c[8] - (0.03 + 0.02)).abs() < 1e-15);
        assert!((c[12] - 0.3f64.powi(4) / 24.0).abs() < 1e-15);
    }

    #[test]
    fn gap_bound_edge_cases() {
        assert_eq!(local_to_global_gap_bound(&[0.2, 0.1], 0).unwrap().value, 1.0);
        let b = local_to_global_gap_bound(&[0.0; 4], 2).unwrap();
        assert!((b.value - 3.0 / 5.0).abs() < 1e-14);
        assert!(local_to_global_gap_bound(&[1.0, 0.0], 1).unwrap().collapsed);
    }
}
