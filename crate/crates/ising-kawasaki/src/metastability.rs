//! Bottleneck sets, band weights, magnetization traces and partition-ratio
//! bounds for slow-mixing experiments.
//!
//! Sizes are plus counts. For Glauber, S₁ is a band around k₊, S₂ the band
//! k₋ ± w and S₃ the shell w < |j − k₋| ≤ 2w. On a disjoint union of m
//! copies, S₂ fixes a center per component, S₃ is the shell where every
//! component is within 2w of its center and at least one is beyond w, and
//! S₁ is either all components at k or the S₂ centers with the two groups
//! swapped.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ChainKernel, ChainState};
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::ising_measures::{k_from_eta, size_distribution, PartitionTable, Pinning, SpinConfiguration};
use crate::mean_field::{annealed_log_ez_per_k, critical_points};
use crate::tree_thresholds::{eta_minus, eta_plus, lambda_u, tree_fixed_points};
use crate::util::{log_sum_exp, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BottleneckKind {
    GlauberEtaBands,
    KawasakiUnion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnionTarget {
    /// Every component at exactly k.
    Uniform,
    /// The S₂ centers with plus and minus groups exchanged.
    Swapped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionParams {
    pub m: usize,
    pub ell: usize,
    pub k_plus: usize,
    pub k_minus: usize,
    /// Per-component average size; the union has m·k pluses.
    pub k: usize,
    pub target: UnionTarget,
    /// Field used to pick (k₊, k₋), when searched.
    pub lambda_plus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottleneckSpec {
    pub kind: BottleneckKind,
    /// Vertices of the graph (Glauber) or of one component (union).
    pub n: usize,
    /// Half-width of S₂ in plus counts; S₃ extends to 2w.
    pub w: usize,
    /// Glauber: S₁ = k₊ ± s1_width. Union: unused.
    pub s1_width: usize,
    pub k_plus: usize,
    pub k_minus: usize,
    pub union: Option<UnionParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecCheck {
    pub disjoint: bool,
    /// Every chain path from S₂ to S₁ meets S₃.
    pub separated: bool,
}

/// Half the smallest gap between adjacent critical points of f.
pub fn default_epsilon(delta: usize, beta: f64, lambda: f64) -> Result<f64> {
    let cps = critical_points(delta, beta, lambda, 1e-3)?;
    if cps.len() < 2 {
        return Err(Error::Degenerate(format!(
            "f has {} interior critical point(s); no band geometry",
            cps.len()
        )));
    }
    Ok(cps
        .windows(2)
        .map(|p| p[1].eta - p[0].eta)
        .fold(f64::INFINITY, f64::min)
        / 2.0)
}

impl BottleneckSpec {
    /// Bands from explicit sizes.
    pub fn glauber(n: usize, k_plus: usize, k_minus: usize, w: usize, s1_width: usize) -> Result<Self> {
        if k_plus > n || k_minus > n {
            return Err(Error::invalid("band centers must lie in [0, n]"));
        }
        Ok(BottleneckSpec {
            kind: BottleneckKind::GlauberEtaBands,
            n,
            w,
            s1_width,
            k_plus,
            k_minus,
            union: None,
        })
    }

    /// Bands at the tree magnetizations η± with |j − k₋| ≤ εn/2 for S₂.
    pub fn glauber_from_tree(n: usize, delta: usize, beta: f64, lambda: f64, eps: Option<f64>) -> Result<Self> {
        if tree_fixed_points(delta, beta, lambda)?.count() < 2 {
            return Err(Error::Degenerate("tree recursion has a unique fixed point".into()));
        }
        let eps = match eps {
            Some(e) => e,
            None => default_epsilon(delta, beta, lambda)?,
        };
        let kp = k_from_eta(n, eta_plus(delta, beta, lambda)?);
        let km = k_from_eta(n, eta_minus(delta, beta, lambda)?);
        let w = (eps * n as f64 / 2.0).floor() as usize;
        BottleneckSpec::glauber(n, kp, km, w, 0)
    }

    /// Union bands; requires ℓ·k₊ + (m−ℓ)·k₋ = m·k exactly.
    pub fn kawasaki_union(n: usize, params: UnionParams, w: usize) -> Result<Self> {
        let UnionParams { m, ell, k_plus, k_minus, k, .. } = params;
        if m == 0 || ell > m {
            return Err(Error::invalid("need m >= 1 and ell <= m"));
        }
        if k_plus > n || k_minus > n || k > n {
            return Err(Error::invalid("component sizes must lie in [0, n]"));
        }
        if ell * k_plus + (m - ell) * k_minus != m * k {
            return Err(Error::invalid(format!(
                "{ell}*{k_plus} + {}*{k_minus} != {m}*{k}",
                m - ell
            )));
        }
        Ok(BottleneckSpec {
            kind: BottleneckKind::KawasakiUnion,
            n,
            w,
            s1_width: 0,
            k_plus,
            k_minus,
            union: Some(params),
        })
    }

    /// S₂ centers: ℓ components at k₊ then m−ℓ at k₋.
    pub fn s2_centers(&self) -> Vec<usize> {
        let u = self.union.as_ref().expect("union spec");
        let mut c = vec![u.k_plus; u.ell];
        c.extend(std::iter::repeat_n(u.k_minus, u.m - u.ell));
        c
    }

    pub fn s1_centers(&self) -> Vec<usize> {
        let u = self.union.as_ref().expect("union spec");
        match u.target {
            UnionTarget::Uniform => vec![u.k; u.m],
            UnionTarget::Swapped => {
                let mut c = vec![u.k_minus; u.m - u.ell];
                c.extend(std::iter::repeat_n(u.k_plus, u.ell));
                c
            }
        }
    }

    /// Structural checks from band arithmetic.
    pub fn check(&self) -> SpecCheck {
        let w = self.w as i64;
        match self.kind {
            BottleneckKind::GlauberEtaBands => {
                // S₁ must miss k₋ ± 2w
                let gap = (self.k_plus as i64 - self.k_minus as i64).abs();
                let disjoint = gap > 2 * w + self.s1_width as i64;
                SpecCheck {
                    disjoint,
                    separated: disjoint && w >= 1,
                }
            }
            BottleneckKind::KawasakiUnion => {
                let (c1, c2) = (self.s1_centers(), self.s2_centers());
                let disjoint = c1
                    .iter()
                    .zip(&c2)
                    .any(|(a, b)| (*a as i64 - *b as i64).abs() > 2 * w);
                SpecCheck {
                    disjoint,
                    separated: disjoint && w >= 1,
                }
            }
        }
    }

    pub fn validate(&self) -> Result<SpecCheck> {
        let c = self.check();
        if !c.disjoint {
            return Err(Error::invalid("S1, S2, S3 are not pairwise disjoint"));
        }
        Ok(c)
    }

    /// Which set a Glauber plus count falls in (1, 2, 3).
    pub fn classify_count(&self, j: usize) -> Option<u8> {
        let d2 = (j as i64 - self.k_minus as i64).abs();
        let d1 = (j as i64 - self.k_plus as i64).abs();
        let w = self.w as i64;
        if d1 <= self.s1_width as i64 {
            Some(1)
        } else if d2 <= w {
            Some(2)
        } else if d2 <= 2 * w {
            Some(3)
        } else {
            None
        }
    }

    /// Which set a vector of component sizes falls in.
    pub fn classify_components(&self, sizes: &[usize]) -> Option<u8> {
        let (c1, c2) = (self.s1_centers(), self.s2_centers());
        let w = self.w as i64;
        if sizes == c1.as_slice() {
            return Some(1);
        }
        let dev: Vec<i64> = sizes.iter().zip(&c2).map(|(a, b)| (*a as i64 - *b as i64).abs()).collect();
        if dev.iter().all(|&d| d <= w) {
            Some(2)
        } else if dev.iter().all(|&d| d <= 2 * w) {
            Some(3)
        } else {
            None
        }
    }
}

/// Integer (ℓ, m) with ℓ·k₊ + (m−ℓ)·k₋ = m·k, smallest m first.
pub fn find_union_split(k: usize, k_plus: usize, k_minus: usize, max_m: usize) -> Option<(usize, usize)> {
    if !(k_minus < k && k < k_plus) {
        return None;
    }
    // ℓ(k₊ − k₋) = m(k − k₋)
    let (a, b) = (k_plus - k_minus, k - k_minus);
    (1..=max_m).find_map(|m| ((m * b) % a == 0).then(|| (m * b / a, m)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionSearch {
    pub params: UnionParams,
    /// Candidates tried, in grid order.
    pub tried: usize,
}

/// Scans λ₊ over `grid` and returns the first value whose tree sizes admit
/// an integer split with m ≤ max_m.
pub fn search_union_params(
    n: usize,
    delta: usize,
    beta: f64,
    eta: f64,
    grid: &[f64],
    max_m: usize,
    w: usize,
) -> Result<UnionSearch> {
    let k = k_from_eta(n, eta);
    for (i, &lp) in grid.iter().enumerate() {
        if tree_fixed_points(delta, beta, lp)?.count() < 2 {
            continue;
        }
        let kp = k_from_eta(n, eta_plus(delta, beta, lp)?);
        let km = k_from_eta(n, eta_minus(delta, beta, lp)?);
        let Some((ell, m)) = find_union_split(k, kp, km, max_m) else {
            continue;
        };
        let far = |a: usize, b: usize| (a as i64 - b as i64).abs() > 2 * w as i64;
        let target = if far(k, kp) && far(k, km) {
            UnionTarget::Uniform
        } else {
            UnionTarget::Swapped
        };
        return Ok(UnionSearch {
            params: UnionParams {
                m,
                ell,
                k_plus: kp,
                k_minus: km,
                k,
                target,
                lambda_plus: Some(lp),
            },
            tried: i + 1,
        });
    }
    Err(Error::Degenerate(format!(
        "no lambda_plus in the grid gives an integer split with m <= {max_m}"
    )))
}

/// Log-weights of S₁, S₂, S₃ and of everything.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandWeights {
    pub log_s1: f64,
    pub log_s2: f64,
    pub log_s3: f64,
    pub log_total: f64,
}

impl BandWeights {
    pub fn masses(&self) -> [f64; 3] {
        [
            (self.log_s1 - self.log_total).exp(),
            (self.log_s2 - self.log_total).exp(),
            (self.log_s3 - self.log_total).exp(),
        ]
    }

    /// log π(S₃)/π(S₂)
    pub fn log_ratio_s3_s2(&self) -> f64 {
        self.log_s3 - self.log_s2
    }

    pub fn log_ratio_s1_s2(&self) -> f64 {
        self.log_s1 - self.log_s2
    }
}

fn glauber_weights(spec: &BottleneckSpec, lw: &[f64]) -> BandWeights {
    let mut sets: [Vec<f64>; 3] = Default::default();
    for (j, &x) in lw.iter().enumerate() {
        if let Some(s) = spec.classify_count(j) {
            sets[s as usize - 1].push(x);
        }
    }
    BandWeights {
        log_s1: log_sum_exp(&sets[0]),
        log_s2: log_sum_exp(&sets[1]),
        log_s3: log_sum_exp(&sets[2]),
        log_total: log_sum_exp(lw),
    }
}

/// log Σ over size vectors with Σ x_i = total and |x_i − c_i| ≤ outer of
/// Π exp(lw[x_i]); returns (no component beyond `inner`, some component beyond).
fn union_dp(lw: &[f64], centers: &[usize], inner: usize, outer: usize, total: usize) -> (f64, f64) {
    let n = lw.len() - 1;
    let ninf = f64::NEG_INFINITY;
    // dp[flag][sum]
    let mut dp = vec![vec![ninf; total + 1]; 2];
    dp[0][0] = 0.0;
    for &c in centers {
        let mut next = vec![vec![ninf; total + 1]; 2];
        let lo = c.saturating_sub(outer);
        let hi = (c + outer).min(n);
        for flag in 0..2 {
            for s in 0..=total {
                let cur = dp[flag][s];
                if cur == ninf {
                    continue;
                }
                for x in lo..=hi {
                    if s + x > total {
                        break;
                    }
                    let f = flag | usize::from(x.abs_diff(c) > inner);
                    let v = cur + lw[x];
                    let slot = &mut next[f][s + x];
                    *slot = if *slot == ninf { v } else { crate::util::log_add(*slot, v) };
                }
            }
        }
        dp = next;
    }
    (dp[0][total], dp[1][total])
}

fn union_weights(spec: &BottleneckSpec, lw: &[f64]) -> BandWeights {
    let u = spec.union.as_ref().expect("union spec");
    let total = u.m * u.k;
    let n = spec.n;
    let s1: f64 = match u.target {
        UnionTarget::Uniform => u.m as f64 * lw[u.k],
        UnionTarget::Swapped => spec.s1_centers().iter().map(|&c| lw[c]).sum(),
    };
    let c2 = spec.s2_centers();
    let (s2, _) = union_dp(lw, &c2, spec.w, spec.w, total);
    let (_, s3) = union_dp(lw, &c2, spec.w, 2 * spec.w, total);
    let everything = union_dp(lw, &vec![0; u.m], n, n, total).0;
    BandWeights {
        log_s1: s1,
        log_s2: s2,
        log_s3: s3,
        log_total: everything,
    }
}

/// Band weights from annealed log E Z_{G,j}(λ) over the configuration model.
pub fn annealed_band_weights(delta: usize, beta: f64, lambda: f64, spec: &BottleneckSpec) -> Result<BandWeights> {
    spec.validate()?;
    let lw: Vec<f64> = (0..=spec.n)
        .map(|j| annealed_log_ez_per_k(spec.n, j, delta, beta, lambda))
        .collect::<Result<_>>()?;
    let bw = match spec.kind {
        BottleneckKind::GlauberEtaBands => glauber_weights(spec, &lw),
        BottleneckKind::KawasakiUnion => union_weights(spec, &lw),
    };
    if bw.log_s2 == f64::NEG_INFINITY {
        return Err(Error::Degenerate("S2 is empty".into()));
    }
    Ok(bw)
}

/// Exact band weights from a partition table of the graph (Glauber) or of
/// one component (union; the union measure factorizes over components).
pub fn exact_band_weights(table: &PartitionTable, lambda: f64, spec: &BottleneckSpec) -> Result<BandWeights> {
    if table.n != spec.n {
        return Err(Error::invalid("table size does not match spec"));
    }
    spec.validate()?;
    let lw: Vec<f64> = (0..=spec.n).map(|j| table.log_z_k(j, lambda)).collect();
    let bw = match spec.kind {
        BottleneckKind::GlauberEtaBands => glauber_weights(spec, &lw),
        BottleneckKind::KawasakiUnion => union_weights(spec, &lw),
    };
    Ok(bw)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConductanceReport {
    pub ratio_s3_s2: f64,
    pub log_ratio_s3_s2: f64,
    /// π(S₁) ≥ π(S₂)
    pub s1_dominates: bool,
    /// 1 / (4 π(S₃)/π(S₂)); infinite when S₃ has no mass.
    pub mixing_lower_bound: f64,
}

pub fn conductance_lower_bound_report(w: &BandWeights) -> Result<ConductanceReport> {
    if w.log_s2 == f64::NEG_INFINITY {
        return Err(Error::Degenerate("pi(S2) = 0".into()));
    }
    let lr = w.log_ratio_s3_s2();
    let ratio = lr.exp();
    Ok(ConductanceReport {
        ratio_s3_s2: ratio,
        log_ratio_s3_s2: lr,
        s1_dominates: w.log_s1 >= w.log_s2,
        mixing_lower_bound: if ratio == 0.0 { f64::INFINITY } else { 0.25 / ratio },
    })
}

/// True when the log-ratios decrease strictly along a growing family.
pub fn bottleneck_trend(log_ratios: &[f64]) -> bool {
    log_ratios.windows(2).all(|p| p[1] < p[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceStart {
    AllPlus,
    AllMinus,
}

/// Magnetization bands η± ± ε for dwell accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceBands {
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub eps: f64,
}

impl TraceBands {
    /// η± and ε from the tree fixed points and f at (Δ, β, λ).
    pub fn from_tree(delta: usize, beta: f64, lambda: f64) -> Result<Self> {
        Ok(TraceBands {
            eta_minus: eta_minus(delta, beta, lambda)?,
            eta_plus: eta_plus(delta, beta, lambda)?,
            eps: default_epsilon(delta, beta, lambda)?,
        })
    }

    fn band(&self, eta: f64) -> Option<u8> {
        if (eta - self.eta_minus).abs() <= self.eps {
            Some(0)
        } else if (eta - self.eta_plus).abs() <= self.eps {
            Some(1)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub steps: u64,
    pub stride: u64,
    /// η(X_t) at t = 0, stride, 2·stride, ...
    pub etas: Vec<f64>,
    pub dwell_minus: f64,
    pub dwell_plus: f64,
    /// First step in the band opposite to the start; None if censored.
    pub escape_time: Option<u64>,
    pub censored: bool,
}

/// Runs `kernel` for `steps` steps and tracks η per step.
pub fn magnetization_trace(
    g: &Graph,
    kernel: &ChainKernel,
    start: TraceStart,
    steps: u64,
    stride: u64,
    bands: TraceBands,
    rng: &mut Rng,
) -> Result<TraceSummary> {
    if steps == 0 || stride == 0 {
        return Err(Error::invalid("steps and stride must be >= 1"));
    }
    kernel.validate(g)?;
    let sigma = match start {
        TraceStart::AllPlus => SpinConfiguration::all_plus(g),
        TraceStart::AllMinus => SpinConfiguration::all_minus(g),
    };
    let mut state = ChainState::new(sigma, &kernel.pinning)?;
    let target = match start {
        TraceStart::AllMinus => 1,
        TraceStart::AllPlus => 0,
    };
    let mut etas = vec![state.sigma.eta()];
    let mut dwell = [0u64; 2];
    let mut escape = None;
    for t in 1..=steps {
        kernel.step(g, &mut state, rng)?;
        let eta = state.sigma.eta();
        if let Some(b) = bands.band(eta) {
            dwell[b as usize] += 1;
            if b == target && escape.is_none() {
                escape = Some(t);
            }
        }
        if t % stride == 0 {
            etas.push(eta);
        }
    }
    Ok(TraceSummary {
        steps,
        stride,
        etas,
        dwell_minus: dwell[0] as f64 / steps as f64,
        dwell_plus: dwell[1] as f64 / steps as f64,
        escape_time: escape,
        censored: escape.is_none(),
    })
}

/// Fractions of steps spent in S₁, S₂, S₃ by a Glauber-band spec.
pub fn simulated_band_occupancy(
    g: &Graph,
    kernel: &ChainKernel,
    spec: &BottleneckSpec,
    start: SpinConfiguration,
    steps: u64,
    rng: &mut Rng,
) -> Result<[f64; 3]> {
    if spec.kind != BottleneckKind::GlauberEtaBands {
        return Err(Error::invalid("occupancy is tracked for plus-count bands"));
    }
    let mut state = ChainState::new(start, &kernel.pinning)?;
    let mut hits = [0u64; 3];
    for _ in 0..steps {
        kernel.step(g, &mut state, rng)?;
        if let Some(s) = spec.classify_count(state.sigma.plus_count()) {
            hits[s as usize - 1] += 1;
        }
    }
    Ok(hits.map(|h| h as f64 / steps.max(1) as f64))
}

/// ν(σ, σ′) = σ·σ′ / n
pub fn overlap(a: &[i8], b: &[i8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("configurations differ in size"));
    }
    if a.is_empty() {
        return Err(Error::invalid("empty configuration"));
    }
    let dot: i64 = a.iter().zip(b).map(|(x, y)| (*x as i64) * (*y as i64)).sum();
    Ok(dot as f64 / a.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub k: usize,
    /// ln Z_{k+1}/Z_k
    pub log_ratio: f64,
    /// ln of ((n−k)/(k+1)) λ e^{−2Δβ}
    pub forward_bound: f64,
    /// ln of ((k+1)/(n−k)) λ⁻¹ e^{−2Δβ}, compared with ln Z_k/Z_{k+1}
    pub mirrored_bound: f64,
    pub forward_holds: bool,
    pub mirrored_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRatioReport {
    pub delta: usize,
    pub rows: Vec<RatioRow>,
    pub all_hold: bool,
    /// max |slack| over both inequalities; zero at β = 0.
    pub max_slack: f64,
}

const RATIO_TOL: f64 = 1e-12;

/// One-step ratio bounds for every k on an unpinned exact table.
pub fn partition_ratio_check(table: &PartitionTable, delta: usize, lambda: f64) -> Result<PartitionRatioReport> {
    if !table.pinning.is_empty() {
        return Err(Error::invalid("ratio bounds are for unpinned tables"));
    }
    let n = table.n;
    let pen = -2.0 * delta as f64 * table.beta;
    let mut rows = Vec::with_capacity(n);
    let mut max_slack = 0.0f64;
    for k in 0..n {
        let lr = table.log_z_k(k + 1, lambda) - table.log_z_k(k, lambda);
        let comb = ((n - k) as f64 / (k + 1) as f64).ln();
        let fwd = comb + lambda.ln() + pen;
        let mir = -comb - lambda.ln() + pen;
        max_slack = max_slack.max((lr - fwd).abs()).max((-lr - mir).abs());
        rows.push(RatioRow {
            k,
            log_ratio: lr,
            forward_bound: fwd,
            mirrored_bound: mir,
            forward_holds: lr >= fwd - RATIO_TOL,
            mirrored_holds: -lr >= mir - RATIO_TOL,
        });
    }
    Ok(PartitionRatioReport {
        delta,
        all_hold: rows.iter().all(|r| r.forward_holds && r.mirrored_holds),
        rows,
        max_slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiStepRatio {
    pub k: usize,
    pub t: usize,
    /// ln Z_{k+t} − ln Z_k
    pub log_ratio: f64,
    pub forward_bound: f64,
    pub mirrored_bound: f64,
    pub forward_holds: bool,
    pub mirrored_holds: bool,
}

/// Z_{k+t} ≥ Π one-step forward bounds · Z_k and the mirrored product.
pub fn partition_ratio_bounds(table: &PartitionTable, delta: usize, lambda: f64, k: usize, t: usize) -> Result<MultiStepRatio> {
    if k + t > table.n {
        return Err(Error::invalid("need k + t <= n"));
    }
    let report = partition_ratio_check(table, delta, lambda)?;
    let rows = &report.rows[k..k + t];
    let log_ratio = table.log_z_k(k + t, lambda) - table.log_z_k(k, lambda);
    let fwd: f64 = rows.iter().map(|r| r.forward_bound).sum();
    let mir: f64 = rows.iter().map(|r| r.mirrored_bound).sum();
    Ok(MultiStepRatio {
        k,
        t,
        log_ratio,
        forward_bound: fwd,
        mirrored_bound: mir,
        forward_holds: log_ratio >= fwd - RATIO_TOL * (t.max(1) as f64),
        mirrored_holds: -log_ratio >= mir - RATIO_TOL * (t.max(1) as f64),
    })
}

/// P(X = j) band masses for a Glauber spec from an exact table.
pub fn exact_glauber_masses(table: &PartitionTable, lambda: f64, spec: &BottleneckSpec) -> Result<[f64; 3]> {
    let p = size_distribution(table, lambda)?;
    let mut out = [0.0; 3];
    for (j, pj) in p.iter().enumerate() {
        if let Some(s) = spec.classify_count(j) {
            out[s as usize - 1] += pj;
        }
    }
    Ok(out)
}

/// λ inside (1, λ_u) check used by trace experiments.
pub fn in_metastable_window(delta: usize, beta: f64, lambda: f64) -> Result<bool> {
    Ok(lambda > 1.0 && lambda < lambda_u(delta, beta)?)
}

/// Pinning-free Glauber kernel helper.
pub fn glauber_kernel(beta: f64, lambda: f64) -> Result<ChainKernel> {
    Ok(ChainKernel::glauber(
        crate::ising_measures::IsingParams::new(beta, lambda)?,
        Pinning::none(),
    ))
}
