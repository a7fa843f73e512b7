//! Spin configurations, pinnings and exact partition functions.
//!
//! Enumeration walks a Gray code over the free vertices and records a
//! histogram of (plus count, monochromatic edges). Every β then gives the
//! per-k table Ẑ_k(β) = Σ_m count[k][m] e^{βm} by a log-sum-exp over m.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::util::{self, log_sum_exp};

pub const DEFAULT_ENUMERATION_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub beta: f64,
    pub lambda: f64,
}

impl IsingParams {
    pub fn new(beta: f64, lambda: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be finite and >= 0, got {beta}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be finite and > 0, got {lambda}")));
        }
        Ok(IsingParams { beta, lambda })
    }
}

/// Partial assignment τ_U : U → {+1, −1}.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pinning {
    assignments: BTreeMap<usize, i8>,
}

impl Pinning {
    pub fn none() -> Self {
        Pinning::default()
    }

    pub fn new(pairs: impl IntoIterator<Item = (usize, i8)>) -> Result<Self> {
        let mut assignments = BTreeMap::new();
        for (v, s) in pairs {
            if s != 1 && s != -1 {
                return Err(Error::invalid(format!("pinned spin at {v} must be +1 or -1")));
            }
            if let Some(prev) = assignments.insert(v, s) {
                if prev != s {
                    return Err(Error::invalid(format!("vertex {v} pinned to both signs")));
                }
            }
        }
        Ok(Pinning { assignments })
    }

    pub fn plus(vs: &[usize]) -> Self {
        Pinning {
            assignments: vs.iter().map(|&v| (v, 1)).collect(),
        }
    }

    pub fn get(&self, v: usize) -> Option<i8> {
        self.assignments.get(&v).copied()
    }

    pub fn is_pinned(&self, v: usize) -> bool {
        self.assignments.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn plus_count(&self) -> usize {
        self.assignments.values().filter(|&&s| s == 1).count()
    }

    pub fn is_plus_only(&self) -> bool {
        self.assignments.values().all(|&s| s == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.assignments.iter().map(|(&v, &s)| (v, s))
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.assignments.keys().copied().collect()
    }

    pub fn free_vertices(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|v| !self.is_pinned(*v)).collect()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some((&v, _)) = self.assignments.iter().find(|(&v, _)| v >= n) {
            return Err(Error::invalid(format!("pinned vertex {v} out of range for n = {n}")));
        }
        Ok(())
    }

    pub fn consistent_with(&self, spins: &[i8]) -> bool {
        self.iter().all(|(v, s)| spins.get(v) == Some(&s))
    }

    /// The same pinning with `v` additionally pinned to `s`.
    pub fn with(&self, v: usize, s: i8) -> Result<Pinning> {
        Pinning::new(self.iter().chain(std::iter::once((v, s))))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
    plus_count: usize,
    mono_edges: usize,
}

impl SpinConfiguration {
    pub fn from_spins(g: &Graph, spins: Vec<i8>) -> Result<Self> {
        let mono_edges = monochromatic_edges(g, &spins)?;
        let plus_count = spins.iter().filter(|&&s| s == 1).count();
        Ok(SpinConfiguration {
            spins,
            plus_count,
            mono_edges,
        })
    }

    pub fn all_minus(g: &Graph) -> Self {
        SpinConfiguration::from_spins(g, vec![-1; g.n()]).expect("valid spins")
    }

    pub fn all_plus(g: &Graph) -> Self {
        SpinConfiguration::from_spins(g, vec![1; g.n()]).expect("valid spins")
    }

    pub fn from_plus_set(g: &Graph, plus: &[usize]) -> Result<Self> {
        let mut spins = vec![-1; g.n()];
        for &v in plus {
            if v >= g.n() {
                return Err(Error::invalid(format!("vertex {v} out of range")));
            }
            spins[v] = 1;
        }
        SpinConfiguration::from_spins(g, spins)
    }

    pub fn from_mask(g: &Graph, mask: u64) -> Self {
        SpinConfiguration::from_plus_set(g, &util::members(mask)).expect("mask within n")
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, v: usize) -> i8 {
        self.spins[v]
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    pub fn plus_count(&self) -> usize {
        self.plus_count
    }

    pub fn mono_edges(&self) -> usize {
        self.mono_edges
    }

    pub fn eta(&self) -> f64 {
        let n = self.spins.len() as f64;
        (2.0 * self.plus_count as f64 - n) / n
    }

    pub fn plus_vertices(&self) -> Vec<usize> {
        (0..self.spins.len()).filter(|&v| self.spins[v] == 1).collect()
    }

    /// Plus set as a bitmask; requires n ≤ 64.
    pub fn plus_mask(&self) -> u64 {
        debug_assert!(self.spins.len() <= 64);
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0u64, |m, (v, _)| m | (1 << v))
    }

    /// Change in m_G if `v` is flipped.
    #[inline]
    pub fn flip_delta(&self, g: &Graph, v: usize) -> i64 {
        flip_delta(g, &self.spins, v)
    }

    #[inline]
    pub fn flip(&mut self, g: &Graph, v: usize) {
        let d = self.flip_delta(g, v);
        self.mono_edges = (self.mono_edges as i64 + d) as usize;
        if self.spins[v] == 1 {
            self.plus_count -= 1;
        } else {
            self.plus_count += 1;
        }
        self.spins[v] = -self.spins[v];
    }

    pub fn set(&mut self, g: &Graph, v: usize, s: i8) {
        if self.spins[v] != s {
            self.flip(g, v);
        }
    }
}

/// Δm = −σ_v Σ_{w ∈ N(v), w ≠ v} σ_w; self-loops never change.
#[inline]
pub fn flip_delta(g: &Graph, spins: &[i8], v: usize) -> i64 {
    let s = spins[v] as i64;
    let mut sum = 0i64;
    for &w in g.neighbors(v) {
        if w != v {
            sum += spins[w] as i64;
        }
    }
    -s * sum
}

pub fn monochromatic_edges(g: &Graph, spins: &[i8]) -> Result<usize> {
    if spins.len() != g.n() {
        return Err(Error::invalid(format!(
            "configuration has {} spins, graph has {} vertices",
            spins.len(),
            g.n()
        )));
    }
    if let Some(s) = spins.iter().find(|&&s| s != 1 && s != -1) {
        return Err(Error::invalid(format!("spin value {s} is not +1/-1")));
    }
    Ok(g
        .edges()
        .into_iter()
        .filter(|&(u, v)| spins[u] == spins[v])
        .count())
}

pub fn k_from_eta(n: usize, eta: f64) -> usize {
    ((n as f64 * (eta + 1.0) / 2.0).floor().max(0.0) as usize).min(n)
}

/// Histogram of configurations consistent with a pinning by
/// (plus count, monochromatic edges). β-independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityOfStates {
    pub n: usize,
    pub pinning: Pinning,
    /// counts[k][m]
    pub counts: Vec<Vec<u64>>,
}

impl DensityOfStates {
    pub fn enumerate(g: &Graph, pinning: &Pinning) -> Result<Self> {
        DensityOfStates::enumerate_with_cap(g, pinning, DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_with_cap(g: &Graph, pinning: &Pinning, cap: usize) -> Result<Self> {
        pinning.validate(g.n())?;
        let free = pinning.free_vertices(g.n());
        if free.len() > cap {
            return Err(Error::TooLarge {
                what: "free vertices",
                size: free.len(),
                cap,
            });
        }
        let mut spins = vec![-1i8; g.n()];
        for (v, s) in pinning.iter() {
            spins[v] = s;
        }
        let edges = g.edge_count();
        let mut counts = vec![vec![0u64; edges + 1]; g.n() + 1];
        let mut plus = pinning.plus_count();
        let mut mono = monochromatic_edges(g, &spins)? as i64;
        counts[plus][mono as usize] += 1;
        for i in 1u64..(1u64 << free.len()) {
            let v = free[i.trailing_zeros() as usize];
            mono += flip_delta(g, &spins, v);
            spins[v] = -spins[v];
            if spins[v] == 1 {
                plus += 1;
            } else {
                plus -= 1;
            }
            counts[plus][mono as usize] += 1;
        }
        Ok(DensityOfStates {
            n: g.n(),
            pinning: pinning.clone(),
            counts,
        })
    }

    pub fn table(&self, beta: f64) -> PartitionTable {
        let log_z_by_k = self
            .counts
            .iter()
            .map(|row| {
                let terms: Vec<f64> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(m, &c)| (c as f64).ln() + beta * m as f64)
                    .collect();
                log_sum_exp(&terms)
            })
            .collect();
        PartitionTable {
            n: self.n,
            beta,
            pinning: self.pinning.clone(),
            log_z_by_k,
        }
    }
}

/// log Ẑ^{τ_U}_{G,k}(β) for k = 0..n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionTable {
    pub n: usize,
    pub beta: f64,
    pub pinning: Pinning,
    #[serde(rename = "logZ_by_k", with = "neg_inf_as_null")]
    pub log_z_by_k: Vec<f64>,
}

mod neg_inf_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<f64>> = v.iter().map(|x| x.is_finite().then_some(*x)).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opt: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(opt.into_iter().map(|x| x.unwrap_or(f64::NEG_INFINITY)).collect())
    }
}

impl PartitionTable {
    pub fn log_zhat(&self, k: usize) -> f64 {
        self.log_z_by_k.get(k).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// log Z_k(λ) = k log λ + log Ẑ_k.
    pub fn log_z_k(&self, k: usize, lambda: f64) -> f64 {
        let z = self.log_zhat(k);
        if z == f64::NEG_INFINITY {
            z
        } else {
            k as f64 * lambda.ln() + z
        }
    }

    pub fn log_z(&self, lambda: f64) -> f64 {
        let terms: Vec<f64> = (0..=self.n).map(|k| self.log_z_k(k, lambda)).collect();
        log_sum_exp(&terms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("bad table JSON: {e}")))
    }
}

pub fn exact_partition_table(g: &Graph, beta: f64, pinning: &Pinning) -> Result<PartitionTable> {
    Ok(DensityOfStates::enumerate(g, pinning)?.table(beta))
}

/// P(X = k) = λ^k Ẑ_k / Z.
pub fn size_distribution(table: &PartitionTable, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be > 0"));
    }
    let log_z = table.log_z(lambda);
    if log_z == f64::NEG_INFINITY {
        return Err(Error::Degenerate("partition table is empty".into()));
    }
    let mut p: Vec<f64> = (0..=table.n)
        .map(|k| (table.log_z_k(k, lambda) - log_z).exp())
        .collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cumulants {
    /// kappas[j-1] = κ_j
    pub kappas: Vec<f64>,
    pub degenerate: bool,
}

impl Cumulants {
    pub fn kappa(&self, j: usize) -> f64 {
        self.kappas[j - 1]
    }
}

pub const MAX_CUMULANT_ORDER: usize = 8;

/// Cumulants of a pmf on {0, 1, ..} via central moments.
pub fn cumulants_from_pmf(pmf: &[f64], j_max: usize) -> Result<Cumulants> {
    if j_max == 0 || j_max > MAX_CUMULANT_ORDER {
        return Err(Error::invalid(format!(
            "j_max must be in 1..={MAX_CUMULANT_ORDER}"
        )));
    }
    let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    // central moments c[0..=j_max]
    let mut c = vec![0.0; j_max + 1];
    for (k, &p) in pmf.iter().enumerate() {
        let x = k as f64 - mean;
        let mut xp = 1.0;
        for cj in c.iter_mut() {
            *cj += p * xp;
            xp *= x;
        }
    }
    let degenerate = c.get(2).is_some_and(|&v| v <= 1e-300);
    let mut kappas = vec![0.0; j_max];
    kappas[0] = mean;
    if !degenerate {
        // κ_r = c_r − Σ_{m=2}^{r−2} C(r−1, m−1) κ_m c_{r−m}, with c_1 = 0
        for r in 2..=j_max {
            let mut acc = c[r];
            for m in 2..r - 1 {
                acc -= util::binom(r - 1, m - 1) * kappas[m - 1] * c[r - m];
            }
            kappas[r - 1] = acc;
        }
    }
    Ok(Cumulants { kappas, degenerate })
}

pub fn cumulants_of_size(table: &PartitionTable, lambda: f64, j_max: usize) -> Result<Cumulants> {
    cumulants_from_pmf(&size_distribution(table, lambda)?, j_max)
}

/// κ_1..κ_3 from central differences of t ↦ log Z(λe^t).
pub fn cumulants_by_finite_difference(table: &PartitionTable, lambda: f64, h: f64) -> [f64; 3] {
    let k = |t: f64| table.log_z(lambda * t.exp());
    let (k0, kp, km, kp2, km2) = (k(0.0), k(h), k(-h), k(2.0 * h), k(-2.0 * h));
    [
        (kp - km) / (2.0 * h),
        (kp - 2.0 * k0 + km) / (h * h),
        (kp2 - 2.0 * kp + 2.0 * km - km2) / (2.0 * h * h * h),
    ]
}

fn check_consistent(g: &Graph, pinning: &Pinning, sigma: &SpinConfiguration) -> Result<()> {
    if sigma.n() != g.n() {
        return Err(Error::invalid("configuration size does not match graph"));
    }
    if !pinning.consistent_with(sigma.spins()) {
        return Err(Error::invalid("configuration disagrees with pinning"));
    }
    Ok(())
}

pub fn gibbs_prob_with(table: &PartitionTable, lambda: f64, sigma: &SpinConfiguration) -> f64 {
    (sigma.plus_count() as f64 * lambda.ln() + table.beta * sigma.mono_edges() as f64
        - table.log_z(lambda))
    .exp()
}

pub fn fixed_mag_prob_with(table: &PartitionTable, sigma: &SpinConfiguration) -> f64 {
    (table.beta * sigma.mono_edges() as f64 - table.log_zhat(sigma.plus_count())).exp()
}

pub fn gibbs_prob(
    g: &Graph,
    params: IsingParams,
    pinning: &Pinning,
    sigma: &SpinConfiguration,
) -> Result<f64> {
    check_consistent(g, pinning, sigma)?;
    let table = exact_partition_table(g, params.beta, pinning)?;
    Ok(gibbs_prob_with(&table, params.lambda, sigma))
}

pub fn fixed_mag_prob(
    g: &Graph,
    beta: f64,
    k: usize,
    pinning: &Pinning,
    sigma: &SpinConfiguration,
) -> Result<f64> {
    check_consistent(g, pinning, sigma)?;
    if sigma.plus_count() != k {
        return Err(Error::invalid(format!(
            "configuration has {} pluses, expected {k}",
            sigma.plus_count()
        )));
    }
    let table = exact_partition_table(g, beta, pinning)?;
    Ok(fixed_mag_prob_with(&table, sigma))
}

/// Plus-masks of all configurations consistent with `pinning`, optionally
/// restricted to plus count `k`. Requires n ≤ 64.
pub fn enumerate_masks(g: &Graph, pinning: &Pinning, k: Option<usize>, cap: usize) -> Result<Vec<u64>> {
    if g.n() > 64 {
        return Err(Error::TooLarge {
            what: "vertices for mask enumeration",
            size: g.n(),
            cap: 64,
        });
    }
    pinning.validate(g.n())?;
    let free = pinning.free_vertices(g.n());
    let base: u64 = pinning
        .iter()
        .filter(|&(_, s)| s == 1)
        .fold(0, |m, (v, _)| m | (1 << v));
    let count = match k {
        None => 2f64.powi(free.len() as i32),
        Some(k) => {
            let need = k.checked_sub(pinning.plus_count());
            need.map_or(0.0, |need| util::binom(free.len(), need))
        }
    };
    if count > cap as f64 {
        return Err(Error::TooLarge {
            what: "states",
            size: count as usize,
            cap,
        });
    }
    let out = match k {
        None => (0u64..(1u64 << free.len()))
            .map(|bits| {
                free.iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .fold(base, |m, (_, &v)| m | (1 << v))
            })
            .collect(),
        Some(k) => match k.checked_sub(pinning.plus_count()) {
            None => Vec::new(),
            Some(need) => util::combinations(&free, need)
                .into_iter()
                .map(|c| base | util::mask_of(&c))
                .collect(),
        },
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Graph {
        Graph::complete(2)
    }

    #[test]
    fn mono_examples() {
        let g = k2();
        assert_eq!(monochromatic_edges(&g, &[1, 1]).unwrap(), 1);
        assert_eq!(monochromatic_edges(&g, &[1, -1]).unwrap(), 0);
        assert_eq!(monochromatic_edges(&Graph::complete(4), &[1, 1, -1, -1]).unwrap(), 2);
        assert!(monochromatic_edges(&g, &[1]).is_err());
    }

    #[test]
    fn k2_table() {
        let g = k2();
        let t0 = exact_partition_table(&g, 0.0, &Pinning::none()).unwrap();
        let counts: Vec<f64> = t0.log_z_by_k.iter().map(|x| x.exp()).collect();
        assert!((counts[0] - 1.0).abs() < 1e-12 && (counts[1] - 2.0).abs() < 1e-12);
        assert!((t0.log_z(1.0).exp() - 4.0).abs() < 1e-12);
        let (b, l) = (0.7, 1.3);
        let t = exact_partition_table(&g, b, &Pinning::none()).unwrap();
        let want = l * l * f64::exp(b) + 2.0 * l + f64::exp(b);
        assert!((t.log_z(l).exp() - want).abs() < 1e-12);
        let tp = exact_partition_table(&g, b, &Pinning::plus(&[0])).unwrap();
        assert!((tp.log_z(l).exp() - (l * l * f64::exp(b) + l)).abs() < 1e-12);
        assert_eq!(tp.log_z_by_k[0], f64::NEG_INFINITY);
    }

    #[test]
    fn json_round_trip() {
        let t = exact_partition_table(&k2(), 0.5, &Pinning::plus(&[1])).unwrap();
        let s = t.to_json();
        assert!(s.contains("\"logZ_by_k\":[null,"));
        assert_eq!(PartitionTable::from_json(&s).unwrap(), t);
    }

    #[test]
    fn cumulants_k2_pinned() {
        let t = exact_partition_table(&k2(), 0.3, &Pinning::plus(&[0, 1])).unwrap();
        let c = cumulants_of_size(&t, 1.0, 3).unwrap();
        assert!((c.kappa(1) - 2.0).abs() < 1e-12);
        assert_eq!(c.kappa(2), 0.0);
        assert!(c.degenerate);
    }

    #[test]
    fn fixed_mag_examples() {
        let g = k2();
        let s = SpinConfiguration::from_spins(&g, vec![1, -1]).unwrap();
        let p = gibbs_prob(&g, IsingParams::new(0.0, 1.0).unwrap(), &Pinning::none(), &s).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
        let q = fixed_mag_prob(&g, 2.0, 1, &Pinning::none(), &s).unwrap();
        assert!((q - 0.5).abs() < 1e-12);
        assert!(fixed_mag_prob(&g, 2.0, 2, &Pinning::none(), &s).is_err());
        assert!(gibbs_prob(&g, IsingParams::new(0.0, 1.0).unwrap(), &Pinning::plus(&[1]), &s).is_err());
    }

    #[test]
    fn cap_enforced() {
        let g = Graph::cycle(30);
        assert!(matches!(
            DensityOfStates::enumerate(&g, &Pinning::none()),
            Err(Error::TooLarge { .. })
        ));
        assert!(DensityOfStates::enumerate(&g, &Pinning::plus(&(0..10).collect::<Vec<_>>())).is_ok());
    }

    #[test]
    fn mask_enumeration() {
        let g = Graph::complete(4);
        let m = enumerate_masks(&g, &Pinning::plus(&[0]), Some(2), 1000).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.iter().all(|x| x & 1 == 1 && x.count_ones() == 2));
        assert_eq!(enumerate_masks(&g, &Pinning::none(), None, 1000).unwrap().len(), 16);
    }
}
