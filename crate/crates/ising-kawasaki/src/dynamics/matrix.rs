use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use super::{glauber_plus_probability, ChainKernel, ChainKind};
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::ising_measures::{enumerate_masks, flip_delta, monochromatic_edges};
use crate::util::{self, log_sum_exp};

pub const DEFAULT_STATE_CAP: usize = 200_000;

/// Exact kernel over enumerated states (plus-set bitmasks) with sparse rows.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub n: usize,
    pub states: Vec<u64>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub pi: Vec<f64>,
    index: HashMap<u64, usize>,
}

impl TransitionMatrix {
    pub fn from_parts(n: usize, states: Vec<u64>, rows: Vec<Vec<(usize, f64)>>, pi: Vec<f64>) -> Self {
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        TransitionMatrix {
            n,
            states,
            rows,
            pi,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map_or(0.0, |(_, p)| *p)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                m[(i, j)] += p;
            }
        }
        m
    }

    pub fn row_sum_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// max_y |(πP)(y) − π(y)|
    pub fn stationarity_residual(&self) -> f64 {
        let pp = self.apply_left(&self.pi);
        pp.iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// max |π(x)P(x,y) − π(y)P(y,x)|
    pub fn detailed_balance_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                let back = self.entry(j, i);
                worst = worst.max((self.pi[i] * p - self.pi[j] * back).abs());
            }
        }
        worst
    }

    /// Row vector times P.
    pub fn apply_left(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            if v[i] == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += v[i] * p;
            }
        }
        out
    }

    /// (I + P) / 2
    pub fn lazy(&self) -> TransitionMatrix {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut acc: BTreeMap<usize, f64> = r.iter().map(|&(j, p)| (j, p / 2.0)).collect();
                *acc.entry(i).or_default() += 0.5;
                acc.into_iter().collect()
            })
            .collect();
        TransitionMatrix::from_parts(self.n, self.states.clone(), rows, self.pi.clone())
    }

    /// Stationary vector by power iteration from uniform, on the lazy kernel.
    pub fn power_stationary(&self, iterations: usize) -> Vec<f64> {
        let lazy = self.lazy();
        let mut v = vec![1.0 / self.len() as f64; self.len()];
        for _ in 0..iterations {
            v = lazy.apply_left(&v);
        }
        v
    }
}

fn push(acc: &mut BTreeMap<usize, f64>, j: usize, p: f64) {
    if p > 0.0 {
        *acc.entry(j).or_default() += p;
    }
}

fn spins_of(n: usize, mask: u64) -> Vec<i8> {
    (0..n).map(|v| if mask >> v & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn build_transition_matrix(kernel: &ChainKernel, g: &Graph) -> Result<TransitionMatrix> {
    build_transition_matrix_with_cap(kernel, g, DEFAULT_STATE_CAP)
}

pub fn build_transition_matrix_with_cap(kernel: &ChainKernel, g: &Graph, cap: usize) -> Result<TransitionMatrix> {
    kernel.validate(g)?;
    let n = g.n();
    let beta = kernel.beta;
    let states = enumerate_masks(g, &kernel.pinning, kernel.k, cap)?;
    if states.is_empty() {
        return Err(Error::Degenerate("empty state space".into()));
    }
    let index: HashMap<u64, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mono: Vec<usize> = states
        .iter()
        .map(|&s| monochromatic_edges(g, &spins_of(n, s)).expect("sized"))
        .collect();
    let log_lambda = kernel.lambda.map_or(0.0, f64::ln);
    let logw: Vec<f64> = states
        .iter()
        .zip(&mono)
        .map(|(&s, &m)| beta * m as f64 + s.count_ones() as f64 * log_lambda)
        .collect();
    let log_z = log_sum_exp(&logw);
    let pi: Vec<f64> = logw.iter().map(|w| (w - log_z).exp()).collect();
    let pinned_mask: u64 = kernel.pinning.vertices().iter().fold(0, |m, &v| m | (1 << v));
    let free: Vec<usize> = kernel.pinning.free_vertices(n);

    let mut rows = Vec::with_capacity(states.len());
    match kernel.kind {
        ChainKind::Glauber => {
            let params = kernel.params().expect("validated");
            let f = free.len() as f64;
            for &s in &states {
                let spins = spins_of(n, s);
                let mut acc = BTreeMap::new();
                for &v in &free {
                    let p_plus = glauber_plus_probability(g, &spins, v, params);
                    let (stay, go) = if spins[v] == 1 {
                        (p_plus, 1.0 - p_plus)
                    } else {
                        (1.0 - p_plus, p_plus)
                    };
                    push(&mut acc, index[&s], stay / f);
                    push(&mut acc, index[&(s ^ (1 << v))], go / f);
                }
                if free.is_empty() {
                    push(&mut acc, index[&s], 1.0);
                }
                rows.push(acc.into_iter().collect());
            }
        }
        ChainKind::Kawasaki => {
            for &s in &states {
                let mut spins = spins_of(n, s);
                let plus: Vec<usize> = util::members(s & !pinned_mask);
                let minus: Vec<usize> = util::members(!s & !pinned_mask & low_mask(n));
                let norm = (plus.len() * minus.len()) as f64;
                let mut acc = BTreeMap::new();
                let mut moved = 0.0;
                for &u in &plus {
                    let d1 = flip_delta(g, &spins, u);
                    spins[u] = -1;
                    for &w in &minus {
                        let dm = d1 + flip_delta(g, &spins, w);
                        let p = (beta * dm as f64).exp().min(1.0) / norm;
                        push(&mut acc, index[&(s ^ (1 << u) ^ (1 << w))], p);
                        moved += p;
                    }
                    spins[u] = 1;
                }
                push(&mut acc, index[&s], 1.0 - moved);
                rows.push(acc.into_iter().collect());
            }
        }
        ChainKind::Downup => {
            for &s in &states {
                let mut spins = spins_of(n, s);
                let plus: Vec<usize> = util::members(s & !pinned_mask);
                let mut acc = BTreeMap::new();
                for &v in &plus {
                    spins[v] = -1;
                    let base = s ^ (1 << v);
                    let cands: Vec<usize> = util::members(!base & !pinned_mask & low_mask(n));
                    let lw: Vec<f64> = cands
                        .iter()
                        .map(|&w| beta * flip_delta(g, &spins, w) as f64)
                        .collect();
                    let lz = log_sum_exp(&lw);
                    for (&w, l) in cands.iter().zip(&lw) {
                        push(&mut acc, index[&(base | (1 << w))], (l - lz).exp() / plus.len() as f64);
                    }
                    spins[v] = 1;
                }
                rows.push(acc.into_iter().collect());
            }
        }
        ChainKind::KlDownup => {
            let k = kernel.k.expect("validated");
            let ell = kernel.ell.expect("validated");
            let mut cache: HashMap<u64, Vec<(usize, f64)>> = HashMap::new();
            let choose = util::binom(k, ell);
            for &s in &states {
                let mut acc = BTreeMap::new();
                for u in util::combinations(&util::members(s), ell) {
                    let umask = util::mask_of(&u);
                    let dist = cache.entry(umask).or_insert_with(|| {
                        let sup: Vec<usize> = states
                            .iter()
                            .enumerate()
                            .filter(|(_, &t)| t & umask == umask)
                            .map(|(i, _)| i)
                            .collect();
                        let lz = log_sum_exp(&sup.iter().map(|&i| logw[i]).collect::<Vec<_>>());
                        sup.iter().map(|&i| (i, (logw[i] - lz).exp())).collect()
                    });
                    for &(j, p) in dist.iter() {
                        push(&mut acc, j, p / choose);
                    }
                }
                rows.push(acc.into_iter().collect());
            }
        }
    }
    Ok(TransitionMatrix {
        n,
        states,
        rows,
        pi,
        index,
    })
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
