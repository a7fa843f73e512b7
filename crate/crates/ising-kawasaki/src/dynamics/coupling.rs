//! Coupled pinned-Kawasaki chains in injection form.
//!
//! Each chain is a list `pos[1..k']` of its free plus vertices. One step picks
//! an index i and a minus v of X; Y targets v too when v is minus in Y, and
//! otherwise a uniform vertex of V⁻(Y)∖V⁻(X). A single uniform u accepts
//! X iff u < φ_X and Y iff u < φ_Y, so both accept with min(φ_X, φ_Y), both
//! reject with min(1−φ_X, 1−φ_Y), and the rest is a single accept by the
//! chain with the larger φ.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::ising_measures::{flip_delta, Pinning};
use crate::util::Rng;

/// Constants of the contraction argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConstants {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl CouplingConstants {
    /// b₁ = e^{−2βΔ}/4, b₂ = 2Δ, a₁ = e^{−2βΔ}/2, a₂ = 2Δ² + 7Δ + 2.
    pub fn analytic(delta: usize, beta: f64) -> Self {
        let dl = delta as f64;
        let e = (-2.0 * beta * dl).exp();
        CouplingConstants {
            a1: e / 2.0,
            a2: 2.0 * dl * dl + 7.0 * dl + 2.0,
            b1: e / 4.0,
            b2: 2.0 * dl,
        }
    }

    /// φ = a₁ / (2 b₂)
    pub fn phi(&self) -> f64 {
        self.a1 / (2.0 * self.b2)
    }

    /// c = ½ min(a₁, b₁)
    pub fn c(&self) -> f64 {
        0.5 * self.a1.min(self.b1)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Side {
    spins: Vec<i8>,
    pos: Vec<usize>,
    minus: Vec<usize>,
    slot: Vec<usize>,
}

impl Side {
    fn new(n: usize, pinned_plus: &[usize], pos: Vec<usize>) -> Self {
        let mut spins = vec![-1i8; n];
        for &v in pinned_plus.iter().chain(&pos) {
            spins[v] = 1;
        }
        let mut minus = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for v in 0..n {
            if spins[v] == -1 {
                slot[v] = minus.len();
                minus.push(v);
            }
        }
        Side {
            spins,
            pos,
            minus,
            slot,
        }
    }

    /// Moves the plus at index i to the minus vertex w.
    fn apply(&mut self, i: usize, w: usize) {
        let u = self.pos[i];
        let s = self.slot[w];
        self.minus[s] = u;
        self.slot[u] = s;
        self.slot[w] = usize::MAX;
        self.spins[u] = -1;
        self.spins[w] = 1;
        self.pos[i] = w;
    }

    fn acceptance(&mut self, g: &Graph, beta: f64, i: usize, w: usize) -> f64 {
        let u = self.pos[i];
        let d1 = flip_delta(g, &self.spins, u);
        self.spins[u] = -1;
        let d2 = flip_delta(g, &self.spins, w);
        self.spins[u] = 1;
        (beta * (d1 + d2) as f64).exp().min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    x: Side,
    y: Side,
    pinned: Vec<usize>,
    pub phi: f64,
    d: Vec<usize>,
    b: Vec<usize>,
}

impl CoupledState {
    /// Builds the injection form of two plus sets, pairing common vertices
    /// on common indices.
    pub fn new(g: &Graph, pinning: &Pinning, x_plus: &[usize], y_plus: &[usize], phi: f64) -> Result<Self> {
        if !pinning.is_plus_only() {
            return Err(Error::invalid("coupled kawasaki takes plus-only pinnings"));
        }
        let pinned = pinning.vertices();
        let free = |s: &[usize]| -> Result<Vec<usize>> {
            let mut v: Vec<usize> = s.iter().copied().filter(|u| !pinning.is_pinned(*u)).collect();
            v.sort_unstable();
            v.dedup();
            if v.iter().any(|&u| u >= g.n()) {
                return Err(Error::invalid("plus vertex out of range"));
            }
            Ok(v)
        };
        let xs = free(x_plus)?;
        let ys = free(y_plus)?;
        if xs.len() != ys.len() {
            return Err(Error::invalid("X and Y need the same number of free pluses"));
        }
        let common: Vec<usize> = xs.iter().copied().filter(|v| ys.contains(v)).collect();
        let mut xp = common.clone();
        let mut yp = common.clone();
        xp.extend(xs.iter().filter(|v| !common.contains(v)));
        yp.extend(ys.iter().filter(|v| !common.contains(v)));
        let mut st = CoupledState {
            x: Side::new(g.n(), &pinned, xp),
            y: Side::new(g.n(), &pinned, yp),
            pinned,
            phi,
            d: Vec::new(),
            b: Vec::new(),
        };
        st.recompute(g);
        Ok(st)
    }

    pub fn k_prime(&self) -> usize {
        self.x.pos.len()
    }

    pub fn x_positions(&self) -> &[usize] {
        &self.x.pos
    }

    pub fn y_positions(&self) -> &[usize] {
        &self.y.pos
    }

    pub fn x_mask(&self) -> u64 {
        self.x.pos.iter().chain(&self.pinned).fold(0, |m, &v| m | (1 << v))
    }

    pub fn y_mask(&self) -> u64 {
        self.y.pos.iter().chain(&self.pinned).fold(0, |m, &v| m | (1 << v))
    }

    pub fn disagreements(&self) -> &[usize] {
        &self.d
    }

    pub fn bad_disagreements(&self) -> &[usize] {
        &self.b
    }

    pub fn rho(&self) -> f64 {
        self.phi * self.d.len() as f64 + self.b.len() as f64
    }

    pub fn coalesced(&self) -> bool {
        self.d.is_empty()
    }

    fn recompute(&mut self, g: &Graph) {
        let kp = self.x.pos.len();
        self.d = (0..kp).filter(|&j| self.x.pos[j] != self.y.pos[j]).collect();
        let mut agree = vec![false; g.n()];
        for j in 0..kp {
            if self.x.pos[j] == self.y.pos[j] {
                agree[self.x.pos[j]] = true;
            }
        }
        self.b = self
            .d
            .iter()
            .copied()
            .filter(|&j| {
                g.neighbors(self.x.pos[j])
                    .iter()
                    .chain(g.neighbors(self.y.pos[j]))
                    .any(|&w| agree[w])
            })
            .collect();
    }

    /// Targets in V⁻(Y) ∖ V⁻(X), i.e. plus in X and minus in Y.
    fn y_only_minus(&self) -> Vec<usize> {
        self.x
            .pos
            .iter()
            .copied()
            .filter(|&v| self.y.spins[v] == -1)
            .collect()
    }

    /// All outcomes of one step as (probability, next state).
    fn outcomes(&self, g: &Graph, beta: f64) -> Vec<(f64, CoupledState)> {
        let kp = self.k_prime();
        let nm = self.x.minus.len();
        let mut out = Vec::new();
        let y_only = self.y_only_minus();
        let mut scratch = self.clone();
        for i in 0..kp {
            for &v in &self.x.minus {
                let targets: Vec<(f64, usize)> = if self.y.spins[v] == -1 {
                    vec![(1.0, v)]
                } else {
                    y_only.iter().map(|&w| (1.0 / y_only.len() as f64, w)).collect()
                };
                for (pt, vy) in targets {
                    let base = pt / (kp * nm) as f64;
                    let px = scratch.x.acceptance(g, beta, i, v);
                    let py = scratch.y.acceptance(g, beta, i, vy);
                    let both = px.min(py);
                    let single = (px - py).abs();
                    let none = 1.0 - px.max(py);
                    if both > 0.0 {
                        let mut s = self.clone();
                        s.x.apply(i, v);
                        s.y.apply(i, vy);
                        s.recompute(g);
                        out.push((base * both, s));
                    }
                    if single > 0.0 {
                        let mut s = self.clone();
                        if px > py {
                            s.x.apply(i, v);
                        } else {
                            s.y.apply(i, vy);
                        }
                        s.recompute(g);
                        out.push((base * single, s));
                    }
                    if none > 0.0 {
                        out.push((base * none, self.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn step(&mut self, g: &Graph, beta: f64, rng: &mut Rng) {
        let kp = self.k_prime();
        if kp == 0 || self.x.minus.is_empty() {
            return;
        }
        let i = rng.random_range(0..kp);
        let v = self.x.minus[rng.random_range(0..self.x.minus.len())];
        let vy = if self.y.spins[v] == -1 {
            v
        } else {
            let y_only = self.y_only_minus();
            y_only[rng.random_range(0..y_only.len())]
        };
        let px = self.x.acceptance(g, beta, i, v);
        let py = self.y.acceptance(g, beta, i, vy);
        let u = rng.random::<f64>();
        let moved_x = u < px;
        let moved_y = u < py;
        if moved_x {
            self.x.apply(i, v);
        }
        if moved_y {
            self.y.apply(i, vy);
        }
        if moved_x || moved_y {
            self.recompute(g);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledExpectation {
    pub d: f64,
    pub b: f64,
    pub rho: f64,
}

/// E[|D'|], E[|B'|], E[ρ'] given the current pair, by enumerating every
/// proposal and acceptance outcome.
pub fn exact_coupled_expectation(g: &Graph, beta: f64, state: &CoupledState) -> CoupledExpectation {
    let mut e = CoupledExpectation {
        d: 0.0,
        b: 0.0,
        rho: 0.0,
    };
    for (p, s) in state.outcomes(g, beta) {
        e.d += p * s.d.len() as f64;
        e.b += p * s.b.len() as f64;
        e.rho += p * s.rho();
    }
    e
}

/// Exact one-step joint law of (X', Y') as (probability, x mask, y mask).
pub fn exact_coupled_law(g: &Graph, beta: f64, state: &CoupledState) -> Vec<(f64, u64, u64)> {
    state
        .outcomes(g, beta)
        .into_iter()
        .map(|(p, s)| (p, s.x_mask(), s.y_mask()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util;

    #[test]
    fn diagonal_is_sticky() {
        let g = Graph::cycle(8);
        let mut st = CoupledState::new(&g, &Pinning::none(), &[0, 3, 5], &[5, 0, 3], 0.1).unwrap();
        assert!(st.coalesced());
        let mut rng = util::rng(3, 0);
        for _ in 0..200 {
            st.step(&g, 0.9, &mut rng);
            assert!(st.coalesced());
            assert_eq!(st.x_positions(), st.y_positions());
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let g = Graph::complete(5);
        let st = CoupledState::new(&g, &Pinning::none(), &[0, 1], &[2, 3], 0.2).unwrap();
        let total: f64 = st.outcomes(&g, 0.7).iter().map(|(p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(st.disagreements().len(), 2);
        let mixed = CoupledState::new(&g, &Pinning::none(), &[0, 1], &[0, 3], 0.2).unwrap();
        assert_eq!(mixed.disagreements(), &[1]);
        assert_eq!(mixed.bad_disagreements(), &[1]);
    }

    #[test]
    fn analytic_phi() {
        let c = CouplingConstants::analytic(3, 0.0);
        assert!((c.phi() - 0.5 / 12.0).abs() < 1e-15);
        assert!((c.c() - 0.125).abs() < 1e-15);
    }
}
