//! Glauber, Kawasaki, +1-down-up and (k,ℓ)-down-up chains.
//!
//! Each chain is a seeded step on a [`ChainState`] and, on enumerable
//! instances, an explicit matrix via [`build_transition_matrix`].

mod coupling;
mod matrix;

pub use coupling::{
    exact_coupled_expectation, exact_coupled_law, CoupledExpectation, CoupledState, CouplingConstants,
};
pub use matrix::{build_transition_matrix, TransitionMatrix, DEFAULT_STATE_CAP};

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::ising_measures::{IsingParams, Pinning, SpinConfiguration};
use crate::util::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    Glauber,
    Kawasaki,
    Downup,
    KlDownup,
}

impl std::str::FromStr for ChainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "glauber" => Ok(ChainKind::Glauber),
            "kawasaki" => Ok(ChainKind::Kawasaki),
            "downup" => Ok(ChainKind::Downup),
            "kl-downup" | "kl_downup" => Ok(ChainKind::KlDownup),
            _ => Err(Error::invalid(format!("unknown chain {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainKernel {
    pub kind: ChainKind,
    pub beta: f64,
    /// Glauber only.
    pub lambda: Option<f64>,
    /// Plus count for the fixed-magnetization chains.
    pub k: Option<usize>,
    pub pinning: Pinning,
    /// (k,ℓ)-down-up only.
    pub ell: Option<usize>,
}

impl ChainKernel {
    pub fn glauber(params: IsingParams, pinning: Pinning) -> Self {
        ChainKernel {
            kind: ChainKind::Glauber,
            beta: params.beta,
            lambda: Some(params.lambda),
            k: None,
            pinning,
            ell: None,
        }
    }

    pub fn kawasaki(beta: f64, k: usize, pinning: Pinning) -> Self {
        ChainKernel {
            kind: ChainKind::Kawasaki,
            beta,
            lambda: None,
            k: Some(k),
            pinning,
            ell: None,
        }
    }

    pub fn downup(beta: f64, k: usize, pinning: Pinning) -> Self {
        ChainKernel {
            kind: ChainKind::Downup,
            ..ChainKernel::kawasaki(beta, k, pinning)
        }
    }

    pub fn kl_downup(beta: f64, k: usize, ell: usize) -> Self {
        ChainKernel {
            kind: ChainKind::KlDownup,
            ell: Some(ell),
            ..ChainKernel::kawasaki(beta, k, Pinning::none())
        }
    }

    pub fn params(&self) -> Option<IsingParams> {
        self.lambda.map(|lambda| IsingParams {
            beta: self.beta,
            lambda,
        })
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta must be finite and >= 0"));
        }
        self.pinning.validate(g.n())?;
        match self.kind {
            ChainKind::Glauber => {
                IsingParams::new(self.beta, self.lambda.ok_or_else(|| Error::invalid("glauber needs lambda"))?)?;
            }
            ChainKind::Kawasaki | ChainKind::Downup | ChainKind::KlDownup => {
                let k = self.k.ok_or_else(|| Error::invalid("fixed-magnetization chain needs k"))?;
                if !self.pinning.is_plus_only() {
                    return Err(Error::invalid(
                        "fixed-magnetization chains accept plus-only pinnings",
                    ));
                }
                let u = self.pinning.len();
                if k > g.n() {
                    return Err(Error::invalid(format!("k = {k} exceeds n = {}", g.n())));
                }
                if k <= u {
                    return Err(Error::invalid(format!(
                        "need k > |U|, got k = {k}, |U| = {u}"
                    )));
                }
                if self.kind == ChainKind::Kawasaki && k >= g.n() {
                    return Err(Error::invalid("kawasaki needs at least one minus"));
                }
                if self.kind == ChainKind::KlDownup {
                    let ell = self.ell.ok_or_else(|| Error::invalid("kl-downup needs ell"))?;
                    if ell >= k {
                        return Err(Error::invalid(format!("need ell < k, got ell = {ell}, k = {k}")));
                    }
                    if !self.pinning.is_empty() {
                        return Err(Error::invalid("kl-downup is defined without pinning"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn step(&self, g: &Graph, state: &mut ChainState, rng: &mut Rng) -> Result<StepInfo> {
        match self.kind {
            ChainKind::Glauber => {
                glauber_step(g, self.params().expect("validated"), state, rng);
                Ok(StepInfo::default())
            }
            ChainKind::Kawasaki => kawasaki_step(g, self.beta, state, rng).map(|_| StepInfo::default()),
            ChainKind::Downup => {
                downup_step(g, self.beta, state, rng);
                Ok(StepInfo::default())
            }
            ChainKind::KlDownup => kl_downup_step(
                g,
                self.beta,
                self.ell.expect("validated"),
                state,
                rng,
                KlMode::Exact,
            ),
        }
    }
}

/// Extra information from a step; `approximate` marks an inner-Kawasaki
/// resample in place of an exact one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepInfo {
    pub approximate: bool,
}

/// A configuration with index lists of its free plus and free minus vertices.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub sigma: SpinConfiguration,
    free: Vec<usize>,
    free_plus: Vec<usize>,
    free_minus: Vec<usize>,
    slot: Vec<usize>,
    pinned: Vec<bool>,
}

const PINNED: usize = usize::MAX;

impl ChainState {
    pub fn new(sigma: SpinConfiguration, pinning: &Pinning) -> Result<Self> {
        if !pinning.consistent_with(sigma.spins()) {
            return Err(Error::invalid("starting configuration disagrees with pinning"));
        }
        let n = sigma.n();
        let mut st = ChainState {
            free: Vec::new(),
            free_plus: Vec::new(),
            free_minus: Vec::new(),
            slot: vec![PINNED; n],
            pinned: (0..n).map(|v| pinning.is_pinned(v)).collect(),
            sigma,
        };
        for v in 0..n {
            if st.pinned[v] {
                continue;
            }
            st.free.push(v);
            let list = if st.sigma.spin(v) == 1 {
                &mut st.free_plus
            } else {
                &mut st.free_minus
            };
            st.slot[v] = list.len();
            list.push(v);
        }
        Ok(st)
    }

    pub fn free_plus(&self) -> &[usize] {
        &self.free_plus
    }

    pub fn free_minus(&self) -> &[usize] {
        &self.free_minus
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    fn detach(&mut self, v: usize) {
        let list = if self.sigma.spin(v) == 1 {
            &mut self.free_plus
        } else {
            &mut self.free_minus
        };
        let i = self.slot[v];
        let last = *list.last().expect("nonempty");
        list.swap_remove(i);
        if last != v {
            self.slot[last] = i;
        }
    }

    fn attach(&mut self, v: usize) {
        let list = if self.sigma.spin(v) == 1 {
            &mut self.free_plus
        } else {
            &mut self.free_minus
        };
        self.slot[v] = list.len();
        list.push(v);
    }

    /// Flips a free vertex.
    pub fn flip(&mut self, g: &Graph, v: usize) {
        debug_assert!(!self.pinned[v]);
        self.detach(v);
        self.sigma.flip(g, v);
        self.attach(v);
    }
}

/// P(σ_v = + | rest) = 1 / (1 + e^{−βS}/λ), S = Σ_{w∈N(v), w≠v} σ_w.
#[inline]
pub fn glauber_plus_probability(g: &Graph, spins: &[i8], v: usize, params: IsingParams) -> f64 {
    let s: i64 = g
        .neighbors(v)
        .iter()
        .filter(|&&w| w != v)
        .map(|&w| spins[w] as i64)
        .sum();
    1.0 / (1.0 + (-params.beta * s as f64).exp() / params.lambda)
}

pub fn glauber_step(g: &Graph, params: IsingParams, state: &mut ChainState, rng: &mut Rng) {
    if state.free.is_empty() {
        return;
    }
    let v = state.free[rng.random_range(0..state.free.len())];
    let p = glauber_plus_probability(g, state.sigma.spins(), v, params);
    let want = if rng.random::<f64>() < p { 1 } else { -1 };
    if state.sigma.spin(v) != want {
        state.flip(g, v);
    }
}

/// Change in m_G from moving the plus at `u` to the minus at `w`.
pub fn swap_delta(g: &Graph, sigma: &mut SpinConfiguration, u: usize, w: usize) -> i64 {
    let d1 = sigma.flip_delta(g, u);
    sigma.flip(g, u);
    let d2 = sigma.flip_delta(g, w);
    sigma.flip(g, u);
    d1 + d2
}

/// Returns whether the proposal was accepted.
pub fn kawasaki_step(g: &Graph, beta: f64, state: &mut ChainState, rng: &mut Rng) -> Result<bool> {
    if state.free_plus.is_empty() || state.free_minus.is_empty() {
        return Err(Error::invalid("no swappable (+, -) pair"));
    }
    let u = state.free_plus[rng.random_range(0..state.free_plus.len())];
    let w = state.free_minus[rng.random_range(0..state.free_minus.len())];
    let dm = swap_delta(g, &mut state.sigma, u, w);
    let accept = dm >= 0 || rng.random::<f64>() < (beta * dm as f64).exp();
    if accept {
        state.flip(g, u);
        state.flip(g, w);
    }
    Ok(accept)
}

pub fn downup_step(g: &Graph, beta: f64, state: &mut ChainState, rng: &mut Rng) {
    if state.free_plus.is_empty() {
        return;
    }
    let v = state.free_plus[rng.random_range(0..state.free_plus.len())];
    state.flip(g, v);
    let deltas: Vec<i64> = state
        .free_minus
        .iter()
        .map(|&w| state.sigma.flip_delta(g, w))
        .collect();
    let top = *deltas.iter().max().expect("v itself is a candidate");
    let weights: Vec<f64> = deltas
        .iter()
        .map(|&d| (beta * (d - top) as f64).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut pick = state.free_minus.len() - 1;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            pick = i;
            break;
        }
        u -= w;
    }
    let w = state.free_minus[pick];
    state.flip(g, w);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlMode {
    /// Exact resample by enumerating completions (up to [`DEFAULT_STATE_CAP`]).
    Exact,
    /// Falls back to this many inner pinned-Kawasaki steps when too large.
    ApproximateFallback(usize),
}

pub fn kl_downup_step(
    g: &Graph,
    beta: f64,
    ell: usize,
    state: &mut ChainState,
    rng: &mut Rng,
    mode: KlMode,
) -> Result<StepInfo> {
    let plus = state.sigma.plus_vertices();
    let k = plus.len();
    if ell >= k {
        return Err(Error::invalid(format!("need ell < k, got ell = {ell}, k = {k}")));
    }
    let keep: Vec<usize> = sample(rng, k, ell).into_iter().map(|i| plus[i]).collect();
    let pin = Pinning::plus(&keep);
    let rest: Vec<usize> = pin.free_vertices(g.n());
    let count = util::binom(rest.len(), k - ell);
    if count <= DEFAULT_STATE_CAP as f64 {
        let completions = util::combinations(&rest, k - ell);
        let logw: Vec<f64> = completions
            .iter()
            .map(|c| {
                let mut set = keep.clone();
                set.extend_from_slice(c);
                let s = SpinConfiguration::from_plus_set(g, &set).expect("in range");
                beta * s.mono_edges() as f64
            })
            .collect();
        let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logw.iter().map(|x| (x - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = completions.len() - 1;
        for (i, wi) in w.iter().enumerate() {
            if u < *wi {
                pick = i;
                break;
            }
            u -= wi;
        }
        let mut target = keep.clone();
        target.extend_from_slice(&completions[pick]);
        let new = SpinConfiguration::from_plus_set(g, &target)?;
        *state = ChainState::new(new, &Pinning::none())?;
        return Ok(StepInfo { approximate: false });
    }
    match mode {
        KlMode::Exact => Err(Error::TooLarge {
            what: "kl-downup completions",
            size: count as usize,
            cap: DEFAULT_STATE_CAP,
        }),
        KlMode::ApproximateFallback(inner) => {
            let mut inner_state = ChainState::new(state.sigma.clone(), &pin)?;
            for _ in 0..inner {
                if inner_state.free_plus.is_empty() || inner_state.free_minus.is_empty() {
                    break;
                }
                kawasaki_step(g, beta, &mut inner_state, rng)?;
            }
            *state = ChainState::new(inner_state.sigma, &Pinning::none())?;
            Ok(StepInfo { approximate: true })
        }
    }
}
