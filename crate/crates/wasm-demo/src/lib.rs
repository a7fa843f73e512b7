//! Browser bindings: thresholds, the first-moment landscape, and a live
//! Glauber run on a random regular graph.

use ising_kawasaki::dynamics::{ChainKernel, ChainState};
use ising_kawasaki::graphs::random_regular;
use ising_kawasaki::ising_measures::{IsingParams, Pinning, SpinConfiguration};
use ising_kawasaki::mean_field::{critical_points, landscape_curve};
use ising_kawasaki::tree_thresholds::thresholds;
use ising_kawasaki::{util, Graph};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Threshold set at (Δ, β) as a JSON string.
#[wasm_bindgen]
pub fn thresholds_json(delta: usize, beta: f64) -> Result<String, JsValue> {
    let t = thresholds(delta, beta, None).map_err(js_err)?;
    serde_json::to_string(&t).map_err(js_err)
}

/// `{"curve": [[eta, f], ...], "critical_points": [...]}`.
#[wasm_bindgen]
pub fn landscape_json(delta: usize, beta: f64, lambda: f64, points: usize) -> Result<String, JsValue> {
    let curve = landscape_curve(delta, beta, lambda, points).map_err(js_err)?;
    let cps = critical_points(delta, beta, lambda, 1e-3).map_err(js_err)?;
    serde_json::to_string(&serde_json::json!({ "curve": curve, "critical_points": cps })).map_err(js_err)
}

#[wasm_bindgen]
pub struct GlauberRun {
    graph: Graph,
    kernel: ChainKernel,
    state: ChainState,
    rng: util::Rng,
    steps: u64,
}

#[wasm_bindgen]
impl GlauberRun {
    /// Starts from all minus on a random `delta`-regular graph with `n` vertices.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, delta: usize, beta: f64, lambda: f64, seed: u64) -> Result<GlauberRun, JsValue> {
        let graph = random_regular(n, delta, seed, true).map_err(js_err)?;
        let params = IsingParams::new(beta, lambda).map_err(js_err)?;
        let kernel = ChainKernel::glauber(params, Pinning::none());
        let state = ChainState::new(SpinConfiguration::all_minus(&graph), &kernel.pinning).map_err(js_err)?;
        Ok(GlauberRun {
            graph,
            kernel,
            state,
            rng: util::rng(seed, 1),
            steps: 0,
        })
    }

    /// Advances `count` single-site updates and returns the magnetization.
    pub fn advance(&mut self, count: u32) -> Result<f64, JsValue> {
        for _ in 0..count {
            self.kernel
                .step(&self.graph, &mut self.state, &mut self.rng)
                .map_err(js_err)?;
        }
        self.steps += u64::from(count);
        Ok(self.state.sigma.eta())
    }

    pub fn eta(&self) -> f64 {
        self.state.sigma.eta()
    }

    pub fn steps(&self) -> f64 {
        self.steps as f64
    }

    /// Spins as +1/-1 bytes in vertex order.
    pub fn spins(&self) -> Vec<i8> {
        self.state.sigma.spins().to_vec()
    }
}
