use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ising_kawasaki::dynamics::{build_transition_matrix, ChainKernel, ChainKind, ChainState};
use ising_kawasaki::graphs::{disjoint_union, random_regular};
use ising_kawasaki::ising_measures::{
    exact_partition_table, fixed_mag_prob_with, gibbs_prob_with, size_distribution, IsingParams, Pinning,
    SpinConfiguration,
};
use ising_kawasaki::mean_field::{critical_points, landscape_curve};
use ising_kawasaki::metastability::{
    annealed_band_weights, glauber_kernel, in_metastable_window, magnetization_trace, partition_ratio_check,
    search_union_params, BottleneckSpec, TraceBands, TraceStart,
};
use ising_kawasaki::spectral_analysis::{
    exact_mixing_time, gap_factorization_check, influence_matrix, local_to_global_gap_bound, local_walk_family,
    mixing_time_upper, spectral_gap, spectrum, ExactDistribution, EXACT_MIXING_CAP,
};
use ising_kawasaki::tree_thresholds::{beta_u, eta_plus, lambda_u, phase_diagram as phase_rows, thresholds as threshold_set};
use ising_kawasaki::{util, Error, Graph};
use rand::Rng as _;
use serde_json::json;

use crate::output::{Cell, Csv};
use crate::{CliError, Common, Report};

type Res = Result<Report, CliError>;

fn report(summary: serde_json::Value, artifacts: Vec<(&str, String)>) -> Res {
    Ok(Report {
        summary,
        artifacts: artifacts.into_iter().map(|(n, t)| (n.to_string(), t)).collect(),
        failed_checks: None,
    })
}

/// Runs `f(0..count)` over `threads` workers; results keep index order.
fn par_map<T: Send>(count: usize, threads: usize, f: impl Fn(usize) -> Result<T, CliError> + Sync) -> Result<Vec<T>, CliError> {
    let threads = threads.clamp(1, count.max(1));
    let mut slots: Vec<Option<Result<T, CliError>>> = (0..count).map(|_| None).collect();
    std::thread::scope(|s| {
        let f = &f;
        let handles: Vec<_> = (0..threads)
            .map(|t| s.spawn(move || (t..count).step_by(threads).map(|i| (i, f(i))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("filled")).collect()
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("{what}: cannot parse {x:?} as a number")))
        })
        .collect()
}

fn check_beta(beta: f64) -> Result<(), CliError> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(CliError::Validation(format!("beta must be finite and >= 0, got {beta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    Complete,
    Cycle,
    Path,
    RandomRegular,
}

#[derive(Debug, Clone, Args)]
pub struct GraphSource {
    /// Edge-list file ("n delta" header, then one "u v" per line).
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    /// Degree for --family random-regular.
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
    /// Reject multigraphs when sampling random regular graphs.
    #[arg(long)]
    simple: bool,
}

impl GraphSource {
    fn build(&self) -> Result<Graph, CliError> {
        if let Some(p) = &self.graph {
            return Ok(Graph::read_edge_list(p)?);
        }
        let need_n = || self.n.ok_or_else(|| CliError::Validation("--n is required with --family".into()));
        let g = match self.family {
            None => return Err(CliError::Validation("give --graph FILE or --family".into())),
            Some(Family::Complete) => Graph::complete(need_n()?),
            Some(Family::Cycle) => Graph::cycle(need_n()?),
            Some(Family::Path) => Graph::path(need_n()?),
            Some(Family::RandomRegular) => {
                let d = self
                    .degree
                    .ok_or_else(|| CliError::Validation("--degree is required for random-regular".into()))?;
                random_regular(need_n()?, d, self.graph_seed, self.simple)?
            }
        };
        Ok(g)
    }
}

fn check_cap(g: &Graph, cap: usize) -> Result<(), CliError> {
    if g.n() > cap {
        return Err(Error::TooLarge {
            what: "free vertices for exact enumeration",
            size: g.n(),
            cap,
        }
        .into());
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct ThresholdsArgs {
    #[arg(long)]
    delta: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn thresholds(a: &ThresholdsArgs) -> Res {
    check_beta(a.beta)?;
    let t = threshold_set(a.delta, a.beta, a.lambda)?;
    let text = crate::output::json_string(&t);
    report(serde_json::to_value(&t).expect("json"), vec![("thresholds.json", text)])
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct PhaseDiagramArgs {
    #[arg(long)]
    delta: usize,
    #[arg(long, default_value_t = 0.0)]
    beta_min: f64,
    #[arg(long, default_value_t = 2.0)]
    beta_max: f64,
    #[arg(long, default_value_t = 41)]
    points: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn phase_diagram(a: &PhaseDiagramArgs) -> Res {
    check_beta(a.beta_min)?;
    if a.points < 2 || a.beta_max <= a.beta_min {
        return Err(CliError::Validation("need points >= 2 and beta-max > beta-min".into()));
    }
    let betas: Vec<f64> = (0..a.points)
        .map(|i| a.beta_min + (a.beta_max - a.beta_min) * i as f64 / (a.points - 1) as f64)
        .collect();
    let rows = phase_rows(a.delta, &betas)?;
    let mut csv = Csv::new(&["beta", "lambda_u", "lambda_a_bar", "eta_c", "eta_u", "eta_a_bar"]);
    for r in &rows {
        csv.row(&[
            Cell::F(r.beta),
            Cell::OptF(r.lambda_u),
            Cell::F(r.lambda_a_bar),
            Cell::F(r.eta_c),
            Cell::OptF(r.eta_u),
            Cell::F(r.eta_a_bar),
        ]);
    }
    report(
        json!({ "delta": a.delta, "beta_u": beta_u(a.delta)?, "rows": rows }),
        vec![("phase_diagram.csv", csv.finish())],
    )
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct LandscapeArgs {
    #[arg(long)]
    delta: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn landscape(a: &LandscapeArgs) -> Res {
    check_beta(a.beta)?;
    if !(a.lambda > 0.0) {
        return Err(CliError::Validation("lambda must be > 0".into()));
    }
    let curve = landscape_curve(a.delta, a.beta, a.lambda, a.points)?;
    let cps = critical_points(a.delta, a.beta, a.lambda, 1e-3)?;
    let mut lc = Csv::new(&["eta", "f"]);
    for (e, f) in &curve {
        lc.row(&[Cell::F(*e), Cell::F(*f)]);
    }
    let mut cc = Csv::new(&["eta", "f", "f_second", "classification"]);
    for c in &cps {
        let kind = serde_json::to_value(c.classification).expect("json");
        cc.row(&[
            Cell::F(c.eta),
            Cell::F(c.f_value),
            Cell::F(c.f_second),
            Cell::S(kind.as_str().unwrap_or_default().to_string()),
        ]);
    }
    report(
        json!({ "delta": a.delta, "beta": a.beta, "lambda": a.lambda, "critical_points": cps }),
        vec![("landscape.csv", lc.finish()), ("critical_points.csv", cc.finish())],
    )
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Start {
    AllMinus,
    AllPlus,
    Random,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, default_value = "glauber")]
    chain: String,
    #[arg(long)]
    beta: f64,
    /// External field (Glauber).
    #[arg(long)]
    lambda: Option<f64>,
    /// Plus count (fixed-magnetization chains).
    #[arg(long)]
    k: Option<usize>,
    /// Kept pluses for kl-downup.
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    #[arg(long, default_value_t = 100)]
    stride: u64,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    /// Glauber starting state; fixed-magnetization chains start from a random k-set.
    #[arg(long, value_enum, default_value = "all-minus")]
    start: Start,
    #[command(flatten)]
    pub common: Common,
}

fn make_kernel(chain: &str, beta: f64, lambda: Option<f64>, k: Option<usize>, ell: Option<usize>) -> Result<ChainKernel, CliError> {
    check_beta(beta)?;
    let kind: ChainKind = chain.parse()?;
    let need_k = || k.ok_or_else(|| CliError::Validation(format!("--k is required for {chain}")));
    Ok(match kind {
        ChainKind::Glauber => {
            let l = lambda.ok_or_else(|| CliError::Validation("--lambda is required for glauber".into()))?;
            ChainKernel::glauber(IsingParams::new(beta, l)?, Pinning::none())
        }
        ChainKind::Kawasaki => ChainKernel::kawasaki(beta, need_k()?, Pinning::none()),
        ChainKind::Downup => ChainKernel::downup(beta, need_k()?, Pinning::none()),
        ChainKind::KlDownup => {
            let e = ell.ok_or_else(|| CliError::Validation("--ell is required for kl-downup".into()))?;
            ChainKernel::kl_downup(beta, need_k()?, e)
        }
    })
}

pub fn simulate(a: &SimulateArgs) -> Res {
    let g = a.source.build()?;
    let kernel = make_kernel(&a.chain, a.beta, a.lambda, a.k, a.ell)?;
    kernel.validate(&g)?;
    if a.stride == 0 || a.replicas == 0 {
        return Err(CliError::Validation("stride and replicas must be >= 1".into()));
    }
    let n = g.n();
    let runs = par_map(a.replicas, a.common.threads, |r| {
        let mut rng = util::rng(a.common.seed, r as u64);
        let sigma = match (kernel.k, a.start) {
            (Some(k), _) => {
                let plus = rand::seq::index::sample(&mut rng, n, k).into_vec();
                SpinConfiguration::from_plus_set(&g, &plus)?
            }
            (None, Start::AllMinus) => SpinConfiguration::all_minus(&g),
            (None, Start::AllPlus) => SpinConfiguration::all_plus(&g),
            (None, Start::Random) => {
                let spins = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
                SpinConfiguration::from_spins(&g, spins)?
            }
        };
        let mut state = ChainState::new(sigma, &kernel.pinning)?;
        let mut trace = vec![(0u64, state.sigma.eta())];
        for t in 1..=a.steps {
            kernel.step(&g, &mut state, &mut rng)?;
            if t % a.stride == 0 {
                trace.push((t, state.sigma.eta()));
            }
        }
        Ok(trace)
    })?;
    let mut csv = Csv::new(&["replica", "t", "eta"]);
    let mut per = Vec::new();
    for (r, tr) in runs.iter().enumerate() {
        for &(t, e) in tr {
            csv.row(&[Cell::I(r as u64), Cell::I(t), Cell::F(e)]);
        }
        let mean = tr.iter().map(|x| x.1).sum::<f64>() / tr.len() as f64;
        per.push(json!({ "replica": r, "mean_eta": mean, "final_eta": tr.last().map(|x| x.1) }));
    }
    report(
        json!({ "n": n, "kernel": kernel, "steps": a.steps, "replicas": per }),
        vec![("trace.csv", csv.finish())],
    )
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct SpectraArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, default_value = "kawasaki")]
    chain: String,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    /// Largest t for the exact mixing-time search.
    #[arg(long, default_value_t = 5000)]
    horizon: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn spectra(a: &SpectraArgs) -> Res {
    let g = a.source.build()?;
    check_cap(&g, a.common.cap)?;
    let kernel = make_kernel(&a.chain, a.beta, a.lambda, a.k, a.ell)?;
    let p = build_transition_matrix(&kernel, &g)?;
    if p.len() > EXACT_MIXING_CAP {
        return Err(Error::TooLarge {
            what: "states for a dense spectrum",
            size: p.len(),
            cap: EXACT_MIXING_CAP,
        }
        .into());
    }
    let ev = spectrum(&p)?;
    let gap = spectral_gap(&p)?;
    let lazy = p.lazy();
    let mix = exact_mixing_time(&lazy, false, a.horizon)?;
    let upper = mixing_time_upper(&lazy).ok();
    let mut extra = json!({});
    if let (Some(k), true) = (kernel.k, kernel.kind != ChainKind::Glauber) {
        let d = ExactDistribution::fixed_magnetization(&g, a.beta, k, &Pinning::none())?;
        let m = influence_matrix(&d, None);
        extra["influence"] = json!({
            "largest_eigenvalue": m.largest_eigenvalue,
            "spectral_radius": m.spectral_radius,
            "linf_norm": m.linf_norm,
        });
        if k >= 2 {
            let fam = local_walk_family(&d, k)?;
            let bound = match kernel.ell {
                Some(e) => Some(local_to_global_gap_bound(&fam.zetas, e)?.value),
                None => None,
            };
            extra["local_walks"] = json!({ "zetas": fam.zetas, "gap_bound": bound });
        }
    }
    let mut csv = Csv::new(&["index", "eigenvalue"]);
    for (i, e) in ev.iter().enumerate() {
        csv.row(&[Cell::I(i as u64), Cell::F(*e)]);
    }
    report(
        json!({
            "states": p.len(),
            "gap": gap,
            "lazy_gap": gap / 2.0,
            "lazy_mixing_time": mix.tau,
            "lazy_mixing_upper_bound": upper,
            "stationarity_residual": p.stationarity_residual(),
            "detailed_balance_residual": p.detailed_balance_residual(),
            "extra": extra,
        }),
        vec![("spectrum.csv", csv.finish())],
    )
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct ExactcheckArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long)]
    k: usize,
    /// Comma-separated inverse temperatures.
    #[arg(long, default_value = "0,0.5,1")]
    betas: String,
    /// Comma-separated fields.
    #[arg(long, default_value = "0.5,1,2")]
    lambdas: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    pub common: Common,
}

pub fn exactcheck(a: &ExactcheckArgs) -> Res {
    let g = a.source.build()?;
    check_cap(&g, a.common.cap)?;
    let n = g.n();
    if a.k == 0 || a.k >= n {
        return Err(CliError::Validation(format!("need 1 <= k < n = {n}, got k = {}", a.k)));
    }
    let betas = parse_list(&a.betas, "betas")?;
    let lambdas = parse_list(&a.lambdas, "lambdas")?;
    for &b in &betas {
        check_beta(b)?;
    }
    for &l in &lambdas {
        IsingParams::new(0.0, l)?;
    }
    let delta = g.max_degree();
    let k = a.k;
    let mut checks = Vec::new();
    let mut push = |name: &str, beta: f64, value: f64, pass: bool| {
        checks.push(json!({ "check": name, "beta": beta, "value": value, "pass": pass }));
    };
    for &beta in &betas {
        let t = exact_partition_table(&g, beta, &Pinning::none())?;
        let mut worst = 0.0f64;
        for &l in &lambdas {
            let pmf = size_distribution(&t, l)?;
            for mask in 0..1u64 << n {
                let s = SpinConfiguration::from_mask(&g, mask);
                let c = gibbs_prob_with(&t, l, &s) / pmf[s.plus_count()];
                worst = worst.max((c - fixed_mag_prob_with(&t, &s)).abs());
            }
        }
        push("conditioning-identity", beta, worst, worst <= a.tol);

        let mut kernels: Vec<(String, ChainKernel)> = lambdas
            .iter()
            .map(|&l| Ok((format!("glauber(lambda={l})"), ChainKernel::glauber(IsingParams::new(beta, l)?, Pinning::none()))))
            .collect::<Result<_, Error>>()?;
        kernels.push(("kawasaki".into(), ChainKernel::kawasaki(beta, k, Pinning::none())));
        kernels.push(("downup".into(), ChainKernel::downup(beta, k, Pinning::none())));
        for ell in 0..k {
            kernels.push((format!("kl-downup(ell={ell})"), ChainKernel::kl_downup(beta, k, ell)));
        }
        for (name, kernel) in &kernels {
            let p = build_transition_matrix(kernel, &g)?;
            let s = p.stationarity_residual();
            let d = p.detailed_balance_residual();
            push(&format!("stationarity {name}"), beta, s, s <= a.tol);
            push(&format!("detailed-balance {name}"), beta, d, d <= a.tol);
        }
        for ell in 1..k {
            let r = gap_factorization_check(&g, beta, k, ell)?;
            push(&format!("gap-factorization(ell={ell})"), beta, r.gap_downup - r.product, r.holds);
        }
        if k >= 2 {
            let d = ExactDistribution::fixed_magnetization(&g, beta, k, &Pinning::none())?;
            let fam = local_walk_family(&d, k)?;
            push("local-walk-eigenvalue-bound", beta, fam.independence_excess, fam.independence_excess <= a.tol);
            for ell in 0..k {
                let bound = local_to_global_gap_bound(&fam.zetas, ell)?.value;
                let gap = spectral_gap(&build_transition_matrix(&ChainKernel::kl_downup(beta, k, ell), &g)?)?;
                push(&format!("local-to-global(ell={ell})"), beta, gap - bound, gap >= bound - 1e-12);
            }
        }
        for &l in &lambdas {
            let r = partition_ratio_check(&t, delta, l)?;
            push(&format!("partition-ratio(lambda={l})"), beta, r.max_slack, r.all_hold);
        }
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| format!("{} at beta {}", c["check"].as_str().unwrap_or("?"), c["beta"]))
        .collect();
    let all_pass = failed.is_empty();
    let text = crate::output::json_string(&json!({ "checks": checks }));
    let mut r = report(
        json!({ "n": n, "k": k, "checks": checks.len(), "all_pass": all_pass, "failed": failed }),
        vec![("exactcheck.json", text)],
    )?;
    if !all_pass {
        r.failed_checks = Some(format!("{} exact checks failed", failed.len()));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Mode {
    Glauber,
    KawasakiUnion,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct MetastabilityArgs {
    #[arg(long, value_enum, default_value = "glauber")]
    mode: Mode,
    #[arg(long)]
    delta: usize,
    #[arg(long)]
    beta: f64,
    /// Field (glauber mode).
    #[arg(long)]
    lambda: Option<f64>,
    /// Target magnetization (kawasaki-union mode).
    #[arg(long)]
    eta: Option<f64>,
    /// Vertices per graph (per component in union mode).
    #[arg(long)]
    n: usize,
    /// Largest number of union components to consider.
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Steps per replica; defaults to 100·N·ln N for N total vertices.
    #[arg(long = "steps", visible_alias = "T")]
    steps: Option<u64>,
    #[arg(long, visible_alias = "seeds", default_value_t = 20)]
    replicas: usize,
    /// Recorded every this many steps; defaults to the vertex count.
    #[arg(long)]
    stride: Option<u64>,
    /// Band half-width; defaults to half the smallest gap between critical points.
    #[arg(long)]
    eps: Option<f64>,
    /// Field whose landscape fixes η⁻ and ε (defaults to --lambda).
    #[arg(long)]
    bands_lambda: Option<f64>,
    /// Half-width of S₂ in plus counts per component (union mode).
    #[arg(long)]
    w: Option<usize>,
    /// Reject multigraphs.
    #[arg(long)]
    simple: bool,
    #[command(flatten)]
    pub common: Common,
}

fn default_steps(total: usize) -> u64 {
    (100.0 * total as f64 * (total as f64).ln()).round() as u64
}

pub fn metastability(a: &MetastabilityArgs) -> Res {
    check_beta(a.beta)?;
    if a.n == 0 || a.replicas == 0 {
        return Err(CliError::Validation("n and replicas must be >= 1".into()));
    }
    match a.mode {
        Mode::Glauber => metastability_glauber(a),
        Mode::KawasakiUnion => metastability_union(a),
    }
}

fn graph_seed(seed: u64, r: usize) -> u64 {
    util::rng(seed, 1_000_000 + r as u64).random()
}

fn metastability_glauber(a: &MetastabilityArgs) -> Res {
    let lambda = a
        .lambda
        .ok_or_else(|| CliError::Validation("--lambda is required in glauber mode".into()))?;
    let kernel = glauber_kernel(a.beta, lambda)?;
    let bl = a.bands_lambda.unwrap_or(lambda);
    let mut bands = TraceBands::from_tree(a.delta, a.beta, bl)?;
    bands.eta_plus = eta_plus(a.delta, a.beta, lambda)?;
    if let Some(e) = a.eps {
        bands.eps = e;
    }
    let steps = a.steps.unwrap_or_else(|| default_steps(a.n));
    let stride = a.stride.unwrap_or(a.n as u64).max(1);
    let runs = par_map(a.replicas, a.common.threads, |r| {
        let g = random_regular(a.n, a.delta, graph_seed(a.common.seed, r), a.simple)?;
        let mut rng = util::rng(a.common.seed, r as u64);
        Ok(magnetization_trace(&g, &kernel, TraceStart::AllMinus, steps, stride, bands, &mut rng)?)
    })?;
    let mut csv = Csv::new(&["replica", "t", "eta"]);
    let mut per = Vec::new();
    for (r, tr) in runs.iter().enumerate() {
        for (i, e) in tr.etas.iter().enumerate() {
            csv.row(&[Cell::I(r as u64), Cell::I(i as u64 * stride), Cell::F(*e)]);
        }
        per.push(json!({
            "replica": r,
            "dwell_minus": tr.dwell_minus,
            "dwell_plus": tr.dwell_plus,
            "escape_time": tr.escape_time,
            "censored": tr.censored,
        }));
    }
    let lu = if a.beta > beta_u(a.delta)? { Some(lambda_u(a.delta, a.beta)?) } else { None };
    report(
        json!({
            "mode": "glauber",
            "n": a.n,
            "lambda": lambda,
            "lambda_u": lu,
            "in_metastable_window": in_metastable_window(a.delta, a.beta, lambda).unwrap_or(false),
            "bands": bands,
            "steps": steps,
            "replicas": per,
        }),
        vec![("trace.csv", csv.finish())],
    )
}

fn metastability_union(a: &MetastabilityArgs) -> Res {
    let eta = a
        .eta
        .ok_or_else(|| CliError::Validation("--eta is required in kawasaki-union mode".into()))?;
    if !(-1.0..=1.0).contains(&eta) {
        return Err(CliError::Validation("eta must lie in [-1, 1]".into()));
    }
    let bu = beta_u(a.delta)?;
    if a.beta <= bu {
        return Err(Error::NoNonuniqueness { beta: a.beta, beta_u: bu }.into());
    }
    let lu = lambda_u(a.delta, a.beta)?;
    let grid: Vec<f64> = (1..200).map(|i| 1.0 + (lu - 1.0) * i as f64 / 200.0).collect();
    let w = a.w.unwrap_or((a.n / 50).max(1));
    let search = search_union_params(a.n, a.delta, a.beta, eta, &grid, a.m, w)?;
    let params = search.params.clone();
    let spec = BottleneckSpec::kawasaki_union(a.n, params.clone(), w)?;
    let check = spec.validate()?;
    let annealed = annealed_band_weights(a.delta, a.beta, 1.0, &spec)?;
    let total = a.n * params.m;
    let steps = a.steps.unwrap_or_else(|| default_steps(total));
    let stride = a.stride.unwrap_or(total as u64).max(1);
    let centers = spec.s2_centers();
    let runs = par_map(a.replicas, a.common.threads, |r| {
        let base = random_regular(a.n, a.delta, graph_seed(a.common.seed, r), a.simple)?;
        let u = disjoint_union(&base, params.m)?;
        let mut rng = util::rng(a.common.seed, r as u64);
        let mut plus = Vec::new();
        for (c, &size) in centers.iter().enumerate() {
            let off = u.component(c).start;
            plus.extend(rand::seq::index::sample(&mut rng, a.n, size).into_iter().map(|v| v + off));
        }
        let kernel = ChainKernel::kawasaki(a.beta, params.m * params.k, Pinning::none());
        let mut state = ChainState::new(SpinConfiguration::from_plus_set(&u.graph, &plus)?, &kernel.pinning)?;
        let mut hits = [0u64; 3];
        let mut samples = 0u64;
        let mut escape = None;
        for t in 1..=steps {
            kernel.step(&u.graph, &mut state, &mut rng)?;
            if t % stride == 0 {
                let sizes: Vec<usize> = (0..params.m)
                    .map(|c| u.component(c).filter(|&v| state.sigma.spin(v) == 1).count())
                    .collect();
                samples += 1;
                if let Some(s) = spec.classify_components(&sizes) {
                    hits[s as usize - 1] += 1;
                    if s == 1 && escape.is_none() {
                        escape = Some(t);
                    }
                }
            }
        }
        Ok((hits.map(|h| h as f64 / samples.max(1) as f64), escape))
    })?;
    let mut csv = Csv::new(&["replica", "s1", "s2", "s3", "escape_time"]);
    let mut per = Vec::new();
    for (r, (occ, esc)) in runs.iter().enumerate() {
        csv.row(&[
            Cell::I(r as u64),
            Cell::F(occ[0]),
            Cell::F(occ[1]),
            Cell::F(occ[2]),
            Cell::S(esc.map(|t| t.to_string()).unwrap_or_default()),
        ]);
        per.push(json!({ "replica": r, "occupancy": occ, "escape_time": esc, "censored": esc.is_none() }));
    }
    report(
        json!({
            "mode": "kawasaki-union",
            "params": params,
            "lambda_plus_candidates_tried": search.tried,
            "w": w,
            "check": check,
            "annealed_log_ratio_s3_s2": annealed.log_ratio_s3_s2(),
            "annealed_log_ratio_s1_s2": annealed.log_ratio_s1_s2(),
            "steps": steps,
            "replicas": per,
        }),
        vec![("occupancy.csv", csv.finish())],
    )
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct GraphGenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: usize,
    #[arg(long)]
    simple: bool,
    /// Disjoint copies of the sampled graph.
    #[arg(long, default_value_t = 1)]
    copies: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn graph_gen(a: &GraphGenArgs) -> Res {
    let base = random_regular(a.n, a.delta, a.common.seed, a.simple)?;
    let g = if a.copies > 1 { disjoint_union(&base, a.copies)?.graph } else { base };
    report(
        json!({
            "n": g.n(),
            "delta": a.delta,
            "edges": g.edge_count(),
            "copies": a.copies,
            "self_loops": g.has_self_loop(),
            "parallel_edges": g.has_parallel_edge(),
        }),
        vec![("graph.edges", g.to_edge_list_string())],
    )
}
