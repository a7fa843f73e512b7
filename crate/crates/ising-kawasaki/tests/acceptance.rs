//! Acceptance criteria 1–9. Each criterion prints one PASS/FAIL line; run
//! with `cargo test --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use ising_kawasaki::dynamics::{
    build_transition_matrix, exact_coupled_expectation, exact_coupled_law, ChainKernel, CoupledState,
    CouplingConstants,
};
use ising_kawasaki::graphs::{disjoint_union, random_regular};
use ising_kawasaki::ising_measures::{
    exact_partition_table, fixed_mag_prob_with, monochromatic_edges, size_distribution, IsingParams, Pinning,
    SpinConfiguration,
};
use ising_kawasaki::mean_field::{critical_points, Classification};
use ising_kawasaki::metastability::{glauber_kernel, magnetization_trace, partition_ratio_check, TraceBands, TraceStart};
use ising_kawasaki::spectral_analysis::{
    comparison_constants, gap_factorization_check, influence_matrix, lclt_error, local_to_global_gap_bound,
    local_walk_family, spectral_gap, ExactDistribution,
};
use ising_kawasaki::tree_thresholds::{beta_u, eta_of_fixed_point, lambda_u, tree_fixed_points};
use ising_kawasaki::util::{self, log_sum_exp};
use ising_kawasaki::Graph;
use rand::Rng as _;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Outcome {
    pass: bool,
    detail: String,
}

/// Written straight to stderr so the lines show up without `--nocapture`.
fn report(id: u32, name: &str, start: Instant, o: &Outcome) {
    use std::io::Write as _;
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id} [{}] {name}: {} ({:.1}s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        start.elapsed().as_secs_f64()
    );
}

fn test_set() -> Vec<(String, Graph)> {
    let mut v = vec![
        ("K2".to_string(), Graph::complete(2)),
        ("K3".to_string(), Graph::complete(3)),
        ("K4".to_string(), Graph::complete(4)),
        ("P3".to_string(), Graph::path(3)),
    ];
    for n in 5..=8 {
        v.push((format!("C{n}"), Graph::cycle(n)));
    }
    v.push(("RR3(10)".to_string(), random_regular(10, 3, 7, true).unwrap()));
    v.push(("C6+C6".to_string(), disjoint_union(&Graph::cycle(6), 2).unwrap().graph));
    v
}

fn spins_of(n: usize, mask: u64) -> Vec<i8> {
    (0..n).map(|v| if mask >> v & 1 == 1 { 1 } else { -1 }).collect()
}

/// Brute-force Gibbs weights, independent of the Gray-code tables.
fn brute_log_weights(g: &Graph, beta: f64, lambda: f64) -> Vec<f64> {
    (0..1u64 << g.n())
        .map(|m| {
            let s = spins_of(g.n(), m);
            beta * monochromatic_edges(g, &s).unwrap() as f64 + m.count_ones() as f64 * lambda.ln()
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for (_, g) in test_set() {
        for beta in [0.0, 0.5, 1.2] {
            let table = exact_partition_table(&g, beta, &Pinning::none()).unwrap();
            for lambda in [0.5, 1.0, 2.0] {
                let lw = brute_log_weights(&g, beta, lambda);
                let lz = log_sum_exp(&lw);
                let mut pk = vec![0.0; g.n() + 1];
                for (m, w) in lw.iter().enumerate() {
                    pk[(m as u64).count_ones() as usize] += (w - lz).exp();
                }
                for (m, w) in lw.iter().enumerate() {
                    let k = (m as u64).count_ones() as usize;
                    let oracle = (w - lz).exp() / pk[k];
                    let sigma = SpinConfiguration::from_mask(&g, m as u64);
                    let got = fixed_mag_prob_with(&table, &sigma);
                    worst = worst.max((got - oracle).abs());
                    checked += 1;
                }
            }
        }
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("{checked} (sigma, beta, lambda) cases, max abs error {worst:.2e}"),
    }
}

fn criterion_2() -> Outcome {
    let mut worst_stat = 0.0f64;
    let mut worst_db = 0.0f64;
    let mut comparison_ok = true;
    let mut kernels = 0usize;
    for (_, g) in test_set() {
        let n = g.n();
        let delta = g.max_degree() as f64;
        for beta in [0.0, 0.5, 1.2] {
            let mut ks: Vec<usize> = vec![1, n / 2, n - 1];
            ks.sort_unstable();
            ks.dedup();
            let mut list = Vec::new();
            for lambda in [0.5, 2.0] {
                list.push(ChainKernel::glauber(IsingParams::new(beta, lambda).unwrap(), Pinning::none()));
            }
            for &k in ks.iter().filter(|&&k| k >= 1 && k < n) {
                list.push(ChainKernel::kawasaki(beta, k, Pinning::none()));
                list.push(ChainKernel::downup(beta, k, Pinning::none()));
                let mut ells = vec![0, k - 1, k / 2];
                ells.sort_unstable();
                ells.dedup();
                for ell in ells {
                    list.push(ChainKernel::kl_downup(beta, k, ell));
                }
                let pk = build_transition_matrix(&ChainKernel::kawasaki(beta, k, Pinning::none()), &g).unwrap();
                let pd = build_transition_matrix(&ChainKernel::downup(beta, k, Pinning::none()), &g).unwrap();
                let (a1, a2) = comparison_constants(&pk, &pd).unwrap();
                let bound = (2.0 * beta * delta).exp() * (delta + 1.0).powi(2);
                if !(a2 <= bound && a1 >= 1.0 / bound && a1 > 0.0) {
                    comparison_ok = false;
                }
            }
            for kernel in list {
                let p = build_transition_matrix(&kernel, &g).unwrap();
                worst_stat = worst_stat.max(p.stationarity_residual());
                worst_db = worst_db.max(p.detailed_balance_residual());
                kernels += 1;
            }
        }
    }
    Outcome {
        pass: worst_stat <= 1e-10 && worst_db <= 1e-10 && comparison_ok,
        detail: format!(
            "{kernels} kernels, max |piP - pi| {worst_stat:.2e}, max detailed-balance {worst_db:.2e}, comparison within bound: {comparison_ok}"
        ),
    }
}

fn factorization_instances() -> Vec<(Graph, usize, usize)> {
    let mut v = vec![(Graph::complete(4), 2, 1)];
    for n in [5, 6] {
        for k in [2, 3] {
            let mut ells = vec![1, k - 1];
            ells.dedup();
            for ell in ells {
                v.push((Graph::cycle(n), k, ell));
            }
        }
    }
    v
}

fn criterion_3() -> Outcome {
    let mut violations = 0;
    let mut count = 0;
    let mut min_slack = f64::INFINITY;
    for (g, k, ell) in factorization_instances() {
        for beta in [0.0, 0.5, 1.0] {
            let r = gap_factorization_check(&g, beta, k, ell).unwrap();
            count += 1;
            min_slack = min_slack.min(r.gap_downup - r.product);
            if !r.holds {
                violations += 1;
            }
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{count} instances, {violations} violations, min slack {min_slack:.3e}"),
    }
}

fn criterion_4() -> Outcome {
    let mut violations = 0;
    let mut count = 0;
    let mut worst_b4 = f64::NEG_INFINITY;
    for (g, k, ell) in factorization_instances() {
        for beta in [0.0, 0.5, 1.0] {
            let dist = ExactDistribution::fixed_magnetization(&g, beta, k, &Pinning::none()).unwrap();
            let fam = local_walk_family(&dist, k).unwrap();
            worst_b4 = worst_b4.max(fam.independence_excess);
            let bound = local_to_global_gap_bound(&fam.zetas, ell).unwrap().value;
            let gap = spectral_gap(&build_transition_matrix(&ChainKernel::kl_downup(beta, k, ell), &g).unwrap()).unwrap();
            count += 1;
            if gap < bound - 1e-12 {
                violations += 1;
            }
        }
    }
    // uniform n = 4, k = 2: ζ₀ = −1/3 = (C − 1)/(k − 1) with C = 2/3
    let uni = ExactDistribution::fixed_magnetization(&Graph::complete(4), 0.0, 2, &Pinning::none()).unwrap();
    let fam = local_walk_family(&uni, 2).unwrap();
    let c = influence_matrix(&uni, None).largest_eigenvalue;
    let equality = (fam.zetas[0] + 1.0 / 3.0).abs() < 1e-12 && ((c - 1.0) + 1.0 / 3.0).abs() < 1e-12;
    Outcome {
        pass: violations == 0 && worst_b4 <= 1e-10 && equality,
        detail: format!(
            "{count} instances, {violations} local-to-global violations, max eigenvalue excess {worst_b4:.2e}, uniform equality {equality} (zeta0 = {:.12})",
            fam.zetas[0]
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let bu = beta_u(4).unwrap();
    let bu_ok = (bu - 2f64.ln()).abs() <= 1e-12;
    notes.push(format!("beta_u(4) - ln 2 = {:.1e}", bu - 2f64.ln()));
    let beta = 2f64.ln() + 0.1;
    let fp3 = tree_fixed_points(4, beta, 1.01).unwrap();
    let three = fp3.count() == 3 && fp3.points[0].stable && fp3.points[2].stable && !fp3.points[1].stable;
    let fp1 = tree_fixed_points(4, beta, 1.08).unwrap();
    let one = fp1.count() == 1 && fp1.points[0].stable;
    let lu = lambda_u(4, beta).unwrap();
    let lu_ok = lu > 1.01 && lu < 1.08;
    notes.push(format!("lambda_u = {lu:.9}"));
    let mut agree = true;
    let mut worst = 0.0f64;
    for (lambda, fps) in [(1.01, &fp3), (1.08, &fp1)] {
        let cps = critical_points(4, beta, lambda, 1e-3).unwrap();
        if cps.len() != fps.count() {
            agree = false;
            continue;
        }
        for (cp, fp) in cps.iter().zip(&fps.points) {
            let eta = eta_of_fixed_point(beta, fp.r);
            worst = worst.max((cp.eta - eta).abs());
            let kind = if fp.stable { Classification::LocalMax } else { Classification::LocalMin };
            if cp.classification != kind {
                agree = false;
            }
        }
    }
    agree &= worst <= 1e-6;
    notes.push(format!("max |eta_crit - eta(R)| = {worst:.1e}"));
    Outcome {
        pass: bu_ok && three && one && lu_ok && agree,
        detail: format!(
            "beta_u {bu_ok}, 3 roots {three}, 1 root {one}, lambda_u window {lu_ok}, landscape agreement {agree}; {}",
            notes.join(", ")
        ),
    }
}

fn criterion_6() -> Outcome {
    // β = 0, λ = 1, n = 100: X ~ Binomial(100, 1/2)
    let n = 100u64;
    let exact = (util::ln_binom(n, 50) - n as f64 * 2f64.ln()).exp();
    let gauss = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * 5.0);
    let binom_ok = (exact - gauss).abs() <= 2.5e-4;
    let mut d0 = Vec::new();
    let mut d2 = Vec::new();
    for n in [12, 16, 20] {
        let t = exact_partition_table(&Graph::cycle(n), 0.5, &Pinning::none()).unwrap();
        let pmf = size_distribution(&t, 1.2).unwrap();
        d0.push(lclt_error(&pmf, 0, None).unwrap().scaled_sup_error);
        d2.push(lclt_error(&pmf, 2, None).unwrap().scaled_sup_error);
    }
    let below = d2.iter().zip(&d0).all(|(a, b)| a < b);
    let decreasing = d2.windows(2).all(|w| w[1] < w[0]);
    Outcome {
        pass: binom_ok && below && decreasing,
        detail: format!(
            "|exact - gauss| = {:.3e}; s-scaled sup error d=0 {:?}, d=2 {:?}",
            (exact - gauss).abs(),
            d0.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>(),
            d2.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()
        ),
    }
}

/// A random plus set of size k and a copy with one plus moved.
fn random_pair(n: usize, k: usize, rng: &mut util::Rng) -> (Vec<usize>, Vec<usize>) {
    let x: Vec<usize> = rand::seq::index::sample(rng, n, k).into_vec();
    let mut y = x.clone();
    let minus: Vec<usize> = (0..n).filter(|v| !x.contains(v)).collect();
    let i = rng.random_range(0..k);
    y[i] = minus[rng.random_range(0..minus.len())];
    (x, y)
}

struct CouplingRun {
    sum_rho: f64,
    sum_next: f64,
}

fn run_coupling(g: &Graph, beta: f64, k: usize, phi: f64, steps: usize, seed: u64) -> CouplingRun {
    let mut rng = util::rng(seed, 11);
    let (x, y) = random_pair(g.n(), k, &mut rng);
    let mut st = CoupledState::new(g, &Pinning::none(), &x, &y, phi).unwrap();
    let mut run = CouplingRun {
        sum_rho: 0.0,
        sum_next: 0.0,
    };
    for _ in 0..steps {
        if st.coalesced() {
            let (x, y) = random_pair(g.n(), k, &mut rng);
            st = CoupledState::new(g, &Pinning::none(), &x, &y, phi).unwrap();
        }
        let e = exact_coupled_expectation(g, beta, &st);
        run.sum_rho += st.rho();
        run.sum_next += e.rho;
        st.step(g, beta, &mut rng);
    }
    run
}

fn chi_square_k4() -> (f64, f64) {
    let g = Graph::complete(4);
    let beta = 0.8;
    let st = CoupledState::new(&g, &Pinning::none(), &[0, 1], &[0, 2], 0.1).unwrap();
    let law = exact_coupled_law(&g, beta, &st);
    let kernel = build_transition_matrix(&ChainKernel::kawasaki(beta, 2, Pinning::none()), &g).unwrap();
    let samples = 100_000usize;
    let mut stat = 0.0;
    let mut df = 0usize;
    for (side, start) in [(0, st.x_mask()), (1, st.y_mask())] {
        let row = kernel.index_of(start).unwrap();
        // the exact law's marginal must equal the kernel row
        let mut marg = vec![0.0; kernel.len()];
        for &(p, xm, ym) in &law {
            marg[kernel.index_of(if side == 0 { xm } else { ym }).unwrap()] += p;
        }
        for (j, m) in marg.iter().enumerate() {
            assert!((m - kernel.entry(row, j)).abs() < 1e-12);
        }
        let mut counts = vec![0usize; kernel.len()];
        let mut rng = util::rng(99, side as u64);
        for _ in 0..samples {
            let mut s = st.clone();
            s.step(&g, beta, &mut rng);
            counts[kernel.index_of(if side == 0 { s.x_mask() } else { s.y_mask() }).unwrap()] += 1;
        }
        for (j, &c) in counts.iter().enumerate() {
            let e = kernel.entry(row, j) * samples as f64;
            if e > 0.0 {
                stat += (c as f64 - e).powi(2) / e;
                df += 1;
            }
        }
        df -= 1;
    }
    let crit = ChiSquared::new(df as f64).unwrap().inverse_cdf(0.99);
    (stat, crit)
}

fn criterion_7() -> Outcome {
    let n = 60;
    let g = random_regular(n, 3, 2024, true).unwrap();
    let beta = 0.3;
    let k = ((0.02 * n as f64).floor() as usize).max(1);
    let analytic = CouplingConstants::analytic(3, beta);
    // with k = 1 the bad set B is always empty, so a₁ and b₂ cannot be fitted
    // from samples and the analytic constants are used
    let phi = analytic.phi();
    let mut cs = Vec::new();
    for seed in 0..20 {
        let run = run_coupling(&g, beta, k, phi, 10_000, seed);
        cs.push(k as f64 * (1.0 - run.sum_next / run.sum_rho));
    }
    let c_min = cs.iter().copied().fold(f64::INFINITY, f64::min);
    let (stat, crit) = chi_square_k4();
    Outcome {
        pass: c_min > 0.0 && stat <= crit,
        detail: format!(
            "k = {k}, phi = {phi:.4e}, fitted c min over 20 seeds = {c_min:.4}, chi-square {stat:.2} <= {crit:.2}"
        ),
    }
}

fn criterion_8() -> Outcome {
    let (delta, beta, n) = (3usize, 1.2f64, 1000usize);
    let lambda = 1.01;
    let lu = lambda_u(delta, beta).unwrap();
    let window = lambda > 1.0 && lambda < lu;
    let bands = TraceBands::from_tree(delta, beta, lambda).unwrap();
    let steps = (100.0 * n as f64 * (n as f64).ln()).round() as u64;
    let mut stay = 0;
    let mut fractions = Vec::new();
    for seed in 0..20u64 {
        let g = random_regular(n, delta, 1000 + seed, true).unwrap();
        let mut rng = util::rng(seed, 8);
        let tr = magnetization_trace(&g, &glauber_kernel(beta, lambda).unwrap(), TraceStart::AllMinus, steps, n as u64, bands, &mut rng).unwrap();
        fractions.push(tr.dwell_minus);
        if tr.dwell_minus >= 0.95 {
            stay += 1;
        }
    }
    let high = 1.5 * lu;
    let hb = TraceBands {
        eta_plus: ising_kawasaki::tree_thresholds::eta_plus(delta, beta, high).unwrap(),
        ..bands
    };
    let mut reached = 0;
    for seed in 0..20u64 {
        let g = random_regular(n, delta, 1000 + seed, true).unwrap();
        let mut rng = util::rng(seed, 9);
        let tr = magnetization_trace(&g, &glauber_kernel(beta, high).unwrap(), TraceStart::AllMinus, steps, n as u64, hb, &mut rng).unwrap();
        if tr.escape_time.is_some() {
            reached += 1;
        }
    }
    let min_frac = fractions.iter().copied().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: window && stay >= 18 && reached == 20,
        detail: format!(
            "lambda_u = {lu:.7}, T = {steps}, dwell >= 0.95 in {stay}/20 seeds (min {min_frac:.3}), reached plus band at 1.5 lambda_u in {reached}/20"
        ),
    }
}

fn criterion_9() -> Outcome {
    let mut fails = 0;
    let mut rows = 0;
    let mut worst_tight = 0.0f64;
    for (_, g) in test_set() {
        let delta = g.max_degree();
        for beta in [0.2, 1.0] {
            let t = exact_partition_table(&g, beta, &Pinning::none()).unwrap();
            for lambda in [0.5, 2.0] {
                let r = partition_ratio_check(&t, delta, lambda).unwrap();
                rows += r.rows.len();
                fails += r.rows.iter().filter(|x| !(x.forward_holds && x.mirrored_holds)).count();
            }
        }
        let t0 = exact_partition_table(&g, 0.0, &Pinning::none()).unwrap();
        for lambda in [0.5, 2.0] {
            worst_tight = worst_tight.max(partition_ratio_check(&t0, delta, lambda).unwrap().max_slack);
        }
    }
    Outcome {
        pass: fails == 0 && worst_tight <= 1e-12,
        detail: format!("{rows} one-step rows, {fails} failures, max slack at beta = 0 {worst_tight:.2e}"),
    }
}

/// Criteria whose failure is analysed rather than fixed.
const KNOWN_FAILING: &[u32] = &[];

#[test]
fn acceptance() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "exact-measure oracle", criterion_1),
        (2, "chain stationarity and reversibility", criterion_2),
        (3, "gap factorization", criterion_3),
        (4, "local-to-global and local-walk eigenvalue bound", criterion_4),
        (5, "phase anchors", criterion_5),
        (6, "edgeworth / lclt", criterion_6),
        (7, "coupling contraction", criterion_7),
        (8, "metastability shadow", criterion_8),
        (9, "partition-ratio bounds", criterion_9),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        report(id, name, start, &o);
        if !o.pass && !KNOWN_FAILING.contains(&id) {
            unexpected.push(id);
        }
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
