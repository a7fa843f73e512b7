use ising_kawasaki::dynamics::{build_transition_matrix, ChainKernel};
use ising_kawasaki::ising_measures::{exact_partition_table, size_distribution, IsingParams, Pinning};
use ising_kawasaki::spectral_analysis::{
    characteristic_bound_probe, dirichlet_quotient, edgeworth_pmf, exact_mixing_time, influence_matrix,
    local_to_global_gap_bound, local_walk, local_walk_family, mixing_time_upper, spectral_gap, spectrum,
    stability_probe, ExactDistribution,
};
use ising_kawasaki::ising_measures::cumulants_from_pmf;
use ising_kawasaki::Graph;

#[test]
fn k3_swap_gap() {
    let p = build_transition_matrix(&ChainKernel::kawasaki(0.4, 1, Pinning::none()), &Graph::complete(3)).unwrap();
    let ev = spectrum(&p).unwrap();
    assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] + 0.5).abs() < 1e-12 && (ev[2] + 0.5).abs() < 1e-12);
    assert!((spectral_gap(&p).unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn k4_mixing_within_bound() {
    for beta in [0.0, 0.5, 1.0] {
        let p = build_transition_matrix(&ChainKernel::kawasaki(beta, 2, Pinning::none()), &Graph::complete(4))
            .unwrap()
            .lazy();
        let tau = exact_mixing_time(&p, false, 1000).unwrap().tau.unwrap();
        assert!(tau as f64 <= mixing_time_upper(&p).unwrap());
    }
}

#[test]
fn dirichlet_quotient_at_least_gap() {
    let p = build_transition_matrix(&ChainKernel::kawasaki(0.7, 3, Pinning::none()), &Graph::cycle(6)).unwrap();
    let gap = spectral_gap(&p).unwrap();
    for seed in 0..20u64 {
        let f: Vec<f64> = (0..p.len()).map(|i| ((i as u64 * 2654435761 + seed * 97) % 1000) as f64).collect();
        assert!(dirichlet_quotient(&p, &f).unwrap() >= gap - 1e-12);
    }
    assert!(dirichlet_quotient(&p, &vec![1.0; p.len()]).is_none());
}

#[test]
fn uniform_influence() {
    let d = ExactDistribution::fixed_magnetization(&Graph::complete(4), 0.0, 2, &Pinning::none()).unwrap();
    let m = influence_matrix(&d, None);
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { 0.5 } else { -1.0 / 6.0 };
            assert!((m.m[i][j] - want).abs() < 1e-14);
        }
    }
    // (2/3) I − (1/6) J: eigenvalues 2/3 three times and 0
    assert!((m.largest_eigenvalue - 2.0 / 3.0).abs() < 1e-12);
    assert!(!m.complex_eigenvalues);
}

#[test]
fn independent_spins_have_diagonal_influence() {
    for lambda in [0.5, 1.0, 3.0] {
        let d = ExactDistribution::grand_canonical(&Graph::cycle(5), IsingParams::new(0.0, lambda).unwrap(), &Pinning::none())
            .unwrap();
        let m = influence_matrix(&d, None);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 - lambda / (1.0 + lambda) } else { 0.0 };
                assert!((m.m[i][j] - want).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn uniform_local_walk_is_complete_graph_walk() {
    for (n, k) in [(4, 2), (6, 3), (7, 4)] {
        let d = ExactDistribution::fixed_magnetization(&Graph::complete(n), 0.0, k, &Pinning::none()).unwrap();
        let w = local_walk(&d, k, &[]).unwrap();
        assert!((w.second_eigenvalue + 1.0 / (n as f64 - 1.0)).abs() < 1e-12);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 0.0 } else { 1.0 / (n as f64 - 1.0) };
                assert!((w.q[(i, j)] - want).abs() < 1e-13);
            }
        }
    }
    let d = ExactDistribution::fixed_magnetization(&Graph::complete(4), 0.0, 2, &Pinning::none()).unwrap();
    assert!(local_walk(&d, 2, &[0]).is_err());
}

#[test]
fn c6_local_to_global_every_ell() {
    let g = Graph::cycle(6);
    let (beta, k) = (0.3, 3);
    let d = ExactDistribution::fixed_magnetization(&g, beta, k, &Pinning::none()).unwrap();
    let fam = local_walk_family(&d, k).unwrap();
    for ell in 0..k {
        let bound = local_to_global_gap_bound(&fam.zetas, ell).unwrap().value;
        let gap = spectral_gap(&build_transition_matrix(&ChainKernel::kl_downup(beta, k, ell), &g).unwrap()).unwrap();
        assert!(gap >= bound - 1e-12, "ell={ell}: {gap} < {bound}");
    }
}

#[test]
fn edgeworth_pmf_is_normalized() {
    let t = exact_partition_table(&Graph::cycle(16), 0.5, &Pinning::none()).unwrap();
    let pmf = size_distribution(&t, 1.2).unwrap();
    let c = cumulants_from_pmf(&pmf, 5).unwrap();
    let kappas: Vec<f64> = (1..=5).map(|j| c.kappa(j)).collect();
    let ells: Vec<f64> = (0..=16).map(|k| k as f64 - kappas[0]).collect();
    for d in 0..=2 {
        let e = edgeworth_pmf(&kappas, &ells, d).unwrap();
        let total: f64 = e.values.iter().sum();
        assert!((total - 1.0).abs() < 5e-3, "d={d} total {total}");
    }
    assert!(edgeworth_pmf(&kappas, &ells, 3).is_err());
}

#[test]
fn stability_deltas_bounded_on_rings() {
    let mut worst = 0.0f64;
    for n in 10..=20 {
        let r = stability_probe(&Graph::cycle(n), IsingParams::new(0.4, 1.0).unwrap(), &Pinning::none(), 0, n / 2).unwrap();
        worst = worst.max(r.kappa_deltas.iter().copied().fold(0.0, f64::max));
        assert!(r.delta_p >= 0.0);
    }
    assert!(worst < 2.0, "{worst}");
}

#[test]
fn characteristic_bound_is_positive() {
    let r = characteristic_bound_probe(&Graph::cycle(12), IsingParams::new(0.6, 0.8).unwrap(), &Pinning::none(), 64).unwrap();
    assert!(r.c > 0.0 && !r.degenerate);
    // all spins pinned: X is constant
    let pin = Pinning::new((0..4).map(|v| (v, 1))).unwrap();
    let d = characteristic_bound_probe(&Graph::cycle(4), IsingParams::new(0.6, 0.8).unwrap(), &pin, 16).unwrap();
    assert!(d.degenerate);
}
