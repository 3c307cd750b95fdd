mod common;

use common::{binary_jset, cell, four_cycle};
use loglin::estimate::{
    combine_local_estimates, decomposable_theta, estimate, estimate_report, ipf_fit,
    local_estimates_all, local_marginal_estimate, newton_mle, pseudo_likelihood_estimate,
    LocalFitter, Method, SolverConfig,
};
use loglin::graph::{make_lattice, make_path, make_star, Graph, Hop};
use loglin::model::{theta_from_p, CellSpace, ContingencyTable, JSet};
use loglin::sampling::{exact_sample, random_theta, RngSeed};
use loglin::Error;
use rand::{Rng, SeedableRng};

fn random_positive_table(space: &CellSpace, seed: u64) -> ContingencyTable {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = space.total_cells() as usize;
    ContingencyTable::from_dense(space.clone(), (0..n).map(|_| rng.gen_range(1..40)).collect())
        .unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn newton_ipf_and_closed_form_agree() {
    let cfg = SolverConfig::default();
    let graphs = [four_cycle(), make_star(2).unwrap(), make_path(3).unwrap(), make_lattice(3).unwrap()];
    for (gi, g) in graphs.iter().enumerate() {
        let jset = binary_jset(g);
        let gen = jset.generating_class().unwrap();
        for s in 0..5 {
            let table = random_positive_table(jset.space(), 100 * gi as u64 + s);
            let newton = newton_mle::<f64>(&table, &jset, &cfg).unwrap().theta;
            let ipf = ipf_fit::<f64>(&table, &gen, &cfg).unwrap();
            let via_ipf = theta_from_p(&ipf.probabilities, &jset).unwrap();
            assert!(max_diff(newton.values(), via_ipf.values()) < 1e-6);
            if gi == 1 || gi == 2 {
                let closed = decomposable_theta::<f64>(&table, g, &jset).unwrap();
                assert!(max_diff(newton.values(), closed.values()) < 1e-8);
                assert!((closed.theta0().unwrap() - newton.theta0().unwrap()).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn ternary_variables_agree_too() {
    let g = make_path(3).unwrap();
    let space = CellSpace::new(vec![3, 2, 3]).unwrap();
    let gen = loglin::graph::cliques_generating_class(&g).unwrap();
    let jset = loglin::model::build_jset(&space, &gen).unwrap();
    let table = random_positive_table(&space, 77);
    let cfg = SolverConfig::default();
    let newton = newton_mle::<f64>(&table, &jset, &cfg).unwrap().theta;
    let closed = decomposable_theta::<f64>(&table, &g, &jset).unwrap();
    assert!(max_diff(newton.values(), closed.values()) < 1e-8);
    let two_hop = estimate::<f64>(&table, &g, &jset, Method::TwoHop, &cfg).unwrap();
    assert!(max_diff(newton.values(), two_hop.theta.values()) < 1e-6);
}

#[test]
fn local_estimate_covering_graph_is_global() {
    let g = four_cycle();
    let jset = binary_jset(&g);
    let table = random_positive_table(jset.space(), 5);
    let cfg = SolverConfig::default();
    let global = newton_mle::<f64>(&table, &jset, &cfg).unwrap().theta;
    for fitter in [LocalFitter::Ipf, LocalFitter::Newton] {
        let cfg = SolverConfig { local_fitter: fitter, ..cfg.clone() };
        let local = local_marginal_estimate::<f64>(&table, &g, &jset, 0, Hop::Two, &cfg).unwrap();
        assert_eq!(local.components.len(), jset.len());
        for (k, x) in local.components {
            assert!((x - global.get(k)).abs() < 1e-6);
        }
    }
}

#[test]
fn one_hop_returns_exactly_the_exempt_cells() {
    let g = four_cycle();
    let jset = binary_jset(&g);
    let table = random_positive_table(jset.space(), 6);
    let est = local_marginal_estimate::<f64>(&table, &g, &jset, 0, Hop::One, &SolverConfig::default())
        .unwrap();
    let mut cells: Vec<_> = est.components.iter().map(|&(k, _)| jset.cell(k).clone()).collect();
    cells.sort();
    assert_eq!(cells, vec![cell(&[1, 0, 0, 0]), cell(&[1, 0, 1, 0]), cell(&[1, 1, 0, 0])]);
    let all = local_estimates_all::<f64>(&table, &g, &jset, Hop::One, &SolverConfig::default()).unwrap();
    let combined = combine_local_estimates(&jset, &all).unwrap();
    for (k, src) in combined.sources.iter().enumerate() {
        assert_eq!(src.len(), jset.support(k).len());
    }
}

#[test]
fn pseudo_likelihood_reductions() {
    let cfg = SolverConfig::default();
    let single = Graph::new(1, []).unwrap();
    let jset = binary_jset(&single);
    let table = ContingencyTable::from_dense(jset.space().clone(), vec![2, 6]).unwrap();
    let (c, _) = pseudo_likelihood_estimate::<f64>(&table, &single, &jset, &cfg).unwrap();
    assert!((c.theta.get(0) - 3f64.ln()).abs() < 1e-10);

    let pair = Graph::new(2, []).unwrap();
    let jset = binary_jset(&pair);
    let table = ContingencyTable::from_dense(jset.space().clone(), vec![3, 5, 7, 2]).unwrap();
    let (c, _) = pseudo_likelihood_estimate::<f64>(&table, &pair, &jset, &cfg).unwrap();
    let global = newton_mle::<f64>(&table, &jset, &cfg).unwrap().theta;
    assert!(max_diff(c.theta.values(), global.values()) < 1e-8);
}

#[test]
fn large_samples_recover_the_truth() {
    let g = four_cycle();
    let jset = binary_jset(&g);
    let theta = random_theta(jset.len(), RngSeed::new(3, 0));
    let data = exact_sample(&theta, &jset, 100_000, RngSeed::new(3, 1)).unwrap();
    let p = loglin::model::p_from_theta(&theta, &jset).unwrap();
    let var = loglin::asymptotics::asymptotic_variance(&p, &jset, 100_000).unwrap();
    let cfg = SolverConfig::default();
    for method in [Method::Global, Method::OneHop, Method::TwoHop, Method::Pseudo] {
        let est = estimate::<f64>(&data.table, &g, &jset, method, &cfg).unwrap();
        for k in 0..jset.len() {
            // one-hop and pseudo are less efficient than the global MLE
            let se = var[(k, k)].sqrt() * if method == Method::Global || method == Method::TwoHop { 1.0 } else { 2.0 };
            let err = (est.theta.get(k) - theta.get(k)).abs();
            assert!(err < 4.0 * se, "{method} component {k}: error {err} vs se {se}");
        }
    }
}

#[test]
fn smoothing_is_neutral_on_positive_tables() {
    let g = make_lattice(3).unwrap();
    let jset = binary_jset(&g);
    let table = random_positive_table(jset.space(), 12);
    let plain = SolverConfig::default();
    let smooth = SolverConfig { epsilon_smoothing: 2f64.powi(-30), ..plain.clone() };
    for method in [Method::Global, Method::OneHop, Method::TwoHop, Method::Pseudo] {
        let a = estimate::<f64>(&table, &g, &jset, method, &plain).unwrap();
        let b = estimate::<f64>(&table, &g, &jset, method, &smooth).unwrap();
        assert!(max_diff(a.theta.values(), b.theta.values()) < 1e-6, "{method}");
    }
}

#[test]
fn sparse_data_is_reported_not_crashed() {
    let g = four_cycle();
    let jset = binary_jset(&g);
    let table = ContingencyTable::from_pairs(jset.space().clone(), [(cell(&[1, 1, 0, 0]), 4)]).unwrap();
    for method in [Method::Global, Method::OneHop, Method::TwoHop, Method::Pseudo, Method::Decomposable] {
        match estimate_report(&table, &g, &jset, method, &SolverConfig::default()) {
            Ok(r) => {
                assert!(!r.existence, "{method}");
                assert!(r.theta.is_none());
            }
            Err(Error::Domain(_)) if method == Method::Decomposable => {}
            Err(e) => panic!("{method}: {e}"),
        }
    }
}

#[test]
fn global_refuses_large_graphs() {
    let g = make_lattice(10).unwrap();
    let jset = binary_jset(&g);
    let table = ContingencyTable::empty(jset.space().clone());
    let err = estimate::<f64>(&table, &g, &jset, Method::Global, &SolverConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Capacity { .. }), "{err}");
}

#[test]
fn single_precision_fits() {
    let g = four_cycle();
    let jset: JSet = binary_jset(&g);
    let table = random_positive_table(jset.space(), 9);
    let cfg = SolverConfig { newton_tolerance: 1e-5, ipf_tolerance: 1e-6, ..SolverConfig::default() };
    let single = newton_mle::<f32>(&table, &jset, &cfg).unwrap().theta;
    let double = newton_mle::<f64>(&table, &jset, &SolverConfig::default()).unwrap().theta;
    for k in 0..jset.len() {
        assert!((single.get(k) as f64 - double.get(k)).abs() < 1e-3);
    }
    let local = estimate::<f32>(&table, &g, &jset, Method::OneHop, &cfg).unwrap();
    assert_eq!(local.theta.len(), jset.len());
}
