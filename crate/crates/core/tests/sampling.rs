mod common;

use common::{binary_jset, four_cycle};
use loglin::graph::{cliques_generating_class, Graph};
use loglin::model::{build_jset, p_from_theta, CellSpace, ThetaVector};
use loglin::sampling::{exact_sample, gibbs_sample, random_theta, site_conditional, RngSeed};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn total_variation(p: &[f64], counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    0.5 * p.iter().zip(counts).map(|(&q, &c)| (q - c as f64 / n as f64).abs()).sum::<f64>()
}

#[test]
fn uniform_draws_hit_every_cell_evenly() {
    let jset = binary_jset(&four_cycle());
    let n = 100_000;
    let s = exact_sample(&ThetaVector::zeros(jset.len()), &jset, n, RngSeed::new(1, 0)).unwrap();
    let q = 1.0 / 16.0;
    let se = (n as f64 * q * (1.0 - q)).sqrt();
    for &c in s.table.dense_counts().unwrap() {
        assert!((c as f64 - n as f64 * q).abs() < 4.0 * se, "{c}");
    }
}

#[test]
fn exact_sampler_passes_chi_square() {
    let jset = binary_jset(&four_cycle());
    let critical = ChiSquared::new(15.0).unwrap().inverse_cdf(0.999);
    for seed in 0..5 {
        let theta = random_theta(jset.len(), RngSeed::new(seed, 0));
        let p = p_from_theta(&theta, &jset).unwrap();
        let n = 20_000;
        let s = exact_sample(&theta, &jset, n, RngSeed::new(seed, 1)).unwrap();
        let stat: f64 = p
            .values()
            .iter()
            .zip(s.table.dense_counts().unwrap())
            .map(|(&q, &c)| {
                let e = q * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        assert!(stat < critical, "seed {seed}: {stat} >= {critical}");
    }
}

#[test]
fn exact_sampler_total_variation_shrinks() {
    let jset = binary_jset(&four_cycle());
    let theta = random_theta(jset.len(), RngSeed::new(8, 0));
    let p = p_from_theta(&theta, &jset).unwrap();
    let tv: Vec<f64> = [1_000, 10_000, 100_000]
        .iter()
        .map(|&n| {
            let s = exact_sample(&theta, &jset, n, RngSeed::new(8, 1)).unwrap();
            total_variation(p.values(), s.table.dense_counts().unwrap())
        })
        .collect();
    assert!(tv[0] < 0.1 && tv[1] < 0.03 && tv[2] < 0.01, "{tv:?}");
}

#[test]
fn gibbs_on_independent_sites_matches_logits() {
    let g = Graph::new(3, []).unwrap();
    let jset = build_jset(&CellSpace::binary(3).unwrap(), &cliques_generating_class(&g).unwrap()).unwrap();
    let theta = ThetaVector::new(vec![-0.8, 0.1, 1.2], None).unwrap();
    let n = 20_000;
    let s = gibbs_sample(&theta, &jset, &g, n, 100, 1, RngSeed::new(2, 0)).unwrap();
    for v in 0..3 {
        let mut unit = vec![0u16; 3];
        unit[v] = 1;
        let t = theta.value_of(&jset, &loglin::model::Cell::new(unit));
        let q = 1.0 / (1.0 + (-t).exp());
        let ones = s.cells.iter().filter(|c| c.get(v) == 1).count() as f64;
        let se = (n as f64 * q * (1.0 - q)).sqrt();
        assert!((ones - n as f64 * q).abs() < 4.0 * se, "vertex {v}");
    }
}

#[test]
fn gibbs_on_four_cycle_is_close_in_total_variation() {
    let g = four_cycle();
    let jset = binary_jset(&g);
    let theta = random_theta(jset.len(), RngSeed::new(4, 0));
    let p = p_from_theta(&theta, &jset).unwrap();
    let s = gibbs_sample(&theta, &jset, &g, 100_000, 1000, 5, RngSeed::new(4, 1)).unwrap();
    let tv = total_variation(p.values(), s.table.dense_counts().unwrap());
    assert!(tv < 0.01, "{tv}");
}

#[test]
fn gibbs_conditionals_match_joint_ratios() {
    let g = four_cycle();
    let jset = binary_jset(&g);
    let space = jset.space().clone();
    let theta = random_theta(jset.len(), RngSeed::new(6, 0));
    let p = p_from_theta(&theta, &jset).unwrap();
    for x in space.cells() {
        for v in 0..4 {
            let cond = site_conditional(&theta, &jset, &x, v).unwrap();
            let weights: Vec<f64> = (0..2)
                .map(|l| {
                    let mut y = x.clone();
                    y.set(v, l);
                    p.values()[space.index(&y)]
                })
                .collect();
            let total: f64 = weights.iter().sum();
            for l in 0..2 {
                assert!((cond[l] - weights[l] / total).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn samplers_are_deterministic() {
    let g = four_cycle();
    let jset = binary_jset(&g);
    let theta = random_theta(jset.len(), RngSeed::new(1, 0));
    let a = gibbs_sample(&theta, &jset, &g, 500, 50, 3, RngSeed::new(9, 7)).unwrap();
    let b = gibbs_sample(&theta, &jset, &g, 500, 50, 3, RngSeed::new(9, 7)).unwrap();
    let c = gibbs_sample(&theta, &jset, &g, 500, 50, 3, RngSeed::new(9, 8)).unwrap();
    assert_eq!(a.cells, b.cells);
    assert_ne!(a.cells, c.cells);
    assert_eq!(a.table.dense_counts().unwrap(), b.table.dense_counts().unwrap());
}

#[test]
fn exact_sampling_refuses_large_spaces() {
    let g = loglin::graph::make_lattice(6).unwrap();
    let space = CellSpace::binary(36).unwrap();
    let jset = build_jset(&space, &cliques_generating_class(&g).unwrap()).unwrap();
    let theta = random_theta(jset.len(), RngSeed::new(1, 0));
    let err = exact_sample(&theta, &jset, 10, RngSeed::new(1, 1)).unwrap_err();
    assert!(err.to_string().contains("Gibbs"), "{err}");
    let s = gibbs_sample(&theta, &jset, &g, 10, 20, 1, RngSeed::new(1, 1)).unwrap();
    assert_eq!(s.table.total(), 10);
    assert!(!s.table.is_dense());
}
