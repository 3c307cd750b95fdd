use super::local::check_inputs;
use super::newton::{damped_newton, Evaluation};
use super::{check_margins, combine_local_estimates, effective_weights, Combined, LocalEstimate, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::model::{ContingencyTable, Design, JSet, VertexSet};
use crate::scalar::{log_sum_exp, max_abs, pairwise_sum, Real};
use rayon::prelude::*;

/// Maximizes the conditional likelihood of `x_v` given `x_{N_v}` over the
/// parameters `θ_j` with `v ∈ S(j)`.
pub fn pseudo_vertex_estimate<T: Real>(
    table: &ContingencyTable,
    g: &Graph,
    jset: &JSet,
    v: usize,
    cfg: &SolverConfig,
) -> Result<LocalEstimate<T>> {
    cfg.validate()?;
    check_inputs(table, g, jset)?;
    if v >= g.vertex_count() {
        return Err(Error::usage(format!("vertex {v} out of range")));
    }
    let mut members = g.neighbors(v).clone();
    members.insert(v);
    let own: Vec<usize> = (0..jset.len()).filter(|&k| jset.support(k).contains(v)).collect();
    if let Some(&k) = own.iter().find(|&&k| !jset.support(k).is_subset(&members)) {
        return Err(Error::usage(format!(
            "parameter {} reaches beyond the neighbours of vertex {v}",
            jset.space().encode(jset.cell(k))
        )));
    }
    let local = table.marginal(&members)?;
    let maximal: Vec<VertexSet> = crate::model::antichain(
        own.iter().map(|&k| jset.support(k).clone()).collect(),
    )
    .into_iter()
    .map(|s| s.iter().map(|w| members.position(w).unwrap()).collect())
    .collect();
    check_margins(&local, &maximal).map_err(|e| e.at_vertex(v))?;

    let space = local.space().clone();
    let local_jset = JSet::from_cells(
        space.clone(),
        own.iter().map(|&k| jset.cell(k).restrict(&members)).collect(),
    )?;
    let order: Vec<usize> = own
        .iter()
        .map(|&k| local_jset.position(&jset.cell(k).restrict(&members)).unwrap())
        .collect();
    let design = Design::new(&local_jset)?;
    let weights = effective_weights::<T>(&local, cfg.epsilon_smoothing)?;
    let total = pairwise_sum(&weights);
    if !(total > T::zero()) {
        return Err(Error::domain("cannot fit an empty table"));
    }

    // cells sharing the neighbour configuration, ordered by the level of v
    let pos_v = members.position(v).unwrap();
    let stride = space.strides()[pos_v];
    let levels = space.level(pos_v);
    let groups: Vec<usize> = (0..design.cells())
        .filter(|&i| (i / stride) % levels == 0)
        .collect();

    let dim = local_jset.len();
    let (theta, iterations, residual) = damped_newton(dim, cfg, |theta: &[T], hess| {
        let mut value = T::zero();
        let mut gradient = vec![T::zero(); dim];
        let mut curvature = hess.then(|| Matrix::zeros(dim, dim));
        let mut energies = vec![T::zero(); levels];
        let mut mean = vec![T::zero(); dim];
        for &base in &groups {
            let cells: Vec<usize> = (0..levels).map(|l| base + l * stride).collect();
            let n_group: T = cells.iter().map(|&i| weights[i]).sum();
            if n_group == T::zero() {
                continue;
            }
            for (e, &i) in energies.iter_mut().zip(&cells) {
                *e = design.active(i).iter().map(|&k| theta[k as usize]).sum();
            }
            let lse = log_sum_exp(&energies);
            mean.iter_mut().for_each(|m| *m = T::zero());
            for (&e, &i) in energies.iter().zip(&cells) {
                let q = (e - lse).exp();
                value += weights[i] * (e - lse);
                for &k in design.active(i) {
                    gradient[k as usize] += weights[i];
                    mean[k as usize] += q;
                }
                if let Some(h) = curvature.as_mut() {
                    let act = design.active(i);
                    for &a in act {
                        for &b in act {
                            h[(a as usize, b as usize)] += n_group * q;
                        }
                    }
                }
            }
            for k in 0..dim {
                gradient[k] -= n_group * mean[k];
            }
            if let Some(h) = curvature.as_mut() {
                for a in 0..dim {
                    if mean[a] == T::zero() {
                        continue;
                    }
                    for b in 0..dim {
                        h[(a, b)] -= n_group * mean[a] * mean[b];
                    }
                }
            }
        }
        gradient.iter_mut().for_each(|x| *x /= total);
        Evaluation {
            value: value / total,
            gradient,
            curvature: curvature.map(|h| h.scale(T::one() / total)),
        }
    })
    .map_err(|e| e.at_vertex(v))?;
    if max_abs(&theta) > T::lit(cfg.divergence_threshold) {
        return Err(Error::nonexistence("pseudo-likelihood estimate diverges").at_vertex(v));
    }
    Ok(LocalEstimate {
        vertex: v,
        components: own.iter().zip(&order).map(|(&k, &l)| (k, theta[l])).collect(),
        iterations,
        residual,
    })
}

/// Pseudo-likelihood at every vertex, shared components averaged.
pub fn pseudo_likelihood_estimate<T: Real>(
    table: &ContingencyTable,
    g: &Graph,
    jset: &JSet,
    cfg: &SolverConfig,
) -> Result<(Combined<T>, Vec<LocalEstimate<T>>)> {
    let per_vertex: Vec<LocalEstimate<T>> = (0..g.vertex_count())
        .into_par_iter()
        .map(|v| pseudo_vertex_estimate(table, g, jset, v, cfg))
        .collect::<Result<_>>()?;
    let combined = combine_local_estimates(jset, &per_vertex)?;
    Ok((combined, per_vertex))
}
