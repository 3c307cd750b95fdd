use crate::error::{Error, Result};
use crate::graph::{junction_tree, Graph};
use crate::model::{theta_from_p, ContingencyTable, JSet, ProbabilityVector, ThetaVector, VertexSet};
use crate::scalar::Real;

/// Closed-form MLE of a decomposable graphical model: clique parameters minus
/// separator parameters, each from the saturated empirical marginal.
pub fn decomposable_theta<T: Real>(
    table: &ContingencyTable,
    g: &Graph,
    jset: &JSet,
) -> Result<ThetaVector<T>> {
    super::local::check_inputs(table, g, jset)?;
    let jt = junction_tree(g)?;
    let mut values = vec![T::zero(); jset.len()];
    let mut theta0 = T::zero();
    let parts = jt
        .cliques
        .iter()
        .map(|c| (c, T::one()))
        .chain(jt.separators.iter().map(|s| (s, -T::one())));
    for (set, sign) in parts {
        if set.is_empty() {
            continue;
        }
        let (sat, theta) = saturated_marginal::<T>(table, set)?;
        theta0 += sign * theta.theta0().expect("Möbius inversion sets theta0");
        for k in 0..jset.len() {
            if jset.support(k).is_subset(set) {
                let local = jset.cell(k).restrict(set);
                let pos = sat.position(&local).expect("saturated J-set holds every nonzero cell");
                values[k] += sign * theta.get(pos);
            }
        }
    }
    ThetaVector::new(values, Some(theta0))
}

fn saturated_marginal<T: Real>(table: &ContingencyTable, set: &VertexSet) -> Result<(JSet, ThetaVector<T>)> {
    let marginal = table.marginal(set)?;
    let counts = marginal.dense_counts()?;
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::nonexistence(format!(
            "zero marginal count for cell {} on {set}",
            marginal.space().encode(&marginal.space().cell_at(k))
        )));
    }
    let p = ProbabilityVector::from_weights(
        marginal.space().clone(),
        counts.iter().map(|&c| T::from_count(c)).collect(),
    )?;
    let sat = JSet::saturated(marginal.space().clone())?;
    let theta = theta_from_p(&p, &sat)?;
    Ok((sat, theta))
}
