use super::{check_margins, effective_weights, ipf_from_weights, newton_with_design, LocalFitter, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{neighborhood, Graph, Hop};
use crate::marginal::MarginalModel;
use crate::model::{antichain, theta_components, ContingencyTable, Design, JSet, VertexSet};
use crate::scalar::{max_abs, Real};
use rayon::prelude::*;

/// Estimates produced at one vertex. `components` pairs positions in the
/// overall J-set with their local estimates.
#[derive(Clone, Debug)]
pub struct LocalEstimate<T> {
    pub vertex: usize,
    pub components: Vec<(usize, T)>,
    pub iterations: usize,
    pub residual: f64,
}

/// Fits the relaxed marginal model over the one- or two-hop neighbourhood of
/// `v` and returns its exempt components (buffer estimates are discarded).
pub fn local_marginal_estimate<T: Real>(
    table: &ContingencyTable,
    g: &Graph,
    jset: &JSet,
    v: usize,
    hop: Hop,
    cfg: &SolverConfig,
) -> Result<LocalEstimate<T>> {
    cfg.validate()?;
    check_inputs(table, g, jset)?;
    let nb = neighborhood(g, v, hop)?;
    let model = MarginalModel::relaxed(&nb, jset)?;
    let local = table.marginal(&nb.members)?;
    fit_exempt(&local, &model, cfg).map_err(|e| e.at_vertex(v))
}

pub(crate) fn check_inputs(table: &ContingencyTable, g: &Graph, jset: &JSet) -> Result<()> {
    if table.space().levels() != jset.space().levels() {
        return Err(Error::usage("table and J-set live on different spaces"));
    }
    if g.vertex_count() != jset.space().vertex_count() {
        return Err(Error::usage("graph and J-set have different vertex counts"));
    }
    Ok(())
}

fn fit_exempt<T: Real>(
    local: &ContingencyTable,
    model: &MarginalModel,
    cfg: &SolverConfig,
) -> Result<LocalEstimate<T>> {
    let vertex = model.neighborhood.center;
    // raw data must support every returned parameter
    let supports: Vec<VertexSet> = model
        .exempt
        .iter()
        .map(|&(pos, _)| model.jset.support(pos).clone())
        .collect();
    check_margins(local, &antichain(supports))?;

    let weights = effective_weights::<T>(local, cfg.epsilon_smoothing)?;
    let positions: Vec<usize> = model.exempt.iter().map(|&(pos, _)| pos).collect();
    let (values, iterations, residual) = match cfg.local_fitter {
        LocalFitter::Ipf => {
            let gen = model.jset.generating_class()?;
            let fit = ipf_from_weights(local.space(), &weights, &gen, cfg)?;
            let values = theta_components(&fit.probabilities, &model.jset, &positions)?;
            (values, fit.cycles, fit.residual)
        }
        LocalFitter::Newton => {
            let design = Design::new(&model.jset)?;
            let fit = newton_with_design(&design, &weights, cfg)?;
            let values = positions.iter().map(|&k| fit.theta.get(k)).collect();
            (values, fit.iterations, fit.gradient_norm)
        }
    };
    if max_abs(&values) > T::lit(cfg.divergence_threshold) {
        return Err(Error::nonexistence(format!(
            "local estimate exceeds magnitude {}",
            cfg.divergence_threshold
        )));
    }
    Ok(LocalEstimate {
        vertex,
        components: model
            .exempt
            .iter()
            .map(|&(_, full)| full)
            .zip(values)
            .collect(),
        iterations,
        residual,
    })
}

/// Local estimates at every vertex, in vertex order.
pub fn local_estimates_all<T: Real>(
    table: &ContingencyTable,
    g: &Graph,
    jset: &JSet,
    hop: Hop,
    cfg: &SolverConfig,
) -> Result<Vec<LocalEstimate<T>>> {
    (0..g.vertex_count())
        .into_par_iter()
        .map(|v| local_marginal_estimate(table, g, jset, v, hop, cfg))
        .collect()
}
