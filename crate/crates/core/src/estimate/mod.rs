//! Global, local (one-hop and two-hop), pseudo-likelihood and closed-form
//! estimators, and the averaging of local estimates.

mod combine;
mod config;
mod decomposable;
mod ipf;
mod local;
mod newton;
mod pseudo;
mod report;

pub use combine::{combine_local_estimates, Combined};
pub use config::{LocalFitter, SolverConfig};
pub use decomposable::decomposable_theta;
pub use ipf::{ipf_fit, ipf_from_weights, IpfFit};
pub use local::{local_estimates_all, local_marginal_estimate, LocalEstimate};
pub use newton::{newton_mle, newton_with_design, NewtonFit};
pub use pseudo::{pseudo_likelihood_estimate, pseudo_vertex_estimate};
pub use report::{
    estimate, estimate_report, Diagnostics, Estimate, EstimateReport, Method, SourceEntry,
    VertexDiagnostics,
};

use crate::error::{Error, Result};
use crate::marginal::projection_index;
use crate::model::{CellSpace, ContingencyTable, VertexSet};
use crate::scalar::Real;

/// Dense cell weights `n(i) + ε`.
pub(crate) fn effective_weights<T: Real>(table: &ContingencyTable, epsilon: f64) -> Result<Vec<T>> {
    let eps = T::lit(epsilon);
    Ok(table
        .dense_counts()?
        .iter()
        .map(|&n| T::from_count(n) + eps)
        .collect())
}

/// Flags a missing MLE when some raw marginal over one of `sets` has an empty cell.
pub(crate) fn check_margins(table: &ContingencyTable, sets: &[VertexSet]) -> Result<()> {
    for set in sets {
        let m = table.marginal(set)?;
        let empty = if m.is_dense() {
            m.dense_counts()?.contains(&0)
        } else {
            (m.nonzero().count() as u128) < m.space().total_cells()
        };
        if empty {
            return Err(Error::nonexistence(format!("empty marginal cell on {set}")));
        }
    }
    Ok(())
}

/// Flags a missing MLE when the weighted marginal over one of `sets` has an empty cell.
pub(crate) fn check_weight_margins<T: Real>(
    space: &CellSpace,
    weights: &[T],
    sets: &[VertexSet],
) -> Result<()> {
    for set in sets {
        let mut margin = vec![T::zero(); space.restrict(set).dense_len("marginal table")?];
        for (&m, &w) in projection_index(space, set)?.iter().zip(weights) {
            margin[m] += w;
        }
        if margin.iter().any(|&x| !(x > T::zero())) {
            return Err(Error::nonexistence(format!("zero marginal count on {set}")));
        }
    }
    Ok(())
}
