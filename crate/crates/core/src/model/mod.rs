//! Cells, supports, generating classes, J-sets and the parameter/probability
//! duality of hierarchical log-linear models.

mod cell;
mod generating;
mod jset;
mod mobius;
mod params;
mod table;
mod vertex_set;

pub use cell::{triangleleft, triangleleft0, Cell, CellIter, CellSpace, DEFAULT_ENUMERATION_GUARD};
pub use generating::GeneratingClass;
pub(crate) use generating::antichain;
pub use jset::{build_jset, JSet};
pub use mobius::{
    canonical_statistic, cumulant, loglik, p_from_theta, theta_components, theta_from_p, Design,
};
pub(crate) use mobius::normalize;
pub use params::{ProbabilityVector, ThetaEntry, ThetaRecord, ThetaVector};
pub use table::{ContingencyTable, Counts};
pub use vertex_set::VertexSet;
