//! Distributed maximum-likelihood estimation for discrete hierarchical
//! log-linear models that are Markov with respect to an undirected graph.
//!
//! The crate covers the full pipeline: cell spaces and J-sets ([`model`]),
//! graphs and neighbourhoods ([`graph`]), marginal and relaxed local models
//! ([`marginal`]), the global, one-hop, two-hop and pseudo-likelihood
//! estimators ([`estimate`]), exact Fisher information ([`asymptotics`]),
//! synthetic data ([`sampling`]) and the experiment drivers behind the CLI
//! ([`harness`]).
//!
//! Numerical code is generic over [`Real`]; the aliases below fix `f64`.

pub mod asymptotics;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod marginal;
pub mod model;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Theta = model::ThetaVector<f64>;
pub type Probabilities = model::ProbabilityVector<f64>;
pub type Theta32 = model::ThetaVector<f32>;
pub type Probabilities32 = model::ProbabilityVector<f32>;
