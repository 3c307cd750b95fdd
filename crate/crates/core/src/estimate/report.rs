use super::{
    combine_local_estimates, decomposable_theta, local_estimates_all, newton_mle,
    pseudo_likelihood_estimate, LocalEstimate, SolverConfig,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, Hop};
use crate::model::{antichain, ContingencyTable, JSet, ThetaRecord, ThetaVector};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Global,
    OneHop,
    TwoHop,
    Pseudo,
    Decomposable,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Global,
        Method::OneHop,
        Method::TwoHop,
        Method::Pseudo,
        Method::Decomposable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Global => "global",
            Method::OneHop => "one-hop",
            Method::TwoHop => "two-hop",
            Method::Pseudo => "pseudo",
            Method::Decomposable => "decomposable",
        }
    }

    pub fn is_distributed(self) -> bool {
        matches!(self, Method::OneHop | Method::TwoHop | Method::Pseudo)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::usage(format!(
                    "unknown method `{s}` (expected global, one-hop, two-hop, pseudo or decomposable)"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDiagnostics {
    pub vertex: usize,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Newton iterations or IPF cycles (the maximum over vertices for local methods).
    pub iterations: usize,
    /// Final gradient norm or marginal gap (the maximum over vertices).
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<VertexDiagnostics>,
}

/// A fitted parameter vector over the overall J-set. `sources[k]` lists the
/// vertices whose local problems produced component `k`; it is empty for the
/// centralized methods.
#[derive(Clone, Debug)]
pub struct Estimate<T> {
    pub method: Method,
    pub theta: ThetaVector<T>,
    pub sources: Vec<Vec<usize>>,
    pub diagnostics: Diagnostics,
}

fn diagnostics_of<T>(locals: &[LocalEstimate<T>]) -> Diagnostics {
    let vertices: Vec<VertexDiagnostics> = locals
        .iter()
        .map(|l| VertexDiagnostics {
            vertex: l.vertex,
            iterations: l.iterations,
            residual: l.residual,
        })
        .collect();
    Diagnostics {
        iterations: vertices.iter().map(|d| d.iterations).max().unwrap_or(0),
        residual: vertices.iter().map(|d| d.residual).fold(0.0, f64::max),
        vertices,
    }
}

/// Runs one estimator end to end on the overall J-set `jset` of graph `g`.
pub fn estimate<T: Real>(
    table: &ContingencyTable,
    g: &Graph,
    jset: &JSet,
    method: Method,
    cfg: &SolverConfig,
) -> Result<Estimate<T>> {
    cfg.validate()?;
    super::local::check_inputs(table, g, jset)?;
    let unsourced = || vec![Vec::new(); jset.len()];
    match method {
        Method::Global => {
            jset.space().dense_len("global maximum likelihood")?;
            let gen = jset.generating_class()?;
            super::check_margins(table, &antichain(gen.maximal_sets().to_vec()))?;
            let fit = newton_mle(table, jset, cfg)?;
            Ok(Estimate {
                method,
                theta: fit.theta,
                sources: unsourced(),
                diagnostics: Diagnostics {
                    iterations: fit.iterations,
                    residual: fit.gradient_norm,
                    vertices: Vec::new(),
                },
            })
        }
        Method::OneHop | Method::TwoHop => {
            let hop = if method == Method::OneHop { Hop::One } else { Hop::Two };
            let locals = local_estimates_all(table, g, jset, hop, cfg)?;
            let combined = combine_local_estimates(jset, &locals)?;
            Ok(Estimate {
                method,
                theta: combined.theta,
                sources: combined.sources,
                diagnostics: diagnostics_of(&locals),
            })
        }
        Method::Pseudo => {
            let (combined, locals) = pseudo_likelihood_estimate(table, g, jset, cfg)?;
            Ok(Estimate {
                method,
                theta: combined.theta,
                sources: combined.sources,
                diagnostics: diagnostics_of(&locals),
            })
        }
        Method::Decomposable => Ok(Estimate {
            method,
            theta: decomposable_theta(table, g, jset)?,
            sources: unsourced(),
            diagnostics: Diagnostics::default(),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub cell: String,
    pub vertices: Vec<usize>,
}

/// Serializable outcome of an estimation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: Method,
    pub existence: bool,
    pub theta: Option<ThetaRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<SourceEntry>,
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl EstimateReport {
    pub fn from_estimate<T: Real>(est: &Estimate<T>, jset: &JSet) -> Self {
        let sources = if est.method.is_distributed() {
            est.sources
                .iter()
                .enumerate()
                .map(|(k, v)| SourceEntry {
                    cell: jset.space().encode(jset.cell(k)),
                    vertices: v.clone(),
                })
                .collect()
        } else {
            Vec::new()
        };
        EstimateReport {
            method: est.method,
            existence: true,
            theta: Some(est.theta.to_record(jset)),
            sources,
            diagnostics: est.diagnostics.clone(),
            failure: None,
        }
    }

    pub fn nonexistent(method: Method, err: &Error) -> Self {
        EstimateReport {
            method,
            existence: false,
            theta: None,
            sources: Vec::new(),
            diagnostics: Diagnostics::default(),
            failure: Some(err.to_string()),
        }
    }
}

/// Like [`estimate`] but folds a missing MLE into a report with
/// `existence = false`; other errors propagate.
pub fn estimate_report(
    table: &ContingencyTable,
    g: &Graph,
    jset: &JSet,
    method: Method,
    cfg: &SolverConfig,
) -> Result<EstimateReport> {
    match estimate::<f64>(table, g, jset, method, cfg) {
        Ok(est) => Ok(EstimateReport::from_estimate(&est, jset)),
        Err(e) if e.is_nonexistence() => Ok(EstimateReport::nonexistent(method, &e)),
        Err(e) => Err(e),
    }
}
