use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// How relaxed local models are fitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalFitter {
    Ipf,
    Newton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Largest allowed gap between fitted and data marginals, in probability units.
    pub ipf_tolerance: f64,
    pub ipf_max_cycles: usize,
    /// Gradient ∞-norm (per observation) at which Newton stops.
    pub newton_tolerance: f64,
    pub newton_max_iterations: usize,
    /// Constant added to every cell count of the table being fitted.
    pub epsilon_smoothing: f64,
    /// An estimate with some `|θ_j|` above this is treated as nonexistent.
    pub divergence_threshold: f64,
    pub local_fitter: LocalFitter,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            ipf_tolerance: 1e-10,
            ipf_max_cycles: 10_000,
            newton_tolerance: 1e-10,
            newton_max_iterations: 200,
            epsilon_smoothing: 0.0,
            divergence_threshold: 30.0,
            local_fitter: LocalFitter::Ipf,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ipf_tolerance", self.ipf_tolerance),
            ("newton_tolerance", self.newton_tolerance),
            ("divergence_threshold", self.divergence_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::usage(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.epsilon_smoothing >= 0.0) || !self.epsilon_smoothing.is_finite() {
            return Err(Error::usage("epsilon_smoothing must be a finite nonnegative number"));
        }
        if self.ipf_max_cycles == 0 || self.newton_max_iterations == 0 {
            return Err(Error::usage("iteration limits must be at least 1"));
        }
        Ok(())
    }
}
