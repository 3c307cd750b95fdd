use super::cell::CellSpace;
use super::jset::JSet;
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};
use serde::{Deserialize, Serialize};

/// Canonical parameter `θ = (θ_j, j ∈ J)` aligned with a [`JSet`], plus the
/// normalizer `θ_0 = log p(0)` when it is known.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaVector<T> {
    values: Vec<T>,
    theta0: Option<T>,
}

impl<T: Real> ThetaVector<T> {
    pub fn new(values: Vec<T>, theta0: Option<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) || theta0.is_some_and(|t| !t.is_finite()) {
            return Err(Error::domain("theta entries must be finite"));
        }
        Ok(ThetaVector { values, theta0 })
    }

    pub fn zeros(len: usize) -> Self {
        ThetaVector {
            values: vec![T::zero(); len],
            theta0: None,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn theta0(&self) -> Option<T> {
        self.theta0
    }

    pub fn with_theta0(mut self, theta0: T) -> Self {
        self.theta0 = Some(theta0);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> T {
        self.values[k]
    }

    /// Checks alignment with `jset`.
    pub fn check_len(&self, jset: &JSet) -> Result<()> {
        if self.values.len() == jset.len() {
            Ok(())
        } else {
            Err(Error::usage(format!(
                "theta has {} entries but the J-set has {}",
                self.values.len(),
                jset.len()
            )))
        }
    }

    /// `θ_j` for an arbitrary cell, zero outside the J-set.
    pub fn value_of(&self, jset: &JSet, cell: &super::cell::Cell) -> T {
        jset.position(cell).map_or(T::zero(), |k| self.values[k])
    }

    pub fn to_record(&self, jset: &JSet) -> ThetaRecord {
        ThetaRecord {
            theta0: self.theta0.map(Real::as_f64),
            entries: jset
                .cells()
                .iter()
                .zip(&self.values)
                .map(|(c, v)| ThetaEntry {
                    cell: jset.space().encode(c),
                    value: v.as_f64(),
                })
                .collect(),
        }
    }

    /// Reads a record against `jset`; cells missing from the record are zero.
    pub fn from_record(record: &ThetaRecord, jset: &JSet) -> Result<Self> {
        let mut values = vec![T::zero(); jset.len()];
        for (line, e) in record.entries.iter().enumerate() {
            let cell = jset
                .space()
                .decode(&e.cell)
                .map_err(|m| Error::parse(line + 1, m))?;
            let k = jset.position(&cell).ok_or_else(|| {
                Error::parse(line + 1, format!("cell {} is not a model parameter", e.cell))
            })?;
            values[k] = T::lit(e.value);
        }
        Self::new(values, record.theta0.map(T::lit))
    }
}

/// JSON form: `{"theta0": number, "entries": [{"cell": string, "value": number}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaRecord {
    pub theta0: Option<f64>,
    pub entries: Vec<ThetaEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEntry {
    pub cell: String,
    pub value: f64,
}

/// Strictly positive cell probabilities over a dense space, lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector<T> {
    space: CellSpace,
    values: Vec<T>,
}

impl<T: Real> ProbabilityVector<T> {
    pub fn new(space: CellSpace, values: Vec<T>) -> Result<Self> {
        let n = space.dense_len("probability vector")?;
        if values.len() != n {
            return Err(Error::usage(format!("expected {n} probabilities, got {}", values.len())));
        }
        if let Some((k, _)) = values
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p > T::zero()) || !p.is_finite())
        {
            return Err(Error::domain(format!(
                "probability of cell {} is not strictly positive",
                space.encode(&space.cell_at(k))
            )));
        }
        let total = pairwise_sum(&values);
        if (total - T::one()).abs() > sum_tolerance::<T>(n) {
            return Err(Error::domain(format!("probabilities sum to {total}")));
        }
        Ok(ProbabilityVector { space, values })
    }

    /// Normalizes positive weights.
    pub fn from_weights(space: CellSpace, mut weights: Vec<T>) -> Result<Self> {
        let total = pairwise_sum(&weights);
        if !(total > T::zero()) {
            return Err(Error::domain("weights sum to zero"));
        }
        for w in &mut weights {
            *w /= total;
        }
        Self::new(space, weights)
    }

    pub fn uniform(space: CellSpace) -> Result<Self> {
        let n = space.dense_len("probability vector")?;
        let w = T::one() / T::lit(n as f64);
        Ok(ProbabilityVector {
            space,
            values: vec![w; n],
        })
    }

    pub fn space(&self) -> &CellSpace {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, cell: &super::cell::Cell) -> T {
        self.values[self.space.index(cell)]
    }
}

/// Allowed deviation of a probability total from one: 1e-12 in double
/// precision, widened to the roundoff of the scalar type and length.
pub(crate) fn sum_tolerance<T: Real>(n: usize) -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(16.0 * (n as f64).sqrt().max(1.0)))
}
