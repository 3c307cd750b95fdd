use super::{effective_weights, SolverConfig};
use crate::error::{Error, Result};
use crate::marginal::projection_index;
use crate::model::{CellSpace, ContingencyTable, GeneratingClass, ProbabilityVector};
use crate::scalar::{pairwise_sum, Real};

#[derive(Clone, Debug)]
pub struct IpfFit<T> {
    pub probabilities: ProbabilityVector<T>,
    pub cycles: usize,
    /// Largest marginal gap seen in the final cycle.
    pub residual: f64,
}

/// Iterative proportional fitting of the hierarchical model generated by `gen`.
pub fn ipf_fit<T: Real>(
    table: &ContingencyTable,
    gen: &GeneratingClass,
    cfg: &SolverConfig,
) -> Result<IpfFit<T>> {
    cfg.validate()?;
    let weights = effective_weights::<T>(table, cfg.epsilon_smoothing)?;
    ipf_from_weights(table.space(), &weights, gen, cfg)
}

/// IPF against arbitrary nonnegative cell weights (normalized internally).
pub fn ipf_from_weights<T: Real>(
    space: &CellSpace,
    weights: &[T],
    gen: &GeneratingClass,
    cfg: &SolverConfig,
) -> Result<IpfFit<T>> {
    if gen.vertex_count() != space.vertex_count() {
        return Err(Error::usage("generating class and table have different vertex counts"));
    }
    let n = space.dense_len("iterative proportional fitting")?;
    if weights.len() != n {
        return Err(Error::usage("weight vector does not match the cell space"));
    }
    let total = pairwise_sum(weights);
    if !(total > T::zero()) {
        return Err(Error::domain("cannot fit an empty table"));
    }

    struct Margin<T> {
        index: Vec<usize>,
        target: Vec<T>,
    }
    let mut margins = Vec::with_capacity(gen.maximal_sets().len());
    for set in gen.maximal_sets() {
        let index = projection_index(space, set)?;
        let size = space.restrict(set).dense_len("marginal table")?;
        let mut target = vec![T::zero(); size];
        for (&m, &w) in index.iter().zip(weights) {
            target[m] += w;
        }
        if target.iter().any(|&t| !(t > T::zero())) {
            return Err(Error::nonexistence(format!("zero marginal count on {set}")));
        }
        target.iter_mut().for_each(|t| *t /= total);
        margins.push(Margin { index, target });
    }

    let tol = T::lit(cfg.ipf_tolerance);
    let mut p = vec![T::one() / T::lit(n as f64); n];
    let mut fitted = Vec::new();
    let mut gap = T::infinity();
    for cycle in 1..=cfg.ipf_max_cycles {
        gap = T::zero();
        for m in &margins {
            fitted.clear();
            fitted.resize(m.target.len(), T::zero());
            for (&k, &x) in m.index.iter().zip(&p) {
                fitted[k] += x;
            }
            for (f, &t) in fitted.iter_mut().zip(&m.target) {
                gap = gap.max((*f - t).abs());
                *f = t / *f;
            }
            for (x, &k) in p.iter_mut().zip(&m.index) {
                *x *= fitted[k];
            }
        }
        if gap < tol {
            let probabilities = ProbabilityVector::from_weights(space.clone(), p)?;
            return Ok(IpfFit {
                probabilities,
                cycles: cycle,
                residual: gap.as_f64(),
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.ipf_max_cycles,
        residual: gap.as_f64(),
        vertex: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cell, VertexSet};

    #[test]
    fn independence_model_is_product_of_margins() {
        let space = CellSpace::new(vec![2, 3]).unwrap();
        let table = ContingencyTable::from_dense(space.clone(), vec![3, 1, 4, 1, 5, 9]).unwrap();
        let fit = ipf_fit::<f64>(&table, &GeneratingClass::singletons(2), &SolverConfig::default())
            .unwrap();
        let n = 23.0;
        let row = [8.0, 15.0];
        let col = [4.0, 6.0, 13.0];
        for c in space.cells() {
            let want = row[c.get(0)] / n * col[c.get(1)] / n;
            assert!((fit.probabilities.get(&c) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn saturated_model_reproduces_proportions() {
        let space = CellSpace::binary(2).unwrap();
        let table = ContingencyTable::from_dense(space.clone(), vec![1, 2, 3, 4]).unwrap();
        let fit = ipf_fit::<f64>(&table, &GeneratingClass::saturated(2), &SolverConfig::default())
            .unwrap();
        assert!(fit.cycles <= 2);
        for (k, &x) in fit.probabilities.values().iter().enumerate() {
            assert!((x - (k + 1) as f64 / 10.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_margin_is_nonexistence_unless_smoothed() {
        let space = CellSpace::binary(2).unwrap();
        let table = ContingencyTable::from_pairs(space, [(Cell::new(vec![1, 1]), 5)]).unwrap();
        let gen = GeneratingClass::new(2, vec![VertexSet::range(2)]).unwrap();
        let err = ipf_fit::<f64>(&table, &gen, &SolverConfig::default()).unwrap_err();
        assert!(err.is_nonexistence());
        let cfg = SolverConfig {
            epsilon_smoothing: 1e-3,
            ..SolverConfig::default()
        };
        assert!(ipf_fit::<f64>(&table, &gen, &cfg).is_ok());
    }
}
