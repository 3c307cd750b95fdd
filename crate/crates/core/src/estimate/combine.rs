use super::LocalEstimate;
use crate::error::{Error, Result};
use crate::model::{JSet, ThetaVector};
use crate::scalar::{pairwise_sum, Real};

/// Averaged parameters with the vertices that contributed to each component.
#[derive(Clone, Debug)]
pub struct Combined<T> {
    pub theta: ThetaVector<T>,
    pub sources: Vec<Vec<usize>>,
}

/// Equal-weight average of the local estimates of each `θ_j` taken from the
/// vertices `v ∈ S(j)`.
pub fn combine_local_estimates<T: Real>(
    jset: &JSet,
    estimates: &[LocalEstimate<T>],
) -> Result<Combined<T>> {
    let mut buckets: Vec<Vec<(usize, T)>> = vec![Vec::new(); jset.len()];
    for est in estimates {
        for &(pos, value) in &est.components {
            if pos >= jset.len() {
                return Err(Error::usage(format!("component index {pos} outside the J-set")));
            }
            if jset.support(pos).contains(est.vertex) {
                buckets[pos].push((est.vertex, value));
            }
        }
    }
    let mut values = Vec::with_capacity(jset.len());
    let mut sources = Vec::with_capacity(jset.len());
    for (pos, mut bucket) in buckets.into_iter().enumerate() {
        if bucket.is_empty() {
            return Err(Error::Coverage {
                cell: jset.space().encode(jset.cell(pos)),
            });
        }
        bucket.sort_by_key(|&(v, _)| v);
        let contributions: Vec<T> = bucket.iter().map(|&(_, x)| x).collect();
        values.push(pairwise_sum(&contributions) / T::lit(contributions.len() as f64));
        sources.push(bucket.iter().map(|&(v, _)| v).collect());
    }
    Ok(Combined {
        theta: ThetaVector::new(values, None)?,
        sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_jset, CellSpace, GeneratingClass, VertexSet};

    fn edge_jset() -> JSet {
        let gen = GeneratingClass::new(2, vec![VertexSet::range(2)]).unwrap();
        build_jset(&CellSpace::binary(2).unwrap(), &gen).unwrap()
    }

    fn est(vertex: usize, components: Vec<(usize, f64)>) -> LocalEstimate<f64> {
        LocalEstimate {
            vertex,
            components,
            iterations: 0,
            residual: 0.0,
        }
    }

    #[test]
    fn averages_over_support_vertices_only() {
        // cells in order: 01, 10, 11
        let jset = edge_jset();
        let c = combine_local_estimates(
            &jset,
            &[
                est(0, vec![(0, 9.0), (1, 1.0), (2, 2.0)]),
                est(1, vec![(0, 3.0), (1, 9.0), (2, 4.0)]),
            ],
        )
        .unwrap();
        assert_eq!(c.theta.values(), &[3.0, 1.0, 3.0]);
        assert_eq!(c.sources, vec![vec![1], vec![0], vec![0, 1]]);
    }

    #[test]
    fn missing_component_is_a_coverage_error() {
        let jset = edge_jset();
        let err = combine_local_estimates(&jset, &[est(0, vec![(1, 1.0), (2, 2.0)])]).unwrap_err();
        assert!(matches!(err, Error::Coverage { cell } if cell == "01"));
    }
}
