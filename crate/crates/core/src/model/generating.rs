use super::vertex_set::VertexSet;
use crate::error::{Error, Result};

/// Downward-closed family `D` of vertex subsets, stored as its maximal antichain.
///
/// A nonempty set belongs to `D` iff it is contained in some maximal set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingClass {
    vertex_count: usize,
    maximal: Vec<VertexSet>,
}

impl GeneratingClass {
    /// Builds the class generated by `sets`; non-maximal members are dropped.
    pub fn new(vertex_count: usize, sets: Vec<VertexSet>) -> Result<Self> {
        for s in &sets {
            if s.is_empty() {
                return Err(Error::usage("generating sets must be nonempty"));
            }
            if let Some(v) = s.iter().find(|&v| v >= vertex_count) {
                return Err(Error::usage(format!(
                    "vertex {v} out of range for {vertex_count} vertices"
                )));
            }
        }
        let maximal = antichain(sets);
        let covered = maximal
            .iter()
            .fold(VertexSet::empty(), |acc, s| acc.union(s));
        if covered.len() != vertex_count {
            return Err(Error::usage(format!(
                "generating class covers {} of {vertex_count} vertices",
                covered.len()
            )));
        }
        Ok(GeneratingClass {
            vertex_count,
            maximal,
        })
    }

    /// The saturated class `{V}`.
    pub fn saturated(vertex_count: usize) -> Self {
        GeneratingClass {
            vertex_count,
            maximal: vec![VertexSet::range(vertex_count)],
        }
    }

    /// Main effects only (independence model).
    pub fn singletons(vertex_count: usize) -> Self {
        GeneratingClass {
            vertex_count,
            maximal: (0..vertex_count).map(VertexSet::singleton).collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn maximal_sets(&self) -> &[VertexSet] {
        &self.maximal
    }

    pub fn contains(&self, set: &VertexSet) -> bool {
        !set.is_empty() && self.maximal.iter().any(|m| set.is_subset(m))
    }

    /// Every nonempty member of the family, sorted and deduplicated.
    pub fn members(&self) -> Vec<VertexSet> {
        let mut all: Vec<VertexSet> = self
            .maximal
            .iter()
            .flat_map(|m| m.nonempty_subsets())
            .collect();
        all.sort();
        all.dedup();
        all
    }
}

/// Keeps only the inclusion-maximal sets, in sorted order.
pub(crate) fn antichain(mut sets: Vec<VertexSet>) -> Vec<VertexSet> {
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<VertexSet> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| s.is_subset(k)) {
            kept.push(s);
        }
    }
    kept.sort();
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(v: &[usize]) -> VertexSet {
        VertexSet::new(v.to_vec())
    }

    #[test]
    fn reduces_to_antichain_and_checks_membership() {
        let g = GeneratingClass::new(3, vec![vs(&[0, 1]), vs(&[0]), vs(&[1, 2]), vs(&[0, 1])])
            .unwrap();
        assert_eq!(g.maximal_sets(), &[vs(&[0, 1]), vs(&[1, 2])]);
        assert!(g.contains(&vs(&[2])));
        assert!(!g.contains(&vs(&[0, 2])));
        assert!(!g.contains(&VertexSet::empty()));
        assert_eq!(g.members().len(), 5);
    }

    #[test]
    fn must_cover_all_vertices() {
        assert!(GeneratingClass::new(3, vec![vs(&[0, 1])]).is_err());
        assert!(GeneratingClass::new(2, vec![vs(&[0, 5])]).is_err());
    }
}
