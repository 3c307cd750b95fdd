use super::cell::{Cell, CellSpace};
use super::generating::GeneratingClass;
use super::vertex_set::VertexSet;
use crate::error::{Error, Result};
use std::collections::HashMap;

/// The cells `j` whose support lies in the generating class, in lexicographic
/// order. Indexes the free canonical parameters of a hierarchical model.
#[derive(Clone, Debug)]
pub struct JSet {
    space: CellSpace,
    cells: Vec<Cell>,
    supports: Vec<VertexSet>,
    index: HashMap<Cell, usize>,
}

impl JSet {
    /// Builds a J-set from arbitrary nonzero cells of `space` (deduplicated, sorted).
    pub fn from_cells(space: CellSpace, mut cells: Vec<Cell>) -> Result<Self> {
        for c in &cells {
            if !space.contains(c) {
                return Err(Error::usage(format!("cell {c} is not in the space")));
            }
            if c.is_zero() {
                return Err(Error::usage("the zero cell is not a J-set member"));
            }
        }
        cells.sort();
        cells.dedup();
        let supports = cells.iter().map(Cell::support).collect();
        let index = cells
            .iter()
            .enumerate()
            .map(|(k, c)| (c.clone(), k))
            .collect();
        Ok(JSet {
            space,
            cells,
            supports,
            index,
        })
    }

    /// Every nonzero cell of `space`.
    pub fn saturated(space: CellSpace) -> Result<Self> {
        space.dense_len("saturated J-set")?;
        let cells = space.cells().filter(|c| !c.is_zero()).collect();
        Self::from_cells(space, cells)
    }

    pub fn space(&self) -> &CellSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, k: usize) -> &Cell {
        &self.cells[k]
    }

    pub fn support(&self, k: usize) -> &VertexSet {
        &self.supports[k]
    }

    pub fn position(&self, cell: &Cell) -> Option<usize> {
        self.index.get(cell).copied()
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        self.index.contains_key(cell)
    }

    /// Distinct supports present in the set.
    pub fn supports(&self) -> Vec<VertexSet> {
        let mut s = self.supports.clone();
        s.sort();
        s.dedup();
        s
    }

    /// The generating class whose J-set this is (maximal supports).
    pub fn generating_class(&self) -> Result<GeneratingClass> {
        GeneratingClass::new(self.space.vertex_count(), self.supports())
    }
}

/// `J = {j ∈ I : S(j) ∈ D}`, enumerated from the members of `D` (never from all of `I`).
pub fn build_jset(space: &CellSpace, gen: &GeneratingClass) -> Result<JSet> {
    if space.vertex_count() != gen.vertex_count() {
        return Err(Error::usage(format!(
            "space has {} vertices but generating class has {}",
            space.vertex_count(),
            gen.vertex_count()
        )));
    }
    let mut cells = Vec::new();
    for set in gen.members() {
        // all nonzero level combinations on `set`
        let mut coords = Cell::zero(space.vertex_count());
        for &v in set.as_slice() {
            coords.set(v, 1);
        }
        loop {
            cells.push(coords.clone());
            let mut advanced = false;
            for &v in set.as_slice().iter().rev() {
                if coords.get(v) + 1 < space.level(v) {
                    coords.set(v, coords.get(v) + 1);
                    advanced = true;
                    break;
                }
                coords.set(v, 1);
            }
            if !advanced {
                break;
            }
        }
    }
    JSet::from_cells(space.clone(), cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(v: &[usize]) -> VertexSet {
        VertexSet::new(v.to_vec())
    }

    #[test]
    fn four_cycle_has_eight_parameters() {
        // edges (1,2),(1,3),(2,4),(3,4) in 0-based form
        let gen = GeneratingClass::new(
            4,
            vec![vs(&[0, 1]), vs(&[0, 2]), vs(&[1, 3]), vs(&[2, 3])],
        )
        .unwrap();
        let j = build_jset(&CellSpace::binary(4).unwrap(), &gen).unwrap();
        assert_eq!(j.len(), 8);
        assert!(j.cells().windows(2).all(|w| w[0] < w[1]));
        assert!(j.contains(&Cell::new(vec![1, 0, 1, 0])));
        assert!(!j.contains(&Cell::new(vec![1, 0, 0, 1])));
    }

    #[test]
    fn ternary_single_vertex() {
        let space = CellSpace::new(vec![3]).unwrap();
        let j = build_jset(&space, &GeneratingClass::saturated(1)).unwrap();
        assert_eq!(j.cells(), &[Cell::new(vec![1]), Cell::new(vec![2])]);
    }

    #[test]
    fn counts_products_of_nonzero_levels() {
        let space = CellSpace::new(vec![3, 4, 2]).unwrap();
        let gen = GeneratingClass::new(3, vec![vs(&[0, 1]), vs(&[2])]).unwrap();
        let j = build_jset(&space, &gen).unwrap();
        // {0}:2 + {1}:3 + {0,1}:6 + {2}:1
        assert_eq!(j.len(), 12);
        assert_eq!(j.generating_class().unwrap(), gen);
        let sat = JSet::saturated(space).unwrap();
        assert_eq!(sat.len(), 23);
    }
}
