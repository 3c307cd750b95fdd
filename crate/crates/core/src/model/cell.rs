use super::vertex_set::VertexSet;
use crate::error::{Error, Result};
use std::fmt;

/// Default cap on the number of cells any exact enumeration may touch.
pub const DEFAULT_ENUMERATION_GUARD: usize = 1 << 22;

/// One level index per vertex. Level 0 is the distinguished baseline level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(Vec<u16>);

impl Cell {
    pub fn new(coords: Vec<u16>) -> Self {
        Cell(coords)
    }

    pub fn zero(vertex_count: usize) -> Self {
        Cell(vec![0; vertex_count])
    }

    pub fn coords(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: usize) -> usize {
        self.0[v] as usize
    }

    pub fn set(&mut self, v: usize, level: usize) {
        self.0[v] = level as u16;
    }

    /// `S(i)`: the vertices at a nonzero level.
    pub fn support(&self) -> VertexSet {
        VertexSet::new(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, &l)| l != 0)
                .map(|(v, _)| v)
                .collect(),
        )
    }

    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&l| l != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    /// `self ◁ other`: nonempty support contained in `other`'s support, with
    /// matching levels on it.
    pub fn precedes(&self, other: &Cell) -> bool {
        debug_assert_eq!(self.len(), other.len());
        let mut any = false;
        for (&a, &b) in self.0.iter().zip(&other.0) {
            if a != 0 {
                if a != b {
                    return false;
                }
                any = true;
            }
        }
        any
    }

    /// `self ◁₀ other`: either `self ◁ other` or `self` is the zero cell.
    pub fn precedes_or_zero(&self, other: &Cell) -> bool {
        self.is_zero() || self.precedes(other)
    }

    /// Marginal cell `i_D` for the sorted member list `D`.
    pub fn restrict(&self, members: &VertexSet) -> Cell {
        Cell(members.iter().map(|v| self.0[v]).collect())
    }

    /// Embeds a marginal cell over `members` into a space of `vertex_count`
    /// vertices, with zeros elsewhere.
    pub fn pad(&self, members: &VertexSet, vertex_count: usize) -> Cell {
        debug_assert_eq!(self.len(), members.len());
        let mut out = vec![0; vertex_count];
        for (k, v) in members.iter().enumerate() {
            out[v] = self.0[k];
        }
        Cell(out)
    }

    /// Keeps the levels on `subset` (positions into this cell) and zeroes the rest.
    pub fn keep_only(&self, subset: &[usize]) -> Cell {
        let mut out = vec![0; self.0.len()];
        for &v in subset {
            out[v] = self.0[v];
        }
        Cell(out)
    }

    /// Nonzero `(vertex, level)` pairs.
    pub fn assignments(&self) -> Vec<(usize, u16)> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0)
            .map(|(v, &l)| (v, l))
            .collect()
    }
}

/// `j ◁ i`. Both cells must come from the same space.
pub fn triangleleft(j: &Cell, i: &Cell) -> Result<bool> {
    if j.len() != i.len() {
        return Err(Error::usage(format!(
            "cells of length {} and {} are from different spaces",
            j.len(),
            i.len()
        )));
    }
    Ok(j.precedes(i))
}

/// `j ◁₀ i`: `j ◁ i` or `j` is the zero cell.
pub fn triangleleft0(j: &Cell, i: &Cell) -> Result<bool> {
    if j.len() != i.len() {
        return Err(Error::usage("cells from different spaces"));
    }
    Ok(j.precedes_or_zero(i))
}

/// The product set `I = ∏ I_v` of cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellSpace {
    levels: Vec<usize>,
    total: u128,
    guard: usize,
}

impl CellSpace {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        Self::with_guard(levels, DEFAULT_ENUMERATION_GUARD)
    }

    pub fn with_guard(levels: Vec<usize>, guard: usize) -> Result<Self> {
        let mut total: u128 = 1;
        for (v, &l) in levels.iter().enumerate() {
            if l < 2 {
                return Err(Error::usage(format!("vertex {v} has {l} levels; at least 2 needed")));
            }
            if l > u16::MAX as usize {
                return Err(Error::usage(format!("vertex {v} has too many levels ({l})")));
            }
            total = total
                .checked_mul(l as u128)
                .ok_or_else(|| Error::usage("number of cells overflows 128 bits"))?;
        }
        Ok(CellSpace {
            levels,
            total,
            guard,
        })
    }

    pub fn binary(vertex_count: usize) -> Result<Self> {
        Self::new(vec![2; vertex_count])
    }

    pub fn uniform(vertex_count: usize, levels: usize) -> Result<Self> {
        Self::new(vec![levels; vertex_count])
    }

    /// Same levels, different enumeration guard.
    pub fn guarded(&self, guard: usize) -> Self {
        CellSpace {
            guard,
            ..self.clone()
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn level(&self, v: usize) -> usize {
        self.levels[v]
    }

    pub fn total_cells(&self) -> u128 {
        self.total
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    pub fn is_enumerable(&self) -> bool {
        self.total <= self.guard as u128
    }

    /// Number of cells, or a capacity error when the space is above the guard.
    pub fn dense_len(&self, what: &str) -> Result<usize> {
        if self.is_enumerable() {
            Ok(self.total as usize)
        } else {
            Err(Error::Capacity {
                what: what.to_string(),
                required: self.total,
                limit: self.guard,
                hint: "use a local (one-hop or two-hop) marginal model or raise the guard".into(),
            })
        }
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        cell.len() == self.levels.len()
            && cell
                .coords()
                .iter()
                .zip(&self.levels)
                .all(|(&c, &l)| (c as usize) < l)
    }

    /// Position of `cell` in lexicographic order (first vertex most significant).
    pub fn index(&self, cell: &Cell) -> usize {
        let mut idx = 0usize;
        for (&c, &l) in cell.coords().iter().zip(&self.levels) {
            idx = idx * l + c as usize;
        }
        idx
    }

    pub fn cell_at(&self, mut index: usize) -> Cell {
        let mut coords = vec![0u16; self.levels.len()];
        for v in (0..self.levels.len()).rev() {
            coords[v] = (index % self.levels[v]) as u16;
            index /= self.levels[v];
        }
        Cell(coords)
    }

    /// Row-major strides matching [`CellSpace::index`].
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.levels.len()];
        for v in (0..self.levels.len().saturating_sub(1)).rev() {
            s[v] = s[v + 1] * self.levels[v + 1];
        }
        s
    }

    /// Lexicographic iterator over every cell. Does not check the guard.
    pub fn cells(&self) -> CellIter<'_> {
        CellIter {
            levels: &self.levels,
            next: Some(Cell::zero(self.levels.len())),
        }
    }

    /// The marginal space `I_D` over the sorted members `D`.
    pub fn restrict(&self, members: &VertexSet) -> CellSpace {
        let levels = members.iter().map(|v| self.levels[v]).collect();
        CellSpace::with_guard(levels, self.guard).expect("restriction of a valid space")
    }

    fn digit_encoding(&self) -> bool {
        self.levels.iter().all(|&l| l <= 10)
    }

    /// Digit string when every vertex has at most 10 levels, colon-separated otherwise.
    pub fn encode(&self, cell: &Cell) -> String {
        if self.digit_encoding() {
            cell.coords()
                .iter()
                .map(|&c| char::from_digit(c as u32, 10).unwrap())
                .collect()
        } else {
            cell.coords()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(":")
        }
    }

    pub fn decode(&self, text: &str) -> std::result::Result<Cell, String> {
        let text = text.trim();
        let coords: Vec<u16> = if self.digit_encoding() {
            text.chars()
                .map(|ch| {
                    ch.to_digit(10)
                        .map(|d| d as u16)
                        .ok_or_else(|| format!("invalid level digit {ch:?}"))
                })
                .collect::<std::result::Result<_, _>>()?
        } else {
            text.split(':')
                .map(|s| s.parse::<u16>().map_err(|e| format!("invalid level {s:?}: {e}")))
                .collect::<std::result::Result<_, _>>()?
        };
        if coords.len() != self.levels.len() {
            return Err(format!(
                "cell {text:?} has {} coordinates, expected {}",
                coords.len(),
                self.levels.len()
            ));
        }
        let cell = Cell(coords);
        if !self.contains(&cell) {
            return Err(format!("cell {text:?} has a level out of range"));
        }
        Ok(cell)
    }
}

pub struct CellIter<'a> {
    levels: &'a [usize],
    next: Option<Cell>,
}

impl Iterator for CellIter<'_> {
    type Item = Cell;

    fn next(&mut self) -> Option<Cell> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut v = self.levels.len();
        loop {
            if v == 0 {
                break;
            }
            v -= 1;
            if (succ.0[v] as usize) + 1 < self.levels[v] {
                succ.0[v] += 1;
                self.next = Some(succ);
                break;
            }
            succ.0[v] = 0;
        }
        Some(current)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[u16]) -> Cell {
        Cell::new(v.to_vec())
    }

    #[test]
    fn triangleleft_examples() {
        assert!(triangleleft(&c(&[1, 0, 0, 0]), &c(&[1, 1, 0, 1])).unwrap());
        assert!(!triangleleft(&c(&[1, 0, 0, 0]), &c(&[0, 1, 0, 1])).unwrap());
        assert!(triangleleft0(&c(&[0, 0, 0, 0]), &c(&[0, 1, 0, 1])).unwrap());
        assert!(!triangleleft(&c(&[0, 0, 0, 0]), &c(&[0, 1, 0, 1])).unwrap());
        assert!(triangleleft(&c(&[1, 0]), &c(&[1, 0, 0])).is_err());
    }

    #[test]
    fn triangleleft_is_transitive_exhaustively() {
        let space = CellSpace::new(vec![2, 3, 2, 2, 2, 2, 2]).unwrap();
        assert!(space.total_cells() <= 1 << 10);
        let cells: Vec<Cell> = space.cells().filter(|c| !c.is_zero()).collect();
        // j ◁ j' ◁ i ⇒ j ◁ i, checked via the cells below each i
        for i in &cells {
            let below: Vec<&Cell> = cells.iter().filter(|j| j.precedes(i)).collect();
            for jp in &below {
                for j in cells.iter().filter(|j| j.precedes(jp)) {
                    assert!(j.precedes(i), "{j} ◁ {jp} ◁ {i}");
                }
            }
        }
    }

    #[test]
    fn lexicographic_indexing_round_trips() {
        let space = CellSpace::new(vec![2, 3, 4]).unwrap();
        let all: Vec<Cell> = space.cells().collect();
        assert_eq!(all.len(), 24);
        for (k, cell) in all.iter().enumerate() {
            assert_eq!(space.index(cell), k);
            assert_eq!(&space.cell_at(k), cell);
        }
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(space.strides(), vec![12, 4, 1]);
    }

    #[test]
    fn rejects_degenerate_spaces() {
        assert!(CellSpace::new(vec![2, 1]).is_err());
        assert!(CellSpace::binary(200).is_err());
        let big = CellSpace::binary(100).unwrap();
        assert!(!big.is_enumerable());
        assert!(matches!(big.dense_len("test"), Err(Error::Capacity { .. })));
    }

    #[test]
    fn encoding_switches_to_colons_above_ten_levels() {
        let small = CellSpace::new(vec![2, 10]).unwrap();
        assert_eq!(small.encode(&c(&[1, 9])), "19");
        assert_eq!(small.decode("19").unwrap(), c(&[1, 9]));
        let wide = CellSpace::new(vec![2, 12]).unwrap();
        assert_eq!(wide.encode(&c(&[1, 11])), "1:11");
        assert_eq!(wide.decode("1:11").unwrap(), c(&[1, 11]));
        assert!(wide.decode("1:12").is_err());
        assert!(small.decode("1").is_err());
    }

    #[test]
    fn restrict_and_pad_are_inverse_on_members() {
        let members = VertexSet::new(vec![1, 3]);
        let cell = c(&[1, 2, 0, 1]);
        let m = cell.restrict(&members);
        assert_eq!(m, c(&[2, 1]));
        assert_eq!(m.pad(&members, 4), c(&[0, 2, 0, 1]));
    }
}
