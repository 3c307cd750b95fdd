use super::cell::{Cell, CellSpace};
use super::vertex_set::VertexSet;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

/// Cell counts, dense below the space's enumeration guard and keyed by cell above it.
#[derive(Clone, Debug, PartialEq)]
pub enum Counts {
    Dense(Vec<u64>),
    Sparse(BTreeMap<Cell, u64>),
}

/// Contingency table `n = (n(i), i ∈ I)` with total `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContingencyTable {
    space: CellSpace,
    counts: Counts,
    total: u64,
}

impl ContingencyTable {
    pub fn from_dense(space: CellSpace, counts: Vec<u64>) -> Result<Self> {
        let n = space.dense_len("dense contingency table")?;
        if counts.len() != n {
            return Err(Error::usage(format!("expected {n} counts, got {}", counts.len())));
        }
        let total = counts.iter().sum();
        Ok(ContingencyTable {
            space,
            counts: Counts::Dense(counts),
            total,
        })
    }

    /// Aggregates `(cell, count)` pairs; storage mode follows the space's guard.
    pub fn from_pairs(space: CellSpace, pairs: impl IntoIterator<Item = (Cell, u64)>) -> Result<Self> {
        let mut table = Self::empty(space);
        for (cell, n) in pairs {
            table.add(&cell, n)?;
        }
        Ok(table)
    }

    pub fn from_cells<'a>(space: CellSpace, cells: impl IntoIterator<Item = &'a Cell>) -> Result<Self> {
        Self::from_pairs(space, cells.into_iter().map(|c| (c.clone(), 1)))
    }

    pub fn empty(space: CellSpace) -> Self {
        let counts = if space.is_enumerable() {
            Counts::Dense(vec![0; space.total_cells() as usize])
        } else {
            Counts::Sparse(BTreeMap::new())
        };
        ContingencyTable {
            space,
            counts,
            total: 0,
        }
    }

    pub fn add(&mut self, cell: &Cell, n: u64) -> Result<()> {
        if !self.space.contains(cell) {
            return Err(Error::usage(format!("cell {cell} is not in the table's space")));
        }
        match &mut self.counts {
            Counts::Dense(v) => v[self.space.index(cell)] += n,
            Counts::Sparse(m) => {
                if n > 0 {
                    *m.entry(cell.clone()).or_insert(0) += n
                }
            }
        }
        self.total += n;
        Ok(())
    }

    pub fn space(&self) -> &CellSpace {
        &self.space
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.counts, Counts::Dense(_))
    }

    pub fn get(&self, cell: &Cell) -> u64 {
        match &self.counts {
            Counts::Dense(v) => v[self.space.index(cell)],
            Counts::Sparse(m) => m.get(cell).copied().unwrap_or(0),
        }
    }

    /// Dense counts; exact enumeration routines refuse sparse tables.
    pub fn dense_counts(&self) -> Result<&[u64]> {
        match &self.counts {
            Counts::Dense(v) => Ok(v),
            Counts::Sparse(_) => Err(Error::Capacity {
                what: "exact computation on a sparse table".into(),
                required: self.space.total_cells(),
                limit: self.space.guard(),
                hint: "marginalize first or use a local estimator".into(),
            }),
        }
    }

    /// Nonzero cells in lexicographic order.
    pub fn nonzero(&self) -> Box<dyn Iterator<Item = (Cell, u64)> + '_> {
        match &self.counts {
            Counts::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .filter(|(_, &n)| n > 0)
                    .map(|(k, &n)| (self.space.cell_at(k), n)),
            ),
            Counts::Sparse(m) => Box::new(m.iter().map(|(c, &n)| (c.clone(), n))),
        }
    }

    /// Marginal count `n(j_{S(j)})`: total over cells `i` with `j ◁ i`.
    pub fn marginal_count(&self, j: &Cell) -> u64 {
        self.nonzero().filter(|(i, _)| j.precedes(i)).map(|(_, n)| n).sum()
    }

    /// The `members`-marginal table (counts summed over the other coordinates).
    pub fn marginal(&self, members: &VertexSet) -> Result<ContingencyTable> {
        if let Some(v) = members.iter().find(|&v| v >= self.space.vertex_count()) {
            return Err(Error::usage(format!("vertex {v} is not in the table")));
        }
        let sub = self.space.restrict(members);
        let mut out = Self::empty(sub);
        match &self.counts {
            Counts::Dense(v) if out.is_dense() => {
                // stream the dense table with an odometer over coordinates
                let levels = self.space.levels();
                let sub_strides = out.space.strides();
                let weight: Vec<usize> = (0..levels.len())
                    .map(|v| members.position(v).map_or(0, |p| sub_strides[p]))
                    .collect();
                let mut coords = vec![0usize; levels.len()];
                let mut target = 0usize;
                let Counts::Dense(dst) = &mut out.counts else { unreachable!() };
                for &n in v {
                    dst[target] += n;
                    for u in (0..levels.len()).rev() {
                        coords[u] += 1;
                        target += weight[u];
                        if coords[u] < levels[u] {
                            break;
                        }
                        target -= weight[u] * levels[u];
                        coords[u] = 0;
                    }
                }
                out.total = self.total;
            }
            _ => {
                for (cell, n) in self.nonzero() {
                    out.add(&cell.restrict(members), n)?;
                }
            }
        }
        Ok(out)
    }

    /// CSV with header `cell,count`; zero cells are omitted.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "cell,count")?;
        for (cell, n) in self.nonzero() {
            writeln!(w, "{},{n}", self.space.encode(&cell))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(space: CellSpace, r: R) -> Result<Self> {
        let mut table = Self::empty(space);
        let mut saw_header = false;
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = k + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != "cell,count" {
                    return Err(Error::parse(lineno, "expected header `cell,count`"));
                }
                saw_header = true;
                continue;
            }
            let (cell, count) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(lineno, "expected `cell,count`"))?;
            let cell = table.space.decode(cell).map_err(|m| Error::parse(lineno, m))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|e| Error::parse(lineno, format!("invalid count: {e}")))?;
            table.add(&cell, count)?;
        }
        if !saw_header {
            return Err(Error::parse(1, "missing header `cell,count`"));
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_conserves_total_and_matches_sparse_route() {
        let space = CellSpace::new(vec![2, 3, 2]).unwrap();
        let counts: Vec<u64> = (0..12).map(|k| (k * 7 % 5) as u64).collect();
        let t = ContingencyTable::from_dense(space.clone(), counts).unwrap();
        let members = VertexSet::new(vec![0, 2]);
        let m = t.marginal(&members).unwrap();
        assert_eq!(m.total(), t.total());
        let sparse = ContingencyTable::from_pairs(
            space.guarded(4),
            t.nonzero(),
        )
        .unwrap();
        assert!(!sparse.is_dense());
        let ms = sparse.marginal(&members).unwrap();
        for cell in m.space().cells() {
            assert_eq!(m.get(&cell), ms.get(&cell));
        }
        assert_eq!(t.marginal(&VertexSet::range(3)).unwrap(), t);
    }

    #[test]
    fn marginal_count_sums_cells_below() {
        let space = CellSpace::binary(2).unwrap();
        let t = ContingencyTable::from_dense(space, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(t.marginal_count(&Cell::new(vec![1, 0])), 7);
        assert_eq!(t.marginal_count(&Cell::new(vec![0, 1])), 6);
        assert_eq!(t.marginal_count(&Cell::new(vec![1, 1])), 4);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let space = CellSpace::binary(3).unwrap();
        let t = ContingencyTable::from_dense(space.clone(), vec![0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("cell,count\n001,1\n"));
        let back = ContingencyTable::read_csv(space.clone(), text.as_bytes()).unwrap();
        assert_eq!(back, t);
        let err = ContingencyTable::read_csv(space, "cell,count\n001,1\n0x1,2\n".as_bytes())
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
