#![allow(dead_code)]

use loglin::graph::{cliques_generating_class, Graph};
use loglin::model::{build_jset, CellSpace, JSet};

/// The binary 4-cycle with edges {0,1},{0,2},{1,3},{2,3}.
pub fn four_cycle() -> Graph {
    Graph::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
}

pub fn binary_jset(g: &Graph) -> JSet {
    let gen = cliques_generating_class(g).unwrap();
    build_jset(&CellSpace::binary(g.vertex_count()).unwrap(), &gen).unwrap()
}

pub fn cell(c: &[u16]) -> loglin::model::Cell {
    loglin::model::Cell::new(c.to_vec())
}
