use super::Graph;
use crate::error::{Error, Result};
use crate::model::VertexSet;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hop {
    One,
    Two,
}

impl Hop {
    pub fn radius(self) -> usize {
        match self {
            Hop::One => 1,
            Hop::Two => 2,
        }
    }
}

/// `M_v` (vertex plus neighbours, or neighbours of neighbours) and its buffer
/// `B_v = {w ∈ M_v : w has a neighbour outside M_v}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighborhood {
    pub center: usize,
    pub hop: Hop,
    pub members: VertexSet,
    pub buffer: VertexSet,
}

impl Neighborhood {
    /// Builds a neighbourhood from an explicit member set.
    pub fn from_members(g: &Graph, center: usize, hop: Hop, members: VertexSet) -> Self {
        let buffer = members
            .iter()
            .filter(|&w| g.neighbors(w).iter().any(|u| !members.contains(u)))
            .collect();
        Neighborhood {
            center,
            hop,
            members,
            buffer,
        }
    }

    pub fn covers_graph(&self, g: &Graph) -> bool {
        self.members.len() == g.vertex_count()
    }
}

pub fn neighborhood(g: &Graph, v: usize, hop: Hop) -> Result<Neighborhood> {
    if v >= g.vertex_count() {
        return Err(Error::usage(format!(
            "vertex {v} out of range for {} vertices",
            g.vertex_count()
        )));
    }
    let mut members = VertexSet::singleton(v);
    let mut frontier = VertexSet::singleton(v);
    for _ in 0..hop.radius() {
        let mut next = VertexSet::empty();
        for w in frontier.iter() {
            for u in g.neighbors(w).iter() {
                if !members.contains(u) {
                    next.insert(u);
                }
            }
        }
        members = members.union(&next);
        frontier = next;
    }
    Ok(Neighborhood::from_members(g, v, hop, members))
}
