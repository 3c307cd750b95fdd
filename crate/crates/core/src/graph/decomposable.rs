use super::{maximal_cliques, Graph, DEFAULT_CLIQUE_GUARD};
use crate::error::{Error, Result};
use crate::model::VertexSet;

/// Maximum cardinality search order, verified to be the reverse of a perfect
/// elimination ordering. Errors when the graph is not chordal.
pub fn perfect_elimination_order(g: &Graph) -> Result<Vec<usize>> {
    let n = g.vertex_count();
    let mut weight = vec![0usize; n];
    let mut numbered = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !numbered[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("unnumbered vertex remains");
        numbered[v] = true;
        order.push(v);
        for u in g.neighbors(v).iter() {
            if !numbered[u] {
                weight[u] += 1;
            }
        }
    }
    // each vertex's earlier neighbours must form a clique
    let mut position = vec![0usize; n];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    for &v in &order {
        let earlier: VertexSet = g
            .neighbors(v)
            .iter()
            .filter(|&u| position[u] < position[v])
            .collect();
        if !g.is_complete(&earlier) {
            return Err(Error::domain("graph is not decomposable (not chordal)"));
        }
    }
    Ok(order)
}

/// Cliques in running-intersection order with their separators
/// (`separators[k]` belongs to `cliques[k + 1]`, repeats kept).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JunctionTree {
    pub cliques: Vec<VertexSet>,
    pub separators: Vec<VertexSet>,
}

pub fn junction_tree(g: &Graph) -> Result<JunctionTree> {
    let order = perfect_elimination_order(g)?;
    let mut position = vec![0usize; g.vertex_count()];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    let mut cliques = maximal_cliques(g, DEFAULT_CLIQUE_GUARD)?;
    cliques.sort_by_key(|c| c.iter().map(|v| position[v]).max());
    let mut separators = Vec::with_capacity(cliques.len().saturating_sub(1));
    let mut seen = VertexSet::empty();
    for (k, c) in cliques.iter().enumerate() {
        if k > 0 {
            let s = c.intersection(&seen);
            if !cliques[..k].iter().any(|prev| s.is_subset(prev)) {
                return Err(Error::domain("clique ordering violates running intersection"));
            }
            separators.push(s);
        }
        seen = seen.union(c);
    }
    Ok(JunctionTree {
        cliques,
        separators,
    })
}
