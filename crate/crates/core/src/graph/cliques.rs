use super::Graph;
use crate::error::{Error, Result};
use crate::model::{GeneratingClass, VertexSet};

/// Maximum number of maximal cliques enumerated before giving up.
pub const DEFAULT_CLIQUE_GUARD: usize = 1_000_000;

/// All maximal cliques (Bron–Kerbosch with Tomita pivoting), sorted.
pub fn maximal_cliques(g: &Graph, guard: usize) -> Result<Vec<VertexSet>> {
    let mut out = Vec::new();
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    expand(g, &mut Vec::new(), all, Vec::new(), &mut out, guard)?;
    let mut cliques: Vec<VertexSet> = out.into_iter().map(VertexSet::new).collect();
    cliques.sort();
    Ok(cliques)
}

fn expand(
    g: &Graph,
    r: &mut Vec<usize>,
    mut p: Vec<usize>,
    mut x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    guard: usize,
) -> Result<()> {
    if p.is_empty() {
        if x.is_empty() {
            if out.len() >= guard {
                return Err(Error::Capacity {
                    what: "maximal clique enumeration".into(),
                    required: out.len() as u128 + 1,
                    limit: guard,
                    hint: "the graph has too many maximal cliques".into(),
                });
            }
            out.push(r.clone());
        }
        return Ok(());
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&w| g.has_edge(u, w)).count())
        .expect("p is nonempty");
    let candidates: Vec<usize> = p.iter().copied().filter(|&w| !g.has_edge(pivot, w)).collect();
    for v in candidates {
        let nbrs = g.neighbors(v);
        r.push(v);
        expand(
            g,
            r,
            p.iter().copied().filter(|&w| nbrs.contains(w)).collect(),
            x.iter().copied().filter(|&w| nbrs.contains(w)).collect(),
            out,
            guard,
        )?;
        r.pop();
        p.retain(|&w| w != v);
        x.push(v);
    }
    Ok(())
}

/// The generating class of the graphical model: all cliques of `g`.
pub fn cliques_generating_class(g: &Graph) -> Result<GeneratingClass> {
    GeneratingClass::new(g.vertex_count(), maximal_cliques(g, DEFAULT_CLIQUE_GUARD)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_cycle, make_lattice, make_star};

    #[test]
    fn cycle_triangle_and_lattice() {
        let c4 = make_cycle(4).unwrap();
        assert_eq!(maximal_cliques(&c4, 100).unwrap().len(), 4);
        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(maximal_cliques(&tri, 100).unwrap(), vec![VertexSet::range(3)]);
        for k in 2..6 {
            let g = make_lattice(k).unwrap();
            let c = maximal_cliques(&g, 10_000).unwrap();
            assert_eq!(c.len(), 2 * k * (k - 1));
            assert!(c.iter().all(|s| s.len() == 2));
        }
        assert_eq!(maximal_cliques(&make_star(3).unwrap(), 100).unwrap().len(), 3);
    }

    #[test]
    fn isolated_vertices_are_cliques() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        let gen = cliques_generating_class(&g).unwrap();
        assert_eq!(gen.maximal_sets().len(), 2);
        assert!(gen.contains(&VertexSet::singleton(2)));
    }

    #[test]
    fn guard_is_enforced() {
        let g = make_lattice(3).unwrap();
        assert!(matches!(maximal_cliques(&g, 5), Err(Error::Capacity { .. })));
    }

    #[test]
    fn every_clique_is_complete_and_maximal() {
        let g = crate::graph::make_random_graph(14, 0.4, 7).unwrap();
        let cliques = maximal_cliques(&g, 10_000).unwrap();
        for c in &cliques {
            assert!(g.is_complete(c));
            for v in 0..g.vertex_count() {
                if !c.contains(v) {
                    assert!(c.iter().any(|w| !g.has_edge(v, w)), "{c} extends by {v}");
                }
            }
        }
    }
}
