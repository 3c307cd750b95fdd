//! Exact Fisher information of full and marginal models, asymptotic
//! variances, and the one-hop ≥ two-hop ≥ global variance check.

use crate::error::{Error, Result};
use crate::graph::{neighborhood, Graph, Hop};
use crate::linalg::{Cholesky, Matrix};
use crate::marginal::MarginalModel;
use crate::model::{p_from_theta, Cell, JSet, ProbabilityVector, ThetaVector, VertexSet};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;

/// Covariance of the canonical statistics of a model, indexed by its J-set.
#[derive(Clone, Debug)]
pub struct FisherMatrix<T> {
    pub matrix: Matrix<T>,
    pub jset: JSet,
}

/// Probabilities of events `{i : i_v = l for all (v, l)}` under a joint
/// distribution, memoized. The free coordinates are always summed in
/// lexicographic order, so an event has the same value whichever model asks.
struct EventProbabilities<'a, T> {
    joint: &'a ProbabilityVector<T>,
    strides: Vec<usize>,
    cache: HashMap<Vec<(usize, u16)>, T>,
}

impl<'a, T: Real> EventProbabilities<'a, T> {
    fn new(joint: &'a ProbabilityVector<T>) -> Self {
        EventProbabilities {
            joint,
            strides: joint.space().strides(),
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, event: Vec<(usize, u16)>) -> T {
        if let Some(&p) = self.cache.get(&event) {
            return p;
        }
        let space = self.joint.space();
        let mut base = 0usize;
        let mut fixed = vec![false; space.vertex_count()];
        for &(v, l) in &event {
            base += l as usize * self.strides[v];
            fixed[v] = true;
        }
        let free: Vec<usize> = (0..space.vertex_count()).filter(|&v| !fixed[v]).collect();
        let values = self.joint.values();
        let mut coords = vec![0usize; free.len()];
        let mut idx = base;
        let mut acc = T::zero();
        'outer: loop {
            acc += values[idx];
            for u in (0..free.len()).rev() {
                let v = free[u];
                coords[u] += 1;
                idx += self.strides[v];
                if coords[u] < space.level(v) {
                    continue 'outer;
                }
                idx -= coords[u] * self.strides[v];
                coords[u] = 0;
            }
            break;
        }
        self.cache.insert(event, acc);
        acc
    }
}

/// Joint assignment of two cells, or `None` when they conflict.
fn merge(a: &[(usize, u16)], b: &[(usize, u16)]) -> Option<Vec<(usize, u16)>> {
    let mut out: Vec<(usize, u16)> = a.to_vec();
    for &(v, l) in b {
        match a.iter().find(|&&(w, _)| w == v) {
            Some(&(_, m)) if m != l => return None,
            Some(_) => {}
            None => out.push((v, l)),
        }
    }
    out.sort_unstable();
    Some(out)
}

/// Fisher information of a model over `I_M` (`members` of the joint space)
/// evaluated at the marginal of `joint`: entries `p_{j∪j'} − p_j p_{j'}`.
pub fn fisher_matrix_embedded<T: Real>(
    joint: &ProbabilityVector<T>,
    jset: &JSet,
    members: &VertexSet,
) -> Result<FisherMatrix<T>> {
    let full = joint.space();
    if members.iter().any(|v| v >= full.vertex_count())
        || full.restrict(members).levels() != jset.space().levels()
    {
        return Err(Error::usage("J-set space does not match the restricted joint space"));
    }
    let events: Vec<Vec<(usize, u16)>> = jset
        .cells()
        .iter()
        .map(|c| {
            c.pad(members, full.vertex_count())
                .assignments()
        })
        .collect();
    let mut probs = EventProbabilities::new(joint);
    let single: Vec<T> = events.iter().map(|e| probs.get(e.clone())).collect();
    let n = jset.len();
    let mut m = Matrix::zeros(n, n);
    for a in 0..n {
        for b in 0..=a {
            let joint_p = merge(&events[a], &events[b]).map_or(T::zero(), |e| probs.get(e));
            let x = joint_p - single[a] * single[b];
            m[(a, b)] = x;
            m[(b, a)] = x;
        }
    }
    Ok(FisherMatrix {
        matrix: m,
        jset: jset.clone(),
    })
}

/// Fisher information of the model with J-set `jset` at probabilities `p`.
pub fn fisher_matrix<T: Real>(p: &ProbabilityVector<T>, jset: &JSet) -> Result<FisherMatrix<T>> {
    fisher_matrix_embedded(p, jset, &VertexSet::range(p.space().vertex_count()))
}

/// `K^{-1} / N`.
pub fn asymptotic_variance<T: Real>(
    p: &ProbabilityVector<T>,
    jset: &JSet,
    sample_size: u64,
) -> Result<Matrix<T>> {
    if sample_size == 0 {
        return Err(Error::usage("sample size must be positive"));
    }
    let k = fisher_matrix(p, jset)?;
    Ok(k.matrix.spd_inverse()?.scale(T::one() / T::from_count(sample_size)))
}

/// The `block` rows/columns of `K^{-1}`, as the inverse of the Schur
/// complement of the remaining indices.
pub fn schur_block_variance<T: Real>(k: &Matrix<T>, block: &[usize]) -> Result<Matrix<T>> {
    let n = k.rows();
    if !k.is_square() || block.iter().any(|&b| b >= n) {
        return Err(Error::usage("block indices outside the matrix"));
    }
    let rest: Vec<usize> = (0..n).filter(|i| !block.contains(i)).collect();
    let kbb = k.select(block, block);
    if rest.is_empty() {
        return kbb.spd_inverse();
    }
    let kbc = k.select(block, &rest);
    let chol = Cholesky::new(&k.select(&rest, &rest))?;
    // K_bc K_cc^{-1} K_cb, one column of K_cb at a time
    let mut correction = Matrix::zeros(block.len(), block.len());
    for (c, _) in block.iter().enumerate() {
        let col: Vec<T> = (0..rest.len()).map(|r| kbc[(c, r)]).collect();
        let solved = chol.solve(&col);
        for a in 0..block.len() {
            let mut s = T::zero();
            for r in 0..rest.len() {
                s += kbc[(a, r)] * solved[r];
            }
            correction[(a, c)] = s;
        }
    }
    kbb.sub(&correction).spd_inverse()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub vertex: usize,
    pub cell: String,
    pub var_one_hop: f64,
    pub var_two_hop: f64,
    pub var_global: f64,
    pub pass: bool,
}

pub const VARIANCE_SLACK: f64 = -1e-10;

/// Exact per-observation asymptotic variances of the relaxed one-hop,
/// relaxed two-hop and global estimators of every `θ_j`, `j ∈ J_{1,v}`,
/// with the check `var1 ≥ var2 ≥ varGlobal` (slack −1e-10).
pub fn verify_variance_ordering(
    theta: &ThetaVector<f64>,
    jset: &JSet,
    g: &Graph,
    v: usize,
) -> Result<Vec<VarianceRow>> {
    let joint = p_from_theta(theta, jset)?;
    variance_ordering_at(&joint, jset, g, v, &global_inverse(&joint, jset)?)
}

pub(crate) fn global_inverse(joint: &ProbabilityVector<f64>, jset: &JSet) -> Result<Matrix<f64>> {
    fisher_matrix(joint, jset)?.matrix.spd_inverse()
}

pub(crate) fn variance_ordering_at(
    joint: &ProbabilityVector<f64>,
    jset: &JSet,
    g: &Graph,
    v: usize,
    global_inv: &Matrix<f64>,
) -> Result<Vec<VarianceRow>> {
    let one = MarginalModel::relaxed(&neighborhood(g, v, Hop::One)?, jset)?;
    let two = MarginalModel::relaxed(&neighborhood(g, v, Hop::Two)?, jset)?;
    let inv = |m: &MarginalModel| -> Result<Matrix<f64>> {
        fisher_matrix_embedded(joint, &m.jset, &m.neighborhood.members)?
            .matrix
            .spd_inverse()
    };
    let (inv1, inv2) = (inv(&one)?, inv(&two)?);
    let mut rows = Vec::with_capacity(one.exempt.len());
    for &(pos1, full) in &one.exempt {
        let cell: &Cell = jset.cell(full);
        let pos2 = two
            .jset
            .position(&cell.restrict(&two.neighborhood.members))
            .ok_or_else(|| Error::domain("one-hop parameter missing from the two-hop model"))?;
        let (a, b, c) = (inv1[(pos1, pos1)], inv2[(pos2, pos2)], global_inv[(full, full)]);
        rows.push(VarianceRow {
            vertex: v,
            cell: jset.space().encode(cell),
            var_one_hop: a,
            var_two_hop: b,
            var_global: c,
            pass: a - b >= VARIANCE_SLACK && b - c >= VARIANCE_SLACK,
        });
    }
    Ok(rows)
}

pub fn write_variance_csv<W: Write>(rows: &[VarianceRow], mut w: W) -> Result<()> {
    writeln!(w, "vertex,cell,var1hop,var2hop,varGlobal,pass")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:e},{:e},{:e},{}",
            r.vertex, r.cell, r.var_one_hop, r.var_two_hop, r.var_global, r.pass
        )?;
    }
    Ok(())
}
