//! Marginal tables and models over a neighbourhood `M_v`: the exact marginal
//! parameters, the closed-form marginal parameter map, the buffer
//! classification and the relaxed local J-sets.

use crate::error::{Error, Result};
use crate::graph::Neighborhood;
use crate::model::{
    build_jset, normalize, theta_from_p, Cell, CellSpace, ContingencyTable, Design,
    GeneratingClass, JSet, ProbabilityVector, ThetaVector, VertexSet,
};
use crate::scalar::{log_sum_exp, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// For every cell of `space` (lexicographic), the index of its restriction
/// to `members` in the marginal space.
pub fn projection_index(space: &CellSpace, members: &VertexSet) -> Result<Vec<usize>> {
    let n = space.dense_len("marginal projection")?;
    let levels = space.levels();
    let sub_strides = space.restrict(members).strides();
    let weight: Vec<usize> = (0..levels.len())
        .map(|v| members.position(v).map_or(0, |p| sub_strides[p]))
        .collect();
    let mut out = Vec::with_capacity(n);
    let mut coords = vec![0usize; levels.len()];
    let mut target = 0usize;
    for _ in 0..n {
        out.push(target);
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
    Ok(out)
}

pub fn marginal_table(table: &ContingencyTable, members: &VertexSet) -> Result<ContingencyTable> {
    table.marginal(members)
}

/// Exact marginal distribution of `p` over `members`.
pub fn marginal_probabilities<T: Real>(
    p: &ProbabilityVector<T>,
    members: &VertexSet,
) -> Result<ProbabilityVector<T>> {
    check_members(p.space(), members)?;
    let sub = p.space().restrict(members);
    let mut out = vec![T::zero(); sub.dense_len("marginal probabilities")?];
    for (&target, &x) in projection_index(p.space(), members)?.iter().zip(p.values()) {
        out[target] += x;
    }
    ProbabilityVector::new(sub, out)
}

fn check_members(space: &CellSpace, members: &VertexSet) -> Result<()> {
    match members.iter().find(|&v| v >= space.vertex_count()) {
        Some(v) => Err(Error::usage(format!("vertex {v} is not in the space"))),
        None => Ok(()),
    }
}

/// True marginal canonical parameters over `I_{M_v}`: the full model is
/// enumerated, marginalized, and Möbius-inverted on the saturated marginal
/// J-set (returned alongside).
pub fn marginal_theta_oracle<T: Real>(
    theta: &ThetaVector<T>,
    jset: &JSet,
    members: &VertexSet,
) -> Result<(JSet, ThetaVector<T>)> {
    theta.check_len(jset)?;
    check_members(jset.space(), members)?;
    let design = Design::new(jset)?;
    let (_, p) = normalize(&design.energies(theta.values()));
    let p = ProbabilityVector::new(jset.space().clone(), p)?;
    let marginal = marginal_probabilities(&p, members)?;
    let sat = JSet::saturated(marginal.space().clone())?;
    let theta_m = theta_from_p(&marginal, &sat)?;
    Ok((sat, theta_m))
}

/// Marginal parameter of the cell `j` of `I_{M_v}` evaluated directly from
/// the overall parameters:
///
/// `θ^M_j = θ_j + Σ_{j' ◁₀ j} (−1)^{|S(j)|−|S(j')|} log Σ_{i : i_M = j'} exp Σ_{k ◁ i, k ⋪ j'} θ_k`,
///
/// where the inner sum runs over every completion `i` of `j'` outside `M`.
pub fn lemma_one_formula<T: Real>(
    theta: &ThetaVector<T>,
    jset: &JSet,
    members: &VertexSet,
    j: &Cell,
) -> Result<T> {
    theta.check_len(jset)?;
    check_members(jset.space(), members)?;
    let space = jset.space();
    let sub = space.restrict(members);
    if !sub.contains(j) {
        return Err(Error::usage(format!("cell {j} is not a cell of the marginal space")));
    }
    let outside = VertexSet::range(space.vertex_count()).difference(members);
    let outside_space = space.restrict(&outside);
    outside_space.dense_len("completions outside the neighbourhood")?;
    space.dense_len("overall model")?;
    let full_j = j.pad(members, space.vertex_count());
    let assignments: Vec<Vec<(usize, u16)>> = jset.cells().iter().map(Cell::assignments).collect();

    let support = full_j.assignments();
    let s = support.len();
    let mut acc = jset.position(&full_j).map_or(T::zero(), |k| theta.get(k));
    for mask in 0u32..(1u32 << s) {
        let mut jp = Cell::zero(space.vertex_count());
        for (b, &(v, l)) in support.iter().enumerate() {
            if mask & (1 << b) != 0 {
                jp.set(v, l as usize);
            }
        }
        let jp_coords = jp.coords();
        let mut exponents = Vec::with_capacity(outside_space.total_cells() as usize);
        for rest in outside_space.cells() {
            let mut i = jp.clone();
            for (pos, v) in outside.iter().enumerate() {
                i.set(v, rest.get(pos));
            }
            let ic = i.coords();
            let mut e = T::zero();
            for (k, a) in assignments.iter().enumerate() {
                let below_i = a.iter().all(|&(v, l)| ic[v] == l);
                let below_jp = a.iter().all(|&(v, l)| jp_coords[v] == l);
                if below_i && !below_jp {
                    e += theta.get(k);
                }
            }
            exponents.push(e);
        }
        let term = log_sum_exp(&exponents);
        if (s - mask.count_ones() as usize).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Split of the parameters near a neighbourhood: `exempt` are the J-set
/// cells with `S(j) ⊆ M_v`, `S(j) ⊄ B_v`; `buffered` are all nonzero cells
/// with support inside `B_v`. Both hold full-length cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BufferPartition {
    pub exempt: Vec<Cell>,
    pub buffered: Vec<Cell>,
}

pub fn classify_buffer(nb: &Neighborhood, jset: &JSet) -> BufferPartition {
    let exempt = (0..jset.len())
        .filter(|&k| {
            let s = jset.support(k);
            s.is_subset(&nb.members) && !s.is_subset(&nb.buffer)
        })
        .map(|k| jset.cell(k).clone())
        .collect();
    let space = jset.space();
    let buffered = nonzero_cells_on(&space.restrict(&nb.buffer))
        .into_iter()
        .map(|c| c.pad(&nb.buffer, space.vertex_count()))
        .collect();
    BufferPartition { exempt, buffered }
}

/// Every nonzero cell of a (small) space, lexicographic, without a guard.
fn nonzero_cells_on(space: &CellSpace) -> Vec<Cell> {
    let n = space.vertex_count();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut c = Cell::zero(n);
    loop {
        let mut v = n;
        loop {
            if v == 0 {
                return out;
            }
            v -= 1;
            if c.get(v) + 1 < space.level(v) {
                c.set(v, c.get(v) + 1);
                break;
            }
            c.set(v, 0);
        }
        out.push(c.clone());
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginalKind {
    Exact,
    Relaxed,
}

/// A local model over `I_{M_v}`. `exempt` pairs each exempt parameter's
/// position in the local J-set with its position in the overall J-set.
#[derive(Clone, Debug)]
pub struct MarginalModel {
    pub neighborhood: Neighborhood,
    pub jset: JSet,
    pub kind: MarginalKind,
    pub exempt: Vec<(usize, usize)>,
}

impl MarginalModel {
    /// The relaxed model: exempt overall parameters plus a saturated buffer.
    pub fn relaxed(nb: &Neighborhood, jset: &JSet) -> Result<Self> {
        let local = relaxed_jset(nb, jset)?;
        Ok(Self::with_jset(nb, jset, local, MarginalKind::Relaxed))
    }

    /// The model whose J-set is generated by `gen` over `I_{M_v}` (restricted indices).
    pub fn exact(nb: &Neighborhood, jset: &JSet, gen: &GeneratingClass) -> Result<Self> {
        let sub = jset.space().restrict(&nb.members);
        let local = build_jset(&sub, gen)?;
        Ok(Self::with_jset(nb, jset, local, MarginalKind::Exact))
    }

    fn with_jset(nb: &Neighborhood, jset: &JSet, local: JSet, kind: MarginalKind) -> Self {
        let exempt = classify_buffer(nb, jset)
            .exempt
            .iter()
            .filter_map(|c| {
                let pos = local.position(&c.restrict(&nb.members))?;
                Some((pos, jset.position(c).expect("exempt cells come from the J-set")))
            })
            .collect();
        MarginalModel {
            neighborhood: nb.clone(),
            jset: local,
            kind,
            exempt,
        }
    }
}

/// `{j ∈ J : S(j) ⊆ M_v, S(j) ⊄ B_v} ∪ {i : ∅ ≠ S(i) ⊆ B_v}` over `I_{M_v}`.
pub fn relaxed_jset(nb: &Neighborhood, jset: &JSet) -> Result<JSet> {
    let part = classify_buffer(nb, jset);
    let sub = jset.space().restrict(&nb.members);
    let cells = part
        .exempt
        .iter()
        .chain(&part.buffered)
        .map(|c| c.restrict(&nb.members))
        .collect();
    JSet::from_cells(sub, cells)
}

/// Generating class of the exact marginal model over `M_v` (restricted
/// indices), found as the supports where the oracle marginal parameters are
/// nonzero (|θ| > 1e-8) in each of three random draws.
pub fn exact_marginal_generating_class(
    jset: &JSet,
    members: &VertexSet,
    seed: u64,
) -> Result<GeneratingClass> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Option<Vec<bool>> = None;
    let mut sat = None;
    for _ in 0..3 {
        let values = (0..jset.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let theta = ThetaVector::<f64>::new(values, None)?;
        let (s, tm) = marginal_theta_oracle(&theta, jset, members)?;
        let nonzero: Vec<bool> = tm.values().iter().map(|x| x.abs() > 1e-8).collect();
        keep = Some(match keep {
            None => nonzero,
            Some(k) => k.iter().zip(&nonzero).map(|(a, b)| *a && *b).collect(),
        });
        sat = Some(s);
    }
    let (keep, sat) = (keep.unwrap(), sat.unwrap());
    let mut sets: Vec<VertexSet> = (0..members.len()).map(VertexSet::singleton).collect();
    sets.extend((0..sat.len()).filter(|&k| keep[k]).map(|k| sat.support(k).clone()));
    GeneratingClass::new(members.len(), sets)
}
