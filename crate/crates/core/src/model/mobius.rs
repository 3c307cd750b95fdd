//! Möbius duality between canonical parameters and cell probabilities, the
//! cumulant function and the multinomial log-likelihood.

use super::cell::Cell;
use super::jset::JSet;
use super::params::{ProbabilityVector, ThetaVector};
use super::table::ContingencyTable;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{log_sum_exp, Real};

/// Sparse incidence between the cells of a dense space and a J-set:
/// row `i` lists the parameters `j` with `j ◁ i`.
#[derive(Clone, Debug)]
pub struct Design {
    params: usize,
    offsets: Vec<usize>,
    entries: Vec<u32>,
}

impl Design {
    pub fn new(jset: &JSet) -> Result<Self> {
        let n = jset.space().dense_len("design matrix")?;
        let assignments: Vec<Vec<(usize, u16)>> =
            jset.cells().iter().map(Cell::assignments).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for cell in jset.space().cells() {
            let coords = cell.coords();
            for (k, a) in assignments.iter().enumerate() {
                if a.iter().all(|&(v, l)| coords[v] == l) {
                    entries.push(k as u32);
                }
            }
            offsets.push(entries.len());
        }
        Ok(Design {
            params: jset.len(),
            offsets,
            entries,
        })
    }

    pub fn cells(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn params(&self) -> usize {
        self.params
    }

    /// Parameters `j ◁ i` for the cell at lexicographic index `i`.
    pub fn active(&self, i: usize) -> &[u32] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `Σ_{j ◁ i} θ_j` for every cell.
    pub fn energies<T: Real>(&self, theta: &[T]) -> Vec<T> {
        (0..self.cells())
            .map(|i| self.active(i).iter().map(|&k| theta[k as usize]).sum())
            .collect()
    }

    /// `Aᵀw`: for each parameter the total weight of the cells above it.
    pub fn moments<T: Real>(&self, weights: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.params];
        for (i, &w) in weights.iter().enumerate() {
            for &k in self.active(i) {
                out[k as usize] += w;
            }
        }
        out
    }

    /// `AᵀWA`.
    pub fn second_moments<T: Real>(&self, weights: &[T]) -> Matrix<T> {
        let mut m = Matrix::zeros(self.params, self.params);
        for (i, &w) in weights.iter().enumerate() {
            let act = self.active(i);
            for (a, &ka) in act.iter().enumerate() {
                for &kb in &act[..=a] {
                    m[(ka as usize, kb as usize)] += w;
                }
            }
        }
        for a in 0..self.params {
            for b in 0..a {
                let v = m[(a, b)] + m[(b, a)];
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        m
    }
}

/// Normalized log-probabilities from energies: returns `(k, p)`.
pub(crate) fn normalize<T: Real>(energies: &[T]) -> (T, Vec<T>) {
    let k = log_sum_exp(energies);
    let p = energies.iter().map(|&e| (e - k).exp()).collect();
    (k, p)
}

/// `θ_j = Σ_{j' ◁₀ j} (−1)^{|S(j)|−|S(j')|} log p(j')/p(0)` for the listed
/// parameter positions, using full-table probabilities of padded cells.
pub fn theta_components<T: Real>(
    p: &ProbabilityVector<T>,
    jset: &JSet,
    positions: &[usize],
) -> Result<Vec<T>> {
    if p.space().levels() != jset.space().levels() {
        return Err(Error::usage("probabilities and J-set live on different spaces"));
    }
    let strides = p.space().strides();
    let values = p.values();
    let log_p0 = values[0].ln();
    positions
        .iter()
        .map(|&k| {
            let a = jset.cell(k).assignments();
            let s = a.len();
            let mut acc = T::zero();
            for mask in 1u32..(1u32 << s) {
                let mut idx = 0usize;
                for (b, &(v, l)) in a.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        idx += l as usize * strides[v];
                    }
                }
                let term = values[idx].ln() - log_p0;
                if (s - mask.count_ones() as usize).is_multiple_of(2) {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            Ok(acc)
        })
        .collect()
}

pub fn theta_from_p<T: Real>(p: &ProbabilityVector<T>, jset: &JSet) -> Result<ThetaVector<T>> {
    let all: Vec<usize> = (0..jset.len()).collect();
    let values = theta_components(p, jset, &all)?;
    ThetaVector::new(values, Some(p.values()[0].ln()))
}

/// `log p(i) = θ_0 + Σ_{j ◁ i} θ_j` with `θ_0 = −k(θ)`.
pub fn p_from_theta<T: Real>(theta: &ThetaVector<T>, jset: &JSet) -> Result<ProbabilityVector<T>> {
    theta.check_len(jset)?;
    let design = Design::new(jset)?;
    p_from_theta_with(theta.values(), jset, &design)
}

pub(crate) fn p_from_theta_with<T: Real>(
    theta: &[T],
    jset: &JSet,
    design: &Design,
) -> Result<ProbabilityVector<T>> {
    let (_, p) = normalize(&design.energies(theta));
    if p.iter().any(|&x| !(x > T::zero())) {
        return Err(Error::domain(
            "a cell probability underflows to zero; theta is too extreme for this scalar type",
        ));
    }
    ProbabilityVector::new(jset.space().clone(), p)
}

/// `k(θ) = log Σ_i exp Σ_{j ◁ i} θ_j`.
pub fn cumulant<T: Real>(theta: &ThetaVector<T>, jset: &JSet) -> Result<T> {
    theta.check_len(jset)?;
    let design = Design::new(jset)?;
    Ok(log_sum_exp(&design.energies(theta.values())))
}

/// Canonical statistic `t_j = n(j_{S(j)})` for every `j ∈ J`.
pub fn canonical_statistic(table: &ContingencyTable, jset: &JSet) -> Result<Vec<u64>> {
    if table.space().levels() != jset.space().levels() {
        return Err(Error::usage("table and J-set live on different spaces"));
    }
    let mut t = vec![0u64; jset.len()];
    let assignments: Vec<Vec<(usize, u16)>> = jset.cells().iter().map(Cell::assignments).collect();
    for (cell, n) in table.nonzero() {
        let coords = cell.coords();
        for (k, a) in assignments.iter().enumerate() {
            if a.iter().all(|&(v, l)| coords[v] == l) {
                t[k] += n;
            }
        }
    }
    Ok(t)
}

/// `Σ_j θ_j n(j_{S(j)}) − N k(θ)`.
pub fn loglik<T: Real>(theta: &ThetaVector<T>, table: &ContingencyTable, jset: &JSet) -> Result<T> {
    let k = cumulant(theta, jset)?;
    let t = canonical_statistic(table, jset)?;
    let inner: T = theta
        .values()
        .iter()
        .zip(&t)
        .map(|(&th, &n)| th * T::from_count(n))
        .sum();
    Ok(inner - T::from_count(table.total()) * k)
}
