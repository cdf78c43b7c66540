//! Intrinsic reference basis (IRB) construction.
//!
//! A state `ρ = S + iT` is split with respect to a conjugation `K`. Here `K`
//! is always entrywise complex conjugation in the basis the matrix is written
//! in, so `S = Re ρ` and `T = Im ρ`. Other physical choices of `K` are
//! handled by rotating the input into the basis where `K` acts by
//! conjugation before calling into this module.
//!
//! The IRB is the eigenbasis `Q` of `S` with descending populations; in it
//! the state reads `ρ_O = Qᵀ ρ Q = A + iN` with `A` diagonal and `N` real
//! antisymmetric.

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::density::DensityOperator;
use crate::error::{Error, Result};
use crate::linalg::eig_sym;
use crate::matrix::{CMatrix, RMatrix};
use crate::scalar::{lit, Cx, Real};

/// Default threshold for the active support.
pub const DEFAULT_DELTA_SUPPORT: f64 = 1e-12;
/// Default population gap below which indices share a degenerate block.
pub const DEFAULT_DELTA_DEGEN: f64 = 1e-9;

/// Real symmetric and real antisymmetric parts of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSplit<T> {
    pub symmetric: RMatrix<T>,
    pub antisymmetric: RMatrix<T>,
}

/// Ordered partition of the active support into degeneracy clusters
/// (0-based indices).
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(transparent)]
pub struct BlockPartition {
    pub clusters: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn is_trivial(&self) -> bool {
        self.clusters.iter().all(|c| c.len() == 1)
    }

    /// Block label of an index, if the index is active.
    pub fn block_of(&self, index: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(&index))
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        matches!((self.block_of(i), self.block_of(j)), (Some(a), Some(b)) if a == b)
    }
}

/// Gauge-fixed frame of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct IrbFrame<T> {
    /// Orthogonal, `det Q = +1`; columns are the IRB vectors.
    pub q: RMatrix<T>,
    /// Populations `a_i`, descending.
    pub populations: Vec<T>,
    /// Coherence matrix `N = Qᵀ T Q`.
    pub coherences: RMatrix<T>,
    /// Indices with `a_i > δ_support`.
    pub active_support: Vec<usize>,
    pub blocks: BlockPartition,
}

impl<T: Real> IrbFrame<T> {
    pub fn dim(&self) -> usize {
        self.populations.len()
    }

    /// Size of the active support.
    pub fn d_act(&self) -> usize {
        self.active_support.len()
    }

    /// Active index pairs `(i, j)` with `i < j`.
    pub fn active_pairs(&self) -> Vec<(usize, usize)> {
        let act = &self.active_support;
        let mut out = Vec::new();
        for (k, &i) in act.iter().enumerate() {
            for &j in &act[k + 1..] {
                out.push((i, j));
            }
        }
        out
    }

    /// `n_ij`.
    pub fn coherence(&self, i: usize, j: usize) -> T {
        self.coherences[(i, j)]
    }

    /// Smallest population gap `min |a_i - a_j|` over active pairs, or `None`
    /// with fewer than two active indices.
    pub fn population_gap(&self) -> Option<T> {
        self.active_pairs()
            .into_iter()
            .map(|(i, j)| (self.populations[i] - self.populations[j]).abs())
            .reduce(T::min)
    }

    /// Frame read off a state already written in a fixed IRB: `Q` is the
    /// identity, populations are the diagonal and `N` the imaginary part.
    /// The diagonal need not be sorted.
    pub fn of_fixed_frame_state(rho_o: &DensityOperator<T>, delta_support: T, delta_degen: T) -> Self {
        let n = rho_o.dim();
        let populations = rho_o.populations();
        let coherences = antisymmetrize(&rho_o.matrix().imag_part());
        let active_support = active_indices(&populations, delta_support);
        let blocks = cluster_by_population(&populations, &active_support, delta_degen);
        Self { q: RMatrix::identity(n), populations, coherences, active_support, blocks }
    }
}

impl<T: Real> Serialize for IrbFrame<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IrbFrame", 5)?;
        st.serialize_field("Q", &self.q.to_rows())?;
        st.serialize_field("a", &self.populations)?;
        st.serialize_field("N", &self.coherences.to_rows())?;
        st.serialize_field("active", &self.active_support)?;
        st.serialize_field("blocks", &self.blocks)?;
        st.end()
    }
}

/// Splits `ρ = S + iT` with `K` = entrywise conjugation in the input basis.
pub fn split_real_imag<T: Real>(rho: &DensityOperator<T>) -> RealSplit<T> {
    let m = rho.matrix();
    RealSplit { symmetric: symmetrize(&m.real_part()), antisymmetric: antisymmetrize(&m.imag_part()) }
}

fn symmetrize<T: Real>(m: &RMatrix<T>) -> RMatrix<T> {
    RMatrix::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] + m[(j, i)]) * lit(0.5))
}

fn antisymmetrize<T: Real>(m: &RMatrix<T>) -> RMatrix<T> {
    RMatrix::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] - m[(j, i)]) * lit(0.5))
}

fn active_indices<T: Real>(populations: &[T], delta_support: T) -> Vec<usize> {
    (0..populations.len()).filter(|&i| populations[i] > delta_support).collect()
}

/// Builds the IRB frame of `rho`.
pub fn construct_irb<T: Real>(rho: &DensityOperator<T>, delta_support: T, delta_degen: T) -> Result<IrbFrame<T>> {
    let split = split_real_imag(rho);
    let spectral = eig_sym(&split.symmetric)?;
    let q = spectral.eigenvectors;
    let coherences = antisymmetrize(&(&(&q.transpose() * &split.antisymmetric) * &q));
    let populations = spectral.eigenvalues;
    let active_support = active_indices(&populations, delta_support);
    let blocks = cluster_by_population(&populations, &active_support, delta_degen);
    Ok(IrbFrame { q, populations, coherences, active_support, blocks })
}

/// [`construct_irb`] with the default tolerances.
pub fn construct_irb_default<T: Real>(rho: &DensityOperator<T>) -> Result<IrbFrame<T>> {
    construct_irb(rho, lit(DEFAULT_DELTA_SUPPORT), lit(DEFAULT_DELTA_DEGEN))
}

/// `Qᵀ ρ Q`.
pub fn to_irb<T: Real>(rho: &DensityOperator<T>, frame: &IrbFrame<T>) -> Result<DensityOperator<T>> {
    if rho.dim() != frame.dim() {
        return Err(Error::DimMismatch { expected: frame.dim(), found: rho.dim() });
    }
    DensityOperator::new(rho.matrix().congruence_by(&frame.q))
}

/// `Q ρ_O Qᵀ`, the inverse of [`to_irb`].
pub fn from_irb<T: Real>(rho_o: &DensityOperator<T>, frame: &IrbFrame<T>) -> Result<DensityOperator<T>> {
    if rho_o.dim() != frame.dim() {
        return Err(Error::DimMismatch { expected: frame.dim(), found: rho_o.dim() });
    }
    DensityOperator::new(rho_o.matrix().congruence_by_transpose(&frame.q))
}

/// Complete dephasing in the IRB: keeps the diagonal, zeros the rest.
pub fn dephase_irb<T: Real>(rho_o: &DensityOperator<T>) -> DensityOperator<T> {
    let m = rho_o.matrix();
    let diag: Vec<Cx<T>> = m.diagonal().into_iter().map(|z| Cx::new(z.re, T::zero())).collect();
    DensityOperator::from_trusted(CMatrix::from_diagonal(&diag))
}

/// Greedy clustering of descending populations: neighbours join a block
/// iff their gap is at most `delta_degen`.
pub fn detect_blocks<T: Real>(populations: &[T], delta_degen: T) -> Result<BlockPartition> {
    if let Some(k) = (1..populations.len()).find(|&k| populations[k] > populations[k - 1]) {
        return Err(Error::NotSorted { index: k });
    }
    let all: Vec<usize> = (0..populations.len()).collect();
    Ok(cluster_by_population(populations, &all, delta_degen))
}

/// Same greedy rule applied to `indices` visited in descending population
/// order, so the populations themselves need not be sorted.
fn cluster_by_population<T: Real>(populations: &[T], indices: &[usize], delta_degen: T) -> BlockPartition {
    let mut order = indices.to_vec();
    order.sort_by(|&i, &j| populations[j].partial_cmp(&populations[i]).unwrap_or(std::cmp::Ordering::Equal));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match clusters.last_mut() {
            Some(cur) if populations[*cur.last().unwrap()] - populations[i] <= delta_degen => cur.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    BlockPartition { clusters }
}
