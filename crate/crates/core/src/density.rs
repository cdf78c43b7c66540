//! Validated density operators, Hermitian observables, entropies and
//! distances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues_unchecked;
use crate::matrix::{CMatrix, RMatrix};
use crate::scalar::{lit, to_f64, tol, Cx, Real};

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityOperator<T> {
    /// Same as [`validate_density`].
    pub fn new(raw: CMatrix<T>) -> Result<Self> {
        validate_density(raw)
    }

    /// Wraps a matrix that is known to be a valid state by construction.
    pub(crate) fn from_trusted(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probabilities: &[T]) -> Result<Self> {
        let d: Vec<Cx<T>> = probabilities.iter().map(|&p| Cx::new(p, T::zero())).collect();
        validate_density(CMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Cx<T> {
        self.matrix[(i, j)]
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        hermitian_eigenvalues_unchecked(&self.matrix)
    }

    /// Real parts of the diagonal.
    pub fn populations(&self) -> Vec<T> {
        self.matrix.diagonal().into_iter().map(|z| z.re).collect()
    }
}

/// Hermitian matrix (Hamiltonians and generic observables).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianObservable<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> HermitianObservable<T> {
    /// Accepts a matrix Hermitian to `1e-12` and stores its Hermitian part.
    pub fn new(raw: CMatrix<T>) -> Result<Self> {
        check_square(&raw)?;
        let defect = raw.hermitian_defect();
        if defect > tol(1e-12) {
            return Err(Error::NotHermitian { asymmetry: to_f64(defect) });
        }
        Ok(Self { matrix: raw.hermitian_part() })
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let d: Vec<Cx<T>> = diag.iter().map(|&x| Cx::new(x, T::zero())).collect();
        Self { matrix: CMatrix::from_diagonal(&d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }
}

fn check_square<T: Real>(m: &CMatrix<T>) -> Result<()> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    Ok(())
}

/// Validates a raw complex matrix as a density operator.
///
/// The checks run in order: Hermitian to `1e-12` (the Hermitian part is then
/// kept), unit trace to `1e-12`, smallest eigenvalue at least `-1e-10`.
pub fn validate_density<T: Real>(raw: CMatrix<T>) -> Result<DensityOperator<T>> {
    check_square(&raw)?;
    let defect = raw.hermitian_defect();
    if defect > tol(1e-12) {
        return Err(Error::NotHermitian { asymmetry: to_f64(defect) });
    }
    let matrix = raw.hermitian_part();
    let deviation = (matrix.trace().re - T::one()).abs();
    if deviation > tol(1e-12) {
        return Err(Error::TraceNotOne { deviation: to_f64(deviation) });
    }
    let eig = hermitian_eigenvalues_unchecked(&matrix);
    let smallest = *eig.last().expect("non-empty spectrum");
    if smallest < -tol::<T>(1e-10) {
        return Err(Error::NotPsd { min_eigenvalue: to_f64(smallest) });
    }
    Ok(DensityOperator { matrix })
}

/// `-Σ λ ln λ` over eigenvalues clamped to `[0, 1]`, in nats.
pub(crate) fn entropy_of_spectrum<T: Real>(values: &[T]) -> T {
    values
        .iter()
        .map(|&x| x.max(T::zero()).min(T::one()))
        .filter(|&x| x > T::zero())
        .map(|x| -x * x.ln())
        .sum()
}

/// Von Neumann entropy `-Tr(ρ ln ρ)` in nats.
pub fn von_neumann_entropy<T: Real>(rho: &DensityOperator<T>) -> T {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// Trace norm of a Hermitian matrix.
pub(crate) fn hermitian_trace_norm<T: Real>(h: &CMatrix<T>) -> T {
    hermitian_eigenvalues_unchecked(h).into_iter().map(|x| x.abs()).sum()
}

/// Trace distance `½‖ρ - σ‖₁`.
pub fn trace_distance<T: Real>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let diff = (rho.matrix() - sigma.matrix()).hermitian_part();
    Ok(hermitian_trace_norm(&diff) * lit(0.5))
}

/// Ginibre (Hilbert–Schmidt) random state: `G G† / Tr(G G†)` with i.i.d.
/// standard complex Gaussian entries drawn from a generator seeded with
/// `seed`. Deterministic per seed.
pub fn random_density<T: Real>(dim: usize, seed: u64) -> Result<DensityOperator<T>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: CMatrix<f64> = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Cx::new(re, im)
    });
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    let normalized = w.map(|z| Cx::new(lit::<T>(z.re / tr), lit::<T>(z.im / tr)));
    validate_density(normalized)
}

/// Uniformly random rotation in `SO(dim)`, from Gram–Schmidt on a Gaussian
/// matrix with the last column flipped when needed. Deterministic per seed.
pub fn random_rotation<T: Real>(dim: usize, seed: u64) -> RMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..2 {
            for u in &cols {
                let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut q = RMatrix::from_fn(dim, dim, |i, j| cols[j][i]);
    if dim > 0 && q.determinant() < 0.0 {
        for i in 0..dim {
            q[(i, dim - 1)] = -q[(i, dim - 1)];
        }
    }
    q.map(lit::<T>)
}
