//! Symmetric and Hermitian eigensolvers (cyclic Jacobi).

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, RMatrix};
use crate::scalar::{lit, to_f64, tol, Real};

/// Eigenpairs of a real symmetric matrix.
///
/// Eigenvalues are sorted in descending order and `eigenvectors` holds the
/// matching eigenvectors as columns. The column signs are canonical: the first
/// entry with magnitude above `1e-12` is positive, except that the last column
/// is negated when needed to make `det = +1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: RMatrix<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> RMatrix<T> {
        let v = &self.eigenvectors;
        let d = RMatrix::from_diagonal(&self.eigenvalues);
        &(v * &d) * &v.transpose()
    }
}

/// In-place cyclic Jacobi diagonalization. On return `a` is diagonal to
/// roundoff and, if given, `v` has been right-multiplied by the accumulated
/// rotations.
fn jacobi_in_place<T: Real>(a: &mut RMatrix<T>, mut v: Option<&mut RMatrix<T>>) {
    let n = a.rows();
    let scale = a.frobenius_norm();
    if n < 2 || scale == T::zero() {
        return;
    }
    let skip = T::epsilon() * scale * lit(1e-3);
    let one = T::one();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= skip {
                    if apq != T::zero() {
                        a[(p, q)] = T::zero();
                        a[(q, p)] = T::zero();
                    }
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (lit::<T>(2.0) * apq);
                let t = if theta == T::zero() {
                    one
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + one).sqrt())
                };
                let c = one / (t * t + one).sqrt();
                let s = t * c;
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[(r, p)];
                    let h = a[(r, q)];
                    let rp = c * g - s * h;
                    let rq = s * g + c * h;
                    a[(r, p)] = rp;
                    a[(p, r)] = rp;
                    a[(r, q)] = rq;
                    a[(q, r)] = rq;
                }
                if let Some(v) = v.as_deref_mut() {
                    for r in 0..n {
                        let g = v[(r, p)];
                        let h = v[(r, q)];
                        v[(r, p)] = c * g - s * h;
                        v[(r, q)] = s * g + c * h;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

fn descending_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

/// Eigendecomposition of a real symmetric matrix with the canonical ordering
/// and sign conventions of [`SpectralDecomposition`]. The output is a pure
/// function of the input matrix.
pub fn eig_sym<T: Real>(s: &RMatrix<T>) -> Result<SpectralDecomposition<T>> {
    if !s.is_square() || s.rows() == 0 {
        return Err(Error::NotSquare { rows: s.rows(), cols: s.cols() });
    }
    let asym = s.asymmetry();
    if asym > tol(1e-12) {
        return Err(Error::NotSymmetric { asymmetry: to_f64(asym) });
    }
    let n = s.rows();
    let mut a = RMatrix::from_fn(n, n, |i, j| {
        if i == j {
            s[(i, i)]
        } else {
            (s[(i, j)] + s[(j, i)]) * lit(0.5)
        }
    });
    let mut v = RMatrix::identity(n);
    jacobi_in_place(&mut a, Some(&mut v));

    let diag = a.diagonal();
    let order = descending_order(&diag);
    let eigenvalues: Vec<T> = order.iter().map(|&k| diag[k]).collect();
    let mut q = RMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);

    let sign_tol = tol::<T>(1e-12);
    for j in 0..n {
        if let Some(lead) = (0..n).map(|i| q[(i, j)]).find(|x| x.abs() > sign_tol) {
            if lead < T::zero() {
                for i in 0..n {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
    }
    if q.determinant() < T::zero() {
        for i in 0..n {
            q[(i, n - 1)] = -q[(i, n - 1)];
        }
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: q })
}

/// Eigenvalues of a Hermitian matrix in descending order. The input is
/// assumed Hermitian; only its Hermitian part is seen by the solver.
pub(crate) fn hermitian_eigenvalues_unchecked<T: Real>(h: &CMatrix<T>) -> Vec<T> {
    let n = h.rows();
    let mut emb = h.real_embedding();
    // symmetrize the embedding so roundoff in `h` cannot bias the sweep
    for i in 0..2 * n {
        for j in (i + 1)..2 * n {
            let m = (emb[(i, j)] + emb[(j, i)]) * lit(0.5);
            emb[(i, j)] = m;
            emb[(j, i)] = m;
        }
    }
    jacobi_in_place(&mut emb, None);
    let mut vals = emb.diagonal();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    // each eigenvalue appears twice in the embedding
    vals.chunks(2).map(|pair| (pair[0] + pair[1]) * lit(0.5)).collect()
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues<T: Real>(h: &CMatrix<T>) -> Result<Vec<T>> {
    if !h.is_square() || h.rows() == 0 {
        return Err(Error::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let defect = h.hermitian_defect();
    if defect > tol::<T>(1e-12) * h.max_modulus().max(T::one()) {
        return Err(Error::NotHermitian { asymmetry: to_f64(defect) });
    }
    Ok(hermitian_eigenvalues_unchecked(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rm(rows: &[&[f64]]) -> RMatrix<f64> {
        RMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn swap_case_negates_last_column() {
        let d = eig_sym(&rm(&[&[0.2, 0.0], &[0.0, 0.8]])).unwrap();
        assert_eq!(d.eigenvalues, vec![0.8, 0.2]);
        // swap permutation [[0,1],[1,0]] with last column negated
        assert_eq!(d.eigenvectors.to_rows(), vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert_eq!(d.eigenvectors.determinant(), 1.0);
    }

    #[test]
    fn identity_is_fixed() {
        let d = eig_sym(&RMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0; 3]);
        assert_eq!(d.eigenvectors, RMatrix::identity(3));
    }

    #[test]
    fn two_by_two_closed_form() {
        // eigenvalues 0.5 ± 0.1 with eigenvectors (1, ±1)/√2
        let d = eig_sym(&rm(&[&[0.5, 0.1], &[0.1, 0.5]])).unwrap();
        assert!((d.eigenvalues[0] - 0.6).abs() < 1e-15);
        assert!((d.eigenvalues[1] - 0.4).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let q = &d.eigenvectors;
        assert!((q[(0, 0)] - r).abs() < 1e-15 && (q[(1, 0)] - r).abs() < 1e-15);
        // (1, -1)/√2 after the sign rule, then negated by the det fix: (-1, 1)/√2
        assert!((q[(0, 1)] + r).abs() < 1e-15 && (q[(1, 1)] - r).abs() < 1e-15);
        assert!((q.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let err = eig_sym(&rm(&[&[1.0, 0.1], &[0.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
    }

    #[test]
    fn hermitian_spectrum_of_pauli_y() {
        use crate::scalar::Cx;
        let y = CMatrix::from_rows(&[
            vec![Cx::new(0.0, 0.0), Cx::new(0.0, -1.0)],
            vec![Cx::new(0.0, 1.0), Cx::new(0.0, 0.0)],
        ])
        .unwrap();
        let ev: Vec<f64> = hermitian_eigenvalues(&y).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_precision_reconstruction() {
        let s = RMatrix::from_rows(&[vec![0.5f32, 0.1, 0.0], vec![0.1, 0.3, 0.05], vec![0.0, 0.05, 0.2]])
            .unwrap();
        let d = eig_sym(&s).unwrap();
        assert!((&d.reconstruct() - &s).frobenius_norm() < 1e-5);
    }

    fn symmetric(n: usize) -> impl Strategy<Value = RMatrix<f64>> {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
            let m = RMatrix::from_fn(n, n, |i, j| v[i * n + j]);
            RMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
        })
    }

    proptest! {
        #[test]
        fn reconstruction_orthogonality_and_det(s in (1usize..9).prop_flat_map(symmetric)) {
            let d = eig_sym(&s).unwrap();
            let q = &d.eigenvectors;
            let recon = (&d.reconstruct() - &s).frobenius_norm();
            prop_assert!(recon <= 1e-10 * s.frobenius_norm().max(1e-300));
            let gram = &q.transpose() * q;
            prop_assert!((&gram - &RMatrix::identity(s.rows())).max_abs() <= 1e-12);
            prop_assert!((q.determinant() - 1.0).abs() <= 1e-10);
            prop_assert!(d.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
