//! Dense symmetric eigensolver and Löwdin orthogonalization.

use nalgebra::{DMatrix, DVector};

use crate::error::{DfoError, Result};

const MAX_SWEEPS: usize = 100;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns.
pub fn jacobi_eigensymmetric(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut m = a.clone();
    // enforce exact symmetry
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)] * m[(i, j)])
                .sum();
            if off.sqrt() <= 1e-3 * f64::EPSILON * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[(p, q)];
                    if apq.abs() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let app = m[(p, p)];
                    let aqq = m[(q, q)];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Smallest overlap eigenvalue accepted as linearly independent.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

/// `S^{-1/2}` of a symmetric positive-definite matrix.
pub fn lowdin_orthogonalization(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = jacobi_eigensymmetric(s);
    let smallest = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smallest > DEGENERACY_THRESHOLD) {
        return Err(DfoError::DegenerateBasis(smallest));
    }
    let inv_sqrt = DMatrix::from_diagonal(&vals.map(|l| 1.0 / l.sqrt()));
    Ok(&vecs * inv_sqrt * vecs.transpose())
}
