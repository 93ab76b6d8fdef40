//! Dense symmetric eigensolver (cyclic Jacobi).
//!
//! The bath oracle needs full eigendecompositions of real symmetric
//! arrowhead matrices up to a few hundred rows; a plain Jacobi sweep is
//! accurate to machine precision and fast enough at that size.

use crate::{fl, Scalar};

/// Eigendecomposition of a real symmetric matrix.
pub struct SymEigen<T> {
    /// Eigenvalues, ascending.
    pub values: Vec<T>,
    /// Eigenvectors, column-major: `vectors[j]` is the unit eigenvector for
    /// `values[j]`.
    pub vectors: Vec<Vec<T>>,
}

/// Cyclic Jacobi diagonalization of a symmetric matrix given in row-major
/// order. Symmetry is assumed, not checked; the strictly lower triangle is
/// ignored.
pub fn sym_eigen<T: Scalar>(matrix: &[T], n: usize) -> SymEigen<T> {
    assert_eq!(matrix.len(), n * n, "matrix shape mismatch");
    let mut a = matrix.to_vec();
    // v starts as the identity and accumulates the rotations.
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }

    let tol = T::epsilon() * fl::<T>(n as f64);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        let scale: T = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum::<T>() + off + T::one();
        if off.sqrt() <= tol * scale.sqrt() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (fl::<T>(2.0) * apq);
                // Stable tangent of the rotation angle.
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for i in 0..n {
                    if i != p && i != q {
                        let (ip, iq) = (ord(i, p, n), ord(i, q, n));
                        let aip = a[ip];
                        let aiq = a[iq];
                        a[ip] = c * aip - s * aiq;
                        a[iq] = s * aip + c * aiq;
                    }
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let values = order.iter().map(|&j| a[j * n + j]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    SymEigen { values, vectors }
}

// Upper-triangle index for the (i, j) entry regardless of argument order.
fn ord(i: usize, j: usize, n: usize) -> usize {
    if i < j {
        i * n + j
    } else {
        j * n + i
    }
}
