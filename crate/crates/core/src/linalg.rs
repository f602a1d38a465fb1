//! Dense Hermitian eigensolvers.

use faer::complex_native::c64;
use faer::{Mat, Side as Triangle};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Ascending eigenvalues with eigenvectors stored column by column.
pub(crate) struct Eigh<T> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<T>,
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if m.iter().all(|z| z.im == 0.0) {
        let real = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let mut values = real.selfadjoint_eigenvalues(Triangle::Lower);
        values.sort_by(f64::total_cmp);
        return values;
    }
    let mut values: Vec<f64> = to_faer(m)
        .selfadjoint_eigenvalues(Triangle::Lower)
        .into_iter()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

pub(crate) fn hermitian_eigh(m: &DMatrix<Complex64>) -> Eigh<Complex64> {
    let n = m.nrows();
    let evd = to_faer(m).selfadjoint_eigendecomposition(Triangle::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let order = ascending((0..n).map(|k| s.read(k).re).collect());
    let values = order.iter().map(|&k| s.read(k).re).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| {
        let z = u.read(i, order[c]);
        Complex64::new(z.re, z.im)
    });
    Eigh { values, vectors }
}

pub(crate) fn symmetric_eigh(m: &DMatrix<f64>) -> Eigh<f64> {
    let n = m.nrows();
    let evd = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]).selfadjoint_eigendecomposition(Triangle::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let order = ascending((0..n).map(|k| s.read(k)).collect());
    let values = order.iter().map(|&k| s.read(k)).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| u.read(i, order[c]));
    Eigh { values, vectors }
}

fn to_faer(m: &DMatrix<Complex64>) -> Mat<c64> {
    Mat::<c64>::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        c64::new(z.re, z.im)
    })
}

fn ascending(values: Vec<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn complex_hermitian_pair() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        let e = hermitian_eigh(&m);
        assert_abs_diff_eq!(e.values[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 2.0, epsilon = 1e-14);
        let back = &e.vectors
            * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                2,
                e.values.iter().map(|&v| Complex64::new(v, 0.0)),
            ))
            * e.vectors.adjoint();
        assert!((back - &m).norm() < 1e-13);
        assert_eq!(hermitian_eigenvalues(&m).len(), 2);
    }

    #[test]
    fn wide_dynamic_range_stays_finite() {
        // rank-one blocks with weights spanning many decades
        let n = 60;
        let m = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(10f64.powi(-(i as i32) - (j as i32)), 0.0)
        });
        let values = hermitian_eigenvalues(&m);
        assert!(values.iter().all(|v| v.is_finite()));
        let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        assert_abs_diff_eq!(values.iter().sum::<f64>(), trace, epsilon = 1e-14);
    }
}
