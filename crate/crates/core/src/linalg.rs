//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::error::{FinslerError, Result};
use crate::scalar::{c64, C64};

pub type CMatrix = Vec<Vec<C64>>;

pub fn to_dmatrix(m: &CMatrix) -> DMatrix<C64> {
    let n = m.len();
    let k = if n == 0 { 0 } else { m[0].len() };
    DMatrix::from_fn(n, k, |i, j| m[i][j])
}

pub fn from_dmatrix(m: &DMatrix<C64>) -> CMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let a = to_dmatrix(m);
    let h = (&a + a.adjoint()) * c64(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.len()).map(|i| m[i][i]).sum()
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky, with
/// the spectral condition number.
pub fn hermitian_inverse(m: &CMatrix) -> Result<(CMatrix, f64)> {
    let ev = hermitian_eigenvalues(m);
    let (lo, hi) = (ev[0], *ev.last().unwrap());
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let a = to_dmatrix(m);
    let inv = match a.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => a.try_inverse().ok_or(FinslerError::Singular)?,
    };
    Ok((from_dmatrix(&inv), cond))
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![c64(0.0, 0.0); m]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            for j in 0..m {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

/// `v^T M w̄`, the Hermitian pairing `M_{αβ̄} v^α w̄^β`.
pub fn hermitian_form(m: &CMatrix, v: &[C64], w: &[C64]) -> C64 {
    let mut acc = c64(0.0, 0.0);
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            acc += x * v[i] * w[j].conj();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_condition_of_diagonal() {
        let m = vec![
            vec![c64(2.0, 0.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(0.5, 0.0)],
        ];
        let (inv, cond) = hermitian_inverse(&m).unwrap();
        assert!((inv[0][0] - c64(0.5, 0.0)).norm() < 1e-15);
        assert!((inv[1][1] - c64(2.0, 0.0)).norm() < 1e-15);
        assert!((cond - 4.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3
        let m = vec![
            vec![c64(2.0, 0.0), c64(0.0, 1.0)],
            vec![c64(0.0, -1.0), c64(2.0, 0.0)],
        ];
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        assert!(hermitian_defect(&m) < 1e-15);
    }
}
