//! Dense linear algebra helpers on top of `nalgebra`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{Error, Result};
use crate::math::{abs, sqrt};
use crate::C64;

/// `exp(m)` of a real matrix by diagonal Pade approximation of order 8 with
/// scaling and squaring (scaled norm at most 1/2).
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    if m.iter().all(|x| *x == 0.0) {
        return id;
    }
    let norm = (0..n).map(|j| m.column(j).iter().map(|x| abs(*x)).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0u32;
    while norm / (1u64 << s) as f64 > 0.5 {
        s += 1;
    }
    let a = m / (1u64 << s) as f64;
    const ORDER: usize = 8;
    let mut c = 1.0;
    let mut term = id.clone();
    let mut p = id.clone();
    let mut q = id.clone();
    for k in 1..=ORDER {
        c *= (ORDER + 1 - k) as f64 / (k * (2 * ORDER + 1 - k)) as f64;
        term = &term * &a;
        p += &term * c;
        q += &term * if k % 2 == 0 { c } else { -c };
    }
    let mut x = q.lu().solve(&p).expect("Pade denominator is nonsingular for scaled norm <= 1/2");
    for _ in 0..s {
        x = &x * &x;
    }
    x
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Canonical orthogonalization of an indefinite Hermitian metric.
///
/// Returns `X` with `X^dagger S X = diag(J)`, `J_k = +-1`, keeping eigenvalues with
/// magnitude above `cutoff`.
pub fn canonical_orthogonalization(s: &DMatrix<C64>, cutoff: f64) -> (DMatrix<C64>, Vec<f64>) {
    let n = s.nrows();
    if n == 0 {
        return (DMatrix::zeros(0, 0), Vec::new());
    }
    let (vals, vecs) = hermitian_eig(s);
    let keep: Vec<usize> = (0..n).filter(|&k| abs(vals[k]) > cutoff).collect();
    let mut x = DMatrix::zeros(n, keep.len());
    let mut j = Vec::with_capacity(keep.len());
    for (c, &k) in keep.iter().enumerate() {
        let f = 1.0 / sqrt(abs(vals[k]));
        for i in 0..n {
            x[(i, c)] = vecs[(i, k)] * f;
        }
        j.push(if vals[k] > 0.0 { 1.0 } else { -1.0 });
    }
    (x, j)
}

/// Eigenvalues and right eigenvectors of a general complex matrix.
///
/// Uses the complex Schur form followed by triangular back-substitution. Free
/// variables of numerically degenerate eigenvalues are set to zero so that
/// eigenvectors within a degenerate cluster stay linearly independent.
pub fn eig(m: &DMatrix<C64>) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let scale = m.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 200 * n.max(10))
        .ok_or_else(|| Error::Eigen(alloc::string::String::from("Schur iteration did not converge")))?;
    let (q, t) = schur.unpack();
    let tol = 1e-10 * scale;
    let vals: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lam = vals[k];
        y[(k, k)] = C64::new(1.0, 0.0);
        for jj in (0..k).rev() {
            let mut rhs = C64::new(0.0, 0.0);
            for l in jj + 1..=k {
                rhs -= t[(jj, l)] * y[(l, k)];
            }
            let d = t[(jj, jj)] - lam;
            y[(jj, k)] = if d.norm() < tol { C64::new(0.0, 0.0) } else { rhs / d };
        }
    }
    let mut v = &q * y;
    for k in 0..n {
        let nrm = v.column(k).norm();
        if nrm > 0.0 {
            v.column_mut(k).scale_mut(1.0 / nrm);
        }
    }
    Ok((vals, v))
}

/// Solves `m x = b` by LU; `None` when `m` is singular.
pub fn solve(m: &DMatrix<C64>, b: &DVector<C64>) -> Option<DVector<C64>> {
    m.clone().lu().solve(b)
}

/// Largest entry magnitude of `m - m^dagger`.
pub fn hermitian_violation(m: &DMatrix<C64>) -> f64 {
    let mut v: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v = v.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    v
}

/// Largest entry magnitude of `m - m^T`.
pub fn symmetric_violation(m: &DMatrix<C64>) -> f64 {
    let mut v: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v = v.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn expm_rotation() {
        let t = 0.3;
        let k = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let x = expm(&k);
        assert!((x[(0, 0)] - crate::math::cos(t)).abs() < 1e-14);
        assert!((x[(1, 0)] - crate::math::sin(t)).abs() < 1e-14);
    }

    #[test]
    fn eig_with_degeneracy() {
        // diag(1, 1, 3) conjugated by a non-orthogonal similarity
        let p = DMatrix::from_row_slice(3, 3, &[c(1.0), c(0.5), c(0.2), c(0.0), c(1.0), c(0.3), c(0.1), c(0.0), c(1.0)]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![c(1.0), c(1.0), c(3.0)]));
        let m = &p * d * p.clone().try_inverse().unwrap();
        let (vals, vecs) = eig(&m).unwrap();
        for k in 0..3 {
            let r = &m * vecs.column(k) - vecs.column(k) * vals[k];
            assert!(r.norm() < 1e-10);
        }
        let det = vecs.determinant().norm();
        assert!(det > 1e-3);
    }

    #[test]
    fn canonical_orthogonalization_indefinite() {
        let s = DMatrix::from_row_slice(3, 3, &[c(2.0), c(0.0), c(0.0), c(0.0), c(-1.0), c(0.0), c(0.0), c(0.0), c(1e-14)]);
        let (x, j) = canonical_orthogonalization(&s, 1e-10);
        assert_eq!(j, [-1.0, 1.0]);
        let m = x.adjoint() * s * &x;
        assert!((m[(0, 0)].re + 1.0).abs() < 1e-14 && (m[(1, 1)].re - 1.0).abs() < 1e-14);
    }
}
