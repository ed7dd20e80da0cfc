//! Unitary coupled-cluster action `exp(-t(theta))` with `t = T - T^dagger`.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DVector;

use super::basis::DeterminantBasis;
use super::pool::ExcitationPool;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::math::ceil;
use crate::C64;

/// Cluster amplitudes over an [`ExcitationPool`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParameters {
    pub theta: Vec<f64>,
    pub rank: usize,
}

/// Sparsity pattern of `t(theta)` in one basis with per-operator contributions,
/// so that assembling `t` for new amplitudes is a single pass over the entries.
#[derive(Debug, Clone)]
pub struct GeneratorPattern {
    pub dim: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    contrib: Vec<Vec<(u32, f64)>>,
    /// Matrices of the excitation operators themselves in this basis.
    pub g: Vec<CsrMatrix>,
}

impl GeneratorPattern {
    pub fn new(pool: &ExcitationPool, basis: &DeterminantBasis) -> Self {
        let g: Vec<CsrMatrix> = pool.ops.iter().map(|op| op.matrix(basis)).collect();
        let dim = basis.len();
        let mut all: Vec<(u32, u32)> = Vec::new();
        for m in &g {
            for (r, c, _) in m.triplets() {
                all.push((r, c));
                all.push((c, r));
            }
        }
        all.sort_unstable();
        all.dedup();
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(all.len());
        for &(r, c) in &all {
            indptr[r as usize + 1] += 1;
            indices.push(c);
        }
        for i in 0..dim {
            indptr[i + 1] += indptr[i];
        }
        let pos = |r: u32, c: u32| -> u32 {
            let lo = indptr[r as usize];
            let hi = indptr[r as usize + 1];
            (lo + indices[lo..hi].binary_search(&c).unwrap()) as u32
        };
        let contrib = g
            .iter()
            .map(|m| {
                let mut v = Vec::new();
                for (r, c, x) in m.triplets() {
                    v.push((pos(r, c), x));
                    v.push((pos(c, r), -x));
                }
                v
            })
            .collect();
        GeneratorPattern { dim, indptr, indices, contrib, g }
    }

    /// `t(theta) = sum_n theta_n (G_n - G_n^T)`.
    pub fn generator(&self, theta: &[f64]) -> CsrMatrix {
        let mut values = vec![0.0; self.indices.len()];
        for (n, th) in theta.iter().enumerate() {
            if *th == 0.0 {
                continue;
            }
            for &(p, x) in &self.contrib[n] {
                values[p as usize] += th * x;
            }
        }
        CsrMatrix {
            nrows: self.dim,
            ncols: self.dim,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values,
        }
    }
}

/// `exp(s * A) x` by a scaled Taylor series; `A` real.
pub fn expmv(a: &CsrMatrix, s: f64, x: &DVector<C64>) -> Result<DVector<C64>> {
    let norm = a.norm1() * s.abs();
    if norm == 0.0 || x.is_empty() {
        return Ok(x.clone());
    }
    let steps = ceil(norm).max(1.0) as usize;
    let h = s / steps as f64;
    let mut v = x.clone();
    for _ in 0..steps {
        let mut term = v.clone();
        let mut acc = v.clone();
        let scale = acc.norm().max(1e-300);
        let mut converged = false;
        let mut last = 0.0;
        for k in 1..=60 {
            term = a.mul_vec(&term) * C64::new(h / k as f64, 0.0);
            acc += &term;
            last = term.norm();
            if last <= 1e-17 * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ExpmvNotConverged { residual: last / scale });
        }
        v = acc;
    }
    Ok(v)
}

/// `exp(-t(theta)) |x>` in `basis`.
pub fn apply_ucc(pool: &ExcitationPool, basis: &DeterminantBasis, theta: &ClusterParameters, x: &DVector<C64>) -> Result<DVector<C64>> {
    if theta.theta.len() != pool.len() {
        return Err(Error::Dimension(alloc::format!(
            "{} amplitudes for a pool of {}",
            theta.theta.len(),
            pool.len()
        )));
    }
    let pat = GeneratorPattern::new(pool, basis);
    expmv(&pat.generator(&theta.theta), -1.0, x)
}
