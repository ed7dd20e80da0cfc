//! Generalized eigenproblem `E2 beta = omega S2 beta` and derived response properties.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Matrix3};

use super::matrices::ResponseMatrices;
use super::property::PropertyGradientVector;
use super::MethodId;
use crate::error::{Error, Result};
use crate::linalg::{canonical_orthogonalization, eig, solve as lu_solve};
use crate::C64;

/// Cutoff on metric eigenvalues in the canonical orthogonalization.
pub const METRIC_CUTOFF: f64 = 1e-10;
/// States with a commutator norm below this are dropped.
pub const NORM_CUTOFF: f64 = 1e-8;
/// Imaginary parts above this are reported as instabilities.
pub const IMAG_TOL: f64 = 1e-8;
/// Minimum distance between a frequency and any excitation energy.
pub const RESONANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationSolution {
    pub method: MethodId,
    /// Excitation energies in Hartree, ascending.
    pub omega: Vec<f64>,
    /// Excitation coefficients `Z_k` (unnormalized).
    pub z: Vec<DVector<C64>>,
    /// De-excitation coefficients `Y_k` (unnormalized).
    pub y: Vec<DVector<C64>>,
    /// `<0|[O_k, O_k^dagger]|0>`.
    pub norm: Vec<f64>,
    /// Positive-frequency states dropped for a vanishing norm.
    pub dropped: usize,
    /// Eigenvalues with a significant imaginary part.
    pub complex_eigenvalues: Vec<C64>,
    /// Number of metric directions removed by the cutoff.
    pub metric_nullity: usize,
}

impl ExcitationSolution {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

fn block2(tl: &DMatrix<C64>, tr: &DMatrix<C64>, bl: &DMatrix<C64>, br: &DMatrix<C64>) -> DMatrix<C64> {
    let (r1, c1) = tl.shape();
    let (r2, c2) = br.shape();
    let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(tl);
    m.view_mut((0, c1), (r1, c2)).copy_from(tr);
    m.view_mut((r1, 0), (r2, c1)).copy_from(bl);
    m.view_mut((r1, c1), (r2, c2)).copy_from(br);
    m
}

fn conj(m: &DMatrix<C64>) -> DMatrix<C64> {
    m.map(|z| z.conj())
}

/// `E2 = [[A, B], [B*, A*]]`.
pub fn e2(m: &ResponseMatrices) -> DMatrix<C64> {
    block2(&m.a, &m.b, &conj(&m.b), &conj(&m.a))
}

/// `S2 = [[Sigma, Delta], [-Delta*, -Sigma*]]`.
pub fn s2(m: &ResponseMatrices) -> DMatrix<C64> {
    block2(&m.sigma, &m.delta, &(-conj(&m.delta)), &(-conj(&m.sigma)))
}

/// `Z^T Sigma Z* - Y^T Sigma^T Y*`.
fn commutator_norm(sigma: &DMatrix<C64>, z: &DVector<C64>, y: &DVector<C64>) -> f64 {
    let zz = (z.transpose() * sigma * conj_v(z))[(0, 0)];
    let yy = (y.transpose() * sigma.transpose() * conj_v(y))[(0, 0)];
    (zz - yy).re
}

fn conj_v(v: &DVector<C64>) -> DVector<C64> {
    v.map(|z| z.conj())
}

/// `<k|l>` in the same bilinear form as the commutator norm.
fn overlap(sigma: &DMatrix<C64>, a: (&DVector<C64>, &DVector<C64>), b: (&DVector<C64>, &DVector<C64>)) -> C64 {
    (a.0.transpose() * sigma * conj_v(b.0))[(0, 0)] - (a.1.transpose() * sigma.transpose() * conj_v(b.1))[(0, 0)]
}

/// Positive branch of the response eigenproblem.
///
/// The metric is orthogonalized canonically with cutoff [`METRIC_CUTOFF`]; within a
/// degenerate cluster the vectors are orthogonalized in the commutator metric.
pub fn solve(m: &ResponseMatrices) -> Result<ExcitationSolution> {
    let n = m.dim();
    let (x, j) = canonical_orthogonalization(&m.sigma, METRIC_CUTOFF);
    let r = j.len();
    if r == 0 && n > 0 {
        return Err(Error::SingularMetric);
    }
    if m.delta.iter().any(|z| z.norm() > 1e-10) {
        return Err(Error::Method(alloc::string::String::from("nonzero Delta block is not supported by the solver")));
    }
    let xc = conj(&x);
    let ep = block2(
        &(x.adjoint() * &m.a * &x),
        &(x.adjoint() * &m.b * &xc),
        &(x.transpose() * conj(&m.b) * &x),
        &(x.transpose() * conj(&m.a) * &xc),
    );
    let jj: Vec<f64> = j.iter().copied().chain(j.iter().map(|s| -s)).collect();
    let mut h = ep;
    for (row, s) in jj.iter().enumerate() {
        h.row_mut(row).scale_mut(*s);
    }
    let (vals, vecs) = eig(&h)?;
    let mut complex = Vec::new();
    let mut cand: Vec<(f64, DVector<C64>, DVector<C64>)> = Vec::new();
    let mut dropped = 0;
    for k in 0..vals.len() {
        let w = vals[k];
        if w.im.abs() > IMAG_TOL {
            complex.push(w);
            log::warn!("complex excitation energy {} + {}i", w.re, w.im);
            continue;
        }
        if w.re <= 0.0 {
            continue;
        }
        let bt = vecs.view((0, k), (r, 1)).into_owned();
        let bb = vecs.view((r, k), (r, 1)).into_owned();
        let z: DVector<C64> = (&x * bt).column(0).into_owned();
        let y: DVector<C64> = conj_v(&(&xc * bb).column(0).into_owned());
        let nrm = commutator_norm(&m.sigma, &z, &y);
        if nrm.abs() < NORM_CUTOFF {
            dropped += 1;
            continue;
        }
        if nrm < 0.0 {
            continue;
        }
        cand.push((w.re, z, y));
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0));
    // metric Gram-Schmidt inside clusters of equal frequency
    let mut start = 0;
    while start < cand.len() {
        let w0 = cand[start].0;
        let mut end = start + 1;
        while end < cand.len() && (cand[end].0 - w0).abs() < 1e-8 * w0.abs().max(1.0) {
            end += 1;
        }
        for i in start..end {
            for k in start..i {
                let nk = overlap(&m.sigma, (&cand[k].1, &cand[k].2), (&cand[k].1, &cand[k].2));
                let ov = overlap(&m.sigma, (&cand[i].1, &cand[i].2), (&cand[k].1, &cand[k].2)) / nk;
                let (zk, yk) = (cand[k].1.clone(), cand[k].2.clone());
                cand[i].1 -= zk * ov;
                cand[i].2 -= yk * ov;
            }
        }
        start = end;
    }
    let mut out = ExcitationSolution {
        method: m.method,
        omega: Vec::new(),
        z: Vec::new(),
        y: Vec::new(),
        norm: Vec::new(),
        dropped,
        complex_eigenvalues: complex,
        metric_nullity: n - r,
    };
    for (w, mut z, mut y) in cand {
        // deterministic phase: largest Z entry real and positive
        let lead = z.iter().chain(y.iter()).cloned().fold(C64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() + 1e-12 { b } else { a });
        if lead.norm() > 0.0 {
            let ph = lead.conj() / lead.norm();
            z *= ph;
            y *= ph;
        }
        let nrm = commutator_norm(&m.sigma, &z, &y);
        if nrm < NORM_CUTOFF {
            out.dropped += 1;
            continue;
        }
        out.omega.push(w);
        out.z.push(z);
        out.y.push(y);
        out.norm.push(nrm);
    }
    Ok(out)
}

/// `<0|[B, O_k]|0> = -Z_k . V_bottom - Y_k . V_top`.
pub fn transition_moment(sol: &ExcitationSolution, k: usize, v: &PropertyGradientVector) -> C64 {
    -(sol.z[k].transpose() * &v.bottom)[(0, 0)] - (sol.y[k].transpose() * &v.top)[(0, 0)]
}

/// `f_k = 2/3 omega_k sum_g |<0|[mu_g, O_k]|0>|^2 / <k|k>`.
pub fn oscillator_strengths(sol: &ExcitationSolution, grads: &[PropertyGradientVector; 3]) -> Vec<f64> {
    (0..sol.len())
        .map(|k| {
            let s: f64 = grads.iter().map(|g| transition_moment(sol, k, g).norm_sqr()).sum();
            2.0 / 3.0 * sol.omega[k] * s / sol.norm[k]
        })
        .collect()
}

/// Sum-over-states polarizability tensor at frequency `omega`.
pub fn polarizability(sol: &ExcitationSolution, grads: &[PropertyGradientVector; 3], omega: f64) -> Result<Matrix3<C64>> {
    for &wk in &sol.omega {
        if (wk - omega).abs() < RESONANCE_TOL || (wk + omega).abs() < RESONANCE_TOL {
            return Err(Error::NearResonance { omega, omega_k: wk });
        }
    }
    let mut a = Matrix3::zeros();
    for k in 0..sol.len() {
        let t: Vec<C64> = grads.iter().map(|g| transition_moment(sol, k, g)).collect();
        let wk = sol.omega[k];
        for g in 0..3 {
            for d in 0..3 {
                a[(g, d)] += (t[g] * t[d].conj() / (wk - omega) + t[d] * t[g].conj() / (wk + omega)) / sol.norm[k];
            }
        }
    }
    Ok(a)
}

/// Isotropic average `tr(alpha) / 3`.
pub fn isotropic(alpha: &Matrix3<C64>) -> f64 {
    (alpha.trace() / 3.0).re
}

/// `<<A;B>>_omega = -V_A^dagger (E2 + omega S2)^{-1} V_B`.
pub fn linear_response_function(m: &ResponseMatrices, va: &PropertyGradientVector, vb: &PropertyGradientVector, omega: f64) -> Result<C64> {
    let shifted = e2(m) + s2(m) * C64::new(omega, 0.0);
    let x = lu_solve(&shifted, &vb.stacked()).ok_or(Error::SingularResponse(omega))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularResponse(omega));
    }
    Ok(-(va.stacked().adjoint() * x)[(0, 0)])
}

/// Lorentzian or Gaussian line shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Broadening {
    Lorentzian,
    Gaussian,
}

/// Broadened absorption profile `sum_k f_k L(e - e_k)` on a uniform grid.
///
/// `width` is the full width at half maximum; lines have unit area.
pub fn broadened_spectrum(energies: &[f64], strengths: &[f64], width: f64, kind: Broadening, grid: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    let pi = core::f64::consts::PI;
    for (&e, &f) in energies.iter().zip(strengths) {
        for (o, &x) in out.iter_mut().zip(grid) {
            let d = x - e;
            *o += f * match kind {
                Broadening::Lorentzian => {
                    let g = 0.5 * width;
                    g / (pi * (d * d + g * g))
                }
                Broadening::Gaussian => {
                    let s = width / (2.0 * crate::math::sqrt(2.0 * core::f64::consts::LN_2));
                    crate::math::exp(-0.5 * d * d / (s * s)) / (s * crate::math::sqrt(2.0 * pi))
                }
            };
        }
    }
    out
}
