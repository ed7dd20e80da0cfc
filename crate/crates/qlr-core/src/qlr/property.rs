//! Property gradients `<0|[X_l, B]|0>` and `<0|[X_l^dagger, B]|0>` per method.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::ext::ExtState;
use super::matrices::Workspace;
use super::{Method, MethodId};
use crate::error::Result;
use crate::fock::build_pool;
use crate::integrals::OneElectronOperatorSet;
use crate::rotation::build_rotation_pool;
use crate::vqe::GroundStateRecord;
use crate::C64;

/// Gradient entries stacked as `(top; bottom)`, each over rotations then excitations.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyGradientVector {
    /// `<0|[X_l, B]|0>`.
    pub top: DVector<C64>,
    /// `<0|[X_l^dagger, B]|0>`.
    pub bottom: DVector<C64>,
}

impl PropertyGradientVector {
    pub fn zeros(n: usize) -> Self {
        PropertyGradientVector { top: DVector::zeros(n), bottom: DVector::zeros(n) }
    }

    pub fn len(&self) -> usize {
        2 * self.top.len()
    }

    pub fn is_empty(&self) -> bool {
        self.top.is_empty()
    }

    pub fn stacked(&self) -> DVector<C64> {
        let n = self.top.len();
        DVector::from_fn(2 * n, |i, _| if i < n { self.top[i] } else { self.bottom[i - n] })
    }
}

/// Commutator pairs for a transferred operator `|v><0|`: `(-<B 0|v>, <v|B 0>)`.
fn transferred(v: &[ExtState], bpsi: &ExtState) -> (Vec<C64>, Vec<C64>) {
    v.iter().map(|x| (-bpsi.dot(x), x.dot(bpsi))).unzip()
}

/// Gradient of the one-electron operator `B = sum m_pq E_pq` with `m` in the
/// optimized canonical orbitals of `rec`.
pub fn property_gradient_in_mo(method: MethodId, rec: &GroundStateRecord, m: &DMatrix<f64>) -> Result<PropertyGradientVector> {
    let pool = build_pool(&rec.partition, rec.rank)?;
    let ws = Workspace::new(rec, &pool, build_rotation_pool(&rec.partition, method.method.rotation_scheme()))?;
    let nq = ws.n_q();
    let ng = ws.n_g;
    let psi = &ws.psi;
    let bpsi = ws.eng.apply_one_body(m, psi);
    let (mut top, mut bottom) = (Vec::with_capacity(nq + ng), Vec::with_capacity(nq + ng));
    let meth = method.method;
    if meth.transformed_q() {
        let w: Vec<ExtState> = (0..nq).map(|l| ws.u(&ws.q(l, &ws.csf))).collect::<Result<_>>()?;
        let (t, b) = transferred(&w, &bpsi);
        top.extend(t);
        bottom.extend(b);
    } else {
        for l in 0..nq {
            let q = ws.q(l, psi);
            top.push(-bpsi.dot(&q));
            bottom.push(q.dot(&bpsi));
        }
    }
    match meth {
        Method::Naive => {
            for n in 0..ng {
                let g = ws.g(n, psi);
                let gd = ws.gd(n, psi);
                top.push(gd.dot(&bpsi) - bpsi.dot(&g));
                bottom.push(g.dot(&bpsi) - bpsi.dot(&gd));
            }
        }
        Method::Proj | Method::AllProj => {
            let mean = psi.dot(&bpsi);
            for n in 0..ng {
                let g = ws.g(n, psi);
                let gmean = psi.dot(&g);
                top.push(gmean * mean - bpsi.dot(&g));
                bottom.push(g.dot(&bpsi) - mean * gmean.conj());
            }
        }
        _ => {
            let u: Vec<ExtState> = (0..ng).map(|n| ws.u(&ws.g(n, &ws.csf))).collect::<Result<_>>()?;
            let (t, b) = transferred(&u, &bpsi);
            top.extend(t);
            bottom.extend(b);
        }
    }
    Ok(PropertyGradientVector { top: DVector::from_vec(top), bottom: DVector::from_vec(bottom) })
}

/// Gradient of the electronic operator `-sum d_pq E_pq` for the integrals `label` of
/// `ops` (input orbital basis). A missing label gives a zero vector and a warning.
pub fn property_gradient(method: MethodId, rec: &GroundStateRecord, ops: &OneElectronOperatorSet, label: &str) -> Result<PropertyGradientVector> {
    let Some(d) = ops.get(label) else {
        log::warn!("operator '{}' not present, using a zero property gradient", label);
        let n = build_rotation_pool(&rec.partition, method.method.rotation_scheme()).len() + rec.theta.theta.len();
        return Ok(PropertyGradientVector::zeros(n));
    };
    let m = -rec.transform_property(d);
    property_gradient_in_mo(method, rec, &m)
}
