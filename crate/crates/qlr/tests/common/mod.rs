#![allow(dead_code)]

use nalgebra::DMatrix;
use qlr::fixtures::load;
use qlr::oracle::Oracle;
use qlr_core::qlr::Method;
use qlr_core::{IntegralSet, OneElectronOperatorSet};

/// Two copies of H2/STO-3G with every cross-fragment integral zero.
/// Orbitals 0, 1 are sigma_g, sigma_u of fragment A; 2, 3 the same for B.
pub fn decoupled_dimer() -> (IntegralSet, OneElectronOperatorSet) {
    let (m, mops) = load("h2_sto3g").unwrap();
    let mut d = IntegralSet::zeros(4, 4);
    d.e_core = 2.0 * m.e_core;
    for off in [0, 2] {
        for p in 0..2 {
            for q in 0..2 {
                d.h[(p + off, q + off)] = m.h[(p, q)];
                for r in 0..2 {
                    for s in 0..2 {
                        d.g.set(p + off, q + off, r + off, s + off, m.g.get(p, q, r, s));
                    }
                }
            }
        }
    }
    let mut ops = OneElectronOperatorSet::new(4);
    for l in ["x", "y", "z"] {
        let a = mops.get_or_zero(l);
        ops.push(l, DMatrix::from_fn(4, 4, |p, q| if p / 2 == q / 2 { a[(p % 2, q % 2)] } else { 0.0 }));
    }
    (d, ops)
}

/// B's sigma_g inactive, A's pair active, B's sigma_u virtual.
pub const DIMER_ORDER: [usize; 4] = [2, 0, 1, 3];

/// `<q_l U G_n CSF | H | 0>` built densely, rows `n`, columns `l`.
pub fn dense_mixed_block(or: &Oracle<'_>, method: Method) -> DMatrix<f64> {
    let pairs = or.rotation_pool(method).pairs;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(or.pool.len(), pairs.len(), |n, l| {
        let v = &or.u * or.g_full(n, &or.csf);
        let (p, q) = pairs[l];
        (or.space.e(p, q, &v) * s).dot(&or.hpsi)
    })
}
