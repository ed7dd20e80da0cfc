//! Orbital-rotation parameters and the `exp(-K)` integral transformation.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::fock::Rdms;
use crate::integrals::{Eri, IntegralSet};
use crate::linalg::expm;
use crate::partition::SpacePartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationScheme {
    /// `{ai, av, vi}`, acting on the ground state.
    Naive,
    /// `{ai, a v_i, v_a i}`, acting on the reference determinant.
    Reduced,
}

/// Ordered non-redundant rotation pairs `(p, q)` with `p` in the higher class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationPool {
    pub scheme: RotationScheme,
    pub pairs: Vec<(usize, usize)>,
}

impl RotationPool {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaParameters {
    pub kappa: Vec<f64>,
}

impl KappaParameters {
    pub fn zeros(pool: &RotationPool) -> Self {
        KappaParameters { kappa: vec![0.0; pool.len()] }
    }
}

fn block(out: &mut Vec<(usize, usize)>, hi: &[usize], lo: &[usize]) {
    for &p in hi {
        for &q in lo {
            out.push((p, q));
        }
    }
}

pub fn build_rotation_pool(part: &SpacePartition, scheme: RotationScheme) -> RotationPool {
    let mut pairs = Vec::new();
    match scheme {
        RotationScheme::Naive => {
            block(&mut pairs, &part.virt, &part.inactive);
            block(&mut pairs, &part.virt, &part.active);
            block(&mut pairs, &part.active, &part.inactive);
        }
        RotationScheme::Reduced => {
            block(&mut pairs, &part.virt, &part.inactive);
            block(&mut pairs, &part.virt, part.v_occ());
            block(&mut pairs, part.v_virt(), &part.inactive);
        }
    }
    RotationPool { scheme, pairs }
}

/// `X = exp(-K)` with `K_pq = kappa_pq`, `K_qp = -kappa_pq`.
pub fn rotation_matrix(n_orb: usize, pool: &RotationPool, kappa: &KappaParameters) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(n_orb, n_orb);
    for (&(p, q), &x) in pool.pairs.iter().zip(&kappa.kappa) {
        k[(p, q)] += x;
        k[(q, p)] -= x;
    }
    expm(&(-k))
}

/// `X^T m X`.
pub fn transform_one(m: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    x.transpose() * m * x
}

/// `g'_pqrs = sum X_p'p X_q'q X_r'r X_s's g_p'q'r's'` as four one-index passes.
pub fn transform_two(g: &Eri, x: &DMatrix<f64>) -> Eri {
    let n = g.dim();
    let n3 = n * n * n;
    let mut cur: Vec<f64> = g.as_slice().to_vec();
    let mut next = vec![0.0; cur.len()];
    for _ in 0..4 {
        // transform the last index and move it to the front
        for lead in 0..n3 {
            let row = &cur[lead * n..(lead + 1) * n];
            for s in 0..n {
                let mut acc = 0.0;
                for (sp, &v) in row.iter().enumerate() {
                    acc += v * x[(sp, s)];
                }
                next[s * n3 + lead] = acc;
            }
        }
        core::mem::swap(&mut cur, &mut next);
    }
    let mut out = Eri::zeros(n);
    out.as_mut_slice().copy_from_slice(&cur);
    out
}

/// Integrals in the orbitals rotated by `x`.
pub fn transform_integrals(ints: &IntegralSet, x: &DMatrix<f64>) -> IntegralSet {
    IntegralSet {
        h: transform_one(&ints.h, x),
        g: transform_two(&ints.g, x),
        ..ints.clone()
    }
}

pub fn rotate_integrals(ints: &IntegralSet, pool: &RotationPool, kappa: &KappaParameters) -> IntegralSet {
    if kappa.kappa.iter().all(|k| *k == 0.0) {
        return ints.clone();
    }
    transform_integrals(ints, &rotation_matrix(ints.n_orb, pool, kappa))
}

/// Inactive Fock matrix `F^I_pq = h_pq + sum_j [2 (pq|jj) - (pj|jq)]`.
pub fn inactive_fock(ints: &IntegralSet, part: &SpacePartition) -> DMatrix<f64> {
    let n = ints.n_orb;
    DMatrix::from_fn(n, n, |p, q| {
        let mut x = ints.h[(p, q)];
        for &j in &part.inactive {
            x += 2.0 * ints.g.get(p, q, j, j) - ints.g.get(p, j, j, q);
        }
        x
    })
}

/// Generalized Fock matrix `F_pq = sum D_ps h_qs + sum d_psrt g_qsrt` of the embedded state.
pub fn generalized_fock(ints: &IntegralSet, part: &SpacePartition, rdm: &Rdms) -> DMatrix<f64> {
    let n = ints.n_orb;
    let act = &part.active;
    let m = act.len();
    let fi = inactive_fock(ints, part);
    let d1 = |v: usize, w: usize| rdm.one[(v, w)].re;
    let fa = DMatrix::from_fn(n, n, |p, q| {
        let mut x = 0.0;
        for v in 0..m {
            for w in 0..m {
                let d = d1(v, w);
                if d != 0.0 {
                    x += d * (ints.g.get(p, q, act[v], act[w]) - 0.5 * ints.g.get(p, act[w], act[v], q));
                }
            }
        }
        x
    });
    let mut f = DMatrix::zeros(n, n);
    for &i in &part.inactive {
        for q in 0..n {
            f[(i, q)] = 2.0 * (fi[(q, i)] + fa[(q, i)]);
        }
    }
    for v in 0..m {
        for q in 0..n {
            let mut x = 0.0;
            for w in 0..m {
                x += d1(v, w) * fi[(q, act[w])];
                for xx in 0..m {
                    for y in 0..m {
                        let d = rdm.d2(v, w, xx, y).re;
                        if d != 0.0 {
                            x += d * ints.g.get(q, act[w], act[xx], act[y]);
                        }
                    }
                }
            }
            f[(act[v], q)] = x;
        }
    }
    f
}

/// `dE/dkappa_pq = 2 (F_pq - F_qp)` at `kappa = 0`.
pub fn orbital_gradient(ints: &IntegralSet, part: &SpacePartition, pool: &RotationPool, rdm: &Rdms) -> Vec<f64> {
    if pool.is_empty() {
        return Vec::new();
    }
    let f = generalized_fock(ints, part, rdm);
    pool.pairs.iter().map(|&(p, q)| 2.0 * (f[(p, q)] - f[(q, p)])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_sizes() {
        let p = SpacePartition::new(13, 10, (4, 4), None).unwrap();
        assert_eq!(build_rotation_pool(&p, RotationScheme::Naive).len(), 54);
        // reduced drops v_i i and a v_a pairs
        assert_eq!(build_rotation_pool(&p, RotationScheme::Reduced).len(), 54 - 2 * 3 - 6 * 2);
        let all = SpacePartition::new(4, 4, (4, 4), None).unwrap();
        assert!(build_rotation_pool(&all, RotationScheme::Naive).is_empty());
    }

    #[test]
    fn rotation_is_orthogonal() {
        let p = SpacePartition::new(6, 4, (2, 2), None).unwrap();
        let pool = build_rotation_pool(&p, RotationScheme::Naive);
        let kappa = KappaParameters { kappa: (0..pool.len()).map(|k| 0.1 * (k as f64 + 1.0).sin()).collect() };
        let x = rotation_matrix(6, &pool, &kappa);
        let e = &x * x.transpose() - DMatrix::<f64>::identity(6, 6);
        assert!(e.amax() < 1e-12);
    }

    #[test]
    fn swap_by_quarter_turn() {
        let mut ints = IntegralSet::zeros(2, 2);
        ints.h = DMatrix::from_row_slice(2, 2, &[-1.0, 0.2, 0.2, 0.5]);
        ints.g.set_sym(0, 0, 0, 0, 0.7);
        ints.g.set_sym(1, 1, 1, 1, 0.4);
        ints.g.set_sym(0, 0, 1, 1, 0.3);
        ints.g.set_sym(0, 1, 0, 1, 0.1);
        let pool = RotationPool { scheme: RotationScheme::Naive, pairs: vec![(1, 0)] };
        let r = rotate_integrals(&ints, &pool, &KappaParameters { kappa: vec![core::f64::consts::FRAC_PI_2] });
        assert!((r.h[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((r.h[(1, 1)] + 1.0).abs() < 1e-14);
        assert!((r.h[(0, 1)].abs() - 0.2).abs() < 1e-14);
        assert!((r.g.get(0, 0, 0, 0) - 0.4).abs() < 1e-14);
        assert!((r.g.get(1, 1, 1, 1) - 0.7).abs() < 1e-14);
    }
}
