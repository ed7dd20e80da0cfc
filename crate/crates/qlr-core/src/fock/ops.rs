//! Excitation operators and Hamiltonian action on dense active-space vectors.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::basis::DeterminantBasis;
use super::bits::excite;
use crate::integrals::Eri;
use crate::partition::ActiveHamiltonian;
use crate::C64;

pub type StateVector = DVector<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Alpha,
    Beta,
}

/// `y += c * E^sigma_pq x`.
pub fn add_e_spin(basis: &DeterminantBasis, p: usize, q: usize, spin: Spin, c: C64, x: &StateVector, y: &mut StateVector) {
    let nb = basis.n_beta_strings();
    match spin {
        Spin::Alpha => {
            for m in basis.alpha_moves(p, q) {
                let (s, d) = (m.src as usize * nb, m.dst as usize * nb);
                let f = c * m.sign;
                for ib in 0..nb {
                    y[d + ib] += f * x[s + ib];
                }
            }
        }
        Spin::Beta => {
            let na = basis.alpha.len();
            let moves = basis.beta_moves(p, q);
            for ia in 0..na {
                let o = ia * nb;
                for m in moves {
                    y[o + m.dst as usize] += c * m.sign * x[o + m.src as usize];
                }
            }
        }
    }
}

/// `y += c * E_pq x` with the spin-summed generator.
pub fn add_e(basis: &DeterminantBasis, p: usize, q: usize, c: C64, x: &StateVector, y: &mut StateVector) {
    add_e_spin(basis, p, q, Spin::Alpha, c, x, y);
    add_e_spin(basis, p, q, Spin::Beta, c, x, y);
}

/// `E_pq |x>`.
pub fn apply_e(basis: &DeterminantBasis, p: usize, q: usize, x: &StateVector) -> StateVector {
    let mut y = DVector::zeros(x.len());
    add_e(basis, p, q, C64::new(1.0, 0.0), x, &mut y);
    y
}

/// `E_pq |det>` as a list of determinants with phases.
pub fn e_on_det(p: usize, q: usize, a: u64, b: u64) -> [Option<((u64, u64), f64)>; 2] {
    [
        excite(a, p, q).map(|(a2, s)| ((a2, b), s)),
        excite(b, p, q).map(|(b2, s)| ((a, b2), s)),
    ]
}

/// Products of spin-summed generators applied to a single determinant.
///
/// `ops` is in operator order; the rightmost generator acts first.
pub fn e_string_on_det(ops: &[(usize, usize)], a: u64, b: u64) -> Vec<((u64, u64), f64)> {
    let mut cur: Vec<((u64, u64), f64)> = alloc::vec![((a, b), 1.0)];
    for &(p, q) in ops.iter().rev() {
        let mut next: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for &((a, b), c) in &cur {
            for t in e_on_det(p, q, a, b).into_iter().flatten() {
                *next.entry(t.0).or_insert(0.0) += c * t.1;
            }
        }
        cur = next.into_iter().filter(|&(_, c)| c != 0.0).collect();
        if cur.is_empty() {
            break;
        }
    }
    cur
}

/// Hamiltonian with spin-dependent one-body part and spin-free two-body part:
/// `sum_pq h^a_pq E^a_pq + h^b_pq E^b_pq + 1/2 sum g_pqrs (E_pq E_rs - d_qr E_ps)`.
pub fn apply_hamiltonian_spin(
    basis: &DeterminantBasis,
    h_alpha: &DMatrix<f64>,
    h_beta: &DMatrix<f64>,
    g: &Eri,
    x: &StateVector,
) -> StateVector {
    let n = basis.n_orb;
    let dim = x.len();
    let mut y = DVector::zeros(dim);
    if dim == 0 {
        return y;
    }
    // one-body part with the exchange-like correction folded in
    for p in 0..n {
        for q in 0..n {
            let mut corr = 0.0;
            for r in 0..n {
                corr += g.get(p, r, r, q);
            }
            let ka = h_alpha[(p, q)] - 0.5 * corr;
            let kb = h_beta[(p, q)] - 0.5 * corr;
            if ka != 0.0 {
                add_e_spin(basis, p, q, Spin::Alpha, C64::new(ka, 0.0), x, &mut y);
            }
            if kb != 0.0 {
                add_e_spin(basis, p, q, Spin::Beta, C64::new(kb, 0.0), x, &mut y);
            }
        }
    }
    let w: Vec<StateVector> = (0..n * n).map(|rs| apply_e(basis, rs / n, rs % n, x)).collect();
    let gs = g.as_slice();
    let mut t = DVector::<C64>::zeros(dim);
    for pq in 0..n * n {
        t.fill(C64::new(0.0, 0.0));
        let row = &gs[pq * n * n..(pq + 1) * n * n];
        let mut any = false;
        for (rs, &v) in row.iter().enumerate() {
            if v != 0.0 {
                t.axpy(C64::new(0.5 * v, 0.0), &w[rs], C64::new(1.0, 0.0));
                any = true;
            }
        }
        if any {
            add_e(basis, pq / n, pq % n, C64::new(1.0, 0.0), &t, &mut y);
        }
    }
    y
}

/// Active Hamiltonian `H_act` (without the frozen energy) applied to `x`.
pub fn apply_hamiltonian(basis: &DeterminantBasis, ham: &ActiveHamiltonian, x: &StateVector) -> StateVector {
    apply_hamiltonian_spin(basis, &ham.h_eff, &ham.h_eff, &ham.g_act, x)
}

/// `<x|H_act|x> + e_frozen`.
pub fn energy_of(basis: &DeterminantBasis, ham: &ActiveHamiltonian, x: &StateVector) -> f64 {
    x.dotc(&apply_hamiltonian(basis, ham, x)).re + ham.e_frozen * x.norm_squared()
}

/// Dense matrix of an operator given by its action.
pub fn dense_of(dim: usize, f: impl Fn(&StateVector) -> StateVector) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(dim, dim);
    let mut e = DVector::zeros(dim);
    for j in 0..dim {
        e[j] = C64::new(1.0, 0.0);
        let c = f(&e);
        m.set_column(j, &c);
        e[j] = C64::new(0.0, 0.0);
    }
    m
}

/// `<S^2>` of a state in a fixed `(n_alpha, n_beta)` basis.
pub fn spin_square(basis: &DeterminantBasis, x: &StateVector) -> f64 {
    let sz = (basis.n_alpha as f64 - basis.n_beta as f64) / 2.0;
    let n = basis.n_orb;
    let mut plus: BTreeMap<(u64, u64), C64> = BTreeMap::new();
    for i in 0..basis.len() {
        if x[i] == C64::new(0.0, 0.0) {
            continue;
        }
        let (a, b) = basis.det(i);
        // S+ = sum_p a+_{p alpha} a_{p beta}; alpha string precedes beta string
        for p in 0..n {
            if b >> p & 1 == 0 || a >> p & 1 == 1 {
                continue;
            }
            let (b2, s1) = super::bits::annihilate(b, p).unwrap();
            let s_pass = if a.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let (a2, s2) = super::bits::create(a, p).unwrap();
            // a_{p beta} passes the alpha string, a+_{p alpha} then acts on alpha
            *plus.entry((a2, b2)).or_insert(C64::new(0.0, 0.0)) += x[i] * (s1 * s_pass * s2);
        }
    }
    let pp: f64 = plus.values().map(|c| c.norm_sqr()).sum();
    (sz * sz + sz) * x.norm_squared() + pp
}
