//! Spin-summed reduced density matrices.
//!
//! `D_pq = <E_pq>`, `d_pqrs = <E_pq E_rs> - delta_qr D_ps` (so that
//! `sum_pr d_pprr = N(N-1)`), and the three-body analogue
//! `d_pqrstu = <a+_p a+_r a+_t a_u a_s a_q>` summed over spins.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::basis::DeterminantBasis;
use super::ops::{apply_e, StateVector};
use crate::C64;

#[derive(Debug, Clone)]
pub struct Rdms {
    pub n: usize,
    pub one: DMatrix<C64>,
    pub two: Option<Vec<C64>>,
    pub three: Option<Vec<C64>>,
}

impl Rdms {
    #[inline]
    pub fn d2(&self, p: usize, q: usize, r: usize, s: usize) -> C64 {
        let n = self.n;
        self.two.as_ref().expect("two-body RDM not computed")[((p * n + q) * n + r) * n + s]
    }

    #[inline]
    pub fn d3(&self, p: usize, q: usize, r: usize, s: usize, t: usize, u: usize) -> C64 {
        let n = self.n;
        self.three.as_ref().expect("three-body RDM not computed")[((((p * n + q) * n + r) * n + s) * n + t) * n + u]
    }
}

pub fn rdm(basis: &DeterminantBasis, x: &StateVector, max_rank: usize) -> Rdms {
    let n = basis.n_orb;
    let w: Vec<StateVector> = (0..n * n).map(|rs| apply_e(basis, rs / n, rs % n, x)).collect();
    let one = DMatrix::from_fn(n, n, |p, q| x.dotc(&w[p * n + q]));
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut two = None;
    let mut pair: Vec<C64> = Vec::new();
    if max_rank >= 2 {
        // <E_pq E_rs> = (E_qp x)^dagger (E_rs x)
        pair = alloc::vec![C64::new(0.0, 0.0); n * n * n * n];
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        pair[((p * n + q) * n + r) * n + s] = w[q * n + p].dotc(&w[r * n + s]);
                    }
                }
            }
        }
        let mut d = pair.clone();
        for p in 0..n {
            for q in 0..n {
                for s in 0..n {
                    d[((p * n + q) * n + q) * n + s] -= one[(p, s)];
                }
            }
        }
        two = Some(d);
    }
    let mut three = None;
    if max_rank >= 3 {
        let d2 = two.as_ref().unwrap();
        let i2 = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
        let mut t = alloc::vec![C64::new(0.0, 0.0); n.pow(6)];
        for r in 0..n {
            for s in 0..n {
                let mid: Vec<StateVector> = (0..n * n).map(|tu| apply_e(basis, r, s, &w[tu])).collect();
                for p in 0..n {
                    for q in 0..n {
                        let bra = &w[q * n + p];
                        for tt in 0..n {
                            for u in 0..n {
                                let e3 = bra.dotc(&mid[tt * n + u]);
                                let v = e3
                                    - pair[i2(p, s, tt, u)] * delta(q, r)
                                    - d2[i2(p, q, r, u)] * delta(s, tt)
                                    - d2[i2(p, u, r, s)] * delta(q, tt);
                                t[((((p * n + q) * n + r) * n + s) * n + tt) * n + u] = v;
                            }
                        }
                    }
                }
            }
        }
        three = Some(t);
    }
    Rdms { n, one, two, three }
}
