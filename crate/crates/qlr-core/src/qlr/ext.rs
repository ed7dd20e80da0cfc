//! Sparse full-space states built from blocks of fixed non-active occupation.
//!
//! A block stores the inactive and virtual occupation of each spin (in full orbital
//! numbering) together with a dense vector over the active determinants of the
//! matching sector. Active operators keep their active-space phases because the
//! full alpha string is `outer | active << n_inactive` and active generators only
//! pass inactive bits that lie below both orbitals they touch.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::OnceCell;
use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::fock::bits::excite;
use crate::fock::ops::apply_hamiltonian_spin;
use crate::fock::{expmv, CsrMatrix, DeterminantBasis, ExcitationPool, GeneratorPattern, StateVector};
use crate::integrals::{Eri, IntegralSet};
use crate::partition::SpacePartition;
use crate::C64;

/// Non-active occupation plus active electron counts of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub oa: u64,
    pub ob: u64,
    pub na: usize,
    pub nb: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtState {
    pub blocks: BTreeMap<Key, StateVector>,
}

impl ExtState {
    pub fn new() -> Self {
        ExtState { blocks: BTreeMap::new() }
    }

    pub fn single(key: Key, v: StateVector) -> Self {
        let mut s = ExtState::new();
        s.blocks.insert(key, v);
        s
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.blocks.keys()
    }

    pub fn dot(&self, other: &ExtState) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        // iterate the smaller map and look up in the larger one
        let (a, b, conj) = if self.blocks.len() <= other.blocks.len() { (self, other, false) } else { (other, self, true) };
        for (k, v) in &a.blocks {
            if let Some(w) = b.blocks.get(k) {
                let d = v.dotc(w);
                acc += if conj { d.conj() } else { d };
            }
        }
        acc
    }

    pub fn axpy(&mut self, c: C64, other: &ExtState) {
        for (k, v) in &other.blocks {
            match self.blocks.get_mut(k) {
                Some(w) => w.axpy(c, v, C64::new(1.0, 0.0)),
                None => {
                    self.blocks.insert(*k, v * c);
                }
            }
        }
    }

    pub fn scale(&mut self, c: C64) {
        for v in self.blocks.values_mut() {
            *v *= c;
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.blocks.values().map(|v| v.norm_squared()).sum()
    }

    /// Drops blocks that are exactly zero.
    pub fn prune(&mut self) {
        self.blocks.retain(|_, v| v.iter().any(|x| *x != C64::new(0.0, 0.0)));
    }
}

struct Sector {
    basis: DeterminantBasis,
    gen: OnceCell<(GeneratorPattern, CsrMatrix)>,
}

/// Full-space operator algebra over one set of integrals and a canonical partition.
pub struct ExtEngine<'a> {
    pub ints: &'a IntegralSet,
    pub ni: usize,
    pub nact: usize,
    pub k: usize,
    pool: &'a ExcitationPool,
    theta: &'a [f64],
    act_mask: u64,
    sectors: Vec<OnceCell<Sector>>,
    g_act: Eri,
}

fn ones(s: u64) -> impl Iterator<Item = usize> {
    let mut s = s;
    core::iter::from_fn(move || {
        if s == 0 {
            None
        } else {
            let p = s.trailing_zeros() as usize;
            s &= s - 1;
            Some(p)
        }
    })
}

/// Strings over `n` bits with `count` electrons within Hamming distance `dmax` of `s`,
/// paired with that distance.
fn neighbors(s: u64, n: usize, count: usize, dmax: usize) -> Vec<(u64, usize)> {
    let occ: Vec<usize> = ones(s).collect();
    let emp: Vec<usize> = (0..n).filter(|&p| s >> p & 1 == 0).collect();
    let cur = occ.len();
    let mut out = Vec::new();
    for rm in 0..=occ.len().min(dmax) {
        let Some(add) = (rm + count).checked_sub(cur) else { continue };
        if rm + add > dmax || add > emp.len() {
            continue;
        }
        for_combinations(&occ, rm, &mut |r| {
            for_combinations(&emp, add, &mut |a| {
                let mut t = s;
                for &p in r {
                    t &= !(1u64 << p);
                }
                for &p in a {
                    t |= 1u64 << p;
                }
                out.push((t, rm + add));
            });
        });
    }
    out
}

fn for_combinations(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(k);
    rec(items, k, 0, &mut cur, f);
}

/// `<bra|H|ket>` between two full determinants by the Slater-Condon rules.
pub fn slater_condon(ints: &IntegralSet, bra: (u64, u64), ket: (u64, u64)) -> f64 {
    let g = &ints.g;
    let da = bra.0 ^ ket.0;
    let db = bra.1 ^ ket.1;
    let na = da.count_ones() / 2;
    let nb = db.count_ones() / 2;
    match (na, nb) {
        (0, 0) => {
            let mut e = ints.e_core;
            let occ: Vec<(usize, bool)> = ones(ket.0).map(|p| (p, true)).chain(ones(ket.1).map(|p| (p, false))).collect();
            for &(p, _) in &occ {
                e += ints.h[(p, p)];
            }
            for &(p, sp) in &occ {
                for &(q, sq) in &occ {
                    e += 0.5 * g.get(p, p, q, q);
                    if sp == sq {
                        e -= 0.5 * g.get(p, q, q, p);
                    }
                }
            }
            e
        }
        (1, 0) | (0, 1) => {
            let alpha = na == 1;
            let (ks, kother) = if alpha { (ket.0, ket.1) } else { (ket.1, ket.0) };
            let bs = if alpha { bra.0 } else { bra.1 };
            let i = (ks & !bs).trailing_zeros() as usize;
            let a = (bs & !ks).trailing_zeros() as usize;
            let (_, sign) = excite(ks, a, i).unwrap();
            let mut e = ints.h[(a, i)];
            for k in ones(ks) {
                e += g.get(a, i, k, k) - g.get(a, k, k, i);
            }
            for k in ones(kother) {
                e += g.get(a, i, k, k);
            }
            sign * e
        }
        (2, 0) | (0, 2) => {
            let (ks, bs) = if na == 2 { (ket.0, bra.0) } else { (ket.1, bra.1) };
            let mut h = ones(ks & !bs);
            let (i, j) = (h.next().unwrap(), h.next().unwrap());
            let mut p = ones(bs & !ks);
            let (a, b) = (p.next().unwrap(), p.next().unwrap());
            let (s1, sg1) = excite(ks, b, j).unwrap();
            let (_, sg2) = excite(s1, a, i).unwrap();
            sg1 * sg2 * (g.get(a, i, b, j) - g.get(a, j, b, i))
        }
        (1, 1) => {
            let i = (ket.0 & !bra.0).trailing_zeros() as usize;
            let a = (bra.0 & !ket.0).trailing_zeros() as usize;
            let j = (ket.1 & !bra.1).trailing_zeros() as usize;
            let b = (bra.1 & !ket.1).trailing_zeros() as usize;
            let (_, s1) = excite(ket.0, a, i).unwrap();
            let (_, s2) = excite(ket.1, b, j).unwrap();
            s1 * s2 * g.get(a, i, b, j)
        }
        _ => 0.0,
    }
}

impl<'a> ExtEngine<'a> {
    /// `ints` and `part` must be in the canonical layout.
    pub fn new(ints: &'a IntegralSet, part: &SpacePartition, pool: &'a ExcitationPool, theta: &'a [f64]) -> Self {
        debug_assert!(part.is_canonical());
        let ni = part.n_inactive();
        let nact = part.n_active();
        let lo = ni;
        ExtEngine {
            ints,
            ni,
            nact,
            k: part.n_act_occ(),
            pool,
            theta,
            act_mask: ((1u64 << nact) - 1) << ni,
            sectors: (0..(nact + 1) * (nact + 1)).map(|_| OnceCell::new()).collect(),
            g_act: ints.g.block(lo, nact),
        }
    }

    fn sector(&self, na: usize, nb: usize) -> &Sector {
        self.sectors[na * (self.nact + 1) + nb].get_or_init(|| Sector {
            basis: DeterminantBasis::new(self.nact, na, nb).expect("active sector exceeds the determinant limit"),
            gen: OnceCell::new(),
        })
    }

    fn generator(&self, na: usize, nb: usize) -> &(GeneratorPattern, CsrMatrix) {
        let s = self.sector(na, nb);
        s.gen.get_or_init(|| {
            let pat = GeneratorPattern::new(self.pool, &s.basis);
            let t = pat.generator(self.theta);
            (pat, t)
        })
    }

    pub fn basis(&self, na: usize, nb: usize) -> &DeterminantBasis {
        &self.sector(na, nb).basis
    }

    pub fn reference_key(&self) -> Key {
        let m = (1u64 << self.ni) - 1;
        Key { oa: m, ob: m, na: self.k, nb: self.k }
    }

    /// Embeds a closed-shell active vector with doubly occupied inactive orbitals.
    pub fn embed(&self, v: &StateVector) -> ExtState {
        ExtState::single(self.reference_key(), v.clone())
    }

    /// Reference-block part of a state (zeros when absent).
    pub fn reference_part(&self, x: &ExtState) -> StateVector {
        let key = self.reference_key();
        match x.blocks.get(&key) {
            Some(v) => v.clone(),
            None => DVector::zeros(self.basis(self.k, self.k).len()),
        }
    }

    #[inline]
    fn split(&self, s: u64) -> (u64, u64) {
        (s & !self.act_mask, (s & self.act_mask) >> self.ni)
    }

    #[inline]
    fn join(&self, outer: u64, act: u64) -> u64 {
        outer | (act << self.ni)
    }

    /// Full alpha and beta strings of determinant `i` in block `key`.
    #[inline]
    pub fn full_det(&self, key: &Key, i: usize) -> (u64, u64) {
        let (a, b) = self.basis(key.na, key.nb).det(i);
        (self.join(key.oa, a), self.join(key.ob, b))
    }

    /// `E_pq |x>` for any full-space orbitals `p`, `q`.
    pub fn apply_e(&self, p: usize, q: usize, x: &ExtState) -> ExtState {
        let mut out: BTreeMap<Key, StateVector> = BTreeMap::new();
        for (key, v) in &x.blocks {
            let basis = self.basis(key.na, key.nb);
            for i in 0..basis.len() {
                let c = v[i];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let (fa, fb) = self.full_det(key, i);
                for spin in 0..2 {
                    let s = if spin == 0 { fa } else { fb };
                    let Some((t, sign)) = excite(s, p, q) else { continue };
                    let (o, act) = self.split(t);
                    let nk = if spin == 0 {
                        Key { oa: o, na: act.count_ones() as usize, ..*key }
                    } else {
                        Key { ob: o, nb: act.count_ones() as usize, ..*key }
                    };
                    let tb = self.basis(nk.na, nk.nb);
                    let (ba, bb) = basis.det(i);
                    let idx = if spin == 0 { tb.index(act, bb) } else { tb.index(ba, act) };
                    let dim = tb.len();
                    out.entry(nk).or_insert_with(|| DVector::zeros(dim))[idx] += c * sign;
                }
            }
        }
        let mut r = ExtState { blocks: out };
        r.prune();
        r
    }

    /// `sum_pq m_pq E_pq |x>`.
    pub fn apply_one_body(&self, m: &DMatrix<f64>, x: &ExtState) -> ExtState {
        let mut out = ExtState::new();
        let n = self.ints.n_orb;
        for p in 0..n {
            for q in 0..n {
                if m[(p, q)] != 0.0 {
                    out.axpy(C64::new(m[(p, q)], 0.0), &self.apply_e(p, q, x));
                }
            }
        }
        out
    }

    /// Excitation operator `n` of the pool (or its adjoint), blockwise.
    pub fn apply_g(&self, n: usize, adjoint: bool, x: &ExtState) -> ExtState {
        let mut out = ExtState::new();
        for (key, v) in &x.blocks {
            let (pat, _) = self.generator(key.na, key.nb);
            let w = if adjoint { pat.g[n].tr_mul_vec(v) } else { pat.g[n].mul_vec(v) };
            out.blocks.insert(*key, w);
        }
        out
    }

    /// `U |x>` (or `U^dagger |x>`) blockwise, `U = exp(-t(theta))`.
    pub fn apply_u(&self, x: &ExtState, adjoint: bool) -> Result<ExtState> {
        let mut out = ExtState::new();
        for (key, v) in &x.blocks {
            let (_, t) = self.generator(key.na, key.nb);
            let w = expmv(t, if adjoint { 1.0 } else { -1.0 }, v)?;
            out.blocks.insert(*key, w);
        }
        Ok(out)
    }

    fn dressed(&self, key: &Key) -> (DMatrix<f64>, DMatrix<f64>, f64) {
        let ints = self.ints;
        let g = &ints.g;
        let (ra, rb): (Vec<usize>, Vec<usize>) = (ones(key.oa).collect(), ones(key.ob).collect());
        let lo = self.ni;
        let m = self.nact;
        let mut ha = DMatrix::from_fn(m, m, |v, w| ints.h[(lo + v, lo + w)]);
        let mut hb = ha.clone();
        for v in 0..m {
            for w in 0..m {
                let (pv, pw) = (lo + v, lo + w);
                let mut coul = 0.0;
                for &r in ra.iter().chain(&rb) {
                    coul += g.get(pv, pw, r, r);
                }
                let xa: f64 = ra.iter().map(|&r| g.get(pv, r, r, pw)).sum();
                let xb: f64 = rb.iter().map(|&r| g.get(pv, r, r, pw)).sum();
                ha[(v, w)] += coul - xa;
                hb[(v, w)] += coul - xb;
            }
        }
        let mut e = ints.e_core;
        for &r in ra.iter().chain(&rb) {
            e += ints.h[(r, r)];
        }
        let spin_orbs: Vec<(usize, u8)> = ra.iter().map(|&r| (r, 0u8)).chain(rb.iter().map(|&r| (r, 1u8))).collect();
        for &(r, sr) in &spin_orbs {
            for &(s, ss) in &spin_orbs {
                e += 0.5 * g.get(r, r, s, s);
                if sr == ss {
                    e -= 0.5 * g.get(r, s, s, r);
                }
            }
        }
        (ha, hb, e)
    }

    /// Projection onto block `key` of `H` acting on block `(kk, y)`.
    fn project_block(&self, key: &Key, kk: &Key, y: &StateVector, diag: &mut BTreeMap<Key, (DMatrix<f64>, DMatrix<f64>, f64)>) -> Option<StateVector> {
        if key.oa.count_ones() as usize + key.na != kk.oa.count_ones() as usize + kk.na
            || key.ob.count_ones() as usize + key.nb != kk.ob.count_ones() as usize + kk.nb
        {
            return None;
        }
        let x = ((key.oa ^ kk.oa).count_ones() + (key.ob ^ kk.ob).count_ones()) as usize;
        if x > 4 {
            return None;
        }
        let tb = self.basis(key.na, key.nb);
        if x == 0 {
            let (ha, hb, e) = diag.entry(*key).or_insert_with(|| self.dressed(key));
            let mut s = apply_hamiltonian_spin(tb, ha, hb, &self.g_act, y);
            s.axpy(C64::new(*e, 0.0), y, C64::new(1.0, 0.0));
            return Some(s);
        }
        let kb = self.basis(kk.na, kk.nb);
        let left = 4 - x;
        let mut out = DVector::zeros(tb.len());
        let nbs = kb.n_beta_strings();
        let alpha_n: Vec<Vec<(u64, usize)>> = kb.alpha.iter().map(|&s| neighbors(s, self.nact, key.na, left)).collect();
        let beta_n: Vec<Vec<(u64, usize)>> = kb.beta.iter().map(|&s| neighbors(s, self.nact, key.nb, left)).collect();
        let mut any = false;
        for (ia, na_list) in alpha_n.iter().enumerate() {
            for (ib, nb_list) in beta_n.iter().enumerate() {
                let c = y[ia * nbs + ib];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let ket = (self.join(kk.oa, kb.alpha[ia]), self.join(kk.ob, kb.beta[ib]));
                for &(ta, da) in na_list {
                    for &(tbs, db) in nb_list {
                        if da + db > left {
                            continue;
                        }
                        let bra = (self.join(key.oa, ta), self.join(key.ob, tbs));
                        let h = slater_condon(self.ints, bra, ket);
                        if h != 0.0 {
                            out[tb.index(ta, tbs)] += c * h;
                            any = true;
                        }
                    }
                }
            }
        }
        any.then_some(out)
    }

    /// `P H |y>` where `P` projects onto the blocks listed in `keys`.
    pub fn h_apply(&self, y: &ExtState, keys: &[Key]) -> ExtState {
        let mut diag = BTreeMap::new();
        let mut out = ExtState::new();
        for key in keys {
            let mut acc: Option<StateVector> = None;
            for (kk, v) in &y.blocks {
                if let Some(s) = self.project_block(key, kk, v, &mut diag) {
                    match &mut acc {
                        Some(a) => *a += s,
                        None => acc = Some(s),
                    }
                }
            }
            if let Some(a) = acc {
                out.blocks.insert(*key, a);
            }
        }
        out
    }

    /// `<x|H|y>`.
    pub fn ham(&self, x: &ExtState, y: &ExtState) -> C64 {
        let keys: Vec<Key> = x.keys().copied().collect();
        x.dot(&self.h_apply(y, &keys))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_counts() {
        // 2 of 4 bits: distance 0 -> itself, 2 -> single moves
        let n = neighbors(0b0011, 4, 2, 2);
        assert_eq!(n.len(), 1 + 4);
        let n = neighbors(0b0011, 4, 1, 1);
        assert_eq!(n.len(), 2);
        assert!(neighbors(0b0011, 4, 3, 3).iter().all(|&(t, d)| t.count_ones() == 3 && d % 2 == 1));
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut c = 0;
        for_combinations(&[1, 2, 3, 4, 5], 2, &mut |_| c += 1);
        assert_eq!(c, 10);
    }
}
