use alloc::vec::Vec;

use super::bits::{excite, strings};
use crate::error::{Error, Result};
use crate::math::binom;

pub const MAX_DETERMINANTS: usize = 1 << 26;

/// One entry of a string excitation table: `a_p^dagger a_q |src> = sign |dst>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringMove {
    pub src: u32,
    pub dst: u32,
    pub sign: f64,
}

/// Fixed-`(n_alpha, n_beta)` determinant basis over `n_orb` orbitals.
///
/// Determinant `i` has alpha string `alpha[i / n_beta_strings]` and beta string
/// `beta[i % n_beta_strings]`; strings are sorted by numeric value so the order is
/// lexicographic on `(alpha, beta)` masks.
#[derive(Debug, Clone)]
pub struct DeterminantBasis {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
    binom: Vec<Vec<u32>>,
    alpha_moves: Vec<Vec<StringMove>>,
    beta_moves: Vec<Vec<StringMove>>,
}

fn string_moves(n: usize, strs: &[u64], rank: impl Fn(u64) -> usize) -> Vec<Vec<StringMove>> {
    let mut t = alloc::vec![Vec::new(); n * n];
    for (si, &s) in strs.iter().enumerate() {
        for q in 0..n {
            if s >> q & 1 == 0 {
                continue;
            }
            for p in 0..n {
                if let Some((d, sign)) = excite(s, p, q) {
                    t[p * n + q].push(StringMove { src: si as u32, dst: rank(d) as u32, sign });
                }
            }
        }
    }
    t
}

impl DeterminantBasis {
    pub fn new(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_orb > 63 {
            return Err(Error::Dimension(alloc::format!("{} orbitals exceed 63", n_orb)));
        }
        let dim = binom(n_orb, n_alpha).saturating_mul(binom(n_orb, n_beta));
        if dim > MAX_DETERMINANTS {
            return Err(Error::DimensionOverflow(dim));
        }
        let binom_t: Vec<Vec<u32>> =
            (0..=n_orb).map(|m| (0..=n_orb).map(|k| binom(m, k) as u32).collect()).collect();
        let alpha = strings(n_orb, n_alpha);
        let beta = strings(n_orb, n_beta);
        let rank = |s: u64| colex_rank(&binom_t, s);
        let alpha_moves = string_moves(n_orb, &alpha, rank);
        let beta_moves = string_moves(n_orb, &beta, rank);
        Ok(DeterminantBasis { n_orb, n_alpha, n_beta, alpha, beta, binom: binom_t, alpha_moves, beta_moves })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn n_beta_strings(&self) -> usize {
        self.beta.len()
    }

    #[inline]
    pub fn det(&self, i: usize) -> (u64, u64) {
        let nb = self.beta.len();
        (self.alpha[i / nb], self.beta[i % nb])
    }

    #[inline]
    pub fn string_rank(&self, s: u64) -> usize {
        colex_rank(&self.binom, s)
    }

    /// Position of determinant `(a, b)`; the caller guarantees matching electron counts.
    #[inline]
    pub fn index(&self, a: u64, b: u64) -> usize {
        self.string_rank(a) * self.beta.len() + self.string_rank(b)
    }

    /// Checked version of [`Self::index`].
    pub fn find(&self, a: u64, b: u64) -> Option<usize> {
        let lim = if self.n_orb == 64 { u64::MAX } else { (1u64 << self.n_orb) - 1 };
        if a & !lim != 0
            || b & !lim != 0
            || a.count_ones() as usize != self.n_alpha
            || b.count_ones() as usize != self.n_beta
        {
            return None;
        }
        Some(self.index(a, b))
    }

    pub fn alpha_moves(&self, p: usize, q: usize) -> &[StringMove] {
        &self.alpha_moves[p * self.n_orb + q]
    }

    pub fn beta_moves(&self, p: usize, q: usize) -> &[StringMove] {
        &self.beta_moves[p * self.n_orb + q]
    }

    /// Index of the closed-shell determinant with the lowest orbitals doubly occupied.
    pub fn reference_index(&self) -> usize {
        let a = (1u64 << self.n_alpha) - 1;
        let b = (1u64 << self.n_beta) - 1;
        self.index(a, b)
    }
}

#[inline]
fn colex_rank(binom: &[Vec<u32>], mut s: u64) -> usize {
    let mut r = 0usize;
    let mut k = 1usize;
    while s != 0 {
        let p = s.trailing_zeros() as usize;
        r += binom[p][k] as usize;
        k += 1;
        s &= s - 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(DeterminantBasis::new(2, 1, 1).unwrap().len(), 4);
        assert_eq!(DeterminantBasis::new(4, 2, 2).unwrap().len(), 36);
        assert_eq!(DeterminantBasis::new(6, 3, 3).unwrap().len(), 400);
    }

    #[test]
    fn index_roundtrip() {
        let b = DeterminantBasis::new(6, 3, 2).unwrap();
        for i in 0..b.len() {
            let (a, c) = b.det(i);
            assert_eq!(b.index(a, c), i);
        }
        for i in 1..b.len() {
            assert!(b.det(i - 1) < b.det(i));
        }
    }

    #[test]
    fn overflow_guard() {
        assert!(matches!(DeterminantBasis::new(40, 10, 10), Err(Error::DimensionOverflow(_))));
    }
}
