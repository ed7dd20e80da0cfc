//! Spin-adapted singlet excitation operators over the active space.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DVector;

use super::basis::DeterminantBasis;
use super::ops::e_string_on_det;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::math::{binom, sqrt};
use crate::partition::SpacePartition;
use crate::C64;

/// Linear-dependence threshold for higher-rank operators.
pub const CULL_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GKind {
    Single,
    DoubleSymmetric,
    DoubleAntisymmetric,
    Higher,
}

/// Product of spin-summed generators `coef * E_{p0 q0} E_{p1 q1} ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ETerm {
    pub coef: f64,
    pub ops: Vec<(usize, usize)>,
}

/// A spin-adapted excitation operator acting on active orbitals (active positions).
#[derive(Debug, Clone, PartialEq)]
pub struct GOperator {
    pub kind: GKind,
    pub rank: usize,
    /// `(a, i)` for singles, `(a, b, i, j)` for doubles, the leading product's pairs otherwise.
    pub indices: Vec<usize>,
    pub norm: f64,
    pub terms: Vec<ETerm>,
}

impl GOperator {
    /// Matrix of the operator between two determinant bases of equal electron counts.
    pub fn matrix(&self, basis: &DeterminantBasis) -> CsrMatrix {
        let mut t = Vec::new();
        for j in 0..basis.len() {
            let (a, b) = basis.det(j);
            let mut col: Vec<(usize, f64)> = Vec::new();
            for term in &self.terms {
                for ((a2, b2), c) in e_string_on_det(&term.ops, a, b) {
                    col.push((basis.index(a2, b2), c * term.coef));
                }
            }
            col.sort_unstable_by_key(|e| e.0);
            let mut k = 0;
            while k < col.len() {
                let r = col[k].0;
                let mut v = 0.0;
                while k < col.len() && col[k].0 == r {
                    v += col[k].1;
                    k += 1;
                }
                if v.abs() > 1e-15 {
                    t.push((r as u32, j as u32, v));
                }
            }
        }
        CsrMatrix::from_triplets(basis.len(), basis.len(), t)
    }

    pub fn apply(&self, basis: &DeterminantBasis, x: &DVector<C64>) -> DVector<C64> {
        self.matrix(basis).mul_vec(x)
    }
}

/// Ordered operator pool for an active space and excitation rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationPool {
    pub n_act: usize,
    pub n_occ: usize,
    pub rank: usize,
    pub ops: Vec<GOperator>,
}

impl ExcitationPool {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Size of the singles-and-doubles pool.
pub fn sd_pool_size(n_occ: usize, n_virt: usize) -> usize {
    let p = |m: usize| m * (m + 1) / 2;
    n_virt * n_occ + p(n_virt) * p(n_occ) + binom(n_virt, 2) * binom(n_occ, 2)
}

/// Number of singlet configurations minus the reference, from the Weyl formula.
pub fn count_complete_pool(part: &SpacePartition) -> usize {
    let n = part.n_active();
    let ne = part.n_act_elec;
    let half = ne / 2;
    binom(n + 1, half) * binom(n + 1, n - half) / (n + 1) - 1
}

/// Builds the pool: singles, symmetric doubles, antisymmetric doubles, then higher ranks.
pub fn build_pool(part: &SpacePartition, rank: usize) -> Result<ExcitationPool> {
    let n_act = part.n_active();
    let n_occ = part.n_act_occ();
    let ne = part.n_act_elec;
    if rank == 0 || rank > ne.max(1) {
        return Err(Error::RankTooHigh { rank, n_elec: ne });
    }
    let occ: Vec<usize> = (0..n_occ).collect();
    let vir: Vec<usize> = (n_occ..n_act).collect();
    let mut ops = Vec::new();
    for &a in &vir {
        for &i in &occ {
            let norm = 1.0 / sqrt(2.0);
            ops.push(GOperator {
                kind: GKind::Single,
                rank: 1,
                indices: vec![a, i],
                norm,
                terms: vec![ETerm { coef: norm, ops: vec![(a, i)] }],
            });
        }
    }
    if rank >= 2 {
        for (ka, &a) in vir.iter().enumerate() {
            for &b in &vir[ka..] {
                for (ki, &i) in occ.iter().enumerate() {
                    for &j in &occ[ki..] {
                        let dab = if a == b { 1.0 } else { 0.0 };
                        let dij = if i == j { 1.0 } else { 0.0 };
                        let norm = 1.0 / (2.0 * sqrt((1.0 + dab) * (1.0 + dij)));
                        ops.push(GOperator {
                            kind: GKind::DoubleSymmetric,
                            rank: 2,
                            indices: vec![a, b, i, j],
                            norm,
                            terms: vec![
                                ETerm { coef: norm, ops: vec![(a, i), (b, j)] },
                                ETerm { coef: norm, ops: vec![(a, j), (b, i)] },
                            ],
                        });
                    }
                }
            }
        }
        for (ka, &a) in vir.iter().enumerate() {
            for &b in &vir[ka + 1..] {
                for (ki, &i) in occ.iter().enumerate() {
                    for &j in &occ[ki + 1..] {
                        let norm = 1.0 / (2.0 * sqrt(3.0));
                        ops.push(GOperator {
                            kind: GKind::DoubleAntisymmetric,
                            rank: 2,
                            indices: vec![a, b, i, j],
                            norm,
                            terms: vec![
                                ETerm { coef: norm, ops: vec![(a, i), (b, j)] },
                                ETerm { coef: -norm, ops: vec![(a, j), (b, i)] },
                            ],
                        });
                    }
                }
            }
        }
    }
    if rank >= 3 {
        let basis = DeterminantBasis::new(n_act, n_occ, n_occ)?;
        let (ra, rb) = basis.det(basis.reference_index());
        let pairs: Vec<(usize, usize)> =
            vir.iter().flat_map(|&a| occ.iter().map(move |&i| (a, i))).collect();
        for k in 3..=rank {
            ops.extend(higher_rank(&basis, ra, rb, &pairs, k));
        }
    }
    Ok(ExcitationPool { n_act, n_occ, rank, ops })
}

/// Multisets of `k` indices from `0..m` in lexicographic order.
fn multisets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    let mut cur = vec![0usize; k];
    loop {
        out.push(cur.clone());
        let mut pos = k;
        while pos > 0 && cur[pos - 1] == m - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        let v = cur[pos - 1] + 1;
        for c in cur[pos - 1..].iter_mut() {
            *c = v;
        }
    }
    out
}

/// Orthonormalized rank-`k` operators from products of `E_ai` acting on the reference.
fn higher_rank(basis: &DeterminantBasis, ra: u64, rb: u64, pairs: &[(usize, usize)], k: usize) -> Vec<GOperator> {
    let cands = multisets(pairs.len(), k);
    let dim = basis.len();
    let mut accepted: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let nc = cands.len();
    for (ci, c) in cands.iter().enumerate() {
        let ops: Vec<(usize, usize)> = c.iter().map(|&x| pairs[x]).collect();
        let mut v = vec![0.0; dim];
        for ((a, b), x) in e_string_on_det(&ops, ra, rb) {
            v[basis.index(a, b)] += x;
        }
        let n0 = sqrt(v.iter().map(|x| x * x).sum());
        if n0 < 1e-14 {
            continue;
        }
        let mut coef = vec![0.0; nc];
        coef[ci] = 1.0;
        for _ in 0..2 {
            for (g, gc) in &accepted {
                let ov: f64 = g.iter().zip(&v).map(|(x, y)| x * y).sum();
                if ov != 0.0 {
                    v.iter_mut().zip(g).for_each(|(x, y)| *x -= ov * y);
                    coef.iter_mut().zip(gc).for_each(|(x, y)| *x -= ov * y);
                }
            }
        }
        let nr = sqrt(v.iter().map(|x| x * x).sum());
        if nr / n0 < CULL_THRESHOLD {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nr);
        coef.iter_mut().for_each(|x| *x /= nr);
        accepted.push((v, coef));
    }
    accepted
        .into_iter()
        .map(|(_, coef)| {
            let lead = coef.iter().position(|c| c.abs() > 1e-14).unwrap_or(0);
            let terms: Vec<ETerm> = coef
                .iter()
                .enumerate()
                .filter(|(_, c)| c.abs() > 1e-14)
                .map(|(i, &c)| ETerm { coef: c, ops: cands[i].iter().map(|&x| pairs[x]).collect() })
                .collect();
            GOperator {
                kind: GKind::Higher,
                rank: k,
                indices: cands[lead].iter().flat_map(|&x| [pairs[x].0, pairs[x].1]).collect(),
                norm: coef[lead],
                terms,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(ne: usize, no: usize) -> SpacePartition {
        SpacePartition::new(no, ne, (ne, no), None).unwrap()
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(4, 2).len(), 10);
        assert_eq!(multisets(8, 4).len(), 330);
        assert_eq!(multisets(3, 1), [[0], [1], [2]]);
    }

    #[test]
    fn sd_sizes() {
        assert_eq!(build_pool(&part(4, 4), 2).unwrap().len(), 14);
        assert_eq!(build_pool(&part(4, 6), 2).unwrap().len(), 44);
        assert_eq!(build_pool(&part(6, 6), 2).unwrap().len(), 54);
        assert_eq!(sd_pool_size(3, 3), 54);
    }

    #[test]
    fn complete_counts() {
        assert_eq!(count_complete_pool(&part(4, 4)), 19);
        assert_eq!(count_complete_pool(&part(4, 6)), 104);
        assert_eq!(count_complete_pool(&part(6, 6)), 174);
        assert_eq!(count_complete_pool(&part(2, 2)), 2);
    }

    #[test]
    fn full_rank_spans_singlet_space() {
        assert_eq!(build_pool(&part(4, 4), 4).unwrap().len(), 19);
        assert_eq!(build_pool(&part(4, 6), 4).unwrap().len(), 104);
        assert_eq!(build_pool(&part(6, 6), 6).unwrap().len(), 174);
        assert_eq!(build_pool(&part(2, 2), 2).unwrap().len(), 2);
    }

    #[test]
    fn rank_guard() {
        assert!(build_pool(&part(2, 2), 3).is_err());
        assert!(build_pool(&part(2, 2), 0).is_err());
    }
}
