//! Molecular-orbital integrals and one-electron property operators.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::math::abs;

/// Two-electron integrals `(pq|rs)` in chemist notation, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Eri {
    n: usize,
    data: Vec<f64>,
}

impl Eri {
    pub fn zeros(n: usize) -> Self {
        Eri { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut e = Eri::zeros(n);
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        e.data[((p * n + q) * n + r) * n + s] = f(p, q, r, s);
                    }
                }
            }
        }
        e
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.idx(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let i = self.idx(p, q, r, s);
        self.data[i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Sets `(pq|rs)` and its seven permutational partners.
    pub fn set_sym(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in eightfold(p, q, r, s) {
            self.set(a, b, c, d, v);
        }
    }

    /// Restriction to the index window `[lo, lo + m)`.
    pub fn block(&self, lo: usize, m: usize) -> Eri {
        Eri::from_fn(m, |p, q, r, s| self.get(lo + p, lo + q, lo + r, lo + s))
    }
}

/// The eight index tuples related to `(pq|rs)` by real-orbital symmetry.
pub fn eightfold(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

/// Full set of MO integrals for a closed-shell system.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub n_orb: usize,
    pub n_elec: usize,
    pub ms2: i32,
    pub h: DMatrix<f64>,
    pub g: Eri,
    pub e_core: f64,
}

/// Maximum symmetry violations found by [`IntegralSet::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValidationReport {
    pub h_max_violation: f64,
    pub g_max_violation: f64,
    pub h_breach: bool,
    pub g_breach: bool,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        !self.h_breach && !self.g_breach
    }
}

pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

impl IntegralSet {
    pub fn zeros(n_orb: usize, n_elec: usize) -> Self {
        IntegralSet {
            n_orb,
            n_elec,
            ms2: 0,
            h: DMatrix::zeros(n_orb, n_orb),
            g: Eri::zeros(n_orb),
            e_core: 0.0,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.n_orb;
        let mut hv: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                hv = hv.max(abs(self.h[(p, q)] - self.h[(q, p)]));
            }
        }
        let mut gv: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.g.get(p, q, r, s);
                        gv = gv
                            .max(abs(v - self.g.get(q, p, r, s)))
                            .max(abs(v - self.g.get(p, q, s, r)))
                            .max(abs(v - self.g.get(r, s, p, q)));
                    }
                }
            }
        }
        ValidationReport {
            h_max_violation: hv,
            g_max_violation: gv,
            h_breach: hv > SYMMETRY_TOLERANCE,
            g_breach: gv > SYMMETRY_TOLERANCE,
        }
    }

    /// Reorders orbitals so that new orbital `k` is old orbital `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> IntegralSet {
        let n = self.n_orb;
        assert_eq!(perm.len(), n);
        let h = DMatrix::from_fn(n, n, |p, q| self.h[(perm[p], perm[q])]);
        let g = Eri::from_fn(n, |p, q, r, s| self.g.get(perm[p], perm[q], perm[r], perm[s]));
        IntegralSet { h, g, ..self.clone() }
    }
}

/// Named one-electron operators, e.g. the position components `x`, `y`, `z`.
///
/// Matrices hold `<p|r|q>`; the dipole operator is `-sum d_pq E_pq`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneElectronOperatorSet {
    pub n_orb: usize,
    pub labels: Vec<String>,
    pub matrices: Vec<DMatrix<f64>>,
}

impl OneElectronOperatorSet {
    pub fn new(n_orb: usize) -> Self {
        OneElectronOperatorSet { n_orb, labels: Vec::new(), matrices: Vec::new() }
    }

    pub fn get(&self, label: &str) -> Option<&DMatrix<f64>> {
        self.labels.iter().position(|l| l == label).map(|i| &self.matrices[i])
    }

    /// Matrix for `label`, or zeros with a warning when absent.
    pub fn get_or_zero(&self, label: &str) -> DMatrix<f64> {
        match self.get(label) {
            Some(m) => m.clone(),
            None => {
                log::warn!("operator '{}' missing, treated as zero", label);
                DMatrix::zeros(self.n_orb, self.n_orb)
            }
        }
    }

    pub fn push(&mut self, label: &str, m: DMatrix<f64>) {
        self.labels.push(String::from(label));
        self.matrices.push(m);
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut v: f64 = 0.0;
        for m in &self.matrices {
            for p in 0..m.nrows() {
                for q in 0..m.ncols() {
                    v = v.max(abs(m[(p, q)] - m[(q, p)]));
                }
            }
        }
        v
    }

    pub fn permuted(&self, perm: &[usize]) -> OneElectronOperatorSet {
        let n = self.n_orb;
        OneElectronOperatorSet {
            n_orb: n,
            labels: self.labels.clone(),
            matrices: self
                .matrices
                .iter()
                .map(|m| DMatrix::from_fn(n, n, |p, q| m[(perm[p], perm[q])]))
                .collect(),
        }
    }
}
