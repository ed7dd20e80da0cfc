//! Inactive / active / virtual partition and the effective active-space Hamiltonian.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::integrals::{Eri, IntegralSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpacePartition {
    pub n_orb: usize,
    pub n_elec: usize,
    pub inactive: Vec<usize>,
    pub active: Vec<usize>,
    pub virt: Vec<usize>,
    pub n_act_elec: usize,
}

impl SpacePartition {
    /// Partition from `(n_act_elec, n_act_orb)`; `ordering` lists orbitals by priority.
    pub fn new(
        n_orb: usize,
        n_elec: usize,
        cas: (usize, usize),
        ordering: Option<&[usize]>,
    ) -> Result<Self> {
        let (n_act_elec, n_act_orb) = cas;
        if n_act_elec > n_elec {
            return Err(Error::Partition(format!(
                "{} active electrons exceed {} total",
                n_act_elec, n_elec
            )));
        }
        if (n_elec - n_act_elec) % 2 != 0 {
            return Err(Error::Partition(format!(
                "odd inactive electron count {}",
                n_elec - n_act_elec
            )));
        }
        if n_act_elec % 2 != 0 {
            return Err(Error::Partition(format!(
                "odd active electron count {} (closed-shell reference only)",
                n_act_elec
            )));
        }
        let n_inact = (n_elec - n_act_elec) / 2;
        if n_inact + n_act_orb > n_orb {
            return Err(Error::Partition(format!(
                "active window {}..{} exceeds {} orbitals",
                n_inact,
                n_inact + n_act_orb,
                n_orb
            )));
        }
        if n_act_elec > 2 * n_act_orb {
            return Err(Error::Partition(format!(
                "{} electrons do not fit in {} active orbitals",
                n_act_elec, n_act_orb
            )));
        }
        let order: Vec<usize> = match ordering {
            Some(o) => {
                let mut seen = alloc::vec![false; n_orb];
                if o.len() != n_orb || o.iter().any(|&k| k >= n_orb || core::mem::replace(&mut seen[k], true)) {
                    return Err(Error::Partition(format!(
                        "ordering is not a permutation of 0..{}",
                        n_orb
                    )));
                }
                o.to_vec()
            }
            None => (0..n_orb).collect(),
        };
        Ok(SpacePartition {
            n_orb,
            n_elec,
            inactive: order[..n_inact].to_vec(),
            active: order[n_inact..n_inact + n_act_orb].to_vec(),
            virt: order[n_inact + n_act_orb..].to_vec(),
            n_act_elec,
        })
    }

    pub fn n_inactive(&self) -> usize {
        self.inactive.len()
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    pub fn n_virtual(&self) -> usize {
        self.virt.len()
    }

    /// Number of doubly occupied active orbitals in the reference.
    pub fn n_act_occ(&self) -> usize {
        self.n_act_elec / 2
    }

    /// Active orbitals occupied in the reference (`v_i`).
    pub fn v_occ(&self) -> &[usize] {
        &self.active[..self.n_act_occ()]
    }

    /// Active orbitals empty in the reference (`v_a`).
    pub fn v_virt(&self) -> &[usize] {
        &self.active[self.n_act_occ()..]
    }

    /// Orbital order with inactive, active and virtual orbitals contiguous.
    pub fn canonical_permutation(&self) -> Vec<usize> {
        let mut p = self.inactive.clone();
        p.extend_from_slice(&self.active);
        p.extend_from_slice(&self.virt);
        p
    }

    /// The same partition expressed in the canonical orbital order.
    pub fn canonical(&self) -> SpacePartition {
        let ni = self.n_inactive();
        let na = self.n_active();
        SpacePartition {
            n_orb: self.n_orb,
            n_elec: self.n_elec,
            inactive: (0..ni).collect(),
            active: (ni..ni + na).collect(),
            virt: (ni + na..self.n_orb).collect(),
            n_act_elec: self.n_act_elec,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical_permutation().iter().enumerate().all(|(k, &p)| k == p)
    }
}

/// Active-space Hamiltonian dressed by the doubly occupied inactive orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveHamiltonian {
    pub h_eff: DMatrix<f64>,
    pub g_act: Eri,
    pub e_frozen: f64,
}

impl ActiveHamiltonian {
    pub fn n_act(&self) -> usize {
        self.h_eff.nrows()
    }

    pub fn new(ints: &IntegralSet, part: &SpacePartition) -> Self {
        let act = &part.active;
        let ina = &part.inactive;
        let g = &ints.g;
        let m = act.len();
        let h_eff = DMatrix::from_fn(m, m, |v, w| {
            let (v, w) = (act[v], act[w]);
            let mut x = ints.h[(v, w)];
            for &i in ina {
                x += 2.0 * g.get(v, w, i, i) - g.get(v, i, i, w);
            }
            x
        });
        let g_act = Eri::from_fn(m, |p, q, r, s| g.get(act[p], act[q], act[r], act[s]));
        let mut e_frozen = ints.e_core;
        for &i in ina {
            e_frozen += 2.0 * ints.h[(i, i)];
            for &j in ina {
                e_frozen += 2.0 * g.get(i, i, j, j) - g.get(i, j, j, i);
            }
        }
        ActiveHamiltonian { h_eff, g_act, e_frozen }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let p = SpacePartition::new(6, 4, (4, 4), None).unwrap();
        assert!(p.inactive.is_empty());
        assert_eq!(p.active, [0, 1, 2, 3]);
        assert_eq!(p.virt, [4, 5]);
        assert_eq!(p.v_occ(), [0, 1]);
        assert_eq!(p.v_virt(), [2, 3]);
        let w = SpacePartition::new(13, 10, (4, 4), None).unwrap();
        assert_eq!((w.n_inactive(), w.n_active(), w.n_virtual()), (3, 4, 6));
        let n2 = SpacePartition::new(18, 14, (6, 6), None).unwrap();
        assert_eq!(n2.n_inactive(), 4);
    }

    #[test]
    fn rejects_bad_windows() {
        assert!(SpacePartition::new(4, 5, (2, 2), None).is_err());
        assert!(SpacePartition::new(4, 4, (2, 4), None).is_err());
        assert!(SpacePartition::new(4, 2, (4, 2), None).is_err());
        assert!(SpacePartition::new(3, 2, (2, 2), Some(&[0, 0, 1])).is_err());
    }

    #[test]
    fn ordering_selects_orbitals() {
        let p = SpacePartition::new(4, 4, (2, 2), Some(&[2, 0, 3, 1])).unwrap();
        assert_eq!(p.inactive, [2]);
        assert_eq!(p.active, [0, 3]);
        assert_eq!(p.virt, [1]);
        assert_eq!(p.canonical_permutation(), [2, 0, 3, 1]);
    }
}
