#![allow(dead_code)]

use nalgebra::DMatrix;
use qlr_core::linalg::expm;
use qlr_core::rotation::transform_integrals;
use qlr_core::{Eri, IntegralSet, OneElectronOperatorSet};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Molecule-like random integrals: ascending orbital energies and a positive
/// semidefinite two-electron tensor `(pq|rs) = sum_L L_pq L_rs`, finally mixed
/// by a random orthogonal rotation so that nothing is diagonal.
pub fn model_integrals(n_orb: usize, n_elec: usize, seed: u64) -> IntegralSet {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut ints = IntegralSet::zeros(n_orb, n_elec);
    let mut h = DMatrix::from_fn(n_orb, n_orb, |_, _| 0.08 * rng.gen_range(-1.0..1.0));
    h = (&h + h.transpose()) * 0.5;
    for p in 0..n_orb {
        h[(p, p)] += -2.0 + 0.7 * p as f64;
    }
    let factors: Vec<DMatrix<f64>> = (0..n_orb + 2)
        .map(|k| {
            let mut l = DMatrix::from_fn(n_orb, n_orb, |_, _| 0.15 * rng.gen_range(-1.0..1.0));
            l = (&l + l.transpose()) * 0.5;
            if k == 0 {
                for p in 0..n_orb {
                    l[(p, p)] += 0.6;
                }
            }
            l
        })
        .collect();
    ints.h = h;
    ints.g = Eri::from_fn(n_orb, |p, q, r, s| factors.iter().map(|l| l[(p, q)] * l[(r, s)]).sum());
    ints.e_core = 1.5;
    ints
}

pub fn random_rotation(n: usize, scale: f64, rng: &mut StdRng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| scale * rng.gen_range(-1.0..1.0));
    expm(&(&a - a.transpose()))
}

/// Same integrals seen through slightly rotated orbitals.
pub fn rotated(ints: &IntegralSet, scale: f64, seed: u64) -> IntegralSet {
    let mut rng = StdRng::seed_from_u64(seed);
    transform_integrals(ints, &random_rotation(ints.n_orb, scale, &mut rng))
}

pub fn model_dipoles(n_orb: usize, seed: u64) -> OneElectronOperatorSet {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5eed);
    let mut ops = OneElectronOperatorSet::new(n_orb);
    for label in ["x", "y", "z"] {
        let m = DMatrix::from_fn(n_orb, n_orb, |_, _| rng.gen_range(-1.0..1.0));
        ops.push(label, (&m + m.transpose()) * 0.5);
    }
    ops
}

pub fn random_vec(n: usize, scale: f64, rng: &mut StdRng) -> Vec<f64> {
    (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
}
