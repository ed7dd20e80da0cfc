//! Determinant-basis statevector engine for the active space.

pub mod basis;
pub mod bits;
pub mod ops;
pub mod pool;
pub mod rdm;
pub mod sparse;
pub mod ucc;

pub use basis::DeterminantBasis;
pub use ops::{apply_e, apply_hamiltonian, energy_of, spin_square, StateVector};
pub use pool::{build_pool, count_complete_pool, sd_pool_size, ETerm, ExcitationPool, GKind, GOperator};
pub use rdm::{rdm, Rdms};
pub use sparse::CsrMatrix;
pub use ucc::{apply_ucc, expmv, ClusterParameters, GeneratorPattern};

use crate::error::Result;
use crate::partition::SpacePartition;
use crate::C64;

/// Basis of the closed-shell active sector.
pub fn enumerate_basis(part: &SpacePartition) -> Result<DeterminantBasis> {
    let k = part.n_act_occ();
    DeterminantBasis::new(part.n_active(), k, k)
}

/// The reference closed-shell determinant as a state vector.
pub fn reference_state(basis: &DeterminantBasis) -> StateVector {
    let mut v = StateVector::zeros(basis.len());
    v[basis.reference_index()] = C64::new(1.0, 0.0);
    v
}
