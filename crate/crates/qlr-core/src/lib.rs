//! Emulation of near-term quantum linear response on truncated active spaces.
//!
//! The crate builds an orbital-optimized unitary coupled-cluster ground state from
//! molecular-orbital integrals and assembles response matrices for eight operator
//! parametrizations. It is `no_std` with `alloc`; file formats and the command line
//! live in the companion `qlr` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod error;
pub mod fock;
pub mod integrals;
pub mod linalg;
pub mod math;
pub mod partition;
pub mod qlr;
pub mod rotation;
pub mod vqe;

pub use error::{Error, Result};
pub use integrals::{Eri, IntegralSet, OneElectronOperatorSet, ValidationReport};
pub use partition::{ActiveHamiltonian, SpacePartition};

/// Complex double used for all state amplitudes.
pub type C64 = num_complex::Complex64;

/// Hartree to electron volt.
pub const HARTREE_TO_EV: f64 = 27.211386245988;
