//! Bundled molecular integral sets.

use std::path::PathBuf;

use qlr_core::{IntegralSet, OneElectronOperatorSet};

use crate::io::{self, ParseError};

/// Directory of the bundled fixtures; `QLR_FIXTURES` overrides the build-time location.
pub fn fixture_dir() -> PathBuf {
    match std::env::var_os("QLR_FIXTURES") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")),
    }
}

pub fn fcidump_path(name: &str) -> PathBuf {
    fixture_dir().join(format!("{name}.fcidump"))
}

pub fn dipole_path(name: &str) -> PathBuf {
    fixture_dir().join(format!("{name}.dipole"))
}

/// Integrals and dipole integrals of fixture `name`.
pub fn load(name: &str) -> Result<(IntegralSet, OneElectronOperatorSet), ParseError> {
    let ints = io::read_fcidump(&fcidump_path(name))?;
    let ops = io::read_property_integrals(&dipole_path(name))?;
    io::check_dimensions(&ints, &ops)?;
    Ok((ints, ops))
}
