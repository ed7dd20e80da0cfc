//! Quantum linear response on top of an oo-UCC ground state.

pub mod ext;
pub mod matrices;
pub mod property;
pub mod resources;
pub mod solve;

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::rotation::RotationScheme;

pub use matrices::{build_matrices, hermitify, ResponseMatrices, RowKind};
pub use property::{property_gradient, PropertyGradientVector};
pub use resources::{resource_estimate, Feasibility, ResourceEstimate};
pub use solve::{linear_response_function, oscillator_strengths, polarizability, solve, ExcitationSolution};

/// How active-space excitations and orbital rotations are transformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Naive,
    Sc,
    St,
    Proj,
    AllSc,
    AllSt,
    AllProj,
    StProj,
}

impl Method {
    pub const ALL: [Method; 8] =
        [Method::Naive, Method::Sc, Method::St, Method::Proj, Method::AllSc, Method::AllSt, Method::AllProj, Method::StProj];

    pub fn name(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Sc => "SC",
            Method::St => "ST",
            Method::Proj => "proj",
            Method::AllSc => "all-SC",
            Method::AllSt => "all-ST",
            Method::AllProj => "all-proj",
            Method::StProj => "ST-proj",
        }
    }

    /// Methods whose mixed `Gq` block needs a Hadamard test.
    pub fn supports_herm(self) -> bool {
        matches!(self, Method::Sc | Method::St | Method::StProj)
    }

    /// Orbital rotations are transformed by `U` and act on the CSF.
    pub fn transformed_q(self) -> bool {
        matches!(self, Method::AllSc | Method::AllSt)
    }

    pub fn rotation_scheme(self) -> RotationScheme {
        if self.transformed_q() {
            RotationScheme::Reduced
        } else {
            RotationScheme::Naive
        }
    }
}

/// A method plus the approximate Hermitification flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MethodId {
    pub method: Method,
    pub herm: bool,
}

impl MethodId {
    pub fn new(method: Method, herm: bool) -> Result<Self> {
        if herm && !method.supports_herm() {
            return Err(Error::Method(format!("Hermitification is only defined for SC, ST and ST-proj, not {}", method.name())));
        }
        Ok(MethodId { method, herm })
    }

    pub fn plain(method: Method) -> Self {
        MethodId { method, herm: false }
    }

    pub fn name(&self) -> String {
        if self.herm {
            format!("H{}", self.method.name())
        } else {
            String::from(self.method.name())
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == t)
            .ok_or_else(|| Error::Method(format!("unknown method '{}'", s)))
    }
}

impl FromStr for MethodId {
    type Err = Error;

    /// Accepts a method name, optionally prefixed with `H` for the Hermitified variant.
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(m) = s.parse::<Method>() {
            return Ok(MethodId::plain(m));
        }
        match s.trim().strip_prefix('H').or_else(|| s.trim().strip_prefix('h')) {
            Some(rest) => MethodId::new(rest.parse()?, true),
            None => Err(Error::Method(format!("unknown method '{}'", s))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            let id = MethodId::plain(m);
            assert_eq!(id.name().parse::<MethodId>().unwrap(), id);
        }
        assert_eq!("HST-proj".parse::<MethodId>().unwrap(), MethodId { method: Method::StProj, herm: true });
        assert_eq!("all_st".parse::<Method>().unwrap(), Method::AllSt);
    }

    #[test]
    fn herm_only_where_defined() {
        for m in Method::ALL {
            assert_eq!(MethodId::new(m, true).is_ok(), m.supports_herm());
        }
        assert!("Hnaive".parse::<MethodId>().is_err());
    }
}
