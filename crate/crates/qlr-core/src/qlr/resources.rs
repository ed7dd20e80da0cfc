//! Static count of unique expectation values per method and its hardware class.

use super::{Method, MethodId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    NearTerm,
    /// Near-term after splitting off-diagonal `U`-sandwiched terms into diagonal ones.
    NearTermDecomposition,
    HadamardTest,
}

impl Feasibility {
    pub fn label(self) -> &'static str {
        match self {
            Feasibility::NearTerm => "near-term",
            Feasibility::NearTermDecomposition => "near-term+decomposition",
            Feasibility::HadamardTest => "Hadamard-test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceEstimate {
    pub method: MethodId,
    pub generic_terms: usize,
    pub feasibility: Feasibility,
    /// Terms after Hermitification or decomposition, where that applies.
    pub adjusted_terms: Option<usize>,
}

impl ResourceEstimate {
    /// Terms to measure for the variant actually selected.
    pub fn effective_terms(&self) -> usize {
        match (self.method.herm, self.feasibility) {
            (true, _) | (_, Feasibility::NearTermDecomposition) => self.adjusted_terms.unwrap_or(self.generic_terms),
            _ => self.generic_terms,
        }
    }
}

pub fn resource_estimate(method: MethodId) -> ResourceEstimate {
    use Feasibility::*;
    let (generic_terms, feasibility, adjusted_terms) = match method.method {
        Method::Naive => (18, NearTerm, None),
        Method::Sc => (9, HadamardTest, Some(16)),
        Method::St => (7, HadamardTest, Some(10)),
        Method::Proj => (10, NearTerm, None),
        Method::AllSc => (8, NearTermDecomposition, Some(24)),
        Method::AllSt => (3, NearTermDecomposition, Some(9)),
        Method::AllProj => (7, NearTerm, None),
        Method::StProj => (4, HadamardTest, Some(8)),
    };
    ResourceEstimate { method, generic_terms, feasibility, adjusted_terms }
}
