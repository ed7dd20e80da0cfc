//! The JSON result document of a run.

use serde::{Deserialize, Serialize};

/// Version of the document layout; see `schema/result-v1.schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

/// CODATA 2018 Hartree energy in eV.
pub const HARTREE_TO_EV: f64 = 27.211386245988;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub input: InputSummary,
    pub ground_state: GroundStateSummary,
    pub methods: Vec<MethodResult>,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub fcidump: String,
    pub dipoles: Option<String>,
    pub n_orb: usize,
    pub n_elec: usize,
    /// `(electrons, orbitals)` of the active space.
    pub active: [usize; 2],
    pub n_inactive: usize,
    pub n_virtual: usize,
    pub rank: usize,
    pub rank_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub energy_hartree: f64,
    pub converged: bool,
    pub iterations: usize,
    pub theta_gradient_norm: f64,
    pub kappa_gradient_norm: f64,
    pub n_amplitudes: usize,
    pub spin_square: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitedState {
    pub omega_hartree: f64,
    pub omega_ev: f64,
    pub oscillator_strength: f64,
    /// `<0|[O_k, O_k^dagger]|0>` of the unnormalized state.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Frobenius norm of the mixed block dropped by Hermitification.
    pub herm_b_gq_norm: Option<f64>,
    pub delta_max: f64,
    pub a_hermiticity: f64,
    pub b_symmetry: f64,
    pub sigma_hermiticity: f64,
    pub dropped_states: usize,
    pub metric_nullity: usize,
    /// `[re, im]` of eigenvalues with a significant imaginary part.
    pub complex_eigenvalues: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resources {
    pub generic_terms: usize,
    pub feasibility: String,
    pub adjusted_terms: Option<usize>,
    pub effective_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: String,
    pub herm: bool,
    pub n_rotations: usize,
    pub n_excitations: usize,
    pub states: Vec<ExcitedState>,
    /// Isotropic static polarizability in bohr^3; absent at a zero mode.
    pub static_polarizability: Option<f64>,
    pub diagnostics: Diagnostics,
    pub resources: Resources,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub parse_s: f64,
    pub ground_state_s: f64,
    pub response_s: f64,
    pub total_s: f64,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Copy with every timing field zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        let mut d = self.clone();
        d.timings = Timings::default();
        for m in &mut d.methods {
            m.time_s = 0.0;
        }
        d
    }

    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method.eq_ignore_ascii_case(name))
    }
}

impl MethodResult {
    /// `(omega in eV, f)` pairs.
    pub fn peaks_ev(&self) -> Vec<(f64, f64)> {
        self.states.iter().map(|s| (s.omega_ev, s.oscillator_strength)).collect()
    }
}
