//! Integral files to excitation tables: parse, partition, oo-VQE, response.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qlr_core::fock::{enumerate_basis, spin_square};
use qlr_core::linalg::{hermitian_violation, symmetric_violation};
use qlr_core::qlr::solve::isotropic;
use qlr_core::qlr::{build_matrices, oscillator_strengths, polarizability, property_gradient, resource_estimate, solve, MethodId};
use qlr_core::rotation::{build_rotation_pool, RotationScheme};
use qlr_core::vqe::{optimize, GroundStateRecord, VqeOptions};
use qlr_core::{Error, IntegralSet, OneElectronOperatorSet, SpacePartition};

use crate::config::RunConfig;
use crate::document::*;
use crate::io;
use crate::spectrum::{spectrum, SpectrumCurve};

/// A failure in one stage of the pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError { stage, message: e.to_string() }
    }
}

pub struct RunOutput {
    pub document: ResultDocument,
    /// Broadened spectrum of each method that has at least one state.
    pub spectra: Vec<(String, SpectrumCurve)>,
}

impl RunOutput {
    /// 0 on success, 2 when the ground state did not converge.
    pub fn exit_code(&self) -> i32 {
        if self.document.ground_state.converged {
            0
        } else {
            2
        }
    }

    /// Writes `result.json` and `spectrum_<method>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let p = dir.join("result.json");
        std::fs::write(&p, self.document.to_json())?;
        written.push(p);
        for (name, curve) in &self.spectra {
            let p = dir.join(format!("spectrum_{name}.csv"));
            std::fs::write(&p, curve.to_csv())?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Excitation table, diagnostics and resources of one method.
pub fn run_method(rec: &GroundStateRecord, ops: &OneElectronOperatorSet, id: MethodId) -> Result<MethodResult, Error> {
    let t0 = Instant::now();
    let m = build_matrices(id, rec)?;
    let sol = solve(&m)?;
    let grads = [property_gradient(id, rec, ops, "x")?, property_gradient(id, rec, ops, "y")?, property_gradient(id, rec, ops, "z")?];
    let f = oscillator_strengths(&sol, &grads);
    let static_polarizability = match polarizability(&sol, &grads, 0.0) {
        Ok(a) => Some(isotropic(&a)),
        Err(e) => {
            log::warn!("{}: static polarizability skipped: {}", id, e);
            None
        }
    };
    let delta_max = m.delta.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let r = resource_estimate(id);
    Ok(MethodResult {
        method: id.name(),
        herm: id.herm,
        n_rotations: m.n_rotations(),
        n_excitations: m.n_excitations,
        states: sol
            .omega
            .iter()
            .zip(&f)
            .zip(&sol.norm)
            .map(|((&w, &f), &n)| ExcitedState { omega_hartree: w, omega_ev: w * HARTREE_TO_EV, oscillator_strength: f, norm: n })
            .collect(),
        static_polarizability,
        diagnostics: Diagnostics {
            herm_b_gq_norm: m.herm_diagnostic,
            delta_max,
            a_hermiticity: hermitian_violation(&m.a),
            b_symmetry: symmetric_violation(&m.b),
            sigma_hermiticity: hermitian_violation(&m.sigma),
            dropped_states: sol.dropped,
            metric_nullity: sol.metric_nullity,
            complex_eigenvalues: sol.complex_eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
        },
        resources: Resources {
            generic_terms: r.generic_terms,
            feasibility: r.feasibility.label().to_string(),
            adjusted_terms: r.adjusted_terms,
            effective_terms: r.effective_terms(),
        },
        time_s: t0.elapsed().as_secs_f64(),
    })
}

/// Uniform random start in `[-kick, kick]` for every orbital rotation of `part`.
///
/// Symmetric starting orbitals can sit on a saddle point of the orbital energy; a small
/// kick lets the optimizer leave it.
pub fn kicked_kappa(part: &SpacePartition, kick: f64, seed: u64) -> Vec<f64> {
    let n = build_rotation_pool(&part.canonical(), RotationScheme::Naive).len();
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-kick..=kick)).collect()
}

/// Optimizer options with the seeded orbital kick of `cfg` applied.
fn optimizer_options(cfg: &RunConfig, part: &SpacePartition) -> VqeOptions {
    let mut opts = cfg.optimizer.clone();
    if cfg.kappa_kick > 0.0 {
        opts.initial_kappa = Some(kicked_kappa(part, cfg.kappa_kick, cfg.seed));
    }
    opts
}

/// Runs the whole pipeline on already parsed integrals.
pub fn run_with(cfg: &RunConfig, ints: &IntegralSet, ops: &OneElectronOperatorSet, parse_s: f64) -> Result<RunOutput, PipelineError> {
    let t0 = Instant::now();
    let (ne, no) = cfg.active.unwrap_or((ints.n_elec, ints.n_orb));
    let part = SpacePartition::new(ints.n_orb, ints.n_elec, (ne, no), None).map_err(|e| PipelineError::new("partition", e))?;
    let rank = cfg.rank.rank(part.n_act_elec);
    let opts = optimizer_options(cfg, &part);
    let rec = optimize(ints, &part, rank, &opts).map_err(|e| PipelineError::new("optimizer", e))?;
    if !rec.converged {
        log::warn!("ground state not converged after {} iterations (gradients {:e}, {:e})", rec.iterations, rec.theta_gradient_norm, rec.kappa_gradient_norm);
    }
    let ground_state_s = t0.elapsed().as_secs_f64();
    let basis = enumerate_basis(&rec.partition).map_err(|e| PipelineError::new("partition", e))?;
    let t1 = Instant::now();
    let mut methods = Vec::new();
    for &id in &cfg.methods {
        let r = run_method(&rec, ops, id).map_err(|e| PipelineError::new("response", format!("{id}: {e}")))?;
        methods.push(r);
    }
    let response_s = t1.elapsed().as_secs_f64();
    let mut spectra = Vec::new();
    for m in &methods {
        if !m.states.is_empty() {
            let c = spectrum(&m.peaks_ev(), &cfg.spectrum).map_err(|e| PipelineError::new("spectrum", e))?;
            spectra.push((m.method.clone(), c));
        }
    }
    let document = ResultDocument {
        schema_version: SCHEMA_VERSION,
        input: InputSummary {
            fcidump: cfg.fcidump.display().to_string(),
            dipoles: cfg.dipoles.as_ref().map(|p| p.display().to_string()),
            n_orb: ints.n_orb,
            n_elec: ints.n_elec,
            active: [ne, no],
            n_inactive: part.n_inactive(),
            n_virtual: part.n_virtual(),
            rank,
            rank_label: cfg.rank.label().to_string(),
        },
        ground_state: GroundStateSummary {
            energy_hartree: rec.energy,
            converged: rec.converged,
            iterations: rec.iterations,
            theta_gradient_norm: rec.theta_gradient_norm,
            kappa_gradient_norm: rec.kappa_gradient_norm,
            n_amplitudes: rec.theta.theta.len(),
            spin_square: spin_square(&basis, &rec.state),
        },
        methods,
        timings: Timings { parse_s, ground_state_s, response_s, total_s: parse_s + t0.elapsed().as_secs_f64() },
    };
    Ok(RunOutput { document, spectra })
}

/// Reads the inputs named in `cfg` and runs the pipeline.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    let t0 = Instant::now();
    let ints = io::read_fcidump(&cfg.fcidump).map_err(|e| PipelineError::new("integrals", e))?;
    let report = ints.validate();
    if !report.ok() {
        log::warn!("integral symmetry violated: h {:e}, g {:e}", report.h_max_violation, report.g_max_violation);
    }
    let ops = match &cfg.dipoles {
        Some(p) => {
            let ops = io::read_property_integrals(p).map_err(|e| PipelineError::new("integrals", e))?;
            io::check_dimensions(&ints, &ops).map_err(|e| PipelineError::new("integrals", e))?;
            ops
        }
        None => {
            log::warn!("no dipole integrals given; oscillator strengths will be zero");
            OneElectronOperatorSet::new(ints.n_orb)
        }
    };
    run_with(cfg, &ints, &ops, t0.elapsed().as_secs_f64())
}
