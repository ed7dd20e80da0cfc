//! Broadened absorption spectra written as comma-separated tables.

use std::fmt::Write;
use std::str::FromStr;

use qlr_core::qlr::solve::{broadened_spectrum, Broadening};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error("no excitation peaks to broaden")]
    NoPeaks,
    #[error("broadening width must be positive, got {0} eV")]
    Width(f64),
    #[error("a spectrum needs at least 2 grid points, got {0}")]
    Points(usize),
    #[error("unknown broadening '{0}' (expected lorentzian or gaussian)")]
    Kind(String),
}

/// Line shape and grid of a broadened spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub kind: Broadening,
    /// Full width at half maximum in eV.
    pub width_ev: f64,
    pub points: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { kind: Broadening::Lorentzian, width_ev: 0.2, points: 2000 }
    }
}

pub fn parse_broadening(s: &str) -> Result<Broadening, SpectrumError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "lorentzian" | "lorentz" => Ok(Broadening::Lorentzian),
        "gaussian" | "gauss" => Ok(Broadening::Gaussian),
        _ => Err(SpectrumError::Kind(s.to_string())),
    }
}

pub fn broadening_name(kind: Broadening) -> &'static str {
    match kind {
        Broadening::Lorentzian => "lorentzian",
        Broadening::Gaussian => "gaussian",
    }
}

/// Newtype so broadening kinds can be parsed by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BroadeningArg(pub Broadening);

impl FromStr for BroadeningArg {
    type Err = SpectrumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_broadening(s).map(BroadeningArg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    /// Uniform, strictly increasing grid in eV.
    pub energy_ev: Vec<f64>,
    pub intensity: Vec<f64>,
    /// `(omega in eV, f)`.
    pub peaks: Vec<(f64, f64)>,
}

/// Broadens `peaks` on `[min - 5 w, max + 5 w]`.
pub fn spectrum(peaks: &[(f64, f64)], opts: &SpectrumOptions) -> Result<SpectrumCurve, SpectrumError> {
    if peaks.is_empty() {
        return Err(SpectrumError::NoPeaks);
    }
    if !(opts.width_ev > 0.0) {
        return Err(SpectrumError::Width(opts.width_ev));
    }
    if opts.points < 2 {
        return Err(SpectrumError::Points(opts.points));
    }
    let lo = peaks.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - 5.0 * opts.width_ev;
    let hi = peaks.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + 5.0 * opts.width_ev;
    let step = (hi - lo) / (opts.points - 1) as f64;
    let grid: Vec<f64> = (0..opts.points).map(|i| lo + step * i as f64).collect();
    let (e, f): (Vec<f64>, Vec<f64>) = peaks.iter().copied().unzip();
    let intensity = broadened_spectrum(&e, &f, opts.width_ev, opts.kind, &grid).into_iter().map(|x| x.max(0.0)).collect();
    Ok(SpectrumCurve { energy_ev: grid, intensity, peaks: peaks.to_vec() })
}

impl SpectrumCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("energy_ev,intensity\n");
        for (e, i) in self.energy_ev.iter().zip(&self.intensity) {
            writeln!(s, "{e:.10e},{i:.10e}").unwrap();
        }
        s
    }
}
