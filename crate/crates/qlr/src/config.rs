//! Run configuration, from flags or a `key = value` file mirroring them.

use std::path::PathBuf;
use std::str::FromStr;

use qlr_core::qlr::solve::Broadening;
use qlr_core::qlr::MethodId;
use qlr_core::vqe::VqeOptions;

use crate::spectrum::{parse_broadening, SpectrumOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for {key}: {msg}")]
    Value { key: String, value: String, msg: String },
    #[error("missing required setting '{0}'")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

/// Ansatz excitation rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSpec {
    Sd,
    Sdt,
    Sdtq,
    /// All excitation ranks of the active space.
    Full,
}

impl RankSpec {
    pub fn rank(self, n_act_elec: usize) -> usize {
        match self {
            RankSpec::Sd => 2,
            RankSpec::Sdt => 3,
            RankSpec::Sdtq => 4,
            RankSpec::Full => n_act_elec.max(1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RankSpec::Sd => "sd",
            RankSpec::Sdt => "sdt",
            RankSpec::Sdtq => "sdtq",
            RankSpec::Full => "full",
        }
    }
}

impl FromStr for RankSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sd" => Ok(RankSpec::Sd),
            "sdt" => Ok(RankSpec::Sdt),
            "sdtq" => Ok(RankSpec::Sdtq),
            "full" => Ok(RankSpec::Full),
            _ => Err(format!("expected sd, sdt, sdtq or full, got '{s}'")),
        }
    }
}

/// Default half-width of the random initial orbital rotation.
pub const DEFAULT_KAPPA_KICK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub fcidump: PathBuf,
    pub dipoles: Option<PathBuf>,
    /// `(electrons, orbitals)`; all orbitals active when absent.
    pub active: Option<(usize, usize)>,
    pub rank: RankSpec,
    pub methods: Vec<MethodId>,
    pub optimizer: VqeOptions,
    /// Magnitude of a random initial orbital rotation; zero disables it.
    pub kappa_kick: f64,
    pub seed: u64,
    pub spectrum: SpectrumOptions,
    pub out: Option<PathBuf>,
}

/// Partially specified configuration; later sources override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigBuilder {
    pub fcidump: Option<PathBuf>,
    pub dipoles: Option<PathBuf>,
    pub active: Option<(usize, usize)>,
    pub rank: Option<RankSpec>,
    pub methods: Vec<String>,
    pub herm: Option<bool>,
    pub broadening: Option<Broadening>,
    pub width_ev: Option<f64>,
    pub points: Option<usize>,
    pub out: Option<PathBuf>,
    pub grad_tol: Option<f64>,
    pub energy_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub fd_step: Option<f64>,
    pub analytic_theta: Option<bool>,
    pub kappa_kick: Option<f64>,
    pub seed: Option<u64>,
}

pub fn parse_active(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected 'electrons,orbitals', got '{s}'"))?;
    let n = a.trim().parse().map_err(|_| format!("bad electron count '{a}'"))?;
    let o = b.trim().parse().map_err(|_| format!("bad orbital count '{b}'"))?;
    Ok((n, o))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected a boolean, got '{s}'")),
    }
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| ConfigError::Value { key: key.into(), value: v.into(), msg: e.to_string() })
}

fn wrap<T>(key: &str, v: &str, r: Result<T, String>) -> Result<T, ConfigError> {
    r.map_err(|msg| ConfigError::Value { key: key.into(), value: v.into(), msg })
}

impl ConfigBuilder {
    /// Applies one setting; keys match the long flag names, `_` and `-` alike.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let k = key.trim().to_ascii_lowercase().replace('_', "-");
        let v = v.trim();
        match k.as_str() {
            "fcidump" => self.fcidump = Some(v.into()),
            "dipoles" => self.dipoles = Some(v.into()),
            "active" => self.active = Some(wrap(&k, v, parse_active(v))?),
            "rank" => self.rank = Some(wrap(&k, v, v.parse())?),
            "method" | "methods" => self.methods.extend(v.split(',').map(|m| m.trim().to_string()).filter(|m| !m.is_empty())),
            "herm" => self.herm = Some(wrap(&k, v, parse_bool(v))?),
            "broadening" => self.broadening = Some(parse_broadening(v).map_err(|e| ConfigError::Value { key: k.clone(), value: v.into(), msg: e.to_string() })?),
            "width-ev" => self.width_ev = Some(value(&k, v)?),
            "points" => self.points = Some(value(&k, v)?),
            "out" => self.out = Some(v.into()),
            "grad-tol" => self.grad_tol = Some(value(&k, v)?),
            "energy-tol" => self.energy_tol = Some(value(&k, v)?),
            "max-iter" => self.max_iter = Some(value(&k, v)?),
            "fd-step" => self.fd_step = Some(value(&k, v)?),
            "analytic-theta" => self.analytic_theta = Some(wrap(&k, v, parse_bool(v))?),
            "kappa-kick" => self.kappa_kick = Some(value(&k, v)?),
            "seed" => self.seed = Some(value(&k, v)?),
            _ => return Err(ConfigError::UnknownKey(key.trim().to_string())),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment. Relative paths stay relative
    /// to the working directory.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, msg: format!("expected 'key = value', got '{line}'") })?;
            self.set(k, v).map_err(|e| ConfigError::Syntax { line: i + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    /// Overlays every setting present in `other`.
    pub fn merge(&mut self, other: ConfigBuilder) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(fcidump, dipoles, active, rank, herm, broadening, width_ev, points, out, grad_tol, energy_tol, max_iter, fd_step, analytic_theta, kappa_kick, seed);
        if !other.methods.is_empty() {
            self.methods = other.methods;
        }
    }

    /// Validates everything that can be checked before any computation.
    pub fn build(self) -> Result<RunConfig, ConfigError> {
        let fcidump = self.fcidump.ok_or(ConfigError::Missing("fcidump"))?;
        let herm = self.herm.unwrap_or(false);
        let names = if self.methods.is_empty() { vec!["naive".to_string()] } else { self.methods };
        let mut methods = Vec::new();
        for name in &names {
            let mut id: MethodId = name.parse().map_err(|e: qlr_core::Error| ConfigError::Value { key: "method".into(), value: name.clone(), msg: e.to_string() })?;
            if herm {
                id = MethodId::new(id.method, true).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
            if !methods.contains(&id) {
                methods.push(id);
            }
        }
        let defaults = VqeOptions::default();
        let optimizer = VqeOptions {
            grad_tol: self.grad_tol.unwrap_or(defaults.grad_tol),
            energy_tol: self.energy_tol.unwrap_or(defaults.energy_tol),
            max_iter: self.max_iter.unwrap_or(defaults.max_iter),
            fd_step: self.fd_step.unwrap_or(defaults.fd_step),
            analytic_theta: self.analytic_theta.unwrap_or(defaults.analytic_theta),
            ..defaults
        };
        if !(optimizer.grad_tol > 0.0) || !(optimizer.energy_tol > 0.0) || !(optimizer.fd_step > 0.0) {
            return Err(ConfigError::Invalid("optimizer tolerances and step must be positive".into()));
        }
        let spectrum = SpectrumOptions {
            kind: self.broadening.unwrap_or(Broadening::Lorentzian),
            width_ev: self.width_ev.unwrap_or(0.2),
            points: self.points.unwrap_or(2000),
        };
        if !(spectrum.width_ev > 0.0) {
            return Err(ConfigError::Invalid(format!("width-ev must be positive, got {}", spectrum.width_ev)));
        }
        if spectrum.points < 2 {
            return Err(ConfigError::Invalid("points must be at least 2".into()));
        }
        let kappa_kick = self.kappa_kick.unwrap_or(DEFAULT_KAPPA_KICK);
        if kappa_kick < 0.0 || !kappa_kick.is_finite() {
            return Err(ConfigError::Invalid("kappa-kick must be a non-negative number".into()));
        }
        Ok(RunConfig {
            fcidump,
            dipoles: self.dipoles,
            active: self.active,
            rank: self.rank.unwrap_or(RankSpec::Sd),
            methods,
            optimizer,
            kappa_kick,
            seed: self.seed.unwrap_or(0),
            spectrum,
            out: self.out,
        })
    }
}
