//! Self-check suites over the bundled fixtures.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Deserialize;

use qlr_core::fock::{count_complete_pool, sd_pool_size};
use qlr_core::linalg::{hermitian_violation, symmetric_violation};
use qlr_core::qlr::{build_matrices, oscillator_strengths, property_gradient, resource_estimate, solve, Feasibility, Method, MethodId};
use qlr_core::vqe::{casci, optimize, GroundStateRecord, VqeOptions};
use qlr_core::{IntegralSet, OneElectronOperatorSet, SpacePartition};

use crate::config::DEFAULT_KAPPA_KICK;
use crate::io;
use crate::pipeline::kicked_kappa;
use crate::oracle::{clusters, compare, fci, Oracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Fixture integrity, combinatorics and small oracle checks.
    Fast,
    /// Dense full-space equivalence on every small fixture.
    Oracle,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fast" => Ok(Suite::Fast),
            "oracle" => Ok(Suite::Oracle),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite '{s}' (expected fast, oracle or all)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for r in &self.results {
            writeln!(s, "{} {:<40} {:>7.2}s  {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.seconds, r.detail).unwrap();
        }
        let failed = self.failures().count();
        writeln!(s, "{} checks, {} failed", self.results.len(), failed).unwrap();
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error("fixture '{name}' is missing {path}")]
    MissingFixture { name: String, path: PathBuf },
    #[error("manifest {path}: {msg}")]
    Manifest { path: PathBuf, msg: String },
}

/// Reference data stored next to each fixture.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub n_orb: usize,
    pub n_elec: usize,
    pub e_nuc: f64,
    pub e_rhf: f64,
    #[serde(default)]
    pub casci: BTreeMap<String, f64>,
    #[serde(default)]
    pub casscf: BTreeMap<String, f64>,
    pub e_fci: Option<f64>,
}

pub struct Fixture {
    pub manifest: Manifest,
    pub ints: IntegralSet,
    pub ops: OneElectronOperatorSet,
}

/// Every fixture in `dir` is a `<name>.json` manifest with `.fcidump` and `.dipole` files.
pub fn fixture_names(dir: &Path) -> Result<Vec<String>, CheckError> {
    let rd = std::fs::read_dir(dir).map_err(|_| CheckError::MissingFixture { name: "*".into(), path: dir.to_path_buf() })?;
    let mut names: Vec<String> = rd
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    names.sort();
    Ok(names)
}

pub fn load_fixture(dir: &Path, name: &str) -> Result<Fixture, CheckError> {
    let path = |ext: &str| dir.join(format!("{name}.{ext}"));
    for ext in ["json", "fcidump", "dipole"] {
        if !path(ext).is_file() {
            return Err(CheckError::MissingFixture { name: name.into(), path: path(ext) });
        }
    }
    let mp = path("json");
    let text = std::fs::read_to_string(&mp).map_err(|e| CheckError::Manifest { path: mp.clone(), msg: e.to_string() })?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CheckError::Manifest { path: mp.clone(), msg: e.to_string() })?;
    let ints = io::read_fcidump(&path("fcidump")).map_err(|e| CheckError::Manifest { path: path("fcidump"), msg: e.to_string() })?;
    let ops = io::read_property_integrals(&path("dipole")).map_err(|e| CheckError::Manifest { path: path("dipole"), msg: e.to_string() })?;
    Ok(Fixture { manifest, ints, ops })
}

/// Closed-shell determinant energy of the lowest `n_elec / 2` orbitals.
pub fn rhf_energy(ints: &IntegralSet) -> f64 {
    let occ = ints.n_elec / 2;
    let mut e = ints.e_core;
    for i in 0..occ {
        e += 2.0 * ints.h[(i, i)];
        for j in 0..occ {
            e += 2.0 * ints.g.get(i, i, j, j) - ints.g.get(i, j, j, i);
        }
    }
    e
}

fn parse_cas(key: &str) -> Option<(usize, usize)> {
    let (a, b) = key.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// Tight optimizer settings used wherever results are compared at 1e-8.
pub fn tight_options() -> VqeOptions {
    VqeOptions { grad_tol: 1e-9, analytic_theta: true, ..Default::default() }
}

pub fn ground_state(ints: &IntegralSet, cas: (usize, usize), rank: usize) -> Result<GroundStateRecord, String> {
    let part = SpacePartition::new(ints.n_orb, ints.n_elec, cas, None).map_err(|e| e.to_string())?;
    optimize(ints, &part, rank, &tight_options()).map_err(|e| e.to_string())
}

struct Runner {
    report: CheckReport,
}

impl Runner {
    fn check(&mut self, name: impl Into<String>, f: impl FnOnce() -> Result<String, String>) {
        let t = Instant::now();
        let (passed, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(_) => (false, "panicked".into()),
        };
        self.report.results.push(CheckResult { name: name.into(), passed, detail, seconds: t.elapsed().as_secs_f64() });
    }
}

fn within(label: &str, value: f64, tol: f64) -> Result<String, String> {
    if value <= tol {
        Ok(format!("{label} {value:.2e} <= {tol:.0e}"))
    } else {
        Err(format!("{label} {value:.2e} exceeds {tol:.0e}"))
    }
}

fn fixture_integrity(fx: &Fixture) -> Result<String, String> {
    let m = &fx.manifest;
    if fx.ints.n_orb != m.n_orb || fx.ints.n_elec != m.n_elec {
        return Err(format!("dimensions: file has ({}, {}), manifest ({}, {})", fx.ints.n_orb, fx.ints.n_elec, m.n_orb, m.n_elec));
    }
    io::check_dimensions(&fx.ints, &fx.ops).map_err(|e| e.to_string())?;
    let v = fx.ints.validate();
    if v.h_max_violation.max(v.g_max_violation) > 1e-12 {
        return Err(format!("integral symmetry: h {:.2e}, g {:.2e}", v.h_max_violation, v.g_max_violation));
    }
    if fx.ops.max_asymmetry() > 1e-12 {
        return Err(format!("dipole symmetry: {:.2e}", fx.ops.max_asymmetry()));
    }
    if (fx.ints.e_core - m.e_nuc).abs() > 1e-10 {
        return Err(format!("core energy {} differs from manifest {}", fx.ints.e_core, m.e_nuc));
    }
    let e = rhf_energy(&fx.ints);
    if (e - m.e_rhf).abs() > 1e-8 {
        return Err(format!("rhf-energy {e:.10} differs from manifest {:.10} by {:.2e}", m.e_rhf, e - m.e_rhf));
    }
    Ok(format!("symmetry and reference energy ok ({:.2e})", (e - m.e_rhf).abs()))
}

fn casci_reference(fx: &Fixture, key: &str, reference: f64) -> Result<String, String> {
    let cas = parse_cas(key).ok_or("bad active-space key")?;
    let part = SpacePartition::new(fx.ints.n_orb, fx.ints.n_elec, cas, None).map_err(|e| e.to_string())?;
    let e = casci(&fx.ints, &part).map_err(|e| e.to_string())?[0].0;
    within("casci-energy deviation", (e - reference).abs(), 1e-8)
}

fn casscf_reference(fx: &Fixture, key: &str, reference: f64) -> Result<String, String> {
    let cas = parse_cas(key).ok_or("bad active-space key")?;
    let part = SpacePartition::new(fx.ints.n_orb, fx.ints.n_elec, cas, None).map_err(|e| e.to_string())?;
    let opts = VqeOptions { initial_kappa: Some(kicked_kappa(&part, DEFAULT_KAPPA_KICK, 0)), ..tight_options() };
    let rec = optimize(&fx.ints, &part, cas.0.max(1), &opts).map_err(|e| e.to_string())?;
    if !rec.converged {
        return Err("optimizer did not converge".into());
    }
    // oo-UCC at complete rank spans the CASSCF wave function
    within("casscf-energy deviation", (rec.energy - reference).abs(), 1e-8)
}

fn pool_sizes() -> Result<String, String> {
    let mut bad = Vec::new();
    for ((n, o), sd, complete) in [((4, 4), 14, 19), ((4, 6), 44, 104), ((6, 6), 54, 174)] {
        let part = SpacePartition::new(o, n, (n, o), None).map_err(|e| e.to_string())?;
        let k = part.n_act_occ();
        let got = (sd_pool_size(k, o - k), count_complete_pool(&part));
        let built = qlr_core::fock::build_pool(&part, 2).map_err(|e| e.to_string())?.len();
        if got != (sd, complete) || built != sd {
            bad.push(format!("({n},{o}): {got:?}/{built}"));
        }
    }
    if bad.is_empty() {
        Ok("SD 14/44/54, complete 19/104/174".into())
    } else {
        Err(bad.join(", "))
    }
}

fn resource_table() -> Result<String, String> {
    use Feasibility::*;
    let expect = [
        (Method::Naive, 18, NearTerm, None),
        (Method::Sc, 9, HadamardTest, Some(16)),
        (Method::St, 7, HadamardTest, Some(10)),
        (Method::Proj, 10, NearTerm, None),
        (Method::AllSc, 8, NearTermDecomposition, Some(24)),
        (Method::AllSt, 3, NearTermDecomposition, Some(9)),
        (Method::AllProj, 7, NearTerm, None),
        (Method::StProj, 4, HadamardTest, Some(8)),
    ];
    for (m, n, f, adj) in expect {
        let r = resource_estimate(MethodId::plain(m));
        if (r.generic_terms, r.feasibility, r.adjusted_terms) != (n, f, adj) {
            return Err(format!("{} row is {:?}", m.name(), r));
        }
    }
    Ok("8 rows match".into())
}

/// Structural properties of every method's matrices, plus unitarity and spin purity.
fn structural(rec: &GroundStateRecord) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for m in Method::ALL {
        let r = build_matrices(MethodId::plain(m), rec).map_err(|e| format!("{}: {e}", m.name()))?;
        let v = hermitian_violation(&r.a)
            .max(symmetric_violation(&r.b))
            .max(hermitian_violation(&r.sigma))
            .max(r.delta.iter().fold(0.0, |a, z| a.max(z.norm())));
        if v > 1e-10 {
            return Err(format!("{}: structural violation {v:.2e}", m.name()));
        }
        worst = worst.max(v);
    }
    let norm = (rec.state.norm() - 1.0).abs();
    if norm > 1e-12 {
        return Err(format!("state norm deviates by {norm:.2e}"));
    }
    let basis = qlr_core::fock::enumerate_basis(&rec.partition).map_err(|e| e.to_string())?;
    let s2 = qlr_core::fock::spin_square(&basis, &rec.state).abs();
    if s2 > 1e-9 {
        return Err(format!("spin contamination {s2:.2e}"));
    }
    Ok(format!("max violation {worst:.2e}, <S^2> {s2:.1e}"))
}

fn oracle_equivalence(fx: &Fixture, cas: (usize, usize), rank: usize) -> Result<String, String> {
    let rec = ground_state(&fx.ints, cas, rank)?;
    let or = Oracle::new(&rec);
    let mut worst: f64 = 0.0;
    for m in Method::ALL {
        let c = compare(&or, m, &fx.ops).map_err(|e| format!("{}: {e}", m.name()))?;
        if c.worst() > 1e-8 {
            return Err(format!("{}: deviation {:.2e} ({c:?})", m.name(), c.worst()));
        }
        worst = worst.max(c.worst());
    }
    Ok(format!("8 methods, dim {}, max deviation {worst:.2e}", or.space.dim()))
}

/// Naive LR at complete rank with every orbital active against FCI.
fn fci_limit(fx: &Fixture) -> Result<String, String> {
    let n = fx.ints.n_elec;
    let rec = ground_state(&fx.ints, (n, fx.ints.n_orb), n)?;
    let id = MethodId::plain(Method::Naive);
    let m = build_matrices(id, &rec).map_err(|e| e.to_string())?;
    let sol = solve(&m).map_err(|e| e.to_string())?;
    let grads = ["x", "y", "z"].map(|l| property_gradient(id, &rec, &fx.ops, l));
    let grads = [grads[0].clone(), grads[1].clone(), grads[2].clone()].map(|g| g.map_err(|e| e.to_string()));
    let grads = [grads[0].clone()?, grads[1].clone()?, grads[2].clone()?];
    let f = oscillator_strengths(&sol, &grads);
    let dip = ["x", "y", "z"].map(|l| fx.ops.get_or_zero(l));
    let exact = fci(&fx.ints, &dip);
    let e0 = exact.energies[0];
    let gaps: Vec<f64> = exact.energies[1..].iter().map(|e| e - e0).collect();
    let fe: Vec<f64> = gaps.iter().zip(&exact.dipole_sq[1..]).map(|(w, d)| 2.0 / 3.0 * w * d).collect();
    let mine = clusters(&sol.omega, &f);
    let theirs = clusters(&gaps, &fe);
    if mine.len() != theirs.len() {
        return Err(format!("{} LR states vs {} FCI singlets", mine.len(), theirs.len()));
    }
    let dw = mine.iter().zip(&theirs).fold(0.0f64, |a, (x, y)| a.max((x.0 - y.0).abs()));
    let df = mine.iter().zip(&theirs).fold(0.0f64, |a, (x, y)| a.max((x.1 - y.1).abs()));
    within("omega", dw, 1e-8).and_then(|a| within("f", df, 1e-8).map(|b| format!("{a}; {b}; E0 {:.2e}", (rec.energy - e0).abs())))
}

/// Runs `suite` on the fixtures in `dir`.
pub fn run_suite(suite: Suite, dir: &Path) -> Result<CheckReport, CheckError> {
    let mut r = Runner { report: CheckReport::default() };
    let names = fixture_names(dir)?;
    if names.is_empty() {
        return Err(CheckError::MissingFixture { name: "*".into(), path: dir.join("*.json") });
    }
    let mut fixtures = BTreeMap::new();
    for name in &names {
        fixtures.insert(name.clone(), load_fixture(dir, name)?);
    }
    let get = |name: &str| fixtures.get(name).ok_or_else(|| format!("fixture {name} not bundled"));
    if matches!(suite, Suite::Fast | Suite::All) {
        for (name, fx) in &fixtures {
            r.check(format!("fixture-integrity/{name}"), || fixture_integrity(fx));
            for (key, e) in &fx.manifest.casci {
                r.check(format!("casci-reference/{name}/{key}"), || casci_reference(fx, key, *e));
            }
            for (key, e) in &fx.manifest.casscf {
                let cas = parse_cas(key).unwrap_or((0, 0));
                let dets = binom(cas.1, cas.0 / 2).pow(2);
                if dets <= 36 && fx.ints.n_orb <= 13 {
                    r.check(format!("casscf-reference/{name}/{key}"), || casscf_reference(fx, key, *e));
                }
            }
        }
        r.check("pool-sizes", pool_sizes);
        r.check("resource-table", resource_table);
        r.check("structural/lih_sto3g/2,4", || structural(&ground_state(&get("lih_sto3g")?.ints, (2, 4), 2)?));
        r.check("oracle/h2_631g/2,2", || oracle_equivalence(get("h2_631g")?, (2, 2), 2));
        r.check("fci-limit/h2_631g", || fci_limit(get("h2_631g")?));
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        for (name, cas) in [("h2_631g", (2, 2)), ("lih_sto3g", (2, 4)), ("h2o_sto3g", (4, 4)), ("h4_631g", (4, 4))] {
            r.check(format!("oracle/{name}/{},{}", cas.0, cas.1), || oracle_equivalence(get(name)?, cas, 2));
        }
        r.check("fci-limit/lih_sto3g", || fci_limit(get("lih_sto3g")?));
    }
    Ok(r.report)
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |a, i| a * (n - i) / (i + 1))
}
