use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qlr::document::ResultDocument;
use qlr::fixtures::{dipole_path, fcidump_path, fixture_dir};
use qlr::io::{parse_fcidump, write_fcidump};

fn qlr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlr")).args(args).output().expect("binary runs")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qlr-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn resources_prints_one_row_per_method() {
    let o = qlr(&["resources"]);
    assert!(o.status.success(), "{}", text(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 9, "{out}");
    assert!(out.lines().any(|l| l.starts_with("all-ST ") && l.contains("decomp: 9")));
    let o = qlr(&["resources", "--method", "ST", "--herm"]);
    assert!(String::from_utf8(o.stdout).unwrap().lines().any(|l| l.starts_with("HST ")));
}

#[test]
fn run_writes_document_and_spectra() {
    let dir = scratch("run");
    let (fd, dp) = (fcidump_path("h2_631g"), dipole_path("h2_631g"));
    let o = qlr(&["run", "--fcidump", path(&fd), "--dipoles", path(&dp), "--active", "2,2", "--method", "naive", "--method", "all-ST", "--out", path(&dir)]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("E0 = "));
    let doc = ResultDocument::from_json(&std::fs::read_to_string(dir.join("result.json")).unwrap()).unwrap();
    assert_eq!(doc.methods.len(), 2);
    assert!(dir.join("spectrum_naive.csv").exists() && dir.join("spectrum_all-ST.csv").exists());

    // re-broaden from the saved document
    let o = qlr(&["spectrum", "--result", path(&dir.join("result.json")), "--method", "naive", "--broadening", "gaussian", "--points", "50"]);
    assert!(o.status.success(), "{}", text(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 51);
    assert_eq!(csv.lines().next(), Some("energy_ev,intensity"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_and_flags_combine() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    let body = format!("fcidump = {}\ndipoles = {}\nactive = 2,2\nmethod = proj\nout = {}\n", path(&fcidump_path("h2_631g")), path(&dipole_path("h2_631g")), path(&dir));
    std::fs::write(&cfg, body).unwrap();
    let o = qlr(&["run", "--config", path(&cfg), "--method", "ST"]);
    assert!(o.status.success(), "{}", text(&o));
    let doc = ResultDocument::from_json(&std::fs::read_to_string(dir.join("result.json")).unwrap()).unwrap();
    let names: Vec<&str> = doc.methods.iter().map(|m| m.method.as_str()).collect();
    assert_eq!(names, ["ST"]);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn herm_on_naive_fails_before_computing() {
    let dir = scratch("herm");
    let o = qlr(&["run", "--fcidump", path(&fcidump_path("h2_631g")), "--method", "naive", "--herm", "--out", path(&dir)]);
    assert!(!o.status.success());
    assert!(text(&o).contains("configuration"), "{}", text(&o));
    assert!(!dir.join("result.json").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_input_is_reported() {
    let o = qlr(&["run", "--fcidump", "/nonexistent/x.fcidump"]);
    assert!(!o.status.success());
    assert!(text(&o).contains("integrals"), "{}", text(&o));
}

#[test]
fn check_flags_a_tampered_fixture() {
    let dir = scratch("tamper");
    for name in ["h2_631g", "lih_sto3g"] {
        for ext in ["fcidump", "dipole", "json"] {
            std::fs::copy(fixture_dir().join(format!("{name}.{ext}")), dir.join(format!("{name}.{ext}"))).unwrap();
        }
    }
    let clean = qlr(&["check", "--fast", "--fixtures", path(&dir)]);
    assert!(clean.status.success(), "{}", text(&clean));
    let p = dir.join("h2_631g.fcidump");
    let mut ints = parse_fcidump(&std::fs::read_to_string(&p).unwrap()).unwrap();
    ints.h[(0, 0)] += 1e-3;
    std::fs::write(&p, write_fcidump(&ints)).unwrap();
    let o = qlr(&["check", "--fast", "--fixtures", path(&dir)]);
    assert!(!o.status.success());
    let out = text(&o);
    let bad: Vec<&str> = out.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert!(bad.iter().any(|l| l.contains("fixture-integrity/h2_631g") && l.contains("rhf-energy")), "{out}");
    assert!(bad.iter().all(|l| l.contains("h2_631g")), "{out}");
    std::fs::remove_dir_all(&dir).unwrap();
}
