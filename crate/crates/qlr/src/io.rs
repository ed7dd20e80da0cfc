//! FCIDUMP and dipole sidecar reading and writing.
//!
//! Both formats use 1-based orbital indices and `value i j [k l]` records. Records
//! are kept verbatim; every element that was never written takes the value of the
//! last written element of its permutational symmetry class.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use qlr_core::{IntegralSet, OneElectronOperatorSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: index {index} outside 0..={n_orb}")]
    IndexRange { line: usize, index: i64, n_orb: usize },
    #[error("header is missing {0}")]
    MissingKey(&'static str),
    #[error("dipole file declares {dipole} orbitals, integrals have {fcidump}")]
    DimensionMismatch { dipole: usize, fcidump: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

/// Parses a floating point token, accepting Fortran `D` exponents.
fn number(tok: &str, line: usize) -> Result<f64, ParseError> {
    let t = tok.replace(['D', 'd'], "E");
    t.parse::<f64>().map_err(|_| syntax(line, format!("'{}' is not a number", tok)))
}

fn index(tok: &str, line: usize, n_orb: usize) -> Result<usize, ParseError> {
    let i: i64 = tok.parse().map_err(|_| syntax(line, format!("'{}' is not an index", tok)))?;
    if i < 0 || i as usize > n_orb {
        return Err(ParseError::IndexRange { line, index: i, n_orb });
    }
    Ok(i as usize)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FcidumpHeader {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i32,
    pub orbsym: Vec<i64>,
    pub isym: i64,
}

/// Splits the namelist and returns it with the line number where the body starts.
fn parse_header(text: &str) -> Result<(FcidumpHeader, usize), ParseError> {
    let mut buf = String::new();
    let mut body = None;
    for (k, line) in text.lines().enumerate() {
        let t = line.trim();
        let upper = t.to_ascii_uppercase();
        let end = upper.ends_with("&END") || upper == "/" || upper.ends_with('/');
        let t = if end { t.trim_end_matches('/').trim_end_matches("&END").trim_end_matches("&end") } else { t };
        buf.push(' ');
        buf.push_str(t);
        if end {
            body = Some(k + 1);
            break;
        }
    }
    let body = body.ok_or_else(|| syntax(1, "namelist header is not terminated by &END or /"))?;
    let buf = buf.trim();
    let rest = buf
        .strip_prefix("&FCI")
        .or_else(|| buf.strip_prefix("&fci"))
        .ok_or_else(|| syntax(1, "header must start with &FCI"))?;
    let mut fields: HashMap<String, Vec<String>> = HashMap::new();
    let mut current: Option<String> = None;
    for piece in rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()) {
        if let Some((key, val)) = piece.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            let e = fields.entry(key.clone()).or_default();
            e.clear();
            if !val.trim().is_empty() {
                e.push(val.trim().to_string());
            }
            current = Some(key);
        } else if piece == "=" {
            continue;
        } else if let Some(key) = &current {
            fields.get_mut(key).unwrap().push(piece.to_string());
        } else {
            return Err(syntax(1, format!("unexpected header token '{}'", piece)));
        }
    }
    let int = |key: &'static str| -> Result<Option<i64>, ParseError> {
        match fields.get(key).and_then(|v| v.first()) {
            Some(v) => v.parse().map(Some).map_err(|_| syntax(1, format!("{} value '{}' is not an integer", key, v))),
            None => Ok(None),
        }
    };
    let norb = int("NORB")?.ok_or(ParseError::MissingKey("NORB"))?;
    let nelec = int("NELEC")?.ok_or(ParseError::MissingKey("NELEC"))?;
    if norb <= 0 || nelec < 0 {
        return Err(syntax(1, "NORB must be positive and NELEC non-negative"));
    }
    let orbsym = match fields.get("ORBSYM") {
        Some(v) => v.iter().map(|s| s.parse().map_err(|_| syntax(1, format!("ORBSYM entry '{}'", s)))).collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    Ok((
        FcidumpHeader {
            norb: norb as usize,
            nelec: nelec as usize,
            ms2: int("MS2")?.unwrap_or(0) as i32,
            orbsym,
            isym: int("ISYM")?.unwrap_or(1),
        },
        body,
    ))
}

fn g_class(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    let (a, b) = if p >= q { (p, q) } else { (q, p) };
    let (c, d) = if r >= s { (r, s) } else { (s, r) };
    if (a, b) >= (c, d) {
        (a, b, c, d)
    } else {
        (c, d, a, b)
    }
}

fn g_members(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    qlr_core::integrals::eightfold(p, q, r, s)
}

/// Parses FCIDUMP text.
pub fn parse_fcidump(text: &str) -> Result<IntegralSet, ParseError> {
    parse_fcidump_with_header(text).map(|x| x.0)
}

pub fn parse_fcidump_with_header(text: &str) -> Result<(IntegralSet, FcidumpHeader), ParseError> {
    let (hdr, body) = parse_header(text)?;
    let n = hdr.norb;
    let mut ints = IntegralSet::zeros(n, hdr.nelec);
    ints.ms2 = hdr.ms2;
    let mut g_written = vec![false; n * n * n * n];
    let mut g_last: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    let mut h_written = vec![false; n * n];
    let mut h_last: HashMap<(usize, usize), f64> = HashMap::new();
    for (k, line) in text.lines().enumerate().skip(body) {
        let lno = k + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(syntax(lno, format!("expected 'value i j k l', found {} fields", toks.len())));
        }
        let v = number(toks[0], lno)?;
        let i = index(toks[1], lno, n)?;
        let j = index(toks[2], lno, n)?;
        let a = index(toks[3], lno, n)?;
        let b = index(toks[4], lno, n)?;
        match (i, j, a, b) {
            (0, 0, 0, 0) => ints.e_core = v,
            (i, 0, 0, 0) if i > 0 => {}
            (i, j, 0, 0) if i > 0 && j > 0 => {
                let (p, q) = (i - 1, j - 1);
                ints.h[(p, q)] = v;
                h_written[p * n + q] = true;
                h_last.insert((p.max(q), p.min(q)), v);
            }
            (i, j, a, b) if i > 0 && j > 0 && a > 0 && b > 0 => {
                let (p, q, r, s) = (i - 1, j - 1, a - 1, b - 1);
                ints.g.set(p, q, r, s, v);
                g_written[ints.g.idx(p, q, r, s)] = true;
                g_last.insert(g_class(p, q, r, s), v);
            }
            _ => return Err(syntax(lno, "index pattern is neither e_core, h nor g")),
        }
    }
    for (&(p, q), &v) in &h_last {
        for (a, b) in [(p, q), (q, p)] {
            if !h_written[a * n + b] {
                ints.h[(a, b)] = v;
            }
        }
    }
    for (&(p, q, r, s), &v) in &g_last {
        for (a, b, c, d) in g_members(p, q, r, s) {
            let ix = ints.g.idx(a, b, c, d);
            if !g_written[ix] {
                ints.g.as_mut_slice()[ix] = v;
            }
        }
    }
    Ok((ints, hdr))
}

fn fmt_value(v: f64) -> String {
    format!("{:25.17e}", v)
}

/// Writes FCIDUMP text that parses back to bit-identical tensors.
///
/// Symmetric classes are written once; classes whose members differ are written in full.
pub fn write_fcidump(ints: &IntegralSet) -> String {
    let n = ints.n_orb;
    let mut out = String::new();
    let _ = writeln!(out, " &FCI NORB={},NELEC={},MS2={},", n, ints.n_elec, ints.ms2);
    let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if (r, s) > (p, q) {
                        continue;
                    }
                    let mut members: Vec<(usize, usize, usize, usize)> = g_members(p, q, r, s).to_vec();
                    members.sort_unstable();
                    members.dedup();
                    let v0 = ints.g.get(p, q, r, s);
                    let uniform = members.iter().all(|&(a, b, c, d)| ints.g.get(a, b, c, d).to_bits() == v0.to_bits());
                    if uniform {
                        if v0 != 0.0 || v0.is_sign_negative() {
                            let _ = writeln!(out, "{} {:4} {:4} {:4} {:4}", fmt_value(v0), p + 1, q + 1, r + 1, s + 1);
                        }
                    } else {
                        for (a, b, c, d) in members {
                            let _ = writeln!(out, "{} {:4} {:4} {:4} {:4}", fmt_value(ints.g.get(a, b, c, d)), a + 1, b + 1, c + 1, d + 1);
                        }
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let (a, b) = (ints.h[(p, q)], ints.h[(q, p)]);
            if a.to_bits() == b.to_bits() {
                if a != 0.0 || a.is_sign_negative() {
                    let _ = writeln!(out, "{} {:4} {:4} {:4} {:4}", fmt_value(a), p + 1, q + 1, 0, 0);
                }
            } else {
                let _ = writeln!(out, "{} {:4} {:4} {:4} {:4}", fmt_value(a), p + 1, q + 1, 0, 0);
                let _ = writeln!(out, "{} {:4} {:4} {:4} {:4}", fmt_value(b), q + 1, p + 1, 0, 0);
            }
        }
    }
    let _ = writeln!(out, "{} {:4} {:4} {:4} {:4}", fmt_value(ints.e_core), 0, 0, 0, 0);
    out
}

/// Parses the dipole sidecar: `NORB=<n>`, then `OPERATOR <label>` sections of `value i j` records.
pub fn parse_property_integrals(text: &str) -> Result<OneElectronOperatorSet, ParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(ParseError::MissingKey("NORB"))?;
    let first = first.trim().trim_end_matches(',');
    let norb = first
        .split_once('=')
        .filter(|(k, _)| k.trim().eq_ignore_ascii_case("NORB"))
        .ok_or(ParseError::MissingKey("NORB"))?
        .1
        .trim()
        .parse::<usize>()
        .map_err(|_| syntax(1, "NORB value is not an integer"))?;
    let mut set = OneElectronOperatorSet::new(norb);
    let mut written: Vec<Vec<bool>> = Vec::new();
    let mut last: Vec<HashMap<(usize, usize), f64>> = Vec::new();
    for (k, line) in lines {
        let lno = k + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0].chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            if !toks[0].eq_ignore_ascii_case("OPERATOR") {
                return Err(syntax(lno, format!("unknown section keyword '{}'", toks[0])));
            }
            if toks.len() != 2 {
                return Err(syntax(lno, "expected 'OPERATOR <label>'"));
            }
            set.push(toks[1], DMatrix::zeros(norb, norb));
            written.push(vec![false; norb * norb]);
            last.push(HashMap::new());
            continue;
        }
        if set.labels.is_empty() {
            return Err(syntax(lno, "record before the first OPERATOR section"));
        }
        if toks.len() != 3 {
            return Err(syntax(lno, format!("expected 'value i j', found {} fields", toks.len())));
        }
        let v = number(toks[0], lno)?;
        let i = index(toks[1], lno, norb)?;
        let j = index(toks[2], lno, norb)?;
        if i == 0 || j == 0 {
            return Err(ParseError::IndexRange { line: lno, index: 0, n_orb: norb });
        }
        let c = set.labels.len() - 1;
        let (p, q) = (i - 1, j - 1);
        set.matrices[c][(p, q)] = v;
        written[c][p * norb + q] = true;
        last[c].insert((p.max(q), p.min(q)), v);
    }
    for c in 0..set.labels.len() {
        for (&(p, q), &v) in &last[c] {
            for (a, b) in [(p, q), (q, p)] {
                if !written[c][a * norb + b] {
                    set.matrices[c][(a, b)] = v;
                }
            }
        }
    }
    Ok(set)
}

pub fn write_property_integrals(set: &OneElectronOperatorSet) -> String {
    let n = set.n_orb;
    let mut out = format!("NORB={}\n", n);
    for (label, m) in set.labels.iter().zip(&set.matrices) {
        let _ = writeln!(out, "OPERATOR {}", label);
        for p in 0..n {
            for q in 0..=p {
                let (a, b) = (m[(p, q)], m[(q, p)]);
                if a.to_bits() == b.to_bits() {
                    if a != 0.0 || a.is_sign_negative() {
                        let _ = writeln!(out, "{} {} {}", fmt_value(a), p + 1, q + 1);
                    }
                } else {
                    let _ = writeln!(out, "{} {} {}", fmt_value(a), p + 1, q + 1);
                    let _ = writeln!(out, "{} {} {}", fmt_value(b), q + 1, p + 1);
                }
            }
        }
    }
    out
}

/// Checks that dipole integrals match the orbital count of the integrals.
pub fn check_dimensions(ints: &IntegralSet, ops: &OneElectronOperatorSet) -> Result<(), ParseError> {
    if ints.n_orb != ops.n_orb {
        return Err(ParseError::DimensionMismatch { dipole: ops.n_orb, fcidump: ints.n_orb });
    }
    Ok(())
}

/// Reads a file, or standard input for `-`.
pub fn read_source(path: &Path) -> Result<String, ParseError> {
    let io = |source| ParseError::Io { path: path.display().to_string(), source };
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

pub fn read_fcidump(path: &Path) -> Result<IntegralSet, ParseError> {
    parse_fcidump(&read_source(path)?)
}

pub fn read_property_integrals(path: &Path) -> Result<OneElectronOperatorSet, ParseError> {
    parse_property_integrals(&read_source(path)?)
}
