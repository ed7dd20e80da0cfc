//! Plain-text table of measurement resources per method.

use std::fmt::Write;

use qlr_core::qlr::{resource_estimate, Feasibility, MethodId, ResourceEstimate};

fn adjusted_label(r: &ResourceEstimate) -> String {
    match (r.feasibility, r.adjusted_terms) {
        (Feasibility::NearTermDecomposition, Some(n)) => format!("decomp: {n}"),
        (_, Some(n)) => format!("herm: {n}"),
        (_, None) => "-".to_string(),
    }
}

/// One row per method: name, generic terms, feasibility, adjusted terms, terms used.
pub fn resource_rows(methods: &[MethodId]) -> Vec<[String; 5]> {
    methods
        .iter()
        .map(|&m| {
            let r = resource_estimate(m);
            [m.name(), r.generic_terms.to_string(), r.feasibility.label().to_string(), adjusted_label(&r), r.effective_terms().to_string()]
        })
        .collect()
}

pub fn resource_table(methods: &[MethodId]) -> String {
    let header = ["method", "terms", "feasibility", "adjusted", "used"].map(String::from);
    let rows = resource_rows(methods);
    let mut widths = header.clone().map(|h| h.len());
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut s = String::new();
    for r in std::iter::once(&header).chain(&rows) {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(s, "{}", cells.join("  ").trim_end()).unwrap();
    }
    s
}
