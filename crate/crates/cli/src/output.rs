//! Artifact formatting. Tables are tab-delimited with a `#` header that
//! embeds the resolved configuration; numbers use the shortest decimal that
//! round-trips to the same `f64`.

use std::fmt::Write as _;

use resonance_core::PhysicalConstants;
use serde_json::{json, Value};

use crate::config::ResolvedScan;
use crate::scan::ScanTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Object,
}

pub fn number(x: f64) -> String {
    format!("{x:e}")
}

pub fn constants_json(c: &PhysicalConstants) -> Value {
    json!({
        "hbar_c": {"value": c.hbar_c, "unit": "eV*A"},
        "k_b": {"value": c.k_b, "unit": "eV/K"},
        "hbar": {"value": c.hbar, "unit": "eV*s"},
        "bohr_radius": {"value": c.bohr_radius, "unit": "A"},
    })
}

pub fn constants_table(c: &PhysicalConstants) -> String {
    let mut out = String::from("name\tvalue\tunit\n");
    for (name, value, unit) in [
        ("hbar_c", c.hbar_c, "eV*A"),
        ("k_b", c.k_b, "eV/K"),
        ("hbar", c.hbar, "eV*s"),
        ("bohr_radius", c.bohr_radius, "A"),
    ] {
        let _ = writeln!(out, "{name}\t{}\t{unit}", number(value));
    }
    out
}

/// `#`-prefixed block describing the run.
pub fn metadata_header(scan: &ResolvedScan, kind: &str) -> String {
    let c = PhysicalConstants::CODATA;
    let mut out = String::new();
    let _ = writeln!(out, "# resonance {} {kind}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        out,
        "# constants: hbar_c = {} eV*A, k_b = {} eV/K, hbar = {} eV*s",
        number(c.hbar_c),
        number(c.k_b),
        number(c.hbar)
    );
    let _ = writeln!(out, "# units: rho in A, energies in eV, rates in 1/s");
    let _ = writeln!(out, "# resolved configuration:");
    for line in scan.config_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "#   {line}");
        }
    }
    out
}

pub fn scan_table(scan: &ResolvedScan, table: &ScanTable) -> String {
    let mut out = metadata_header(scan, "scan");
    out.push_str("rho");
    for c in &table.columns {
        out.push('\t');
        out.push_str(&c.name());
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&number(row.rho));
        for &v in &row.values {
            out.push('\t');
            out.push_str(&number(v));
        }
        out.push('\n');
    }
    out
}

pub fn scan_object(scan: &ResolvedScan, table: &ScanTable) -> Value {
    json!({
        "program": format!("resonance {}", env!("CARGO_PKG_VERSION")),
        "config": scan.config,
        "constants": constants_json(&PhysicalConstants::CODATA),
        "columns": table.columns.iter().map(|c| json!({
            "name": c.name(),
            "quantity": c.quantity,
            "branch": c.branch.as_str(),
            "unit": c.unit(),
        })).collect::<Vec<_>>(),
        "rows": table.rows.iter().map(|r| json!({
            "rho": r.rho,
            "values": r.values,
        })).collect::<Vec<_>>(),
    })
}
