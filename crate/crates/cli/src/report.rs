//! Summary of a scan: tail exponents, sign crossovers, classical-limit
//! deviation and the least converged point.

use std::fmt::Write as _;

use resonance_core::analysis::{classical_asymptote_check, find_sign_crossovers, fit_power_law};
use resonance_core::{AtomPair, BranchLabel, PhysicalConstants, SeparationCurve};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Quantity, ResolvedScan};
use crate::output::{metadata_header, number};
use crate::scan::{evaluate_row, run_scan, ScanTable};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct FitEntry {
    pub column: String,
    pub window: (f64, f64),
    /// `None` with a reason when no fit is possible.
    pub exponent: Option<f64>,
    pub r_squared: Option<f64>,
    pub n_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingEntry {
    pub column: String,
    pub rho_star: f64,
    pub direction: String,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalEntry {
    pub column: String,
    pub max_relative_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstPoint {
    pub column: String,
    pub rho: f64,
    pub n_terms: usize,
    /// eV
    pub truncation_estimate: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub fits: Vec<FitEntry>,
    pub crossings: Vec<CrossingEntry>,
    /// Separation beyond which the classical comparison applies (Å).
    pub classical_threshold: Option<f64>,
    pub classical: Vec<ClassicalEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub worst_truncation: Option<WorstPoint>,
}

fn curve(table: &ScanTable, i: usize) -> Result<SeparationCurve, CliError> {
    SeparationCurve::new(table.column_values(i), table.columns[i].name())
        .map_err(|e| CliError::Physics(format!("column {}: {e}", table.columns[i].name())))
}

/// Fits over the last decade of the scan.
fn fits(table: &ScanTable) -> Result<Vec<FitEntry>, CliError> {
    let rho_max = table.rows.last().map_or(0.0, |r| r.rho);
    let rho_min = table.rows.first().map_or(0.0, |r| r.rho);
    let window = ((rho_max / 10.0).max(rho_min), rho_max);
    let mut out = Vec::new();
    for (i, col) in table.columns.iter().enumerate() {
        let c = curve(table, i)?;
        let n_points = c
            .points()
            .iter()
            .filter(|p| p.0 >= window.0 && p.0 <= window.1)
            .count();
        let entry = match fit_power_law(&c, window) {
            Ok(f) => FitEntry {
                column: col.name(),
                window,
                exponent: Some(f.exponent),
                r_squared: Some(f.r_squared),
                n_points: f.n_points,
                note: None,
            },
            Err(e) => FitEntry {
                column: col.name(),
                window,
                exponent: None,
                r_squared: None,
                n_points,
                note: Some(e.to_string()),
            },
        };
        out.push(entry);
    }
    Ok(out)
}

fn crossings(scan: &ResolvedScan, table: &ScanTable) -> Result<Vec<CrossingEntry>, CliError> {
    let mut out = Vec::new();
    for (i, col) in table.columns.iter().enumerate() {
        let c = curve(table, i)?;
        let one = [*col];
        let mut failure = None;
        let report = find_sign_crossovers(&c, |rho| match evaluate_row(scan, rho, &one) {
            Ok(row) => Ok(row.values[0]),
            Err(e) => {
                let msg = e.to_string();
                failure = Some(e);
                Err(resonance_core::Error::Domain(msg))
            }
        });
        let report = match (report, failure) {
            (Ok(r), _) => r,
            (Err(_), Some(e)) => return Err(e),
            (Err(e), None) => return Err(CliError::Physics(format!("{}: {e}", col.name()))),
        };
        out.extend(report.crossings.into_iter().map(|x| CrossingEntry {
            column: col.name(),
            rho_star: x.rho_star,
            direction: x.direction.to_string(),
            bracket: x.bracket,
        }));
    }
    Ok(out)
}

fn classical(
    scan: &ResolvedScan,
    table: &ScanTable,
    notes: &mut Vec<String>,
) -> Result<(Option<f64>, Vec<ClassicalEntry>), CliError> {
    let t = scan.temperature();
    if t <= 0.0 {
        notes.push("classical comparison skipped: zero temperature".into());
        return Ok((None, Vec::new()));
    }
    let consts = PhysicalConstants::CODATA;
    let threshold = 20.0 * consts.thermal_length(t);
    let rho_max = table.rows.last().map_or(0.0, |r| r.rho);
    if rho_max < threshold {
        notes.push(format!(
            "classical comparison needs rho_max >= {} A at {t} K",
            number(threshold)
        ));
        return Ok((Some(threshold), Vec::new()));
    }
    let mut out = Vec::new();
    for (i, col) in table.columns.iter().enumerate() {
        if col.quantity != Quantity::Resonance {
            continue;
        }
        let c = curve(table, i)?;
        let static_tensor = |rho: f64| -> f64 {
            let pair = match scan.geometry(rho) {
                Ok(g) => AtomPair::new(g, scan.atom, &scan.dielectric),
                Err(_) => return f64::NAN,
            };
            match pair.tensor(0.0) {
                Ok(t) => {
                    let d = t.diagonal();
                    match col.branch {
                        BranchLabel::X => d[0],
                        BranchLabel::Y => d[1],
                        BranchLabel::Z => d[2],
                        BranchLabel::Isotropic => (d[0] + d[1] + d[2]) / 3.0,
                    }
                }
                Err(_) => f64::NAN,
            }
        };
        let dev = classical_asymptote_check(&c, &scan.atom, t, static_tensor, &consts)
            .map_err(|e| CliError::Physics(format!("{}: {e}", col.name())))?;
        out.push(ClassicalEntry {
            column: col.name(),
            max_relative_deviation: dev,
        });
    }
    Ok((Some(threshold), out))
}

fn worst_truncation(table: &ScanTable) -> Option<WorstPoint> {
    let mut worst: Option<WorstPoint> = None;
    for row in &table.rows {
        for d in &row.diagnostics {
            let relative = if d.energy == 0.0 {
                if d.truncation_estimate == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                d.truncation_estimate / d.energy.abs()
            };
            if worst.as_ref().map_or(true, |w| relative > w.relative) {
                worst = Some(WorstPoint {
                    column: table.columns[d.column].name(),
                    rho: row.rho,
                    n_terms: d.n_terms,
                    truncation_estimate: d.truncation_estimate,
                    relative,
                });
            }
        }
    }
    worst
}

/// Scan with `workers` threads and analyse the result.
pub fn run_report(scan: &ResolvedScan, workers: usize) -> Result<Report, CliError> {
    let table = run_scan(scan, workers)?;
    analyse(scan, &table)
}

pub fn analyse(scan: &ResolvedScan, table: &ScanTable) -> Result<Report, CliError> {
    let mut notes = Vec::new();
    let (classical_threshold, classical) = classical(scan, table, &mut notes)?;
    if scan.temperature() == 0.0 {
        notes.push(
            "zero temperature: quadrature replaces Matsubara sums, no truncation record".into(),
        );
    }
    Ok(Report {
        fits: fits(table)?,
        crossings: crossings(scan, table)?,
        classical_threshold,
        classical,
        notes,
        worst_truncation: worst_truncation(table),
    })
}

impl Report {
    pub fn to_text(&self, scan: &ResolvedScan) -> String {
        let mut out = metadata_header(scan, "report");
        out.push_str("\npower-law fits\n");
        for f in &self.fits {
            match (f.exponent, f.r_squared) {
                (Some(e), Some(r2)) => {
                    let _ = writeln!(
                        out,
                        "  {:<24} exponent {e:.4}  r2 {r2:.6}  points {}  window [{}, {}] A",
                        f.column,
                        f.n_points,
                        number(f.window.0),
                        number(f.window.1)
                    );
                }
                _ => {
                    let _ = writeln!(
                        out,
                        "  {:<24} not fitted: {}",
                        f.column,
                        f.note.as_deref().unwrap_or("no fit")
                    );
                }
            }
        }
        out.push_str("\nsign crossovers\n");
        if self.crossings.is_empty() {
            out.push_str("  none\n");
        }
        for c in &self.crossings {
            let _ = writeln!(
                out,
                "  {:<24} rho* = {:.2} A  {}  bracket [{}, {}] A",
                c.column,
                c.rho_star,
                c.direction,
                number(c.bracket.0),
                number(c.bracket.1)
            );
        }
        out.push_str("\nclassical asymptote\n");
        for c in &self.classical {
            let _ = writeln!(
                out,
                "  {:<24} max relative deviation {} beyond {} A",
                c.column,
                number(c.max_relative_deviation),
                number(self.classical_threshold.unwrap_or(0.0))
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "  {n}");
        }
        out.push_str("\nworst truncation\n");
        match &self.worst_truncation {
            Some(w) => {
                let _ = writeln!(
                    out,
                    "  {} at rho = {} A: {} terms, tail estimate {} eV (relative {})",
                    w.column,
                    number(w.rho),
                    w.n_terms,
                    number(w.truncation_estimate),
                    number(w.relative)
                );
            }
            None => out.push_str("  no Matsubara sums in this scan\n"),
        }
        out
    }

    pub fn to_json(&self, scan: &ResolvedScan) -> Value {
        json!({
            "program": format!("resonance {}", env!("CARGO_PKG_VERSION")),
            "config": scan.config,
            "report": self,
        })
    }
}
