//! Separation scans: one row per ρ, one column per (quantity, branch).

use rayon::prelude::*;
use resonance_core::interactions::{
    perturbative_resonance_energy, transfer_rate_fast, transfer_rate_slow,
};
use resonance_core::{AtomPair, BranchLabel, Error, PhysicalConstants};
use serde::Serialize;

use crate::config::{Quantity, RateModel, ResolvedScan};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Column {
    pub quantity: Quantity,
    #[serde(serialize_with = "branch_name")]
    pub branch: BranchLabel,
}

fn branch_name<S: serde::Serializer>(b: &BranchLabel, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(b.as_str())
}

impl Column {
    pub fn name(&self) -> String {
        format!("{}_{}", self.quantity, self.branch)
    }

    pub fn unit(&self) -> &'static str {
        match self.quantity {
            Quantity::Rates => "1/s",
            _ => "eV",
        }
    }
}

/// Convergence record of a Matsubara sum at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostic {
    pub column: usize,
    pub n_terms: usize,
    /// Bound on the neglected tail (eV).
    pub truncation_estimate: f64,
    /// eV
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub rho: f64,
    pub values: Vec<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
pub struct ScanTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl ScanTable {
    pub fn column_values(&self, index: usize) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.rho, r.values[index])).collect()
    }
}

/// Columns in declaration order: quantities outermost, then branches.
pub fn columns(scan: &ResolvedScan) -> Vec<Column> {
    scan.quantities()
        .iter()
        .flat_map(|&quantity| {
            scan.branches
                .iter()
                .map(move |&branch| Column { quantity, branch })
        })
        .collect()
}

fn physics_error(rho: f64, e: Error) -> CliError {
    match e {
        Error::StrongCoupling { n, xi, argument } => CliError::Physics(format!(
            "strong-coupling breakdown at rho = {rho} A, n = {n} (xi = {xi} eV): 1 + alpha*T = {argument}"
        )),
        other => CliError::Physics(format!("at rho = {rho} A: {other}")),
    }
}

/// Per-point evaluator that shares sums between columns.
struct Point<'a> {
    scan: &'a ResolvedScan,
    pair: AtomPair<'a>,
    resonance: Option<[(f64, usize, f64); 3]>,
    casimir_polder: Option<(f64, usize, f64)>,
}

impl<'a> Point<'a> {
    fn new(scan: &'a ResolvedScan, rho: f64) -> resonance_core::Result<Self> {
        let pair = AtomPair::new(scan.geometry(rho)?, scan.atom, &scan.dielectric);
        Ok(Self {
            scan,
            pair,
            resonance: None,
            casimir_polder: None,
        })
    }

    fn axes(&mut self) -> resonance_core::Result<[(f64, usize, f64); 3]> {
        if let Some(r) = self.resonance {
            return Ok(r);
        }
        let t = self.scan.temperature();
        let tol = &self.scan.tolerances;
        let r = if t > 0.0 {
            self.pair
                .resonance_energies(t, tol)?
                .axes
                .map(|a| (a.energy, a.n_terms_used, a.truncation_estimate))
        } else {
            let mut out = [(0.0, 0, 0.0); 3];
            for (o, b) in out.iter_mut().zip(BranchLabel::AXES) {
                *o = (self.pair.resonance_energy_zero_temperature(b, tol)?, 0, 0.0);
            }
            out
        };
        self.resonance = Some(r);
        Ok(r)
    }

    fn resonance(&mut self, branch: BranchLabel) -> resonance_core::Result<(f64, usize, f64)> {
        let axes = self.axes()?;
        Ok(match branch {
            BranchLabel::X => axes[0],
            BranchLabel::Y => axes[1],
            BranchLabel::Z => axes[2],
            BranchLabel::Isotropic => (
                axes.iter().map(|a| a.0).sum::<f64>() / 3.0,
                axes.iter().map(|a| a.1).max().unwrap_or(0),
                axes.iter().map(|a| a.2).sum::<f64>() / 3.0,
            ),
        })
    }

    fn casimir_polder(&mut self) -> resonance_core::Result<(f64, usize, f64)> {
        if let Some(r) = self.casimir_polder {
            return Ok(r);
        }
        let t = self.scan.temperature();
        let tol = &self.scan.tolerances;
        let r = if t > 0.0 {
            let r = self.pair.casimir_polder_energy(t, tol)?;
            (r.energy, r.n_terms_used, r.truncation_estimate)
        } else {
            (
                self.pair.casimir_polder_energy_zero_temperature(tol)?,
                0,
                0.0,
            )
        };
        self.casimir_polder = Some(r);
        Ok(r)
    }

    /// Value of `col` and, for Matsubara sums, its convergence record.
    fn cell(&mut self, col: &Column) -> resonance_core::Result<(f64, Option<(usize, f64)>)> {
        let consts = PhysicalConstants::CODATA;
        let summed = |(e, n, tail): (f64, usize, f64)| (e, (n > 0).then_some((n, tail)));
        Ok(match col.quantity {
            Quantity::Resonance => summed(self.resonance(col.branch)?),
            Quantity::CasimirPolder => summed(self.casimir_polder()?),
            Quantity::ZeroFrequency => (
                self.pair
                    .zero_frequency_term(col.branch, self.scan.temperature())?,
                None,
            ),
            Quantity::Perturbative => (
                perturbative_resonance_energy(
                    self.pair.geometry.separation(),
                    col.branch,
                    &self.scan.atom,
                    &consts,
                )?,
                None,
            ),
            Quantity::Rates => {
                let u = self.resonance(col.branch)?.0;
                let rate = match self.scan.config.scan.rate_model {
                    RateModel::Fast => transfer_rate_fast(u, &consts),
                    RateModel::Slow => transfer_rate_slow(u, self.scan.config.scan.delta, &consts)?,
                };
                (rate, None)
            }
        })
    }
}

/// Evaluate `columns` at one separation.
pub fn evaluate_row(scan: &ResolvedScan, rho: f64, columns: &[Column]) -> Result<Row, CliError> {
    let mut point = Point::new(scan, rho).map_err(|e| physics_error(rho, e))?;
    let mut values = Vec::with_capacity(columns.len());
    let mut diagnostics = Vec::new();
    for (i, col) in columns.iter().enumerate() {
        let (v, diag) = point.cell(col).map_err(|e| physics_error(rho, e))?;
        values.push(v);
        if let Some((n_terms, truncation_estimate)) = diag {
            diagnostics.push(Diagnostic {
                column: i,
                n_terms,
                truncation_estimate,
                energy: v,
            });
        }
    }
    Ok(Row {
        rho,
        values,
        diagnostics,
    })
}

/// Run the scan on `workers` threads (0 = all cores). Rows come back in ρ
/// order; the first failing ρ determines the error.
pub fn run_scan(scan: &ResolvedScan, workers: usize) -> Result<ScanTable, CliError> {
    let columns = columns(scan);
    let rhos = scan.rho_grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {workers} workers: {e}")))?;
    let rows: Vec<_> = pool.install(|| {
        rhos.par_iter()
            .map(|&rho| evaluate_row(scan, rho, &columns))
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ScanTable { columns, rows })
}
