//! Resonance energies, Casimir-Polder energies and transfer rates.
//!
//! Finite-temperature quantities are Matsubara sums
//!
//! ```text
//! U_j    = 2 k_B T Σ′ₙ ln[1 + α(iξₙ) T_jj(ρ|iξₙ)]
//! U_CP   = −k_B T Σ′ₙ α²(iξₙ) {Σⱼ T_jj² − 2 T_xz T_zx}
//! ```
//!
//! where the prime halves the n = 0 term. The zero-temperature resonance
//! energy is the contour integral `(1/π) ∫₀^∞ ln[1 + α(iξ) T_jj(ρ|iξ)] dξ`.

use std::fmt;
use std::str::FromStr;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::greens::{self, GeometryConfig, TensorComponents};
use crate::quadrature;
use crate::spectra::{DielectricResponse, MatsubaraGrid, PolarizabilityModel};
use crate::Vector3;

/// Orientation of the shared excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchLabel {
    X,
    Y,
    Z,
    /// Equal-weight mean of the three axis branches.
    Isotropic,
}

impl BranchLabel {
    pub const AXES: [BranchLabel; 3] = [BranchLabel::X, BranchLabel::Y, BranchLabel::Z];
    pub const ALL: [BranchLabel; 4] = [
        BranchLabel::X,
        BranchLabel::Y,
        BranchLabel::Z,
        BranchLabel::Isotropic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BranchLabel::X => "x",
            BranchLabel::Y => "y",
            BranchLabel::Z => "z",
            BranchLabel::Isotropic => "isotropic",
        }
    }

    fn axis(&self) -> Option<usize> {
        match self {
            BranchLabel::X => Some(0),
            BranchLabel::Y => Some(1),
            BranchLabel::Z => Some(2),
            BranchLabel::Isotropic => None,
        }
    }

    /// Apply `f` to the axis branch, or average it over the three axes.
    fn reduce<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(usize) -> Result<f64>,
    {
        match self.axis() {
            Some(i) => f(i),
            None => Ok((f(0)? + f(1)? + f(2)?) / 3.0),
        }
    }
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BranchLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(BranchLabel::X),
            "y" => Ok(BranchLabel::Y),
            "z" => Ok(BranchLabel::Z),
            "isotropic" | "iso" => Ok(BranchLabel::Isotropic),
            other => Err(Error::domain(format!("unknown branch {other:?}"))),
        }
    }
}

/// Energy of a truncated Matsubara sum with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionResult {
    /// eV
    pub energy: f64,
    pub n_terms_used: usize,
    /// Bound on the neglected tail (eV).
    pub truncation_estimate: f64,
}

/// Resonance energies of the three axis branches from one Matsubara sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchEnergies {
    pub axes: [InteractionResult; 3],
}

impl BranchEnergies {
    pub fn get(&self, branch: BranchLabel) -> InteractionResult {
        match branch.axis() {
            Some(i) => self.axes[i],
            None => InteractionResult {
                energy: self.axes.iter().map(|r| r.energy).sum::<f64>() / 3.0,
                n_terms_used: self.axes.iter().map(|r| r.n_terms_used).max().unwrap_or(0),
                truncation_estimate: self.axes.iter().map(|r| r.truncation_estimate).sum::<f64>()
                    / 3.0,
            },
        }
    }
}

/// Roots of the nonretarded pole equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleResult {
    pub omega_antisymmetric: f64,
    pub omega_symmetric: f64,
    /// `ħ[ω_r(ρ) − ω_r(∞)]` on the antisymmetric root (eV).
    pub energy_shift: f64,
}

/// Convergence controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance of Matsubara sums and quadratures.
    pub rel_tol: f64,
    /// Absolute tolerance of zero-temperature quadratures (eV).
    pub abs_tol: f64,
    /// Hard cap on Matsubara terms.
    pub max_terms: usize,
}

impl Tolerances {
    pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::domain(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::domain(format!(
                "abs_tol must be >= 0, got {}",
                self.abs_tol
            )));
        }
        if self.max_terms < 2 {
            return Err(Error::domain("max_terms must be >= 2"));
        }
        Ok(())
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_terms: Self::DEFAULT_MAX_TERMS,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: f64,
    last: f64,
}

/// Sum `K` Matsubara series side by side until each satisfies both the
/// last-term and the geometric-tail criteria.
fn matsubara_sum<const K: usize, F>(
    grid: &MatsubaraGrid,
    decay_per_step: f64,
    tol: &Tolerances,
    mut term: F,
) -> Result<([Accumulator; K], usize, [f64; K])>
where
    F: FnMut(usize, f64) -> Result<[f64; K]>,
{
    let mut acc = [Accumulator::default(); K];
    let tail_factor = if decay_per_step < 1.0 {
        decay_per_step / (1.0 - decay_per_step)
    } else {
        f64::INFINITY
    };
    let mut n = 0;
    loop {
        let values = term(n, grid.frequency(n))?;
        let w = MatsubaraGrid::weight(n);
        for (a, v) in acc.iter_mut().zip(values) {
            a.last = w * v;
            a.sum += a.last;
        }
        n += 1;
        if n < 2 {
            continue;
        }
        let converged = acc.iter().all(|a| {
            let threshold = tol.rel_tol * a.sum.abs();
            let last = a.last.abs();
            last <= threshold && (last == 0.0 || last * tail_factor <= threshold)
        });
        if converged || n >= tol.max_terms {
            let tails = acc.map(|a| {
                if a.last == 0.0 {
                    0.0
                } else {
                    a.last.abs() * tail_factor.min(1e300)
                }
            });
            return Ok((acc, n, tails));
        }
    }
}

/// Two atoms near a dielectric half-space.
#[derive(Debug, Clone, Copy)]
pub struct AtomPair<'a> {
    pub geometry: GeometryConfig,
    pub atom: PolarizabilityModel,
    pub dielectric: &'a DielectricResponse,
    pub constants: PhysicalConstants,
}

impl<'a> AtomPair<'a> {
    pub fn new(
        geometry: GeometryConfig,
        atom: PolarizabilityModel,
        dielectric: &'a DielectricResponse,
    ) -> Self {
        Self {
            geometry,
            atom,
            dielectric,
            constants: PhysicalConstants::CODATA,
        }
    }

    pub fn with_constants(mut self, constants: PhysicalConstants) -> Self {
        self.constants = constants;
        self
    }

    /// Total coupling tensor at `iξ`.
    pub fn tensor(&self, xi: f64) -> Result<TensorComponents> {
        greens::total_tensor_imag(&self.geometry, self.dielectric, xi, &self.constants)
    }

    fn grid(&self, temperature: f64) -> Result<MatsubaraGrid> {
        MatsubaraGrid::new(temperature, 1, &self.constants)
    }

    /// Per-step decay `e^(−ξ₁ ρ/ħc)` of the retardation factor on the
    /// shortest path between the atoms.
    fn decay_per_step(&self, grid: &MatsubaraGrid) -> f64 {
        (-grid.spacing() * self.geometry.separation() / self.constants.hbar_c).exp()
    }

    fn log_terms(&self, n: usize, xi: f64) -> Result<[f64; 3]> {
        let alpha = self.atom.imag(xi);
        let t = self.tensor(xi)?.diagonal();
        let mut out = [0.0; 3];
        for (o, tjj) in out.iter_mut().zip(t) {
            let x = alpha * tjj;
            if !(1.0 + x > 0.0) {
                return Err(Error::StrongCoupling {
                    n,
                    xi,
                    argument: 1.0 + x,
                });
            }
            *o = x.ln_1p();
        }
        Ok(out)
    }

    /// Finite-temperature resonance energies of the x, y and z branches.
    pub fn resonance_energies(&self, temperature: f64, tol: &Tolerances) -> Result<BranchEnergies> {
        tol.validate()?;
        let grid = self.grid(temperature)?;
        let prefactor = 2.0 * self.constants.thermal_energy(temperature);
        let (acc, n, tails) =
            matsubara_sum::<3, _>(&grid, self.decay_per_step(&grid), tol, |n, xi| {
                self.log_terms(n, xi)
            })?;
        let mut axes = [InteractionResult {
            energy: 0.0,
            n_terms_used: n,
            truncation_estimate: 0.0,
        }; 3];
        for ((r, a), tail) in axes.iter_mut().zip(acc).zip(tails) {
            r.energy = prefactor * a.sum;
            r.truncation_estimate = prefactor * tail;
        }
        Ok(BranchEnergies { axes })
    }

    /// `U_j = 2 k_B T Σ′ ln[1 + α(iξₙ) T_jj(ρ|iξₙ)]`.
    pub fn resonance_energy_branch(
        &self,
        branch: BranchLabel,
        temperature: f64,
        tol: &Tolerances,
    ) -> Result<InteractionResult> {
        Ok(self.resonance_energies(temperature, tol)?.get(branch))
    }

    /// `U_CP = −k_B T Σ′ α²(iξₙ) {Σⱼ T_jj² − 2 T_xz T_zx}`.
    pub fn casimir_polder_energy(
        &self,
        temperature: f64,
        tol: &Tolerances,
    ) -> Result<InteractionResult> {
        tol.validate()?;
        let grid = self.grid(temperature)?;
        let prefactor = -self.constants.thermal_energy(temperature);
        // α² T² decays twice as fast as α T
        let decay = self.decay_per_step(&grid).powi(2);
        let (acc, n, tails) = matsubara_sum::<1, _>(&grid, decay, tol, |_, xi| {
            let alpha = self.atom.imag(xi);
            Ok([alpha * alpha * self.tensor(xi)?.casimir_polder_bracket()])
        })?;
        Ok(InteractionResult {
            energy: prefactor * acc[0].sum,
            n_terms_used: n,
            truncation_estimate: prefactor.abs() * tails[0],
        })
    }

    /// Halved n = 0 term of the resonance sum, `k_B T ln[1 + α(0) T_jj(ρ|0)]`.
    pub fn zero_frequency_term(&self, branch: BranchLabel, temperature: f64) -> Result<f64> {
        if !(temperature > 0.0) {
            return Err(Error::domain(format!(
                "temperature must be positive, got {temperature} K"
            )));
        }
        let logs = self.log_terms(0, 0.0)?;
        let kt = self.constants.thermal_energy(temperature);
        branch.reduce(|i| Ok(kt * logs[i]))
    }

    /// Frequency scale on which zero-temperature integrands vary.
    fn integration_scale(&self) -> f64 {
        self.atom
            .omega_resonance()
            .min(self.constants.hbar_c / self.geometry.separation())
    }

    /// `U = (1/π) ∫₀^∞ ln[1 + α(iξ) T_jj(ρ|iξ)] dξ`.
    ///
    /// The quadrature stops when its error estimate is below
    /// `max(abs_tol, rel_tol·|U|)`; at separations where `|U|` itself is far
    /// below `abs_tol` pass a smaller `abs_tol`.
    pub fn resonance_energy_zero_temperature(
        &self,
        branch: BranchLabel,
        tol: &Tolerances,
    ) -> Result<f64> {
        tol.validate()?;
        branch.reduce(|i| {
            let mut index = 0usize;
            let (r, _) = quadrature::integrate_semi_infinite(
                |xi| {
                    index += 1;
                    let alpha = self.atom.imag(xi);
                    let x = alpha * self.tensor(xi)?.diagonal()[i];
                    if !(1.0 + x > 0.0) {
                        return Err(Error::StrongCoupling {
                            n: index,
                            xi,
                            argument: 1.0 + x,
                        });
                    }
                    Ok(x.ln_1p())
                },
                self.integration_scale(),
                tol.abs_tol * std::f64::consts::PI,
                tol.rel_tol,
            )?;
            Ok(r.value / std::f64::consts::PI)
        })
    }

    /// Zero-temperature limit of the Casimir-Polder sum,
    /// `−(1/2π) ∫₀^∞ α²(iξ) {Σⱼ T_jj² − 2 T_xz T_zx} dξ`.
    pub fn casimir_polder_energy_zero_temperature(&self, tol: &Tolerances) -> Result<f64> {
        tol.validate()?;
        let two_pi = 2.0 * std::f64::consts::PI;
        let (r, _) = quadrature::integrate_semi_infinite(
            |xi| {
                let alpha = self.atom.imag(xi);
                Ok(alpha * alpha * self.tensor(xi)?.casimir_polder_bracket())
            },
            self.integration_scale(),
            tol.abs_tol * two_pi,
            tol.rel_tol,
        )?;
        Ok(-r.value / two_pi)
    }
}

/// Static free-space element for a pair a distance `rho` apart along x.
fn static_free_element(rho: f64, axis: usize) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!(
            "separation must be positive, got {rho}"
        )));
    }
    let r3 = rho * rho * rho;
    Ok(if axis == 0 { -2.0 / r3 } else { 1.0 / r3 })
}

/// Free-space real-frequency tensor diagonal for a pair along x.
fn real_free_diagonal(rho: f64, omega: f64, constants: &PhysicalConstants) -> Result<[f64; 3]> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!(
            "separation must be positive, got {rho}"
        )));
    }
    Ok(greens::free_tensor_real(&Vector3::new(rho, 0.0, 0.0), omega, constants)?.diagonal())
}

fn pole_for_coupling(omega_j: f64, coupling: f64) -> Result<PoleResult> {
    if !(coupling.abs() < 1.0) {
        return Err(Error::OscillatorInstability {
            coupling: coupling.abs(),
        });
    }
    // ω_j(√(1+x) − 1) without cancellation
    let shift = omega_j * coupling / ((1.0 + coupling).sqrt() + 1.0);
    Ok(PoleResult {
        omega_antisymmetric: omega_j * (1.0 + coupling).sqrt(),
        omega_symmetric: omega_j * (1.0 - coupling).sqrt(),
        energy_shift: shift,
    })
}

/// Solve `1 − α(ω)² T² = 0` with the static free-space tensor of a pair a
/// distance `rho` apart along x.
///
/// The roots are `ω_j √(1 ± α(0)T)`. The antisymmetric (long-lived) branch is
/// taken as `ω_j √(1 + α(0)T)`, the root whose first-order shift is
/// `+ω_j α(0) T / 2`. For the isotropic branch the three axis results are
/// averaged.
pub fn pole_frequencies_nonretarded(
    rho: f64,
    branch: BranchLabel,
    atom: &PolarizabilityModel,
) -> Result<PoleResult> {
    let solve = |axis: usize| -> Result<PoleResult> {
        let t = static_free_element(rho, axis)?;
        pole_for_coupling(atom.omega_resonance(), atom.alpha_static() * t)
    };
    match branch.axis() {
        Some(i) => solve(i),
        None => {
            let roots = [solve(0)?, solve(1)?, solve(2)?];
            let mean = |f: fn(&PoleResult) -> f64| roots.iter().map(f).sum::<f64>() / 3.0;
            Ok(PoleResult {
                omega_antisymmetric: mean(|p| p.omega_antisymmetric),
                omega_symmetric: mean(|p| p.omega_symmetric),
                energy_shift: mean(|p| p.energy_shift),
            })
        }
    }
}

/// Resonance energy `ħ[ω_r(ρ) − ω_r(∞)]` of the antisymmetric state.
pub fn resonance_energy_from_pole(
    rho: f64,
    branch: BranchLabel,
    atom: &PolarizabilityModel,
) -> Result<f64> {
    Ok(pole_frequencies_nonretarded(rho, branch, atom)?.energy_shift)
}

/// First-order pole shift `ħ ω_j α(0) T_jj(ρ|ω_j) / 2` with the real part of
/// the retarded free-space tensor.
pub fn perturbative_pole_shift(
    rho: f64,
    branch: BranchLabel,
    atom: &PolarizabilityModel,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let omega = atom.omega_resonance();
    let t = real_free_diagonal(rho, omega, constants)?;
    branch.reduce(|i| Ok(omega * atom.alpha_static() * t[i] / 2.0))
}

/// Textbook energy `p² T_jj(ρ|ω_j)` with `p² = α(0) ħ ω_j / 2`.
pub fn perturbative_resonance_energy(
    rho: f64,
    branch: BranchLabel,
    atom: &PolarizabilityModel,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let t = real_free_diagonal(rho, atom.omega_resonance(), constants)?;
    let p2 = atom.transition_dipole_sq();
    branch.reduce(|i| Ok(p2 * t[i]))
}

/// Isotropically averaged perturbative rate
/// `norm · [3 + v² + v⁴] / ρ⁶`, `v = ω_j ρ / ħc`.
pub fn perturbative_rate_isotropic(
    rho: f64,
    atom: &PolarizabilityModel,
    norm_constant: f64,
    constants: &PhysicalConstants,
) -> f64 {
    let v = atom.omega_resonance() * rho / constants.hbar_c;
    let v2 = v * v;
    norm_constant * (3.0 + v2 + v2 * v2) / rho.powi(6)
}

/// Strong-coupling rate `n = 2|U| / (πħ)` in 1/s.
pub fn transfer_rate_fast(energy: f64, constants: &PhysicalConstants) -> f64 {
    2.0 * energy.abs() / (std::f64::consts::PI * constants.hbar)
}

/// Golden-rule rate `n = 2π U² δ / ħ` in 1/s; `delta` is the density of
/// final states in 1/eV.
pub fn transfer_rate_slow(energy: f64, delta: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!(
            "density of final states must be positive, got {delta}"
        )));
    }
    Ok(2.0 * std::f64::consts::PI * energy * energy * delta / constants.hbar)
}
