//! # resonance-core
//!
//! Excited-state resonance interaction energies, ground-state Casimir-Polder
//! energies and Förster-type transfer rates for a pair of identical atoms
//! near a planar dielectric half-space.
//!
//! Units throughout: lengths in Å, energies and frequencies in eV (ħ ≡ 1),
//! temperature in K, polarizabilities in Å³ and coupling tensors in Å⁻³.
//!
//! The crate is split into
//! * [`spectra`]: Matsubara grids, dielectric functions on the imaginary
//!   axis and atomic polarizability models,
//! * [`greens`]: free-space and surface-image dipole coupling tensors,
//! * [`interactions`]: Matsubara sums, zero-temperature integrals, pole
//!   solutions, perturbative forms and transfer rates,
//! * [`analysis`]: power-law fits, sign-crossover search and asymptote checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod constants;
mod error;
pub mod greens;
pub mod interactions;
pub mod quadrature;
pub mod spectra;

pub use crate::analysis::{
    Crossing, CrossingDirection, CrossoverReport, PowerLawFit, SeparationCurve,
};
pub use crate::constants::PhysicalConstants;
pub use crate::error::{Error, Result};
pub use crate::greens::{GeometryConfig, TensorComponents};
pub use crate::interactions::{
    AtomPair, BranchEnergies, BranchLabel, InteractionResult, PoleResult, Tolerances,
};
pub use crate::spectra::{
    DielectricResponse, MatsubaraGrid, OscillatorDielectric, PolarizabilityModel,
    TabulatedLossSpectrum,
};

/// A point or displacement in 3D space (Å).
pub type Vector3 = nalgebra::Vector3<f64>;
/// A stack-allocated 3x3 real matrix.
pub type Matrix3 = nalgebra::Matrix3<f64>;
