use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Real-axis polarizability evaluated exactly at its resonance.
    #[error("polarizability pole at omega = {omega} eV")]
    Pole { omega: f64 },

    /// `1 + alpha*T <= 0` in a logarithmic summand: the atoms are too close
    /// for the coupled-oscillator energy to be real.
    #[error(
        "strong-coupling breakdown at Matsubara index n = {n} (xi = {xi} eV): 1 + alpha*T = {argument}"
    )]
    StrongCoupling { n: usize, xi: f64, argument: f64 },

    /// `alpha(0)*|T| >= 1`: the nonretarded pole equation has no real root.
    #[error("oscillator instability: alpha(0)*|T| = {coupling} >= 1")]
    OscillatorInstability { coupling: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
