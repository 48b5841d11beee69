//! Dipole-dipole coupling tensors.
//!
//! Sign convention: a pair of dipoles couples with energy `U = pᵢ Tᵢⱼ pⱼ`,
//! so the static element along the joining axis is `−2/ρ³`.
//!
//! The surface correction is the retarded image approximation: the free
//! tensor is evaluated at the displacement from the mirror image of atom `a`
//! to atom `b`, reflected through `diag(−1, −1, +1)` and scaled by
//! `r = (ε(iξ) − 1)/(ε(iξ) + 1)`. It is exact in the nonretarded limit.

use std::ops::Add;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::spectra::DielectricResponse;
use crate::{Matrix3, Vector3};

/// Positions of two atoms above a surface at `z = 0`: atom `a` at
/// `(0, 0, z_a)`, atom `b` at `(x, 0, z_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    z_a: f64,
    z_b: f64,
    x: f64,
}

impl GeometryConfig {
    pub fn new(z_a: f64, z_b: f64, x: f64) -> Result<Self> {
        if !(z_a > 0.0) || !(z_b > 0.0) || !z_a.is_finite() || !z_b.is_finite() {
            return Err(Error::domain(format!(
                "atom heights must be positive, got z_a = {z_a}, z_b = {z_b}"
            )));
        }
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::domain(format!(
                "lateral offset must be >= 0, got {x}"
            )));
        }
        let g = Self { z_a, z_b, x };
        if !(g.separation() > 0.0) {
            return Err(Error::domain("atoms coincide"));
        }
        Ok(g)
    }

    /// Atom `a` at height `z_a`, atom `b` a distance `rho` straight above it.
    pub fn stacked(z_a: f64, rho: f64) -> Result<Self> {
        Self::new(z_a, z_a + rho, 0.0)
    }

    /// Both atoms at height `z`, a lateral distance `rho` apart.
    pub fn side_by_side(z: f64, rho: f64) -> Result<Self> {
        Self::new(z, z, rho)
    }

    pub fn z_a(&self) -> f64 {
        self.z_a
    }

    pub fn z_b(&self) -> f64 {
        self.z_b
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Vector from atom `a` to atom `b`.
    pub fn direct_displacement(&self) -> Vector3 {
        Vector3::new(self.x, 0.0, self.z_b - self.z_a)
    }

    /// Vector from the image of atom `a` (at `z = −z_a`) to atom `b`.
    pub fn image_displacement(&self) -> Vector3 {
        Vector3::new(self.x, 0.0, self.z_a + self.z_b)
    }

    /// Direct separation ρ.
    pub fn separation(&self) -> f64 {
        self.direct_displacement().norm()
    }

    /// Image distance ρ′.
    pub fn image_distance(&self) -> f64 {
        self.image_displacement().norm()
    }
}

/// Elements of the coupling tensor that are nonzero for atoms in the
/// xz-plane (Å⁻³).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TensorComponents {
    pub t_xx: f64,
    pub t_yy: f64,
    pub t_zz: f64,
    pub t_xz: f64,
    pub t_zx: f64,
}

impl TensorComponents {
    pub fn diagonal(&self) -> [f64; 3] {
        [self.t_xx, self.t_yy, self.t_zz]
    }

    /// `Σⱼ Tⱼⱼ² − 2 T_xz T_zx`.
    pub fn casimir_polder_bracket(&self) -> f64 {
        self.t_xx * self.t_xx + self.t_yy * self.t_yy + self.t_zz * self.t_zz
            - 2.0 * self.t_xz * self.t_zx
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            t_xx: s * self.t_xx,
            t_yy: s * self.t_yy,
            t_zz: s * self.t_zz,
            t_xz: s * self.t_xz,
            t_zx: s * self.t_zx,
        }
    }

    pub fn from_matrix(m: &Matrix3) -> Self {
        Self {
            t_xx: m[(0, 0)],
            t_yy: m[(1, 1)],
            t_zz: m[(2, 2)],
            t_xz: m[(0, 2)],
            t_zx: m[(2, 0)],
        }
    }

    pub fn to_matrix(&self) -> Matrix3 {
        Matrix3::new(
            self.t_xx, 0.0, self.t_xz, //
            0.0, self.t_yy, 0.0, //
            self.t_zx, 0.0, self.t_zz,
        )
    }
}

impl Add for TensorComponents {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            t_xx: self.t_xx + o.t_xx,
            t_yy: self.t_yy + o.t_yy,
            t_zz: self.t_zz + o.t_zz,
            t_xz: self.t_xz + o.t_xz,
            t_zx: self.t_zx + o.t_zx,
        }
    }
}

fn unit_and_length(displacement: &Vector3) -> Result<(Vector3, f64)> {
    let rho = displacement.norm();
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!(
            "displacement must be nonzero and finite, got {displacement:?}"
        )));
    }
    Ok((displacement / rho, rho))
}

/// `T⁰ᵢⱼ(iξ) = e^(−u)/ρ³ [(δᵢⱼ − 3nᵢnⱼ)(1 + u) + (δᵢⱼ − nᵢnⱼ)u²]`, `u = ξρ/ħc`.
fn free_imag_parts(rho: f64, u: f64) -> (f64, f64) {
    let e = (-u).exp() / (rho * rho * rho);
    // (coefficient of δ, coefficient of n n)
    (e * (1.0 + u + u * u), -e * (3.0 * (1.0 + u) + u * u))
}

/// Full free-space tensor on the imaginary axis for an arbitrary displacement.
pub fn free_tensor_matrix_imag(
    displacement: &Vector3,
    xi: f64,
    constants: &PhysicalConstants,
) -> Result<Matrix3> {
    check_frequency(xi)?;
    let (n, rho) = unit_and_length(displacement)?;
    let u = xi * rho / constants.hbar_c;
    let (a, b) = free_imag_parts(rho, u);
    Ok(Matrix3::identity() * a + (n * n.transpose()) * b)
}

pub fn free_tensor_imag(
    displacement: &Vector3,
    xi: f64,
    constants: &PhysicalConstants,
) -> Result<TensorComponents> {
    check_frequency(xi)?;
    let (n, rho) = unit_and_length(displacement)?;
    let u = xi * rho / constants.hbar_c;
    let (a, b) = free_imag_parts(rho, u);
    let xz = b * n.x * n.z;
    Ok(TensorComponents {
        t_xx: a + b * n.x * n.x,
        t_yy: a + b * n.y * n.y,
        t_zz: a + b * n.z * n.z,
        t_xz: xz,
        t_zx: xz,
    })
}

/// Real part of the retarded tensor at real frequency ω,
/// `Re{e^(iv)/ρ³ [(δᵢⱼ − 3nᵢnⱼ)(1 − iv) − (δᵢⱼ − nᵢnⱼ)v²]}`, `v = ωρ/ħc`.
pub fn free_tensor_real(
    displacement: &Vector3,
    omega: f64,
    constants: &PhysicalConstants,
) -> Result<TensorComponents> {
    check_frequency(omega)?;
    let (n, rho) = unit_and_length(displacement)?;
    let v = omega * rho / constants.hbar_c;
    let (s, c) = v.sin_cos();
    let r3 = rho * rho * rho;
    // Re{e^(iv)(1 − iv)} = cos v + v sin v; Re{e^(iv) v²} = v² cos v
    let near = (c + v * s) / r3;
    let far = v * v * c / r3;
    let a = near - far;
    let b = -3.0 * near + far;
    let xz = b * n.x * n.z;
    Ok(TensorComponents {
        t_xx: a + b * n.x * n.x,
        t_yy: a + b * n.y * n.y,
        t_zz: a + b * n.z * n.z,
        t_xz: xz,
        t_zx: xz,
    })
}

/// Nonretarded reflection factor `r = (ε − 1)/(ε + 1)`.
pub fn surface_reflection(epsilon: f64) -> f64 {
    if epsilon.is_infinite() {
        return 1.0;
    }
    (epsilon - 1.0) / (epsilon + 1.0)
}

/// Surface (image) part of the coupling tensor.
pub fn image_tensor_imag(
    geometry: &GeometryConfig,
    epsilon_at_xi: f64,
    xi: f64,
    constants: &PhysicalConstants,
) -> Result<TensorComponents> {
    if !(epsilon_at_xi >= 1.0) {
        return Err(Error::domain(format!(
            "epsilon must be >= 1 on the imaginary axis, got {epsilon_at_xi}"
        )));
    }
    let r = surface_reflection(epsilon_at_xi);
    if r == 0.0 {
        check_frequency(xi)?;
        return Ok(TensorComponents::default());
    }
    let t = free_tensor_imag(&geometry.image_displacement(), xi, constants)?;
    Ok(TensorComponents {
        t_xx: -r * t.t_xx,
        t_yy: -r * t.t_yy,
        t_zz: r * t.t_zz,
        t_xz: -r * t.t_xz,
        t_zx: r * t.t_zx,
    })
}

/// Direct plus image coupling.
pub fn total_tensor_imag(
    geometry: &GeometryConfig,
    dielectric: &DielectricResponse,
    xi: f64,
    constants: &PhysicalConstants,
) -> Result<TensorComponents> {
    let direct = free_tensor_imag(&geometry.direct_displacement(), xi, constants)?;
    if dielectric.is_vacuum() {
        return Ok(direct);
    }
    let eps = dielectric.epsilon_imag(xi);
    Ok(direct + image_tensor_imag(geometry, eps, xi, constants)?)
}

fn check_frequency(xi: f64) -> Result<()> {
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::domain(format!("frequency must be >= 0, got {xi}")));
    }
    Ok(())
}
