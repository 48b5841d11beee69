//! Frequency-dependent material response.
//!
//! Everything here is evaluated on the imaginary frequency axis `iξ` unless a
//! function name says otherwise. Frequencies are energies in eV.

use std::f64::consts::PI;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Ladder of Matsubara frequencies `ξₙ = 2π k_B T n` (eV).
///
/// Frequencies are generated from the spacing on demand so that adaptive sums
/// can run past `max_index` without allocating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraGrid {
    temperature: f64,
    spacing: f64,
    max_index: usize,
}

impl MatsubaraGrid {
    pub fn new(temperature: f64, max_index: usize, constants: &PhysicalConstants) -> Result<Self> {
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::domain(format!(
                "temperature must be positive, got {temperature} K"
            )));
        }
        if max_index < 1 {
            return Err(Error::domain("Matsubara grid needs max_index >= 1"));
        }
        Ok(Self {
            temperature,
            spacing: 2.0 * PI * constants.k_b * temperature,
            max_index,
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// `ξ₁ = 2π k_B T`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    #[inline]
    pub fn frequency(&self, n: usize) -> f64 {
        self.spacing * n as f64
    }

    /// Summation weight: the n = 0 term carries half weight.
    #[inline]
    pub fn weight(n: usize) -> f64 {
        if n == 0 {
            0.5
        } else {
            1.0
        }
    }

    /// `ξ₀ ..= ξ_max_index`.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..=self.max_index).map(|n| self.frequency(n)).collect()
    }
}

/// Grid `ξₙ = 2π k_B T n` for `n = 0..=max_index` with CODATA constants.
pub fn build_matsubara_grid(temperature: f64, max_index: usize) -> Result<MatsubaraGrid> {
    MatsubaraGrid::new(temperature, max_index, &PhysicalConstants::CODATA)
}

/// One damping-free Lorentz oscillator in the dielectric function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorTerm {
    pub strength: f64,
    /// Center frequency (eV).
    pub center: f64,
}

/// `ε(iξ) = ε∞ + Σᵢ Sᵢ / (1 + (ξ/ωᵢ)²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorDielectric {
    terms: Vec<OscillatorTerm>,
    epsilon_infinity: f64,
}

impl OscillatorDielectric {
    pub fn new(terms: Vec<OscillatorTerm>, epsilon_infinity: f64) -> Result<Self> {
        if !(epsilon_infinity >= 1.0) {
            return Err(Error::domain(format!(
                "epsilon_infinity must be >= 1, got {epsilon_infinity}"
            )));
        }
        for t in &terms {
            if !(t.strength >= 0.0) || !(t.center > 0.0) || !t.center.is_finite() {
                return Err(Error::domain(format!(
                    "oscillator term needs strength >= 0 and center > 0, got ({}, {})",
                    t.strength, t.center
                )));
            }
        }
        Ok(Self {
            terms,
            epsilon_infinity,
        })
    }

    /// Convenience constructor from `(strength, center)` pairs with `ε∞ = 1`.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let terms = pairs
            .iter()
            .map(|&(strength, center)| OscillatorTerm { strength, center })
            .collect();
        Self::new(terms, 1.0)
    }

    /// Representative phospholipid-like membrane: an infrared term and an
    /// ultraviolet term with `ε(0) = 2.5`. These are configuration values, not
    /// a fit to any measured spectrum.
    pub fn phospholipid_like() -> Self {
        Self::from_pairs(&[(0.4, 0.12), (1.1, 10.0)]).expect("valid bundled model")
    }

    pub fn terms(&self) -> &[OscillatorTerm] {
        &self.terms
    }

    pub fn epsilon_infinity(&self) -> f64 {
        self.epsilon_infinity
    }

    pub fn epsilon_imag(&self, xi: f64) -> f64 {
        self.epsilon_infinity
            + self
                .terms
                .iter()
                .map(|t| {
                    let q = xi / t.center;
                    t.strength / (1.0 + q * q)
                })
                .sum::<f64>()
    }
}

/// Closed-form oscillator dielectric function at `iξ`.
pub fn oscillator_epsilon(model: &OscillatorDielectric, xi: f64) -> f64 {
    model.epsilon_imag(xi)
}

/// Number of terms kept in the high-frequency moment expansion. With
/// `ξ >= 2 ω_max` each term is at most a quarter of the previous one.
const KK_MOMENTS: usize = 30;

/// Tabulated loss spectrum `ε″(ω)` on real frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLossSpectrum {
    samples: Vec<(f64, f64)>,
    metadata: String,
    // Trapezoid weights, one per sample.
    weights: Vec<f64>,
    // m_k = Σ wᵢ ωᵢ ε″ᵢ (ωᵢ/ω_max)^(2k)
    moments: [f64; KK_MOMENTS],
}

impl TabulatedLossSpectrum {
    pub fn new(samples: Vec<(f64, f64)>, metadata: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("loss spectrum is empty"));
        }
        for (i, &(omega, loss)) in samples.iter().enumerate() {
            if !(omega > 0.0) || !omega.is_finite() {
                return Err(Error::domain(format!(
                    "sample {i}: frequency must be positive, got {omega}"
                )));
            }
            if !(loss >= 0.0) || !loss.is_finite() {
                return Err(Error::domain(format!(
                    "sample {i}: eps_imag must be non-negative, got {loss}"
                )));
            }
            if i > 0 && omega <= samples[i - 1].0 {
                return Err(Error::domain(format!(
                    "sample {i}: frequencies must be strictly increasing ({} then {omega})",
                    samples[i - 1].0
                )));
            }
        }

        let n = samples.len();
        let mut weights = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            let h = 0.5 * (samples[i + 1].0 - samples[i].0);
            weights[i] += h;
            weights[i + 1] += h;
        }

        let omega_max = samples[n - 1].0;
        let mut moments = [0.0; KK_MOMENTS];
        for (&(omega, loss), &w) in samples.iter().zip(&weights) {
            let x2 = (omega / omega_max).powi(2);
            let mut term = w * omega * loss;
            for m in moments.iter_mut() {
                *m += term;
                term *= x2;
            }
        }

        Ok(Self {
            samples,
            metadata: metadata.into(),
            weights,
            moments,
        })
    }

    /// Parse the two-column text format `omega_eV  eps_imag`. Lines starting
    /// with `#` are collected into the metadata string; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        let mut metadata = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                metadata.push(comment.trim().to_owned());
                continue;
            }
            let mut cols = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty());
            let parse = |s: Option<&str>| -> Result<f64> {
                let s = s.ok_or_else(|| {
                    Error::domain(format!("line {}: expected two columns", lineno + 1))
                })?;
                s.parse::<f64>().map_err(|e| {
                    Error::domain(format!("line {}: cannot parse {s:?}: {e}", lineno + 1))
                })
            };
            let omega = parse(cols.next())?;
            let loss = parse(cols.next())?;
            if cols.next().is_some() {
                return Err(Error::domain(format!(
                    "line {}: expected exactly two columns",
                    lineno + 1
                )));
            }
            samples.push((omega, loss));
        }
        Self::new(samples, metadata.join("\n"))
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn metadata(&self) -> &str {
        &self.metadata
    }

    pub fn max_frequency(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    /// `ε(iξ) = 1 + (2/π) ∫ ω ε″(ω) / (ω² + ξ²) dω` by the trapezoid rule on
    /// the sample grid. Above twice the last sample the same trapezoid sum is
    /// evaluated through its convergent moment expansion.
    pub fn epsilon_imag(&self, xi: f64) -> f64 {
        let omega_max = self.max_frequency();
        let integral = if xi >= 2.0 * omega_max {
            let q = (omega_max / xi).powi(2);
            let mut scale = 1.0;
            let mut acc = 0.0;
            for (k, m) in self.moments.iter().enumerate() {
                let term = m * scale;
                acc += if k % 2 == 0 { term } else { -term };
                scale *= q;
            }
            acc / (xi * xi)
        } else {
            let xi2 = xi * xi;
            self.samples
                .iter()
                .zip(&self.weights)
                .map(|(&(omega, loss), &w)| w * omega * loss / (omega * omega + xi2))
                .sum()
        };
        1.0 + 2.0 / PI * integral
    }
}

/// Kramers-Kronig transform of a tabulated loss spectrum onto `iξ`.
pub fn kramers_kronig_epsilon(spectrum: &TabulatedLossSpectrum, xi: f64) -> Result<f64> {
    if !(xi >= 0.0) {
        return Err(Error::domain(format!("xi must be >= 0, got {xi}")));
    }
    if spectrum.samples.is_empty() {
        return Err(Error::domain("loss spectrum is empty"));
    }
    Ok(spectrum.epsilon_imag(xi))
}

/// Source of `ε(iξ)` for the half-space.
#[derive(Debug, Clone, PartialEq)]
pub enum DielectricResponse {
    /// `ε ≡ 1`: no surface.
    Vacuum,
    Oscillator(OscillatorDielectric),
    Tabulated(TabulatedLossSpectrum),
}

impl DielectricResponse {
    pub fn epsilon_imag(&self, xi: f64) -> f64 {
        match self {
            DielectricResponse::Vacuum => 1.0,
            DielectricResponse::Oscillator(m) => m.epsilon_imag(xi),
            DielectricResponse::Tabulated(s) => s.epsilon_imag(xi),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, DielectricResponse::Vacuum)
    }
}

impl From<OscillatorDielectric> for DielectricResponse {
    fn from(m: OscillatorDielectric) -> Self {
        DielectricResponse::Oscillator(m)
    }
}

impl From<TabulatedLossSpectrum> for DielectricResponse {
    fn from(s: TabulatedLossSpectrum) -> Self {
        DielectricResponse::Tabulated(s)
    }
}

/// Single-oscillator atomic polarizability.
///
/// `alpha_static` is α(0) in Å³ (Gaussian convention) and `omega_resonance`
/// is the transition energy ω_j in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizabilityModel {
    alpha_static: f64,
    omega_resonance: f64,
}

impl PolarizabilityModel {
    pub fn new(alpha_static: f64, omega_resonance: f64) -> Result<Self> {
        if !(alpha_static >= 0.0) || !alpha_static.is_finite() {
            return Err(Error::domain(format!(
                "alpha_static must be >= 0, got {alpha_static}"
            )));
        }
        if !(omega_resonance > 0.0) || !omega_resonance.is_finite() {
            return Err(Error::domain(format!(
                "omega_resonance must be > 0, got {omega_resonance}"
            )));
        }
        Ok(Self {
            alpha_static,
            omega_resonance,
        })
    }

    /// Helium-like defaults: α(0) = 0.205 Å³, ω_j = 27.2 eV.
    pub fn helium_like() -> Self {
        Self {
            alpha_static: 0.205,
            omega_resonance: 27.2,
        }
    }

    pub fn alpha_static(&self) -> f64 {
        self.alpha_static
    }

    pub fn omega_resonance(&self) -> f64 {
        self.omega_resonance
    }

    /// `α(iξ) = α(0) / (1 + (ξ/ω_j)²)`.
    #[inline]
    pub fn imag(&self, xi: f64) -> f64 {
        let q = xi / self.omega_resonance;
        self.alpha_static / (1.0 + q * q)
    }

    /// Undamped `α(ω) = α(0) / (1 − (ω/ω_j)²)` on the real axis.
    pub fn real(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::domain(format!("omega must be >= 0, got {omega}")));
        }
        let q = omega / self.omega_resonance;
        let denom = 1.0 - q * q;
        if denom == 0.0 {
            return Err(Error::Pole { omega });
        }
        Ok(self.alpha_static / denom)
    }

    /// Squared transition dipole `p² = α(0) ħω_j / 2` in eV·Å³.
    pub fn transition_dipole_sq(&self) -> f64 {
        0.5 * self.alpha_static * self.omega_resonance
    }
}

pub fn polarizability_imag(model: &PolarizabilityModel, xi: f64) -> f64 {
    model.imag(xi)
}

pub fn polarizability_real(model: &PolarizabilityModel, omega: f64) -> Result<f64> {
    model.real(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn matsubara_first_frequency_at_room_temperature() {
        let grid = build_matsubara_grid(300.0, 1).unwrap();
        // 2π · 8.617333262e-5 · 300, evaluated independently.
        assert_relative_eq!(grid.frequency(1), 0.162432905216605, max_relative = 1e-12);
        assert_eq!(grid.frequency(0), 0.0);
        let hot = build_matsubara_grid(600.0, 1).unwrap();
        assert_eq!(hot.frequency(1), 2.0 * grid.frequency(1));
    }

    #[test]
    fn matsubara_rejects_bad_input() {
        assert!(matches!(
            build_matsubara_grid(0.0, 4),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            build_matsubara_grid(-3.0, 4),
            Err(Error::Domain(_))
        ));
        assert!(build_matsubara_grid(300.0, 0).is_err());
    }

    #[test]
    fn matsubara_spacing_uniform() {
        let grid = build_matsubara_grid(77.0, 50).unwrap();
        let f = grid.frequencies();
        assert_eq!(f.len(), 51);
        for w in f.windows(2) {
            assert_relative_eq!(w[1] - w[0], grid.spacing(), max_relative = 1e-12);
        }
        assert_eq!(MatsubaraGrid::weight(0), 0.5);
        assert_eq!(MatsubaraGrid::weight(3), 1.0);
    }

    #[test]
    fn oscillator_closed_form() {
        let m = OscillatorDielectric::from_pairs(&[(2.0, 10.0)]).unwrap();
        assert_eq!(oscillator_epsilon(&m, 0.0), 3.0);
        assert_eq!(oscillator_epsilon(&m, 10.0), 2.0);
        let empty = OscillatorDielectric::new(vec![], 1.7).unwrap();
        assert_eq!(empty.epsilon_imag(0.0), 1.7);
        assert_eq!(empty.epsilon_imag(123.0), 1.7);
        assert!(OscillatorDielectric::new(vec![], 0.5).is_err());
        assert!(OscillatorDielectric::from_pairs(&[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn phospholipid_static_value() {
        let m = OscillatorDielectric::phospholipid_like();
        assert_relative_eq!(m.epsilon_imag(0.0), 2.5, max_relative = 1e-15);
    }

    #[test]
    fn polarizability_limits() {
        let a = PolarizabilityModel::new(1.5, 4.0).unwrap();
        assert_eq!(polarizability_imag(&a, 0.0), 1.5);
        assert_eq!(polarizability_imag(&a, 4.0), 0.75);
        assert!(polarizability_imag(&a, 1e9) < 1e-16);
        assert_eq!(polarizability_real(&a, 0.0).unwrap(), 1.5);
        assert_relative_eq!(
            polarizability_real(&a, 4.0 / 2f64.sqrt()).unwrap(),
            3.0,
            max_relative = 1e-14
        );
        assert!(matches!(
            polarizability_real(&a, 4.0),
            Err(Error::Pole { .. })
        ));
        assert_relative_eq!(a.transition_dipole_sq(), 3.0);
    }

    #[test]
    fn kk_vacuum_is_unity() {
        let s =
            TabulatedLossSpectrum::new((1..100).map(|i| (i as f64 * 0.5, 0.0)).collect(), "vacuum")
                .unwrap();
        for xi in [0.0, 1.0, 40.0, 1e4] {
            assert_eq!(kramers_kronig_epsilon(&s, xi).unwrap(), 1.0);
        }
    }

    #[test]
    fn kk_rejects_invalid_spectra() {
        assert!(matches!(
            TabulatedLossSpectrum::new(vec![], ""),
            Err(Error::Domain(_))
        ));
        assert!(TabulatedLossSpectrum::new(vec![(1.0, 0.1), (1.0, 0.2)], "").is_err());
        assert!(TabulatedLossSpectrum::new(vec![(0.0, 0.1)], "").is_err());
        assert!(TabulatedLossSpectrum::new(vec![(1.0, -0.1)], "").is_err());
        let s = TabulatedLossSpectrum::new(vec![(1.0, 0.1)], "").unwrap();
        assert!(kramers_kronig_epsilon(&s, -1.0).is_err());
    }

    #[test]
    fn kk_lorentzian_matches_analytic_oscillator() {
        // ε″ of S ω₀² / (ω₀² − ω² − iγω); its exact transform is
        // 1 + S ω₀² / (ω₀² + ξ² + γξ).
        let (s, w0, gamma) = (2.0, 10.0, 0.05);
        let samples: Vec<_> = (1..=80_000)
            .map(|i| {
                let w = i as f64 * 0.0025;
                let loss =
                    s * gamma * w * w0 * w0 / ((w * w - w0 * w0).powi(2) + (gamma * w).powi(2));
                (w, loss)
            })
            .collect();
        let spec = TabulatedLossSpectrum::new(samples, "lorentzian").unwrap();
        for xi in [0.0, 1.0, 5.0, 10.0, 25.0, 50.0] {
            let exact = 1.0 + s * w0 * w0 / (w0 * w0 + xi * xi + gamma * xi);
            let undamped = 1.0 + s / (1.0 + (xi / w0).powi(2));
            let got = kramers_kronig_epsilon(&spec, xi).unwrap();
            assert_relative_eq!(got, exact, max_relative = 1e-2);
            assert_relative_eq!(got, undamped, max_relative = 1e-2);
        }
    }

    #[test]
    fn kk_moment_expansion_matches_direct_sum() {
        let samples: Vec<_> = (1..=200)
            .map(|i| {
                let w = 0.1 * i as f64;
                (w, (w * 0.7).sin().abs() + 0.05)
            })
            .collect();
        let spec = TabulatedLossSpectrum::new(samples.clone(), "").unwrap();
        let direct = |xi: f64| {
            let mut acc = 0.0;
            for p in samples.windows(2) {
                let g = |(w, l): (f64, f64)| w * l / (w * w + xi * xi);
                acc += 0.5 * (p[1].0 - p[0].0) * (g(p[0]) + g(p[1]));
            }
            1.0 + 2.0 / PI * acc
        };
        for xi in [40.0, 40.0001, 55.0, 300.0, 1e5] {
            assert_relative_eq!(spec.epsilon_imag(xi), direct(xi), max_relative = 1e-13);
        }
    }

    #[test]
    fn kk_decays_to_unity_from_above() {
        let spec =
            TabulatedLossSpectrum::new(vec![(1.0, 0.5), (2.0, 1.0), (3.0, 0.2)], "").unwrap();
        let mut prev = f64::INFINITY;
        for xi in [10.0, 100.0, 1e3, 1e4, 1e6] {
            let e = spec.epsilon_imag(xi);
            assert!(e > 1.0 && e < prev);
            prev = e;
        }
        assert!(prev - 1.0 < 1e-11);
    }

    #[test]
    fn parse_two_column_text() {
        let text = "# phospholipid test\n# second line\n1.0 0.5\n\n2.0\t0.7\n3.0, 0.1\n";
        let s = TabulatedLossSpectrum::parse(text).unwrap();
        assert_eq!(s.samples(), &[(1.0, 0.5), (2.0, 0.7), (3.0, 0.1)]);
        assert_eq!(s.metadata(), "phospholipid test\nsecond line");
        let err = TabulatedLossSpectrum::parse("1.0 0.5\n2.0 oops\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(TabulatedLossSpectrum::parse("1 2 3\n").is_err());
        assert!(TabulatedLossSpectrum::parse("# only comments\n").is_err());
    }

    fn smooth_spectrum(h: f64) -> TabulatedLossSpectrum {
        let n = (40.0 / h).round() as usize;
        let samples = (1..=n)
            .map(|i| {
                let w = i as f64 * h;
                (w, w * (-(w - 8.0).powi(2) / 10.0).exp())
            })
            .collect();
        TabulatedLossSpectrum::new(samples, "").unwrap()
    }

    #[test]
    fn kk_stable_under_grid_refinement() {
        let coarse = smooth_spectrum(0.05);
        let fine = smooth_spectrum(0.025);
        for xi in [0.0, 0.5, 3.0, 12.0, 90.0] {
            let a = coarse.epsilon_imag(xi) - 1.0;
            let b = fine.epsilon_imag(xi) - 1.0;
            assert!((a - b).abs() < 1e-3 * b.abs(), "xi={xi}: {a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn kk_is_at_least_one_and_decreasing(
            losses in proptest::collection::vec(0.0f64..5.0, 2..40),
            step in 0.05f64..2.0,
            xi in 0.0f64..50.0,
            dxi in 0.01f64..10.0,
        ) {
            let samples: Vec<_> = losses.iter().enumerate()
                .map(|(i, &l)| ((i + 1) as f64 * step, l)).collect();
            let any_loss = losses.iter().any(|&l| l > 0.0);
            let spec = TabulatedLossSpectrum::new(samples, "").unwrap();
            let a = spec.epsilon_imag(xi);
            let b = spec.epsilon_imag(xi + dxi);
            prop_assert!(a >= 1.0 && b >= 1.0);
            if any_loss {
                prop_assert!(b < a);
            } else {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn polarizability_positive_and_decreasing(
            alpha in 1e-3f64..50.0, omega in 0.01f64..100.0, xi in 0.0f64..1e3, dxi in 1e-3f64..10.0
        ) {
            let m = PolarizabilityModel::new(alpha, omega).unwrap();
            prop_assert!(m.imag(xi) > 0.0);
            prop_assert!(m.imag(xi + dxi) < m.imag(xi));
        }

        #[test]
        fn oscillator_monotone_above_background(
            s1 in 0.0f64..5.0, w1 in 0.01f64..30.0, s2 in 0.0f64..5.0, w2 in 0.01f64..30.0,
            xi in 0.0f64..100.0, dxi in 1e-3f64..10.0,
        ) {
            let m = OscillatorDielectric::from_pairs(&[(s1, w1), (s2, w2)]).unwrap();
            prop_assert!(m.epsilon_imag(xi) >= 1.0);
            prop_assert!(m.epsilon_imag(xi + dxi) <= m.epsilon_imag(xi));
        }
    }
}
