//! Asymptotic analysis of computed separation curves.

use std::fmt;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::spectra::PolarizabilityModel;

/// Bisection stops once the bracket is narrower than this (Å).
const CROSSOVER_RESOLUTION: f64 = 0.05;

/// Samples of a quantity against separation, `rho` strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCurve {
    points: Vec<(f64, f64)>,
    label: String,
}

impl SeparationCurve {
    pub fn new(points: Vec<(f64, f64)>, label: impl Into<String>) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::domain(format!(
                    "separations must increase strictly: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::domain("curve contains non-finite values"));
        }
        Ok(Self {
            points,
            label: label.into(),
        })
    }

    /// Sample `f` at each separation.
    pub fn sample<F>(rhos: &[f64], label: impl Into<String>, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let points = rhos
            .iter()
            .map(|&rho| Ok((rho, f(rho)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, label)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// `|value| ≈ prefactor · ρ^exponent`
    pub prefactor: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares slope of `log|value|` against `log ρ` over the points with
/// `rho_min <= ρ <= rho_max`.
pub fn fit_power_law(curve: &SeparationCurve, window: (f64, f64)) -> Result<PowerLawFit> {
    let (lo, hi) = window;
    let inside: Vec<_> = curve
        .points
        .iter()
        .filter(|(rho, _)| *rho >= lo && *rho <= hi)
        .copied()
        .collect();
    if inside.len() < 4 {
        return Err(Error::domain(format!(
            "power-law fit needs >= 4 points in [{lo}, {hi}], found {}",
            inside.len()
        )));
    }
    if inside.iter().any(|(_, v)| *v == 0.0) {
        return Err(Error::domain("power-law fit over a zero value"));
    }
    let sign = inside[0].1.signum();
    if inside.iter().any(|(_, v)| v.signum() != sign) {
        return Err(Error::domain(format!(
            "curve {:?} changes sign inside [{lo}, {hi}]",
            curve.label
        )));
    }

    let n = inside.len() as f64;
    let xs: Vec<f64> = inside.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = inside.iter().map(|(_, v)| v.abs().ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("power-law fit needs distinct separations"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        n_points: inside.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// Negative to positive with increasing ρ.
    AttractionToRepulsion,
    RepulsionToAttraction,
}

impl fmt::Display for CrossingDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrossingDirection::AttractionToRepulsion => "attract->repel",
            CrossingDirection::RepulsionToAttraction => "repel->attract",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub rho_star: f64,
    pub direction: CrossingDirection,
    /// Adjacent curve samples whose values differ in sign.
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CrossoverReport {
    pub crossings: Vec<Crossing>,
}

impl CrossoverReport {
    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }
}

/// Locate every sign change between adjacent samples and refine it by
/// bisection on `evaluator` (not on interpolated curve values).
pub fn find_sign_crossovers<F>(curve: &SeparationCurve, mut evaluator: F) -> Result<CrossoverReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    if curve.len() < 2 {
        return Err(Error::domain("crossover search needs >= 2 points"));
    }
    let mut crossings = Vec::new();
    for w in curve.points.windows(2) {
        let ((r0, v0), (r1, v1)) = (w[0], w[1]);
        if !(v0 * v1 < 0.0) {
            continue;
        }
        let direction = if v0 < 0.0 {
            CrossingDirection::AttractionToRepulsion
        } else {
            CrossingDirection::RepulsionToAttraction
        };
        let (mut lo, mut hi) = (r0, r1);
        let lo_sign = v0.signum();
        while hi - lo > CROSSOVER_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            let v = evaluator(mid)?;
            if v == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if v.signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        crossings.push(Crossing {
            rho_star: 0.5 * (lo + hi),
            direction,
            bracket: (r0, r1),
        });
    }
    Ok(CrossoverReport { crossings })
}

/// Largest relative deviation between the curve tail (ρ beyond twenty thermal
/// lengths `ħc/(2π k_B T)`) and the classical `k_B T α(0) T_jj(ρ|0)`.
///
/// `static_tensor` returns the static coupling element of the branch at ρ.
pub fn classical_asymptote_check<F>(
    curve: &SeparationCurve,
    atom: &PolarizabilityModel,
    temperature: f64,
    static_tensor: F,
    constants: &PhysicalConstants,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(temperature > 0.0) {
        return Err(Error::domain(format!(
            "temperature must be positive, got {temperature} K"
        )));
    }
    let threshold = 20.0 * constants.thermal_length(temperature);
    let kt = constants.thermal_energy(temperature);
    let mut worst: Option<f64> = None;
    for &(rho, value) in curve.points.iter().filter(|(rho, _)| *rho >= threshold) {
        let predicted = kt * atom.alpha_static() * static_tensor(rho);
        let dev = if predicted == 0.0 {
            if value == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            ((value - predicted) / predicted).abs()
        };
        worst = Some(worst.map_or(dev, |w: f64| w.max(dev)));
    }
    worst.ok_or_else(|| {
        Error::domain(format!(
            "curve must extend beyond {threshold:.1} Å for the classical check"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::GeometryConfig;
    use crate::interactions::{AtomPair, BranchLabel, Tolerances};
    use crate::spectra::DielectricResponse;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn exact_inverse_cube() {
        let c = SeparationCurve::sample(&log_grid(1.0, 100.0, 20), "c", |r| Ok(7.0 / r.powi(3)))
            .unwrap();
        let fit = fit_power_law(&c, (0.0, f64::INFINITY)).unwrap();
        assert_abs_diff_eq!(fit.exponent, -3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.prefactor, 7.0, epsilon = 1e-9);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn dominant_term_wins_far_out() {
        let c = SeparationCurve::sample(&log_grid(1e4, 1e5, 30), "c", |r| {
            Ok(7.0 / r.powi(3) + 1.0 / r.powi(4))
        })
        .unwrap();
        let fit = fit_power_law(&c, (1e4, 1e5)).unwrap();
        assert_abs_diff_eq!(fit.exponent, -3.0, epsilon = 0.01);
    }

    #[test]
    fn fit_rejects_sign_change_and_sparse_windows() {
        let c = SeparationCurve::sample(&log_grid(50.0, 200.0, 10), "c", |r| {
            Ok((r - 100.0) / r.powi(4))
        })
        .unwrap();
        assert!(fit_power_law(&c, (50.0, 200.0)).is_err());
        assert!(fit_power_law(&c, (150.0, 160.0)).is_err());
        assert!(SeparationCurve::new(vec![(2.0, 1.0), (1.0, 1.0)], "").is_err());
    }

    #[test]
    fn crossovers_of_constructed_root() {
        let f = |r: f64| Ok((r - 100.0) / r.powi(4));
        let c = SeparationCurve::sample(&log_grid(20.0, 1000.0, 17), "c", f).unwrap();
        let report = find_sign_crossovers(&c, f).unwrap();
        assert_eq!(report.crossings.len(), 1);
        let x = report.crossings[0];
        assert_abs_diff_eq!(x.rho_star, 100.0, epsilon = 0.1);
        assert_eq!(x.direction, CrossingDirection::AttractionToRepulsion);
        assert!(x.bracket.0 < x.rho_star && x.rho_star < x.bracket.1);

        let neg = SeparationCurve::sample(&log_grid(1.0, 10.0, 5), "c", |r| Ok(-1.0 / r)).unwrap();
        assert!(find_sign_crossovers(&neg, |_| unreachable!())
            .unwrap()
            .is_empty());
        let one = SeparationCurve::new(vec![(1.0, 1.0)], "").unwrap();
        assert!(find_sign_crossovers(&one, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn crossover_stable_under_refinement() {
        let f = |r: f64| Ok((r - 137.3) * (r - 512.0) / r.powi(5));
        let coarse = SeparationCurve::sample(&log_grid(20.0, 1000.0, 15), "c", f).unwrap();
        let fine = SeparationCurve::sample(&log_grid(20.0, 1000.0, 29), "c", f).unwrap();
        let a = find_sign_crossovers(&coarse, f).unwrap();
        let b = find_sign_crossovers(&fine, f).unwrap();
        assert_eq!(a.crossings.len(), 2);
        assert_eq!(
            a.crossings[0].direction,
            CrossingDirection::RepulsionToAttraction
        );
        assert_eq!(
            a.crossings[1].direction,
            CrossingDirection::AttractionToRepulsion
        );
        for (x, y) in a.crossings.iter().zip(&b.crossings) {
            assert!((x.rho_star - y.rho_star).abs() < 0.1);
        }
    }

    fn free_curve(rhos: &[f64], temperature: f64) -> SeparationCurve {
        let vacuum = DielectricResponse::Vacuum;
        let atom = PolarizabilityModel::helium_like();
        SeparationCurve::sample(rhos, "x", |rho| {
            let pair = AtomPair::new(GeometryConfig::side_by_side(3.0, rho)?, atom, &vacuum);
            Ok(pair
                .resonance_energy_branch(BranchLabel::X, temperature, &Tolerances::default())?
                .energy)
        })
        .unwrap()
    }

    #[test]
    fn classical_tail_of_free_x_branch() {
        let c = PhysicalConstants::CODATA;
        let atom = PolarizabilityModel::helium_like();
        let curve = free_curve(&log_grid(3e5, 3e6, 8), 300.0);
        let dev =
            classical_asymptote_check(&curve, &atom, 300.0, |r| -2.0 / r.powi(3), &c).unwrap();
        assert!(dev < 0.05, "deviation {dev}");

        // linear in T: at 600 K the same tail matches twice the prediction
        let hot = free_curve(&log_grid(6e5, 3e6, 6), 600.0);
        let dev_hot =
            classical_asymptote_check(&hot, &atom, 600.0, |r| -2.0 / r.powi(3), &c).unwrap();
        assert!(dev_hot < 0.05);
        let ratio = hot.points()[5].1 / curve.points()[7].1;
        assert_abs_diff_eq!(ratio, 2.0, epsilon = 0.02);

        let short = free_curve(&log_grid(10.0, 100.0, 4), 300.0);
        assert!(classical_asymptote_check(&short, &atom, 300.0, |r| -2.0 / r.powi(3), &c).is_err());

        let zero = SeparationCurve::new(vec![(1e6, 0.0), (2e6, 0.0)], "").unwrap();
        let none = PolarizabilityModel::new(0.0, 1.0).unwrap();
        assert_eq!(
            classical_asymptote_check(&zero, &none, 300.0, |r| -2.0 / r.powi(3), &c).unwrap(),
            0.0
        );
    }

    #[test]
    fn classical_deviation_shrinks_outward() {
        let c = PhysicalConstants::CODATA;
        let atom = PolarizabilityModel::helium_like();
        let thermal = c.thermal_length(300.0);
        let mut prev = f64::INFINITY;
        for start in [20.0, 22.0, 25.0, 30.0] {
            let rhos = log_grid(start * thermal, 40.0 * thermal, 5);
            let curve = free_curve(&rhos, 300.0);
            let dev =
                classical_asymptote_check(&curve, &atom, 300.0, |r| -2.0 / r.powi(3), &c).unwrap();
            assert!(dev <= prev, "{dev} > {prev}");
            prev = dev;
        }
    }

    proptest! {
        #[test]
        fn fit_exact_for_any_exponent(p in -10.0f64..0.0, a in 1e-6f64..1e6, neg in any::<bool>()) {
            let s = if neg { -a } else { a };
            let c = SeparationCurve::sample(&log_grid(2.0, 2000.0, 12), "c", |r| Ok(s * r.powf(p))).unwrap();
            let fit = fit_power_law(&c, (0.0, f64::INFINITY)).unwrap();
            prop_assert!((fit.exponent - p).abs() < 1e-9);
        }
    }
}
