//! Scan configuration: TOML sections `[scan]`, `[atom]`, `[dielectric]` and
//! `[tolerances]`.
//!
//! Every field has a default, so an empty file is a valid fig3 scan. After
//! [`ScanConfig::resolve`] every optional field is filled in, and the
//! serialized config is what goes into the `#` header of each artifact.

use std::fmt;
use std::path::{Path, PathBuf};

use resonance_core::spectra::OscillatorTerm;
use resonance_core::{
    BranchLabel, DielectricResponse, GeometryConfig, OscillatorDielectric, PolarizabilityModel,
    TabulatedLossSpectrum, Tolerances,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Atom height used by the surface presets (Å).
pub const PRESET_HEIGHT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// One atom adsorbed at the surface, the other straight above it.
    Fig3,
    /// Both atoms adsorbed, separated laterally.
    Fig4,
    /// No surface.
    #[serde(alias = "free")]
    FreeSpace,
    /// Geometry taken from `z_a` and `direction`.
    Custom,
}

impl Preset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::FreeSpace => "free_space",
            Preset::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

/// Direction in which ρ is measured from atom a.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Along the surface normal: z_b = z_a + ρ.
    Vertical,
    /// Parallel to the surface: z_b = z_a, x = ρ.
    Lateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    X,
    Y,
    Z,
    #[serde(alias = "iso")]
    Isotropic,
}

impl From<Branch> for BranchLabel {
    fn from(b: Branch) -> Self {
        match b {
            Branch::X => BranchLabel::X,
            Branch::Y => BranchLabel::Y,
            Branch::Z => BranchLabel::Z,
            Branch::Isotropic => BranchLabel::Isotropic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Resonance interaction energy (eV).
    Resonance,
    /// Ground-state Casimir-Polder energy (eV), identical for every branch.
    CasimirPolder,
    /// Half-weight n = 0 Matsubara term of the resonance energy (eV).
    ZeroFrequency,
    /// Free-space first-order resonance energy at the pair separation (eV).
    Perturbative,
    /// Transfer rate from the resonance energy (1/s).
    Rates,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Resonance => "resonance",
            Quantity::CasimirPolder => "casimir_polder",
            Quantity::ZeroFrequency => "zero_frequency",
            Quantity::Perturbative => "perturbative",
            Quantity::Rates => "rates",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `2|U|/(πħ)`
    Fast,
    /// `2π U² δ/ħ`
    Slow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub preset: Preset,
    pub rho_min: f64,
    pub rho_max: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub branches: Vec<Branch>,
    pub quantities: Vec<Quantity>,
    /// Kelvin; 0 selects the zero-temperature integrals.
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    pub rate_model: RateModel,
    /// Density of final states for the slow rate (1/eV).
    pub delta: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            preset: Preset::Fig3,
            rho_min: 4.0,
            rho_max: 1000.0,
            count: 60,
            spacing: Spacing::Log,
            branches: vec![Branch::X, Branch::Y, Branch::Z, Branch::Isotropic],
            quantities: vec![
                Quantity::Resonance,
                Quantity::CasimirPolder,
                Quantity::ZeroFrequency,
            ],
            temperature: 300.0,
            z_a: None,
            direction: None,
            rate_model: RateModel::Slow,
            delta: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomSection {
    /// TOML file whose `[atom]` section replaces this one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Å³
    pub alpha_static: f64,
    /// eV
    pub omega_resonance: f64,
}

impl Default for AtomSection {
    fn default() -> Self {
        let he = PolarizabilityModel::helium_like();
        Self {
            file: None,
            label: None,
            alpha_static: he.alpha_static(),
            omega_resonance: he.omega_resonance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DielectricModel {
    Vacuum,
    Oscillator,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillator {
    pub strength: f64,
    /// eV
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DielectricSection {
    /// TOML file whose `[dielectric]` section replaces this one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Defaults to `tabulated` when `spectrum` is set, `vacuum` for the
    /// free-space preset and `oscillator` otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<DielectricModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_infinity: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub oscillators: Vec<Oscillator>,
    /// Two-column `omega_eV eps_imag` file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesSection {
    pub rel_tol: f64,
    /// eV. Zero leaves the zero-temperature quadrature purely relative.
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for TolerancesSection {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_terms: Tolerances::DEFAULT_MAX_TERMS,
        }
    }
}

impl From<TolerancesSection> for Tolerances {
    fn from(t: TolerancesSection) -> Self {
        Tolerances {
            rel_tol: t.rel_tol,
            abs_tol: t.abs_tol,
            max_terms: t.max_terms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub scan: ScanSection,
    pub atom: AtomSection,
    pub dielectric: DielectricSection,
    pub tolerances: TolerancesSection,
}

/// Everything a scan needs, with materials loaded.
#[derive(Debug, Clone)]
pub struct ResolvedScan {
    /// Fully populated configuration, as echoed in output headers.
    pub config: ScanConfig,
    pub atom: PolarizabilityModel,
    pub dielectric: DielectricResponse,
    pub tolerances: Tolerances,
    pub branches: Vec<BranchLabel>,
}

/// Source text kept alongside the parsed config for line-numbered messages.
struct Source<'a> {
    name: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn error_at(&self, line: Option<usize>, msg: impl fmt::Display) -> CliError {
        match line {
            Some(l) => CliError::Input(format!("{}:{l}: {msg}", self.name)),
            None => CliError::Input(format!("{}: {msg}", self.name)),
        }
    }

    /// 1-based line of `key = ...` inside `[section]`, if present.
    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix('[') {
                current = rest.trim_end_matches(']').trim().to_string();
                continue;
            }
            if current == section {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim() == key {
                        return Some(i + 1);
                    }
                }
            }
        }
        None
    }

    fn invalid(&self, section: &str, key: &str, msg: impl fmt::Display) -> CliError {
        self.error_at(
            self.line_of(section, key),
            format!("[{section}] {key}: {msg}"),
        )
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_toml<T: serde::de::DeserializeOwned>(src: &Source<'_>) -> Result<T, CliError> {
    toml::from_str(src.text).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(src.text, s.start));
        src.error_at(line, e.message().trim())
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Material file: a TOML document holding one `[atom]` or `[dielectric]` table.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    atom: Option<AtomSection>,
    dielectric: Option<DielectricSection>,
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ScanConfig {
    /// Parse TOML text. `name` labels error messages.
    pub fn parse(text: &str, name: &str) -> Result<Self, CliError> {
        parse_toml(&Source { name, text })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = read_file(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Validate, load referenced material files relative to `base`, and fill
    /// every default. `text`/`name` locate errors in the original source.
    pub fn resolve(
        mut self,
        base: &Path,
        name: &str,
        text: &str,
    ) -> Result<ResolvedScan, CliError> {
        let src = Source { name, text };
        self.validate_scan(&src)?;

        if let Some(file) = self.atom.file.take() {
            let path = resolve_path(base, &file);
            let body = read_file(&path)?;
            let name = path.display().to_string();
            let m: MaterialFile = parse_toml(&Source {
                name: &name,
                text: &body,
            })?;
            let mut atom = m
                .atom
                .ok_or_else(|| CliError::Input(format!("{name}: no [atom] section")))?;
            if atom.file.is_some() {
                return Err(CliError::Input(format!(
                    "{name}: nested [atom] file references are not allowed"
                )));
            }
            atom.file = Some(path);
            self.atom = atom;
        }
        let atom = PolarizabilityModel::new(self.atom.alpha_static, self.atom.omega_resonance)
            .map_err(|e| src.invalid("atom", "alpha_static", e))?;

        if let Some(file) = self.dielectric.file.take() {
            let path = resolve_path(base, &file);
            let body = read_file(&path)?;
            let name = path.display().to_string();
            let m: MaterialFile = parse_toml(&Source {
                name: &name,
                text: &body,
            })?;
            let mut d = m
                .dielectric
                .ok_or_else(|| CliError::Input(format!("{name}: no [dielectric] section")))?;
            if d.file.is_some() {
                return Err(CliError::Input(format!(
                    "{name}: nested [dielectric] file references are not allowed"
                )));
            }
            if let Some(spec) = d.spectrum.take() {
                d.spectrum = Some(resolve_path(path.parent().unwrap_or(Path::new(".")), &spec));
            }
            d.file = Some(path);
            self.dielectric = d;
        } else if let Some(spec) = self.dielectric.spectrum.take() {
            self.dielectric.spectrum = Some(resolve_path(base, &spec));
        }
        let dielectric = self.resolve_dielectric(&src)?;

        let tolerances: Tolerances = self.tolerances.into();
        if !(tolerances.rel_tol > 0.0 && tolerances.rel_tol < 1.0) {
            return Err(src.invalid("tolerances", "rel_tol", "must lie in (0, 1)"));
        }
        if !(tolerances.abs_tol >= 0.0) {
            return Err(src.invalid("tolerances", "abs_tol", "must be >= 0"));
        }
        if tolerances.max_terms < 2 {
            return Err(src.invalid("tolerances", "max_terms", "must be >= 2"));
        }

        let branches = self.scan.branches.iter().map(|&b| b.into()).collect();
        Ok(ResolvedScan {
            config: self,
            atom,
            dielectric,
            tolerances,
            branches,
        })
    }

    fn validate_scan(&mut self, src: &Source<'_>) -> Result<(), CliError> {
        let s = &mut self.scan;
        if !(s.rho_min > 0.0) || !s.rho_min.is_finite() {
            return Err(src.invalid("scan", "rho_min", format!("must be > 0, got {}", s.rho_min)));
        }
        if !(s.rho_max > s.rho_min) || !s.rho_max.is_finite() {
            return Err(src.invalid(
                "scan",
                "rho_max",
                format!("must exceed rho_min = {}, got {}", s.rho_min, s.rho_max),
            ));
        }
        if s.count < 2 {
            return Err(src.invalid("scan", "count", format!("must be >= 2, got {}", s.count)));
        }
        if s.quantities.is_empty() {
            return Err(src.invalid("scan", "quantities", "at least one quantity is required"));
        }
        if s.branches.is_empty() {
            return Err(src.invalid("scan", "branches", "at least one branch is required"));
        }
        for (i, q) in s.quantities.iter().enumerate() {
            if s.quantities[..i].contains(q) {
                return Err(src.invalid("scan", "quantities", format!("{q} listed twice")));
            }
        }
        for (i, b) in s.branches.iter().enumerate() {
            if s.branches[..i].contains(b) {
                return Err(src.invalid("scan", "branches", format!("{b:?} listed twice")));
            }
        }
        if !(s.temperature >= 0.0) || !s.temperature.is_finite() {
            return Err(src.invalid(
                "scan",
                "temperature",
                format!("must be >= 0 K, got {}", s.temperature),
            ));
        }
        if s.temperature == 0.0 && s.quantities.contains(&Quantity::ZeroFrequency) {
            return Err(src.invalid(
                "scan",
                "quantities",
                "zero_frequency needs a positive temperature",
            ));
        }
        if !(s.delta > 0.0) {
            return Err(src.invalid("scan", "delta", format!("must be > 0, got {}", s.delta)));
        }
        match s.preset {
            Preset::Custom => {
                let z = *s.z_a.get_or_insert(PRESET_HEIGHT);
                if !(z > 0.0) || !z.is_finite() {
                    return Err(src.invalid("scan", "z_a", format!("must be > 0, got {z}")));
                }
                s.direction.get_or_insert(Direction::Vertical);
            }
            preset => {
                if s.z_a.is_some() || s.direction.is_some() {
                    let key = if s.z_a.is_some() { "z_a" } else { "direction" };
                    return Err(src.invalid(
                        "scan",
                        key,
                        format!(
                            "only allowed with preset = \"custom\", not {}",
                            preset.as_str()
                        ),
                    ));
                }
                s.z_a = Some(PRESET_HEIGHT);
                s.direction = Some(match preset {
                    Preset::Fig3 => Direction::Vertical,
                    _ => Direction::Lateral,
                });
            }
        }
        Ok(())
    }

    fn resolve_dielectric(&mut self, src: &Source<'_>) -> Result<DielectricResponse, CliError> {
        let d = &mut self.dielectric;
        let model = *d.model.get_or_insert(if d.spectrum.is_some() {
            DielectricModel::Tabulated
        } else if self.scan.preset == Preset::FreeSpace {
            DielectricModel::Vacuum
        } else {
            DielectricModel::Oscillator
        });
        match model {
            DielectricModel::Vacuum => {
                if d.spectrum.is_some() || !d.oscillators.is_empty() || d.epsilon_infinity.is_some()
                {
                    return Err(src.invalid(
                        "dielectric",
                        "model",
                        "vacuum takes no spectrum, oscillators or epsilon_infinity",
                    ));
                }
                Ok(DielectricResponse::Vacuum)
            }
            DielectricModel::Oscillator => {
                if d.spectrum.is_some() {
                    return Err(src.invalid(
                        "dielectric",
                        "spectrum",
                        "not used by the oscillator model",
                    ));
                }
                if d.oscillators.is_empty() && d.epsilon_infinity.is_none() {
                    let default = OscillatorDielectric::phospholipid_like();
                    d.label
                        .get_or_insert_with(|| "phospholipid-like (representative)".into());
                    d.oscillators = default
                        .terms()
                        .iter()
                        .map(|t| Oscillator {
                            strength: t.strength,
                            center: t.center,
                        })
                        .collect();
                    d.epsilon_infinity = Some(default.epsilon_infinity());
                }
                let eps_inf = *d.epsilon_infinity.get_or_insert(1.0);
                let terms = d
                    .oscillators
                    .iter()
                    .map(|o| OscillatorTerm {
                        strength: o.strength,
                        center: o.center,
                    })
                    .collect();
                OscillatorDielectric::new(terms, eps_inf)
                    .map(DielectricResponse::from)
                    .map_err(|e| src.invalid("dielectric", "oscillators", e))
            }
            DielectricModel::Tabulated => {
                if !d.oscillators.is_empty() || d.epsilon_infinity.is_some() {
                    return Err(src.invalid(
                        "dielectric",
                        "model",
                        "tabulated takes only a spectrum file",
                    ));
                }
                let path = d.spectrum.as_ref().ok_or_else(|| {
                    src.invalid("dielectric", "spectrum", "required by the tabulated model")
                })?;
                let body = read_file(path)?;
                let spectrum = TabulatedLossSpectrum::parse(&body)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                Ok(DielectricResponse::from(spectrum))
            }
        }
    }
}

impl ResolvedScan {
    pub fn temperature(&self) -> f64 {
        self.config.scan.temperature
    }

    pub fn quantities(&self) -> &[Quantity] {
        &self.config.scan.quantities
    }

    /// Sample points in increasing order, ending exactly on `rho_max`.
    pub fn rho_grid(&self) -> Vec<f64> {
        let s = &self.config.scan;
        let n = s.count;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return s.rho_max;
                }
                let t = i as f64 / (n - 1) as f64;
                match s.spacing {
                    Spacing::Log => s.rho_min * (s.rho_max / s.rho_min).powf(t),
                    Spacing::Linear => s.rho_min + (s.rho_max - s.rho_min) * t,
                }
            })
            .collect()
    }

    /// Pair geometry at separation `rho`.
    pub fn geometry(&self, rho: f64) -> resonance_core::Result<GeometryConfig> {
        let s = &self.config.scan;
        let z = s.z_a.unwrap_or(PRESET_HEIGHT);
        match s.direction.unwrap_or(Direction::Vertical) {
            Direction::Vertical => GeometryConfig::stacked(z, rho),
            Direction::Lateral => GeometryConfig::side_by_side(z, rho),
        }
    }

    /// Resolved configuration as TOML.
    pub fn config_toml(&self) -> String {
        toml::to_string(&self.config).expect("config is always serializable")
    }
}
