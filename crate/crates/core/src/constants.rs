/// Physical constants in the Å / eV / K unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// ħc in eV·Å.
    pub hbar_c: f64,
    /// Boltzmann constant in eV/K.
    pub k_b: f64,
    /// ħ in eV·s, used only to convert energies into rates.
    pub hbar: f64,
    /// Bohr radius in Å.
    pub bohr_radius: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        hbar_c: 1973.269804,
        k_b: 8.617333262e-5,
        hbar: 6.582119569e-16,
        bohr_radius: 0.529177,
    };

    /// Thermal energy k_B·T in eV.
    pub fn thermal_energy(&self, temperature: f64) -> f64 {
        self.k_b * temperature
    }

    /// Length ħc/(2π k_B T) in Å beyond which only the n = 0 Matsubara term
    /// survives.
    pub fn thermal_length(&self, temperature: f64) -> f64 {
        self.hbar_c / (2.0 * std::f64::consts::PI * self.k_b * temperature)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}
