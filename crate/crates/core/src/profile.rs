//! Named material profiles: levels with g tensors and wavelengths, host
//! optics, measured inhomogeneities and absorption integrals, resonator and
//! sample parameters, and the selection-rule table. Profiles are JSON files
//! with explicit unit suffixes in every field name; a reference profile for
//! the 140 ppm material is bundled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cavity::CavityParams;
use crate::constants::SPEED_OF_LIGHT;
use crate::optical::{
    CrystalQuantumNumber, DipoleType, OpticalLevel, Polarization, SelectionRuleTable,
};
use crate::photophysics::HostOptics;
use crate::spin::{GTensor, SpinSystem};
use crate::positive;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("profile i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("profile invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelEntry {
    pub label: String,
    /// Vacuum wavelength of the transition from the ground level, nm; absent
    /// for the ground level itself.
    pub vacuum_wavelength_nm: Option<f64>,
    pub g_par: f64,
    pub g_perp: f64,
    pub crystal_quantum_number: CrystalQuantumNumber,
    /// Optical inhomogeneous FWHM of the transition from the ground level.
    pub inhomogeneity_fwhm_mhz: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HostEntry {
    pub n_c: f64,
    pub n_a: f64,
    pub number_density_per_cm3: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasuredAbsorption {
    /// Transition name, e.g. "Z1-Y1".
    pub transition: String,
    pub polarization: Polarization,
    pub dipole: DipoleType,
    pub integrated_alpha_ghz_per_cm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperfineEntry {
    pub nuclear_spin: f64,
    #[serde(rename = "A_par_MHz")]
    pub a_par_mhz: f64,
    #[serde(rename = "A_perp_MHz")]
    pub a_perp_mhz: f64,
    #[serde(rename = "quadrupole_P_MHz", default)]
    pub quadrupole_p_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonatorEntry {
    pub frequency_ghz: f64,
    pub linewidth_fwhm_mhz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleEntry {
    pub length_cm: f64,
    pub temperature_k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaterialProfile {
    pub name: String,
    pub host: HostEntry,
    pub levels: Vec<LevelEntry>,
    pub measured_absorption: Vec<MeasuredAbsorption>,
    pub hyperfine_isotope: Option<HyperfineEntry>,
    pub resonator: ResonatorEntry,
    pub spin_inhomogeneity_hwhm_mhz: f64,
    pub ensemble_coupling_mhz: f64,
    pub magnetic_filling_fraction: f64,
    pub sample: SampleEntry,
    pub expected_y1_y2_gap_ghz: f64,
    pub selection_rules: SelectionRuleTable,
}

const BUNDLED: &str = include_str!("../data/ervo4.json");

impl MaterialProfile {
    /// The bundled 140 ppm reference profile.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED).expect("bundled profile must parse and validate")
    }

    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        let profile: MaterialProfile = serde_json::from_str(text)?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ProfileError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        HostOptics::new(self.host.n_c, self.host.n_a, self.host.number_density_per_cm3)
            .map_err(|e| ProfileError::Invalid(e.to_string()))?;
        if self.levels.is_empty() {
            return Err(ProfileError::Invalid("no levels".into()));
        }
        if self.levels[0].vacuum_wavelength_nm.is_some() {
            return Err(ProfileError::Invalid(
                "first level is the ground level and must not carry a wavelength".into(),
            ));
        }
        for level in &self.levels {
            GTensor::new(level.g_par, level.g_perp)
                .map_err(|e| ProfileError::Invalid(e.to_string()))?;
            if let Some(w) = level.vacuum_wavelength_nm {
                if !positive(w) {
                    return Err(ProfileError::Invalid(format!(
                        "level {} has non-positive wavelength",
                        level.label
                    )));
                }
            }
        }
        if !(positive(self.sample.length_cm) && positive(self.sample.temperature_k)) {
            return Err(ProfileError::Invalid("sample length/temperature".into()));
        }
        if !(positive(self.resonator.frequency_ghz) && positive(self.resonator.linewidth_fwhm_mhz)) {
            return Err(ProfileError::Invalid("resonator parameters".into()));
        }
        self.selection_rules
            .validate()
            .map_err(ProfileError::Invalid)?;
        // the first two excited levels must sit at the expected gap
        let offsets: Vec<f64> = self
            .levels
            .iter()
            .filter_map(|l| l.vacuum_wavelength_nm)
            .map(|w| SPEED_OF_LIGHT / (w * 1e-9))
            .collect();
        if offsets.len() >= 2 {
            let gap = (offsets[1] - offsets[0]).abs();
            let expected = self.expected_y1_y2_gap_ghz * 1e9;
            if (gap - expected).abs() > 1e9 {
                return Err(ProfileError::Invalid(format!(
                    "excited-level gap {:.2} GHz does not match the configured {:.2} GHz",
                    gap / 1e9,
                    expected / 1e9
                )));
            }
        }
        Ok(())
    }

    pub fn host_optics(&self) -> HostOptics {
        HostOptics::new(self.host.n_c, self.host.n_a, self.host.number_density_per_cm3).unwrap()
    }

    fn level_entry(&self, label: &str) -> Option<&LevelEntry> {
        self.levels.iter().find(|l| l.label == label)
    }

    /// Level as an [`OpticalLevel`]; the zero-field offset comes from the
    /// vacuum wavelength (zero for the ground level).
    pub fn optical_level(&self, label: &str) -> Option<OpticalLevel> {
        let entry = self.level_entry(label)?;
        Some(OpticalLevel {
            label: entry.label.clone(),
            zero_field_frequency: entry
                .vacuum_wavelength_nm
                .map(|w| SPEED_OF_LIGHT / (w * 1e-9))
                .unwrap_or(0.0),
            g: GTensor::new(entry.g_par, entry.g_perp).unwrap(),
            crystal_quantum_number: entry.crystal_quantum_number,
        })
    }

    pub fn ground_level(&self) -> OpticalLevel {
        self.optical_level(&self.levels[0].label).unwrap()
    }

    /// Optical inhomogeneous FWHM of the ground -> `label` transition, Hz.
    pub fn optical_inhomogeneity(&self, label: &str) -> Option<f64> {
        self.level_entry(label)?
            .inhomogeneity_fwhm_mhz
            .map(|m| m * 1e6)
    }

    /// Vacuum wavelength of the ground -> `label` transition, m.
    pub fn wavelength(&self, label: &str) -> Option<f64> {
        self.level_entry(label)?.vacuum_wavelength_nm.map(|w| w * 1e-9)
    }

    /// Even-isotope (I = 0) spin system of the ground doublet.
    pub fn even_spin_system(&self) -> SpinSystem {
        SpinSystem::electron_only(self.ground_level().g)
    }

    /// Odd-isotope hyperfine system of the ground doublet, when configured.
    pub fn hyperfine_spin_system(&self) -> Option<SpinSystem> {
        let h = self.hyperfine_isotope.as_ref()?;
        Some(
            SpinSystem::new(
                self.ground_level().g,
                h.nuclear_spin,
                h.a_par_mhz * 1e6,
                h.a_perp_mhz * 1e6,
                h.quadrupole_p_mhz * 1e6,
            )
            .expect("validated on load"),
        )
    }

    pub fn cavity(&self) -> CavityParams {
        CavityParams::new(
            self.resonator.frequency_ghz * 1e9,
            self.resonator.linewidth_fwhm_mhz * 1e6,
        )
        .unwrap()
    }

    /// Measured integrated absorption of one channel, Hz cm^-1.
    pub fn integrated_alpha(
        &self,
        transition: &str,
        polarization: Polarization,
        dipole: DipoleType,
    ) -> Option<f64> {
        self.measured_absorption
            .iter()
            .find(|r| {
                r.transition == transition && r.polarization == polarization && r.dipole == dipole
            })
            .map(|r| r.integrated_alpha_ghz_per_cm * 1e9)
    }

    /// Spin inhomogeneity HWHM, Hz.
    pub fn spin_inhomogeneity_hwhm(&self) -> f64 {
        self.spin_inhomogeneity_hwhm_mhz * 1e6
    }

    /// Fitted ensemble coupling, Hz.
    pub fn ensemble_coupling(&self) -> f64 {
        self.ensemble_coupling_mhz * 1e6
    }
}
