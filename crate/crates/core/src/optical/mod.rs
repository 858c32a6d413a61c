//! Optical level structure and polarized transition patterns.
//!
//! Levels are Kramers doublets tagged by a crystal quantum number (+-1/2 or
//! +-3/2). Between two doublets in a field, four branch combinations exist;
//! which of them radiate, in which polarization and through which dipole
//! mechanism, is looked up in a [`SelectionRuleTable`]. The table ships as
//! editable data — the built-in default encodes the uniaxial (D2d-type) rule
//! set over the crystal quantum number change.

pub mod spectrum;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::constants::K_B_OVER_H;
use crate::positive;
use crate::spin::{zeeman_splitting, FieldPoint, GTensor};

#[derive(Debug, Error)]
pub enum OpticalError {
    #[error("selection rule table has no entry for ({0}, {1}, {2:?})")]
    MissingSelectionEntry(SignedMu, SignedMu, Polarization),
    #[error("temperature must be positive, got {0} K")]
    NonPositiveTemperature(f64),
}

/// Optical polarization relative to the crystal c-axis: pi is E parallel to c,
/// sigma is E perpendicular to c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Sigma,
    Pi,
}

/// Transition mechanism: electric or magnetic dipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DipoleType {
    Ed,
    Md,
}

/// Zeeman branch of a doublet: upper (+) or lower (-) in energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }
    pub const BOTH: [Branch; 2] = [Branch::Lower, Branch::Upper];
}

/// Crystal quantum number tag of a doublet: |mu| = 1/2 or 3/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrystalQuantumNumber {
    Half,
    ThreeHalves,
}

/// Signed crystal quantum number of one Zeeman branch, in units of 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SignedMu {
    #[serde(rename = "+1/2")]
    PlusHalf,
    #[serde(rename = "-1/2")]
    MinusHalf,
    #[serde(rename = "+3/2")]
    PlusThreeHalves,
    #[serde(rename = "-3/2")]
    MinusThreeHalves,
}

impl std::fmt::Display for SignedMu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SignedMu::PlusHalf => "+1/2",
            SignedMu::MinusHalf => "-1/2",
            SignedMu::PlusThreeHalves => "+3/2",
            SignedMu::MinusThreeHalves => "-3/2",
        };
        write!(f, "{s}")
    }
}

impl SignedMu {
    /// mu in units of 1/2: +-1 or +-3.
    pub fn half_units(self) -> i32 {
        match self {
            SignedMu::PlusHalf => 1,
            SignedMu::MinusHalf => -1,
            SignedMu::PlusThreeHalves => 3,
            SignedMu::MinusThreeHalves => -3,
        }
    }

    /// Branch-resolved mu of a doublet: the upper branch carries +|mu|.
    pub fn of_branch(tag: CrystalQuantumNumber, branch: Branch) -> SignedMu {
        match (tag, branch) {
            (CrystalQuantumNumber::Half, Branch::Upper) => SignedMu::PlusHalf,
            (CrystalQuantumNumber::Half, Branch::Lower) => SignedMu::MinusHalf,
            (CrystalQuantumNumber::ThreeHalves, Branch::Upper) => SignedMu::PlusThreeHalves,
            (CrystalQuantumNumber::ThreeHalves, Branch::Lower) => SignedMu::MinusThreeHalves,
        }
    }

    pub const ALL: [SignedMu; 4] = [
        SignedMu::PlusHalf,
        SignedMu::MinusHalf,
        SignedMu::PlusThreeHalves,
        SignedMu::MinusThreeHalves,
    ];
}

/// One optical Kramers doublet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpticalLevel {
    pub label: String,
    /// Offset of the zero-field doublet center from the ground level, Hz.
    pub zero_field_frequency: f64,
    pub g: GTensor,
    pub crystal_quantum_number: CrystalQuantumNumber,
}

/// Allowed dipole mechanisms for every (mu_initial, mu_final, polarization)
/// combination. Every entry is explicit; an empty set means forbidden.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct SelectionRuleTable {
    entries: Vec<SelectionRule>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SelectionRule {
    pub mu_initial: SignedMu,
    pub mu_final: SignedMu,
    pub polarization: Polarization,
    pub dipoles: Vec<DipoleType>,
}

impl SelectionRuleTable {
    pub fn new(entries: Vec<SelectionRule>) -> Self {
        Self { entries }
    }

    /// Default uniaxial rule set, classified by the change of the crystal
    /// quantum number modulo 4 (in units of 1/2, modulo 8):
    ///   0   -> sigma MD
    ///   +-2 -> sigma ED and pi MD
    ///   4   -> pi ED
    pub fn default_d2d() -> Self {
        let mut entries = Vec::new();
        for mi in SignedMu::ALL {
            for mf in SignedMu::ALL {
                let delta = (mf.half_units() - mi.half_units()).rem_euclid(8);
                for pol in [Polarization::Sigma, Polarization::Pi] {
                    let dipoles = match (delta, pol) {
                        (0, Polarization::Sigma) => vec![DipoleType::Md],
                        (2 | 6, Polarization::Sigma) => vec![DipoleType::Ed],
                        (2 | 6, Polarization::Pi) => vec![DipoleType::Md],
                        (4, Polarization::Pi) => vec![DipoleType::Ed],
                        _ => vec![],
                    };
                    entries.push(SelectionRule {
                        mu_initial: mi,
                        mu_final: mf,
                        polarization: pol,
                        dipoles,
                    });
                }
            }
        }
        Self { entries }
    }

    pub fn lookup(
        &self,
        mu_initial: SignedMu,
        mu_final: SignedMu,
        polarization: Polarization,
    ) -> Result<&[DipoleType], OpticalError> {
        self.entries
            .iter()
            .find(|e| {
                e.mu_initial == mu_initial && e.mu_final == mu_final && e.polarization == polarization
            })
            .map(|e| e.dipoles.as_slice())
            .ok_or(OpticalError::MissingSelectionEntry(
                mu_initial,
                mu_final,
                polarization,
            ))
    }

    /// The table must be symmetric under initial/final exchange and carry all
    /// 32 combinations.
    pub fn validate(&self) -> Result<(), String> {
        for mi in SignedMu::ALL {
            for mf in SignedMu::ALL {
                for pol in [Polarization::Sigma, Polarization::Pi] {
                    let fwd = self
                        .lookup(mi, mf, pol)
                        .map_err(|e| e.to_string())?
                        .to_vec();
                    let mut bwd = self.lookup(mf, mi, pol).map_err(|e| e.to_string())?.to_vec();
                    let mut fwd_sorted = fwd.clone();
                    fwd_sorted.sort();
                    bwd.sort();
                    if fwd_sorted != bwd {
                        return Err(format!(
                            "selection table asymmetric for ({mi}, {mf}, {pol:?})"
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One optical line of a branch combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalTransitionLine {
    /// Offset from the zero-field line center, Hz:
    /// (s_e nu_e - s_g nu_g) / 2 with s = +-1.
    pub offset: f64,
    pub ground_branch: Branch,
    pub excited_branch: Branch,
    pub polarization: Polarization,
    pub dipole_type: DipoleType,
    /// Thermal-weighted share of its dipole-type group, normalized so every
    /// group sums to one.
    pub relative_amplitude: f64,
}

/// Boltzmann factor exp(-h nu / k_B T) between the upper and lower ground
/// branches.
pub fn thermal_population_ratio(temperature: f64, splitting: f64) -> Result<f64, OpticalError> {
    if !positive(temperature) {
        return Err(OpticalError::NonPositiveTemperature(temperature));
    }
    Ok((-splitting / (K_B_OVER_H * temperature)).exp())
}

/// The allowed branch-combination lines of `ground` -> `excited` at one field
/// point and polarization.
pub fn line_positions(
    ground: &OpticalLevel,
    excited: &OpticalLevel,
    field: &FieldPoint,
    polarization: Polarization,
    rules: &SelectionRuleTable,
    temperature: f64,
) -> Result<Vec<OpticalTransitionLine>, OpticalError> {
    let nu_g = zeeman_splitting(&ground.g, field);
    let nu_e = zeeman_splitting(&excited.g, field);
    let thermal = thermal_population_ratio(temperature, nu_g)?;

    let mut lines = Vec::new();
    for ground_branch in Branch::BOTH {
        for excited_branch in Branch::BOTH {
            let mu_i = SignedMu::of_branch(ground.crystal_quantum_number, ground_branch);
            let mu_f = SignedMu::of_branch(excited.crystal_quantum_number, excited_branch);
            let offset = 0.5 * (excited_branch.sign() * nu_e - ground_branch.sign() * nu_g);
            for &dipole_type in rules.lookup(mu_i, mu_f, polarization)? {
                let weight = match ground_branch {
                    Branch::Lower => 1.0,
                    Branch::Upper => thermal,
                };
                lines.push(OpticalTransitionLine {
                    offset,
                    ground_branch,
                    excited_branch,
                    polarization,
                    dipole_type,
                    relative_amplitude: weight,
                });
            }
        }
    }

    // normalize each dipole-type group to unit total amplitude
    let mut totals: BTreeMap<DipoleType, f64> = BTreeMap::new();
    for line in &lines {
        *totals.entry(line.dipole_type).or_insert(0.0) += line.relative_amplitude;
    }
    for line in &mut lines {
        line.relative_amplitude /= totals[&line.dipole_type];
    }
    lines.sort_by(|a, b| a.offset.partial_cmp(&b.offset).unwrap());
    Ok(lines)
}

/// `line_positions` across a theta grid at fixed field magnitude. Branch tags
/// stay attached to the same combination along the grid.
pub fn rotation_pattern(
    ground: &OpticalLevel,
    excited: &OpticalLevel,
    magnitude: f64,
    thetas: &[f64],
    polarization: Polarization,
    rules: &SelectionRuleTable,
    temperature: f64,
) -> Result<Vec<Vec<OpticalTransitionLine>>, OpticalError> {
    thetas
        .iter()
        .map(|&theta| {
            let field = FieldPoint {
                magnitude,
                theta: theta.abs(),
            };
            line_positions(ground, excited, &field, polarization, rules, temperature)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::FieldPoint;

    fn z1() -> OpticalLevel {
        OpticalLevel {
            label: "Z1".into(),
            zero_field_frequency: 0.0,
            g: GTensor::new(3.544, 7.085).unwrap(),
            crystal_quantum_number: CrystalQuantumNumber::ThreeHalves,
        }
    }
    fn y1() -> OpticalLevel {
        OpticalLevel {
            label: "Y1".into(),
            zero_field_frequency: 1.96044e14,
            g: GTensor::new(4.51, 4.57).unwrap(),
            crystal_quantum_number: CrystalQuantumNumber::ThreeHalves,
        }
    }
    fn y2() -> OpticalLevel {
        OpticalLevel {
            label: "Y2".into(),
            zero_field_frequency: 1.96099e14,
            g: GTensor::new(2.74, 6.74).unwrap(),
            crystal_quantum_number: CrystalQuantumNumber::Half,
        }
    }

    #[test]
    fn default_table_is_valid() {
        SelectionRuleTable::default_d2d().validate().unwrap();
    }

    #[test]
    fn line_counts_match_observed_spectra() {
        let rules = SelectionRuleTable::default_d2d();
        let field = FieldPoint::axial(0.09).unwrap();
        let n = |g: &OpticalLevel, e: &OpticalLevel, p| {
            line_positions(g, e, &field, p, &rules, 1.0).unwrap().len()
        };
        // four (two) lines under sigma (pi) for Z1-Y1; four under pi for Z1-Y2
        assert_eq!(n(&z1(), &y1(), Polarization::Sigma), 4);
        assert_eq!(n(&z1(), &y1(), Polarization::Pi), 2);
        assert_eq!(n(&z1(), &y2(), Polarization::Pi), 4);
        assert_eq!(n(&z1(), &y2(), Polarization::Sigma), 2);
    }

    #[test]
    fn frozen_offsets_at_90_mt() {
        let rules = SelectionRuleTable::default_d2d();
        let field = FieldPoint::axial(0.09).unwrap();
        let lines = line_positions(&z1(), &y2(), &field, Polarization::Pi, &rules, 1.0).unwrap();
        let offsets: Vec<f64> = lines.iter().map(|l| l.offset).collect();
        let expect = [
            -3.9578581430226398e9,
            -5.0638414178711027e8,
            5.0638414178711027e8,
            3.9578581430226398e9,
        ];
        for (o, e) in offsets.iter().zip(expect.iter()) {
            assert!((o - e).abs() < 1.0, "offset {o} vs {e}");
        }
        // offsets sum to zero by the +- symmetry of the splittings
        assert!(offsets.iter().sum::<f64>().abs() < 1e-3);
    }

    #[test]
    fn zero_field_single_line() {
        let rules = SelectionRuleTable::default_d2d();
        let field = FieldPoint::axial(0.0).unwrap();
        for line in line_positions(&z1(), &y2(), &field, Polarization::Pi, &rules, 1.0).unwrap() {
            assert_eq!(line.offset, 0.0);
        }
    }

    #[test]
    fn pair_separations_match_zeeman_splittings() {
        let rules = SelectionRuleTable::default_d2d();
        let field = FieldPoint::axial(0.0632).unwrap();
        let nu_g = zeeman_splitting(&z1().g, &field);
        let nu_e = zeeman_splitting(&y2().g, &field);
        let lines = line_positions(&z1(), &y2(), &field, Polarization::Pi, &rules, 1.0).unwrap();
        // branch-conserving pair separated by |nu_g - nu_e|, branch-flipping by nu_g + nu_e
        let conserving: Vec<f64> = lines
            .iter()
            .filter(|l| l.ground_branch == l.excited_branch)
            .map(|l| l.offset)
            .collect();
        let flipping: Vec<f64> = lines
            .iter()
            .filter(|l| l.ground_branch != l.excited_branch)
            .map(|l| l.offset)
            .collect();
        assert_eq!(conserving.len(), 2);
        assert_eq!(flipping.len(), 2);
        assert!(((conserving[1] - conserving[0]).abs() - (nu_g - nu_e).abs()).abs() < 1.0);
        assert!(((flipping[1] - flipping[0]).abs() - (nu_g + nu_e)).abs() < 1.0);
    }

    #[test]
    fn amplitude_ratio_is_thermal() {
        let rules = SelectionRuleTable::default_d2d();
        let field = FieldPoint::axial(0.09).unwrap();
        let temperature = 1.0;
        let nu_g = zeeman_splitting(&z1().g, &field);
        let ratio = thermal_population_ratio(temperature, nu_g).unwrap();
        let lines =
            line_positions(&z1(), &y1(), &field, Polarization::Sigma, &rules, temperature).unwrap();
        for dipole in [DipoleType::Ed, DipoleType::Md] {
            let group: Vec<_> = lines.iter().filter(|l| l.dipole_type == dipole).collect();
            assert_eq!(group.len(), 2);
            let upper = group
                .iter()
                .find(|l| l.ground_branch == Branch::Upper)
                .unwrap();
            let lower = group
                .iter()
                .find(|l| l.ground_branch == Branch::Lower)
                .unwrap();
            assert!((upper.relative_amplitude / lower.relative_amplitude - ratio).abs() < 1e-12);
            let total: f64 = group.iter().map(|l| l.relative_amplitude).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_consistency_and_symmetry() {
        let rules = SelectionRuleTable::default_d2d();
        let thetas: Vec<f64> = (0..=18).map(|k| k as f64 * 5.0_f64.to_radians()).collect();
        let pattern = rotation_pattern(
            &z1(),
            &y1(),
            0.075,
            &thetas,
            Polarization::Sigma,
            &rules,
            1.0,
        )
        .unwrap();
        // theta = 0 reproduces line_positions exactly
        let direct = line_positions(
            &z1(),
            &y1(),
            &FieldPoint::axial(0.075).unwrap(),
            Polarization::Sigma,
            &rules,
            1.0,
        )
        .unwrap();
        assert_eq!(pattern[0], direct);

        // theta and -theta coincide (axial symmetry)
        let mirrored = rotation_pattern(
            &z1(),
            &y1(),
            0.075,
            &[-thetas[5]],
            Polarization::Sigma,
            &rules,
            1.0,
        )
        .unwrap();
        assert_eq!(mirrored[0], pattern[5]);
    }

    #[test]
    fn frozen_rotation_splittings_at_75_mt() {
        // Z1 splitting: 3.7202 GHz parallel, 7.4373 GHz perpendicular
        let g = z1().g;
        let par = zeeman_splitting(&g, &FieldPoint::axial(0.075).unwrap());
        let perp = zeeman_splitting(
            &g,
            &FieldPoint::new(0.075, std::f64::consts::FRAC_PI_2).unwrap(),
        );
        assert!((par / 3.720201904008125e9 - 1.0).abs() < 1e-10);
        assert!((perp / 7.437254652905633e9 - 1.0).abs() < 1e-10);

        // near-isotropic Y1: splitting varies by < 1.4% over all theta
        let g1 = y1().g;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for k in 0..=90 {
            let theta = k as f64 * 2.0_f64.to_radians();
            if theta > std::f64::consts::PI {
                break;
            }
            let v = zeeman_splitting(&g1, &FieldPoint::new(0.075, theta).unwrap());
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert!(hi / lo < 1.014);
    }

    #[test]
    fn thermal_population_values() {
        let r = thermal_population_ratio(1.0, 4.4642e9).unwrap();
        assert!((r - 0.8071483413870575).abs() < 1e-12);
        assert_eq!(thermal_population_ratio(1.0, 0.0).unwrap(), 1.0);
        assert!(thermal_population_ratio(0.01, 4.4642e9).unwrap() < 1e-9);
        assert!(thermal_population_ratio(0.0, 1e9).is_err());
        assert!(thermal_population_ratio(-3.0, 1e9).is_err());
    }

    #[test]
    fn missing_selection_entry_is_an_error() {
        let rules = SelectionRuleTable::new(vec![]);
        let field = FieldPoint::axial(0.05).unwrap();
        let err = line_positions(&z1(), &y1(), &field, Polarization::Pi, &rules, 1.0);
        assert!(matches!(
            err,
            Err(OpticalError::MissingSelectionEntry(_, _, _))
        ));
    }
}
