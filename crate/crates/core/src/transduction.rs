//! Microwave-to-optical transduction figures of merit: the zeta material
//! parameter, Lambda/V three-level-system enumeration against a resonator,
//! and a synthetic Raman-heterodyne intensity map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cavity::{bare_transfer, CavityParams};
use crate::optical::spectrum::AbsorptionLine;
use crate::optical::{Branch, OpticalLevel};
use crate::spin::{find_crossings, zeeman_splitting, FieldPoint, SpinError, SpinSystem};
use crate::positive;

#[derive(Debug, Error)]
pub enum TransductionError {
    #[error("material figure of merit requires positive entries ({0})")]
    InvalidMaterial(&'static str),
    #[error("map grids must be non-empty and ascending")]
    InvalidGrid,
    #[error(transparent)]
    Spin(#[from] SpinError),
}

/// Material bundle entering zeta = (d31 d32 mu21 rho / (Delta_o Delta_mu))^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialFoM {
    /// Optical dipole moments of the two legs, C m.
    pub d31: f64,
    pub d32: f64,
    /// Spin transition magnetic moment, J/T.
    pub mu21: f64,
    /// Ion number density, m^-3.
    pub rho: f64,
    /// Optical detuning scale (e.g. optical inhomogeneity), Hz.
    pub delta_o: f64,
    /// Microwave detuning scale (spin inhomogeneity), Hz.
    pub delta_mu: f64,
}

impl MaterialFoM {
    pub fn new(
        d31: f64,
        d32: f64,
        mu21: f64,
        rho: f64,
        delta_o: f64,
        delta_mu: f64,
    ) -> Result<Self, TransductionError> {
        if !(positive(d31) && positive(d32) && positive(mu21) && positive(rho)) {
            return Err(TransductionError::InvalidMaterial("dipoles and density"));
        }
        if !(positive(delta_o) && positive(delta_mu)) {
            return Err(TransductionError::InvalidMaterial("detunings"));
        }
        Ok(Self {
            d31,
            d32,
            mu21,
            rho,
            delta_o,
            delta_mu,
        })
    }
}

/// zeta in SI. The absolute value is dimensionful; only ratios between
/// materials are meaningful.
pub fn zeta(m: &MaterialFoM) -> f64 {
    let x = m.d31 * m.d32 * m.mu21 * m.rho / (m.delta_o * m.delta_mu);
    x * x
}

/// zeta(a) / zeta(b).
pub fn zeta_ratio(a: &MaterialFoM, b: &MaterialFoM) -> f64 {
    zeta(a) / zeta(b)
}

/// Relative transduction strength of two systems from their leg dipoles:
/// ((d31 d32)_A / (d31 d32)_B)^2.
pub fn relative_system_strength(legs_a: (f64, f64), legs_b: (f64, f64)) -> f64 {
    let r = (legs_a.0 * legs_a.1) / (legs_b.0 * legs_b.1);
    r * r
}

/// Three-level topology: the microwave transition sits in the ground (Lambda)
/// or excited (V) doublet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Lambda,
    V,
}

/// Identity of one optical leg by its branch combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegId {
    pub ground_branch: Branch,
    pub excited_branch: Branch,
}

/// One usable three-level configuration at a bias field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelConfig {
    pub kind: SystemKind,
    /// Bias field where the microwave doublet matches the resonator, tesla.
    pub field: f64,
    /// Splitting of the microwave doublet at `field` (the resonator
    /// frequency), Hz.
    pub microwave_splitting: f64,
    /// The two signal branches: for Lambda the pump leaves the lower ground
    /// branch toward either excited branch; for V the pump reaches the upper
    /// excited branch from either ground branch.
    pub legs: [LegId; 2],
    /// Optical frequency offset between the two signal branches: the
    /// splitting of the companion (non-microwave) doublet at `field`, Hz.
    pub optical_offset: f64,
}

/// Enumerate Lambda and V configurations whose microwave doublet can be tuned
/// onto `resonator` within `field_range` (tesla, along the c-axis).
pub fn enumerate_systems(
    ground: &OpticalLevel,
    excited: &OpticalLevel,
    resonator: f64,
    field_range: (f64, f64),
) -> Result<Vec<ThreeLevelConfig>, TransductionError> {
    if !positive(resonator) {
        return Ok(Vec::new());
    }
    let mut configs = Vec::new();
    for (kind, tuned, companion) in [
        (SystemKind::Lambda, ground, excited),
        (SystemKind::V, excited, ground),
    ] {
        let sys = SpinSystem::electron_only(tuned.g);
        for crossing in find_crossings(&sys, resonator, field_range, 0.0)? {
            let field = FieldPoint::axial(crossing.field)?;
            let legs = match kind {
                SystemKind::Lambda => [
                    LegId {
                        ground_branch: Branch::Lower,
                        excited_branch: Branch::Upper,
                    },
                    LegId {
                        ground_branch: Branch::Lower,
                        excited_branch: Branch::Lower,
                    },
                ],
                SystemKind::V => [
                    LegId {
                        ground_branch: Branch::Lower,
                        excited_branch: Branch::Upper,
                    },
                    LegId {
                        ground_branch: Branch::Upper,
                        excited_branch: Branch::Upper,
                    },
                ],
            };
            configs.push(ThreeLevelConfig {
                kind,
                field: crossing.field,
                microwave_splitting: crossing.transition.frequency,
                legs,
                optical_offset: zeeman_splitting(&companion.g, &field),
            });
        }
    }
    configs.sort_by(|a, b| a.field.partial_cmp(&b.field).unwrap());
    Ok(configs)
}

/// Optical-frequency locus of one leg at a bias field: the branch-combination
/// offset from the zero-field line center.
pub fn leg_offset(
    ground: &OpticalLevel,
    excited: &OpticalLevel,
    leg: &LegId,
    field: f64,
) -> f64 {
    let fp = FieldPoint {
        magnitude: field,
        theta: 0.0,
    };
    0.5 * (leg.excited_branch.sign() * zeeman_splitting(&excited.g, &fp)
        - leg.ground_branch.sign() * zeeman_splitting(&ground.g, &fp))
}

/// Per-config ingredients of the Raman map: the optical line carrying each
/// leg (its width and integrated absorption weight the branch) and the
/// product of the two leg dipole moments.
#[derive(Debug, Clone, Copy)]
pub struct RamanBranchWeight {
    /// Optical line shape of this branch; `center` is ignored (the locus
    /// follows the field), `fwhm` and `integrated_alpha` weight it.
    pub line: AbsorptionLine,
    /// d31 * d32 of the legs feeding this branch, (C m)^2.
    pub dipole_product: f64,
}

/// A rendered Raman-heterodyne intensity map in arbitrary units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanMap {
    /// Bias-field grid, tesla.
    pub fields: Vec<f64>,
    /// Optical-frequency grid (offset from the zero-field line center), Hz.
    pub frequencies: Vec<f64>,
    /// Row-major intensity, rows indexed by field.
    pub intensity: Vec<f64>,
}

impl RamanMap {
    pub fn at(&self, field_index: usize, frequency_index: usize) -> f64 {
        self.intensity[field_index * self.frequencies.len() + frequency_index]
    }
}

/// Render the locus-and-weights map: each configuration contributes, at every
/// bias field, a Gaussian ridge at each signal-branch locus weighted by the
/// resonator line shape of its microwave doublet, the line's integrated
/// absorption, and the squared dipole product.
pub fn raman_map(
    ground: &OpticalLevel,
    excited: &OpticalLevel,
    configs: &[(ThreeLevelConfig, RamanBranchWeight, RamanBranchWeight)],
    cavity: &CavityParams,
    fields: &[f64],
    frequencies: &[f64],
) -> Result<RamanMap, TransductionError> {
    if fields.is_empty()
        || frequencies.is_empty()
        || fields.windows(2).any(|w| w[1] <= w[0])
        || frequencies.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(TransductionError::InvalidGrid);
    }
    let ln2 = std::f64::consts::LN_2;
    let mut intensity = vec![0.0; fields.len() * frequencies.len()];
    for (row, &field) in fields.iter().enumerate() {
        let fp = FieldPoint {
            magnitude: field,
            theta: 0.0,
        };
        for (config, w0, w1) in configs {
            let tuned_g = match config.kind {
                SystemKind::Lambda => &ground.g,
                SystemKind::V => &excited.g,
            };
            let microwave = zeeman_splitting(tuned_g, &fp);
            let resonator_weight = bare_transfer(cavity, microwave).norm_sqr();
            for (leg, weight) in config.legs.iter().zip([w0, w1]) {
                let locus = leg_offset(ground, excited, leg, field);
                let fwhm = weight.line.fwhm;
                let amplitude = weight.line.integrated_alpha
                    * weight.dipole_product
                    * weight.dipole_product
                    * resonator_weight;
                for (col, &nu) in frequencies.iter().enumerate() {
                    let x = nu - locus;
                    intensity[row * frequencies.len() + col] +=
                        amplitude * (-4.0 * ln2 * x * x / (fwhm * fwhm)).exp();
                }
            }
        }
    }
    Ok(RamanMap {
        fields: fields.to_vec(),
        frequencies: frequencies.to_vec(),
        intensity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optical::CrystalQuantumNumber;
    use crate::spin::GTensor;

    fn z1() -> OpticalLevel {
        OpticalLevel {
            label: "Z1".into(),
            zero_field_frequency: 0.0,
            g: GTensor::new(3.544, 7.085).unwrap(),
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
    fn y1() -> OpticalLevel {
        OpticalLevel {
            label: "Y1".into(),
            zero_field_frequency: 1.96044e14,
            g: GTensor::new(4.51, 4.57).unwrap(),
            crystal_quantum_number: CrystalQuantumNumber::ThreeHalves,
        }
    }

    fn material() -> MaterialFoM {
        MaterialFoM::new(3.0e-32, 2.5e-32, 3.29e-23, 1.75e24, 163e6, 58.4e6).unwrap()
    }

    #[test]
    fn zeta_symmetry_and_scalings() {
        let m = material();
        let swapped = MaterialFoM {
            d31: m.d32,
            d32: m.d31,
            ..m
        };
        assert_eq!(zeta(&m), zeta(&swapped));

        let double_rho = MaterialFoM {
            rho: 2.0 * m.rho,
            ..m
        };
        assert!((zeta(&double_rho) / zeta(&m) - 4.0).abs() < 1e-12);

        let halved = MaterialFoM {
            delta_o: 0.5 * m.delta_o,
            delta_mu: 0.5 * m.delta_mu,
            ..m
        };
        assert!((zeta(&halved) / zeta(&m) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn zeta_log_log_slopes() {
        // slopes (2, 2, 2, 2, -2, -2) in each argument
        let m = material();
        let base = zeta(&m);
        let k: f64 = 1.7;
        let cases: Vec<(MaterialFoM, f64)> = vec![
            (MaterialFoM { d31: k * m.d31, ..m }, 2.0),
            (MaterialFoM { d32: k * m.d32, ..m }, 2.0),
            (MaterialFoM { mu21: k * m.mu21, ..m }, 2.0),
            (MaterialFoM { rho: k * m.rho, ..m }, 2.0),
            (MaterialFoM { delta_o: k * m.delta_o, ..m }, -2.0),
            (MaterialFoM { delta_mu: k * m.delta_mu, ..m }, -2.0),
        ];
        for (scaled, slope) in cases {
            let measured = (zeta(&scaled) / base).ln() / k.ln();
            assert!((measured - slope).abs() < 1e-10, "slope {measured}");
        }
    }

    #[test]
    fn zeta_ratio_fixture() {
        // comparator with half the dipoles, tenth the density, wider lines
        let a = material();
        let b = MaterialFoM::new(1.5e-32, 1.25e-32, 3.29e-23, 1.75e23, 510e6, 58.4e6).unwrap();
        let expect = ((3.0 * 2.5) / (1.5 * 1.25) * 10.0 * (510.0_f64 / 163.0)).powi(2);
        assert!((zeta_ratio(&a, &b) / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_materials_rejected() {
        assert!(MaterialFoM::new(0.0, 1e-32, 1e-23, 1e24, 1e8, 1e7).is_err());
        assert!(MaterialFoM::new(1e-32, 1e-32, 1e-23, 1e24, 0.0, 1e7).is_err());
    }

    #[test]
    fn relative_strength_values() {
        assert_eq!(relative_system_strength((2.0, 3.0), (2.0, 3.0)), 1.0);
        let r = relative_system_strength((3.0e-32, 2.5e-32), (3.3e-32, 1.0e-32));
        assert!((r - 5.165289256198348).abs() < 1e-10);
        let doubled = relative_system_strength((6.0e-32, 2.5e-32), (3.3e-32, 1.0e-32));
        assert!((doubled / r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_lambda_v_configurations() {
        let configs = enumerate_systems(&z1(), &y2(), 2.4e9, (1e-3, 0.120)).unwrap();
        assert_eq!(configs.len(), 2);
        let lambda = configs.iter().find(|c| c.kind == SystemKind::Lambda).unwrap();
        let v = configs.iter().find(|c| c.kind == SystemKind::V).unwrap();
        assert!((lambda.field - 48.3845e-3).abs() < 5e-5, "{}", lambda.field);
        assert!((lambda.optical_offset / 1.855530474040632e9 - 1.0).abs() < 1e-3);
        assert!((v.field - 62.5820e-3).abs() < 5e-5, "{}", v.field);
        assert!((v.optical_offset / 3.1042335766423355e9 - 1.0).abs() < 1e-3);

        // splittings re-evaluated at the reported fields reproduce the
        // resonator to 1 kHz; offsets equal the companion splitting to 1 kHz
        for c in &configs {
            assert!((c.microwave_splitting - 2.4e9).abs() < 1e3);
            let fp = FieldPoint::axial(c.field).unwrap();
            let companion = match c.kind {
                SystemKind::Lambda => zeeman_splitting(&y2().g, &fp),
                SystemKind::V => zeeman_splitting(&z1().g, &fp),
            };
            assert!((c.optical_offset - companion).abs() < 1e3);
        }
    }

    #[test]
    fn y1_system_fields() {
        let configs = enumerate_systems(&z1(), &y1(), 2.4e9, (1e-3, 0.120)).unwrap();
        let lambda = configs.iter().find(|c| c.kind == SystemKind::Lambda).unwrap();
        let v = configs.iter().find(|c| c.kind == SystemKind::V).unwrap();
        assert!((lambda.field - 48.3845e-3).abs() < 5e-5);
        assert!((v.field - 38.0210e-3).abs() < 5e-5, "{}", v.field);
    }

    #[test]
    fn zero_resonator_yields_nothing() {
        let configs = enumerate_systems(&z1(), &y2(), 0.0, (1e-3, 0.120)).unwrap();
        assert!(configs.is_empty());
    }

    fn map_fixture(
        alpha_scale: f64,
        dipole_scale: f64,
    ) -> (RamanMap, Vec<ThreeLevelConfig>) {
        let cavity = CavityParams::new(2.4e9, 2.8e6).unwrap();
        let configs = enumerate_systems(&z1(), &y2(), 2.4e9, (1e-3, 0.120)).unwrap();
        let weighted: Vec<_> = configs
            .iter()
            .map(|&c| {
                let line =
                    AbsorptionLine::gaussian(0.0, 163e6, alpha_scale * 40e9).unwrap();
                let w = RamanBranchWeight {
                    line,
                    dipole_product: dipole_scale * 3.0e-32 * 2.5e-32,
                };
                (c, w, w)
            })
            .collect();
        let fields: Vec<f64> = (0..=160).map(|k| 40e-3 + k as f64 * 0.2e-3).collect();
        let freqs: Vec<f64> = (0..=240).map(|k| -4.2e9 + k as f64 * 35e6).collect();
        let map = raman_map(&z1(), &y2(), &weighted, &cavity, &fields, &freqs).unwrap();
        (map, configs)
    }

    #[test]
    fn map_maxima_on_branch_loci() {
        let (map, configs) = map_fixture(1.0, 1.0);
        assert!(map.intensity.iter().all(|&v| v >= 0.0));

        // the two Lambda branches at the Lambda field are separated by the
        // excited splitting, the two V branches by the ground splitting
        for config in &configs {
            let row = map
                .fields
                .iter()
                .position(|&b| (b - config.field).abs() < 1.01e-4)
                .unwrap();
            for leg in &config.legs {
                let locus = leg_offset(&z1(), &y2(), leg, map.fields[row]);
                let col = map
                    .frequencies
                    .iter()
                    .position(|&f| (f - locus).abs() < 17.6e6)
                    .unwrap();
                let here = map.at(row, col);
                // local maximum along the frequency axis beyond a linewidth
                let off = map
                    .frequencies
                    .iter()
                    .position(|&f| (f - locus - 8.0 * 163e6).abs() < 17.6e6)
                    .unwrap();
                assert!(here > 10.0 * map.at(row, off));
            }
            let separation =
                (leg_offset(&z1(), &y2(), &config.legs[0], config.field)
                    - leg_offset(&z1(), &y2(), &config.legs[1], config.field))
                .abs();
            assert!((separation - config.optical_offset).abs() < 1e3);
        }
    }

    #[test]
    fn map_scalings_and_cuts() {
        let (base, configs) = map_fixture(1.0, 1.0);
        let (zero_alpha, _) = map_fixture(0.0, 1.0);
        assert!(zero_alpha.intensity.iter().all(|&v| v == 0.0));

        let (doubled, _) = map_fixture(1.0, 2.0);
        for (a, b) in base.intensity.iter().zip(doubled.intensity.iter()) {
            assert!((4.0 * a - b).abs() <= 1e-9 * b.abs().max(1e-300));
        }

        // fixed-B cut across the Lambda crossing follows the bare |t|^2
        let cavity = CavityParams::new(2.4e9, 2.8e6).unwrap();
        let lambda = configs.iter().find(|c| c.kind == SystemKind::Lambda).unwrap();
        let locus0 = leg_offset(&z1(), &y2(), &lambda.legs[0], lambda.field);
        let cut_fields: Vec<f64> = (-40..=40)
            .map(|k| lambda.field + k as f64 * 2.0e-6)
            .collect();
        let weighted: Vec<_> = vec![(
            *lambda,
            RamanBranchWeight {
                line: AbsorptionLine::gaussian(0.0, 163e6, 40e9).unwrap(),
                dipole_product: 1e-63,
            },
            RamanBranchWeight {
                line: AbsorptionLine::gaussian(0.0, 163e6, 0.0).unwrap(),
                dipole_product: 1e-63,
            },
        )];
        let map = raman_map(&z1(), &y2(), &weighted, &cavity, &cut_fields, &[locus0]).unwrap();
        for (row, &b) in cut_fields.iter().enumerate() {
            let fp = FieldPoint::axial(b).unwrap();
            let expected = bare_transfer(&cavity, zeeman_splitting(&z1().g, &fp)).norm_sqr();
            // divide out the (slowly drifting) Gaussian locus factor
            let locus = leg_offset(&z1(), &y2(), &lambda.legs[0], b);
            let x = locus0 - locus;
            let gauss = (-4.0 * std::f64::consts::LN_2 * x * x / (163e6f64 * 163e6)).exp();
            let ratio = map.at(row, 0) / (gauss * 40e9 * 1e-126);
            assert!(
                (ratio / expected - 1.0).abs() < 1e-9,
                "cut does not follow |t|^2 at row {row}"
            );
        }
    }
}
