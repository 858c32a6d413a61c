//! Subcommand implementations. Every command writes its outputs under the
//! chosen directory and registers them in the run manifest.

use anyhow::{anyhow, bail, Context as AnyhowContext, Result};
use clap::{Args, Subcommand};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde_json::json;
use std::path::{Path, PathBuf};

use kramers::cavity::{epr_field_sweep, EnsembleParams, FmParams, SweepProbe};
use kramers::constants::{BOHR_MAGNETON, MU_B_OVER_H};
use kramers::fit::models::{
    fit_epr, fit_exponential, fit_g_factors, fit_gaussian_lines, EprFitConfig,
};
use kramers::fit::FitResult;
use kramers::io as coreio;
use kramers::optical::spectrum::{linspace, synthesize_transmission, AbsorptionLine};
use kramers::optical::{
    line_positions, rotation_pattern, Branch, DipoleType, OpticalLevel, Polarization,
};
use kramers::photophysics::{
    evaluate_channel, total_rate_and_dipoles, RateWeighting, TransitionPhotophysics,
};
use kramers::profile::MaterialProfile;
use kramers::spin::{hyperfine_eigensystem, FieldPoint, SpinSystem};
use kramers::transduction::{
    enumerate_systems, raman_map, zeta, zeta_ratio, MaterialFoM, RamanBranchWeight, SystemKind,
};

use crate::ingest::{self, XyMapping};
use crate::manifest::ManifestBuilder;
use crate::quantity::{parse_quantity, Dimension};

pub struct Context {
    pub profile: MaterialProfile,
    pub out: PathBuf,
    pub json: bool,
    pub seed: u64,
}

impl Context {
    fn write_output(
        &self,
        manifest: &mut ManifestBuilder,
        name: &str,
        content: &str,
    ) -> Result<PathBuf> {
        let path = self.out.join(name);
        std::fs::write(&path, content)
            .with_context(|| format!("cannot write {}", path.display()))?;
        manifest.record(&path);
        println!("wrote {}", path.display());
        Ok(path)
    }

    fn transition_pair(&self, transition: &str) -> Result<(OpticalLevel, OpticalLevel, String)> {
        let (ground_label, excited_label) = transition
            .split_once('-')
            .ok_or_else(|| anyhow!("transition must look like Z1-Y2, got {transition:?}"))?;
        let ground = self
            .profile
            .optical_level(ground_label)
            .ok_or_else(|| anyhow!("profile has no level {ground_label:?}"))?;
        let excited = self
            .profile
            .optical_level(excited_label)
            .ok_or_else(|| anyhow!("profile has no level {excited_label:?}"))?;
        Ok((ground, excited, excited_label.to_string()))
    }
}

fn parse_polarization(text: &str) -> Result<Polarization> {
    match text.to_ascii_lowercase().as_str() {
        "sigma" => Ok(Polarization::Sigma),
        "pi" => Ok(Polarization::Pi),
        other => bail!("polarization must be sigma or pi, got {other:?}"),
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Upper => "upper",
        Branch::Lower => "lower",
    }
}

fn dipole_name(d: DipoleType) -> &'static str {
    match d {
        DipoleType::Ed => "ED",
        DipoleType::Md => "MD",
    }
}

fn parse_probe(text: &str) -> Result<SweepProbe> {
    match text {
        "zero_crossing" => Ok(SweepProbe::ZeroCrossingShift),
        "quadrature" => Ok(SweepProbe::FixedProbeQuadrature),
        other => bail!("probe must be zero_crossing or quadrature, got {other:?}"),
    }
}

// ---------------------------------------------------------------- levels

#[derive(Debug, Args)]
pub struct LevelsArgs {
    /// Maximum bias field, e.g. 120mT.
    #[arg(long, default_value = "120mT")]
    b_max: String,
    #[arg(long, default_value_t = 241)]
    points: usize,
    /// Field angle from the c-axis, e.g. 0deg.
    #[arg(long, default_value = "0deg")]
    theta: String,
    /// Use the profile's odd-isotope hyperfine system instead of the
    /// even-isotope doublet.
    #[arg(long)]
    hyperfine: bool,
}

pub fn levels(ctx: &Context, args: &LevelsArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    let b_max = parse_quantity(&args.b_max, Dimension::Field)?;
    let theta = parse_quantity(&args.theta, Dimension::Angle)?;
    let sys: SpinSystem = if args.hyperfine {
        ctx.profile
            .hyperfine_spin_system()
            .ok_or_else(|| anyhow!("profile defines no hyperfine isotope"))?
    } else {
        ctx.profile.even_spin_system()
    };
    let fields = linspace(0.0, b_max, args.points.max(2));
    let dim = sys.dimension();

    if ctx.json {
        let mut rows = Vec::new();
        for &b in &fields {
            let eig = hyperfine_eigensystem(&sys, &FieldPoint::new(b, theta)?)?;
            rows.push(json!({ "field_T": b, "energies_Hz": eig.energies }));
        }
        ctx.write_output(
            manifest,
            "levels.json",
            &serde_json::to_string_pretty(&rows)?,
        )?;
    } else {
        let mut csv = String::from("field_T");
        for k in 0..dim {
            csv.push_str(&format!(",level_{k}_Hz"));
        }
        csv.push('\n');
        for &b in &fields {
            let eig = hyperfine_eigensystem(&sys, &FieldPoint::new(b, theta)?)?;
            csv.push_str(&format!("{b}"));
            for e in &eig.energies {
                csv.push_str(&format!(",{e}"));
            }
            csv.push('\n');
        }
        ctx.write_output(manifest, "levels.csv", &csv)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- optical

#[derive(Debug, Subcommand)]
pub enum OpticalCommand {
    /// Line offsets versus field magnitude along the c-axis.
    Ramp(OpticalRampArgs),
    /// Line offsets versus field angle at fixed magnitude.
    Rotate(OpticalRotateArgs),
    /// Synthesized transmission spectrum at one field point.
    Spectrum(OpticalSpectrumArgs),
    /// Integrated absorption coefficient of a measured spectrum.
    Integrate(OpticalIntegrateArgs),
}

#[derive(Debug, Args)]
pub struct OpticalRampArgs {
    #[arg(long, default_value = "Z1-Y2")]
    transition: String,
    #[arg(long, default_value = "pi")]
    pol: String,
    #[arg(long, default_value = "120mT")]
    b_max: String,
    #[arg(long, default_value_t = 241)]
    points: usize,
}

#[derive(Debug, Args)]
pub struct OpticalRotateArgs {
    #[arg(long, default_value = "Z1-Y2")]
    transition: String,
    #[arg(long, default_value = "pi")]
    pol: String,
    /// Field magnitude, e.g. 75mT.
    #[arg(long, default_value = "75mT")]
    b: String,
    #[arg(long, default_value_t = 91)]
    points: usize,
}

#[derive(Debug, Args)]
pub struct OpticalSpectrumArgs {
    #[arg(long, default_value = "Z1-Y2")]
    transition: String,
    #[arg(long, default_value = "pi")]
    pol: String,
    #[arg(long, default_value = "90mT")]
    b: String,
    /// Full frequency span around the zero-field center.
    #[arg(long, default_value = "12GHz")]
    span: String,
    #[arg(long, default_value_t = 2401)]
    points: usize,
}

#[derive(Debug, Args)]
pub struct OpticalIntegrateArgs {
    /// Transmission spectrum CSV (as written by `optical spectrum`).
    #[arg(long)]
    spectrum: PathBuf,
    /// Off-resonance baseline window "lo:hi" in the spectrum's frequency
    /// units, repeatable. Values may be negative (offsets from line center).
    #[arg(long = "baseline-window", allow_hyphen_values = true)]
    baseline_windows: Vec<String>,
}

fn line_rows(
    x_name: &str,
    xs: &[f64],
    per_x: &[Vec<kramers::optical::OpticalTransitionLine>],
    json_out: bool,
) -> (String, String) {
    if json_out {
        let mut rows = Vec::new();
        for (&x, lines) in xs.iter().zip(per_x) {
            for l in lines {
                rows.push(json!({
                    x_name: x,
                    "offset_Hz": l.offset,
                    "ground_branch": branch_name(l.ground_branch),
                    "excited_branch": branch_name(l.excited_branch),
                    "dipole": dipole_name(l.dipole_type),
                    "relative_amplitude": l.relative_amplitude,
                }));
            }
        }
        (
            "json".into(),
            serde_json::to_string_pretty(&rows).unwrap(),
        )
    } else {
        let mut csv = format!(
            "{x_name},offset_Hz,ground_branch,excited_branch,dipole,relative_amplitude\n"
        );
        for (&x, lines) in xs.iter().zip(per_x) {
            for l in lines {
                csv.push_str(&format!(
                    "{x},{},{},{},{},{}\n",
                    l.offset,
                    branch_name(l.ground_branch),
                    branch_name(l.excited_branch),
                    dipole_name(l.dipole_type),
                    l.relative_amplitude
                ));
            }
        }
        ("csv".into(), csv)
    }
}

/// The absorption-line set of one transition/polarization at a field point:
/// each dipole-type group's measured integral split over its allowed lines.
fn profile_line_set(
    profile: &MaterialProfile,
    transition: &str,
    ground: &OpticalLevel,
    excited: &OpticalLevel,
    excited_label: &str,
    pol: Polarization,
    field: &FieldPoint,
) -> Result<Vec<AbsorptionLine>> {
    let pattern = line_positions(
        ground,
        excited,
        field,
        pol,
        &profile.selection_rules,
        profile.sample.temperature_k,
    )?;
    let fwhm = profile
        .optical_inhomogeneity(excited_label)
        .ok_or_else(|| anyhow!("profile has no inhomogeneity for {excited_label}"))?;
    pattern
        .iter()
        .map(|l| {
            let total = profile
                .integrated_alpha(transition, pol, l.dipole_type)
                .ok_or_else(|| {
                    anyhow!(
                        "profile has no measured absorption for {transition} {:?} {}",
                        pol,
                        dipole_name(l.dipole_type)
                    )
                })?;
            Ok(AbsorptionLine::gaussian(
                l.offset,
                fwhm,
                total * l.relative_amplitude,
            )?)
        })
        .collect()
}

pub fn optical(
    ctx: &Context,
    cmd: OpticalCommand,
    manifest: &mut ManifestBuilder,
) -> Result<()> {
    match cmd {
        OpticalCommand::Ramp(args) => {
            let (ground, excited, _) = ctx.transition_pair(&args.transition)?;
            let pol = parse_polarization(&args.pol)?;
            let b_max = parse_quantity(&args.b_max, Dimension::Field)?;
            let fields = linspace(0.0, b_max, args.points.max(2));
            let per_field: Vec<_> = fields
                .iter()
                .map(|&b| {
                    line_positions(
                        &ground,
                        &excited,
                        &FieldPoint::axial(b)?,
                        pol,
                        &ctx.profile.selection_rules,
                        ctx.profile.sample.temperature_k,
                    )
                    .map_err(anyhow::Error::from)
                })
                .collect::<Result<_>>()?;
            let (kind, content) = line_rows("field_T", &fields, &per_field, ctx.json);
            ctx.write_output(manifest, &format!("optical_ramp.{kind}"), &content)?;
        }
        OpticalCommand::Rotate(args) => {
            let (ground, excited, _) = ctx.transition_pair(&args.transition)?;
            let pol = parse_polarization(&args.pol)?;
            let b = parse_quantity(&args.b, Dimension::Field)?;
            let thetas = linspace(0.0, std::f64::consts::FRAC_PI_2, args.points.max(2));
            let per_theta = rotation_pattern(
                &ground,
                &excited,
                b,
                &thetas,
                pol,
                &ctx.profile.selection_rules,
                ctx.profile.sample.temperature_k,
            )?;
            let (kind, content) = line_rows("theta_rad", &thetas, &per_theta, ctx.json);
            ctx.write_output(manifest, &format!("optical_rotation.{kind}"), &content)?;
        }
        OpticalCommand::Spectrum(args) => {
            let (ground, excited, excited_label) = ctx.transition_pair(&args.transition)?;
            let pol = parse_polarization(&args.pol)?;
            let b = parse_quantity(&args.b, Dimension::Field)?;
            let span = parse_quantity(&args.span, Dimension::Frequency)?;
            let field = FieldPoint::axial(b)?;
            let lines = profile_line_set(
                &ctx.profile,
                &args.transition,
                &ground,
                &excited,
                &excited_label,
                pol,
                &field,
            )?;
            let grid = linspace(-span / 2.0, span / 2.0, args.points.max(2));
            let spec =
                synthesize_transmission(&lines, ctx.profile.sample.length_cm, &grid)?;
            let mut buf = Vec::new();
            coreio::write_spectrum(&mut buf, &spec)?;
            ctx.write_output(manifest, "spectrum.csv", &String::from_utf8(buf)?)?;
        }
        OpticalCommand::Integrate(args) => {
            let file = std::fs::File::open(&args.spectrum)
                .with_context(|| format!("cannot open {}", args.spectrum.display()))?;
            let spec = coreio::read_spectrum(std::io::BufReader::new(file))?;
            let windows: Vec<(f64, f64)> = args
                .baseline_windows
                .iter()
                .map(|w| {
                    let (lo, hi) = w
                        .split_once(':')
                        .ok_or_else(|| anyhow!("baseline window must be lo:hi, got {w:?}"))?;
                    Ok((lo.trim().parse::<f64>()?, hi.trim().parse::<f64>()?))
                })
                .collect::<Result<_>>()?;
            let integ = kramers::optical::spectrum::integrate_absorption(&spec, &windows)?;
            let report = json!({
                "integrated_alpha_GHz_per_cm": integ.integrated_alpha / 1e9,
                "saturated_samples": integ.saturated_samples,
                "baseline_windows": windows,
            });
            ctx.write_output(
                manifest,
                "integrated_absorption.json",
                &serde_json::to_string_pretty(&report)?,
            )?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- photo

#[derive(Debug, Subcommand)]
pub enum PhotoCommand {
    /// Oscillator strength / dipole / rate report from integrated absorption.
    Table(PhotoTableArgs),
}

#[derive(Debug, Args)]
pub struct PhotoTableArgs {
    /// CSV with columns transition, polarization, dipole,
    /// integrated_alpha_GHz_per_cm.
    #[arg(long)]
    alphas: PathBuf,
}

pub fn photo(ctx: &Context, cmd: PhotoCommand, manifest: &mut ManifestBuilder) -> Result<()> {
    let PhotoCommand::Table(args) = cmd;
    let table = ingest::read_table(&args.alphas)?;
    let transitions = table.text_column("transition")?;
    let pols = table.text_column("polarization")?;
    let dipoles = table.text_column("dipole")?;
    let alphas = table.numeric_column("integrated_alpha_GHz_per_cm", Dimension::Dimensionless)?;
    let host = ctx.profile.host_optics();

    let mut rows: Vec<(String, TransitionPhotophysics)> = Vec::new();
    for k in 0..transitions.len() {
        let pol = parse_polarization(&pols[k])?;
        let dipole = match dipoles[k].to_ascii_uppercase().as_str() {
            "ED" => DipoleType::Ed,
            "MD" => DipoleType::Md,
            other => bail!("line {}: dipole must be ED or MD, got {other:?}", table.lines[k]),
        };
        let excited_label = transitions[k]
            .split('-')
            .nth(1)
            .ok_or_else(|| anyhow!("line {}: bad transition name", table.lines[k]))?;
        let wavelength = ctx
            .profile
            .wavelength(excited_label)
            .ok_or_else(|| anyhow!("profile has no wavelength for {excited_label}"))?;
        rows.push((
            transitions[k].clone(),
            evaluate_channel(dipole, pol, wavelength, alphas[k] * 1e9, &host),
        ));
    }

    if ctx.json {
        let objects: Vec<_> = rows
            .iter()
            .map(|(tr, row)| {
                json!({
                    "transition": tr,
                    "polarization": row.polarization,
                    "dipole": row.dipole_type,
                    "integrated_alpha_GHz_per_cm": row.integrated_alpha_hz_cm / 1e9,
                    "oscillator_strength": row.oscillator_strength,
                    "dipole_moment_Cm": row.dipole_moment,
                    "radiative_rate_Hz": row.radiative_rate,
                })
            })
            .collect();
        ctx.write_output(
            manifest,
            "photo_table.json",
            &serde_json::to_string_pretty(&objects)?,
        )?;
    } else {
        let mut csv = String::from(
            "transition,polarization,dipole,integrated_alpha_GHz_per_cm,oscillator_strength,dipole_moment_Cm,radiative_rate_Hz\n",
        );
        for (tr, row) in &rows {
            csv.push_str(&format!(
                "{tr},{},{},{},{:e},{:e},{}\n",
                match row.polarization {
                    Polarization::Sigma => "sigma",
                    Polarization::Pi => "pi",
                },
                dipole_name(row.dipole_type),
                row.integrated_alpha_hz_cm / 1e9,
                row.oscillator_strength,
                row.dipole_moment,
                row.radiative_rate
            ));
        }
        ctx.write_output(manifest, "photo_table.csv", &csv)?;
    }

    // per-transition totals under both weightings
    let mut totals = Vec::new();
    let mut names: Vec<String> = rows.iter().map(|(t, _)| t.clone()).collect();
    names.dedup();
    for name in names {
        let channels: Vec<TransitionPhotophysics> = rows
            .iter()
            .filter(|(t, _)| *t == name)
            .map(|(_, r)| *r)
            .collect();
        let naive = total_rate_and_dipoles(&channels, RateWeighting::NaiveSum)?;
        let mode = total_rate_and_dipoles(&channels, RateWeighting::ModeWeighted)?;
        totals.push(json!({
            "transition": name,
            "naive_sum": {
                "total_rate_Hz": naive.total_rate,
                "radiative_lifetime_ms": naive.radiative_lifetime * 1e3,
                "d_ED_Cm": naive.d_ed,
                "d_MD_Cm": naive.d_md,
            },
            "mode_weighted": {
                "total_rate_Hz": mode.total_rate,
                "radiative_lifetime_ms": mode.radiative_lifetime * 1e3,
            },
        }));
    }
    ctx.write_output(
        manifest,
        "photo_totals.json",
        &serde_json::to_string_pretty(&totals)?,
    )?;
    Ok(())
}

// ---------------------------------------------------------------- epr

#[derive(Debug, Subcommand)]
pub enum EprCommand {
    /// Synthesize a dispersive field sweep.
    Sweep(EprSweepArgs),
    /// Fit (Omega, Delta, B0, scale) to a measured trace.
    Fit(EprFitArgs),
}

#[derive(Debug, Args)]
pub struct EprSweepArgs {
    #[arg(long, default_value = "44mT")]
    b_start: String,
    #[arg(long, default_value = "53mT")]
    b_stop: String,
    #[arg(long, default_value_t = 181)]
    points: usize,
    /// Collective coupling; the profile's fitted value when omitted.
    #[arg(long)]
    omega: Option<String>,
    /// Spin inhomogeneity HWHM; the profile's fitted value when omitted.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long, default_value = "1kHz")]
    gamma: String,
    #[arg(long, default_value = "100kHz")]
    modulation: String,
    #[arg(long, default_value = "zero_crossing")]
    probe: String,
    /// Gaussian noise added to the trace (same units as the probe value).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

#[derive(Debug, Args)]
pub struct EprFitArgs {
    /// Trace CSV.
    #[arg(long)]
    trace: PathBuf,
    /// Field column (name or index); header must carry a field unit.
    #[arg(long, default_value = "field_T")]
    x_col: String,
    /// Signal column.
    #[arg(long, default_value = "shift_Hz")]
    y_col: String,
    #[arg(long)]
    sigma_col: Option<String>,
    #[arg(long, default_value = "zero_crossing")]
    probe: String,
    #[arg(long, default_value = "2MHz")]
    init_omega: String,
    #[arg(long, default_value = "40MHz")]
    init_delta: String,
    /// Initial crossing field; defaults to the even-isotope crossing of the
    /// profile's resonator.
    #[arg(long)]
    init_b0: Option<String>,
    #[arg(long, default_value = "1kHz")]
    gamma: String,
    #[arg(long, default_value = "100kHz")]
    modulation: String,
}

fn write_fit_json(
    ctx: &Context,
    manifest: &mut ManifestBuilder,
    name: &str,
    fit: &FitResult,
) -> Result<()> {
    ctx.write_output(manifest, name, &serde_json::to_string_pretty(fit)?)?;
    if !fit.converged {
        eprintln!("warning: fit did not converge: {}", fit.message);
    }
    Ok(())
}

pub fn epr(ctx: &Context, cmd: EprCommand, manifest: &mut ManifestBuilder) -> Result<()> {
    let cavity = ctx.profile.cavity();
    match cmd {
        EprCommand::Sweep(args) => {
            let b_start = parse_quantity(&args.b_start, Dimension::Field)?;
            let b_stop = parse_quantity(&args.b_stop, Dimension::Field)?;
            if b_stop <= b_start {
                bail!("b-stop must exceed b-start");
            }
            let omega = match &args.omega {
                Some(text) => parse_quantity(text, Dimension::Frequency)?,
                None => ctx.profile.ensemble_coupling(),
            };
            let delta = match &args.delta {
                Some(text) => parse_quantity(text, Dimension::Frequency)?,
                None => ctx.profile.spin_inhomogeneity_hwhm(),
            };
            let gamma = parse_quantity(&args.gamma, Dimension::Frequency)?;
            let fm = FmParams::new(parse_quantity(&args.modulation, Dimension::Frequency)?, 1.0)?;
            let probe = parse_probe(&args.probe)?;
            let ens = EnsembleParams::new(omega, delta, gamma, 0.0)?;
            let fields = linspace(b_start, b_stop, args.points.max(2));
            let mut sweep = epr_field_sweep(
                &cavity,
                &ens,
                &ctx.profile.ground_level().g,
                &fields,
                0.0,
                &fm,
                probe,
            );
            if args.noise > 0.0 {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.seed);
                let normal = Normal::new(0.0, args.noise)?;
                for s in &mut sweep {
                    if !s.flagged {
                        s.value += normal.sample(&mut rng);
                    }
                }
            }
            let mut buf = Vec::new();
            coreio::write_sweep(&mut buf, &sweep, probe)?;
            ctx.write_output(manifest, "epr_sweep.csv", &String::from_utf8(buf)?)?;
        }
        EprCommand::Fit(args) => {
            let probe = parse_probe(&args.probe)?;
            let trace = ingest::read_observations(
                &args.trace,
                &XyMapping {
                    x: &args.x_col,
                    x_dimension: Dimension::Field,
                    y: &args.y_col,
                    y_dimension: match probe {
                        SweepProbe::ZeroCrossingShift => Dimension::Frequency,
                        SweepProbe::FixedProbeQuadrature => Dimension::Dimensionless,
                    },
                    sigma: args.sigma_col.as_deref(),
                },
            )?;
            let g = ctx.profile.ground_level().g;
            let config = EprFitConfig {
                cavity,
                g,
                theta: 0.0,
                fm: FmParams::new(
                    parse_quantity(&args.modulation, Dimension::Frequency)?,
                    1.0,
                )?,
                probe,
                damping: parse_quantity(&args.gamma, Dimension::Frequency)?,
            };
            let b0 = match &args.init_b0 {
                Some(text) => parse_quantity(text, Dimension::Field)?,
                None => cavity.omega0 / (g.g_par * MU_B_OVER_H),
            };
            let fit = fit_epr(
                &trace,
                &config,
                (
                    parse_quantity(&args.init_omega, Dimension::Frequency)?,
                    parse_quantity(&args.init_delta, Dimension::Frequency)?,
                    b0,
                    1.0,
                ),
            )?;
            write_fit_json(ctx, manifest, "epr_fit.json", &fit)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- fit

#[derive(Debug, Subcommand)]
pub enum FitCommand {
    /// Excited-level g factors from branch-tagged ramp and rotation lines.
    G(FitGArgs),
    /// Exponential fluorescence lifetime.
    Lifetime(FitLifetimeArgs),
    /// Multi-Gaussian absorption lines of a transmission spectrum.
    Lines(FitLinesArgs),
}

#[derive(Debug, Args)]
pub struct FitGArgs {
    /// Ramp CSV: field column, offset_GHz (or offset_Hz), ground_branch,
    /// excited_branch.
    #[arg(long)]
    ramp: PathBuf,
    /// Rotation CSV: theta column, offset and branch columns.
    #[arg(long)]
    rotation: PathBuf,
    #[arg(long, default_value = "field_T")]
    ramp_x_col: String,
    #[arg(long, default_value = "theta_rad")]
    rotation_x_col: String,
    /// Field magnitude of the rotation data.
    #[arg(long, default_value = "75mT")]
    rotation_field: String,
    /// Drop rotation observations above this angle (effects outside the
    /// linear Zeeman model can distort the pattern near 90 degrees).
    #[arg(long)]
    max_angle: Option<String>,
    #[arg(long, default_value_t = 4.0)]
    init_g_par: f64,
    #[arg(long, default_value_t = 4.0)]
    init_g_perp: f64,
}

#[derive(Debug, Args)]
pub struct FitLifetimeArgs {
    /// Decay CSV with a time column and a counts column.
    #[arg(long)]
    decay: PathBuf,
    #[arg(long, default_value = "time_s")]
    x_col: String,
    #[arg(long, default_value = "counts")]
    y_col: String,
    #[arg(long)]
    sigma_col: Option<String>,
}

#[derive(Debug, Args)]
pub struct FitLinesArgs {
    /// Transmission spectrum CSV (as written by `optical spectrum`).
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long, default_value_t = 1)]
    n_lines: usize,
}

pub fn fit(ctx: &Context, cmd: FitCommand, manifest: &mut ManifestBuilder) -> Result<()> {
    match cmd {
        FitCommand::G(args) => {
            let ramp =
                ingest::read_line_observations(&args.ramp, &args.ramp_x_col, Dimension::Field)?;
            let mut rotation = ingest::read_line_observations(
                &args.rotation,
                &args.rotation_x_col,
                Dimension::Angle,
            )?;
            if let Some(limit) = &args.max_angle {
                let limit = parse_quantity(limit, Dimension::Angle)?;
                let before = rotation.len();
                rotation.retain(|o| o.x <= limit);
                eprintln!(
                    "masked {} rotation observations above {:.1} deg",
                    before - rotation.len(),
                    limit.to_degrees()
                );
            }
            let fit = fit_g_factors(
                &ramp,
                &rotation,
                &ctx.profile.ground_level().g,
                parse_quantity(&args.rotation_field, Dimension::Field)?,
                (args.init_g_par, args.init_g_perp),
            )?;
            write_fit_json(ctx, manifest, "g_fit.json", &fit)?;
        }
        FitCommand::Lifetime(args) => {
            let decay = ingest::read_observations(
                &args.decay,
                &XyMapping {
                    x: &args.x_col,
                    x_dimension: Dimension::Time,
                    y: &args.y_col,
                    y_dimension: Dimension::Dimensionless,
                    sigma: args.sigma_col.as_deref(),
                },
            )?;
            let fit = fit_exponential(&decay)?;
            write_fit_json(ctx, manifest, "lifetime_fit.json", &fit)?;
        }
        FitCommand::Lines(args) => {
            let file = std::fs::File::open(&args.spectrum)
                .with_context(|| format!("cannot open {}", args.spectrum.display()))?;
            let spec = coreio::read_spectrum(std::io::BufReader::new(file))?;
            let fit = fit_gaussian_lines(&spec, args.n_lines)?;
            write_fit_json(ctx, manifest, "lines_fit.json", &fit)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- fom

#[derive(Debug, Subcommand)]
pub enum FomCommand {
    /// Evaluate zeta for a material (and a ratio against a comparator).
    Zeta(FomZetaArgs),
    /// Enumerate Lambda/V systems against a resonator frequency.
    Systems(FomSystemsArgs),
    /// Synthetic Raman-heterodyne intensity map.
    Map(FomMapArgs),
}

#[derive(Debug, Args)]
pub struct FomZetaArgs {
    /// Material JSON (d31_Cm, d32_Cm, mu21_J_per_T, rho_per_m3, delta_o_Hz,
    /// delta_mu_Hz); derived from the profile when omitted.
    #[arg(long)]
    material: Option<PathBuf>,
    /// Comparator material JSON for a zeta ratio.
    #[arg(long)]
    comparator: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FomSystemsArgs {
    /// Resonator frequency, e.g. 2.4GHz; the profile resonator when omitted.
    #[arg(long)]
    resonator: Option<String>,
    #[arg(long, default_value = "Z1-Y2")]
    transition: String,
    #[arg(long, default_value = "1mT")]
    b_min: String,
    #[arg(long, default_value = "120mT")]
    b_max: String,
}

#[derive(Debug, Args)]
pub struct FomMapArgs {
    #[arg(long, default_value = "Z1-Y2")]
    transition: String,
    #[arg(long, default_value = "40mT")]
    b_start: String,
    #[arg(long, default_value = "70mT")]
    b_stop: String,
    #[arg(long, default_value_t = 121)]
    b_points: usize,
    /// Full optical span of the map around the zero-field center.
    #[arg(long, default_value = "9GHz")]
    f_span: String,
    #[arg(long, default_value_t = 181)]
    f_points: usize,
}

#[derive(Debug, serde::Deserialize)]
struct MaterialJson {
    #[serde(rename = "d31_Cm")]
    d31_cm: f64,
    #[serde(rename = "d32_Cm")]
    d32_cm: f64,
    #[serde(rename = "mu21_J_per_T")]
    mu21_j_per_t: f64,
    rho_per_m3: f64,
    #[serde(rename = "delta_o_Hz")]
    delta_o_hz: f64,
    #[serde(rename = "delta_mu_Hz")]
    delta_mu_hz: f64,
}

fn load_material(path: &Path) -> Result<MaterialFoM> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let m: MaterialJson = serde_json::from_str(&text)?;
    Ok(MaterialFoM::new(
        m.d31_cm,
        m.d32_cm,
        m.mu21_j_per_t,
        m.rho_per_m3,
        m.delta_o_hz,
        m.delta_mu_hz,
    )?)
}

/// The two transduction legs of a transition: the strongest dipole from each
/// dipole-type group of the polarization offering all four lines.
fn profile_legs(profile: &MaterialProfile, transition: &str) -> Result<(f64, f64)> {
    let host = profile.host_optics();
    let excited_label = transition
        .split('-')
        .nth(1)
        .ok_or_else(|| anyhow!("bad transition {transition:?}"))?;
    let wavelength = profile
        .wavelength(excited_label)
        .ok_or_else(|| anyhow!("no wavelength for {excited_label}"))?;
    let mut best: [f64; 2] = [0.0, 0.0];
    for row in &profile.measured_absorption {
        if row.transition != transition {
            continue;
        }
        let ch = evaluate_channel(
            row.dipole,
            row.polarization,
            wavelength,
            row.integrated_alpha_ghz_per_cm * 1e9,
            &host,
        );
        let slot = match row.dipole {
            DipoleType::Ed => 0,
            DipoleType::Md => 1,
        };
        best[slot] = best[slot].max(ch.dipole_moment);
    }
    if best[0] == 0.0 || best[1] == 0.0 {
        bail!("profile lacks measured absorption for both dipole groups of {transition}");
    }
    Ok((best[0], best[1]))
}

fn default_material(profile: &MaterialProfile) -> Result<MaterialFoM> {
    let (d31, d32) = profile_legs(profile, "Z1-Y2")?;
    let mu21 = 0.5 * profile.ground_level().g.g_perp * BOHR_MAGNETON;
    Ok(MaterialFoM::new(
        d31,
        d32,
        mu21,
        profile.host.number_density_per_cm3 * 1e6,
        profile
            .optical_inhomogeneity("Y2")
            .ok_or_else(|| anyhow!("no optical inhomogeneity for Y2"))?,
        profile.spin_inhomogeneity_hwhm(),
    )?)
}

pub fn fom(ctx: &Context, cmd: FomCommand, manifest: &mut ManifestBuilder) -> Result<()> {
    match cmd {
        FomCommand::Zeta(args) => {
            let material = match &args.material {
                Some(path) => load_material(path)?,
                None => default_material(&ctx.profile)?,
            };
            let comparator = args.comparator.as_ref().map(|p| load_material(p)).transpose()?;
            if ctx.json {
                let mut report = json!({
                    "material": {
                        "d31_Cm": material.d31,
                        "d32_Cm": material.d32,
                        "mu21_J_per_T": material.mu21,
                        "rho_per_m3": material.rho,
                        "delta_o_Hz": material.delta_o,
                        "delta_mu_Hz": material.delta_mu,
                    },
                    "zeta_SI": zeta(&material),
                });
                if let Some(cmp) = &comparator {
                    report["comparator_zeta_SI"] = json!(zeta(cmp));
                    report["zeta_ratio"] = json!(zeta_ratio(&material, cmp));
                }
                ctx.write_output(
                    manifest,
                    "fom_zeta.json",
                    &serde_json::to_string_pretty(&report)?,
                )?;
            } else {
                let mut csv = String::from(
                    "quantity,d31_Cm,d32_Cm,mu21_J_per_T,rho_per_m3,delta_o_Hz,delta_mu_Hz,zeta_SI\n",
                );
                let row = |label: &str, m: &MaterialFoM| {
                    format!(
                        "{label},{:e},{:e},{:e},{:e},{},{},{:e}\n",
                        m.d31,
                        m.d32,
                        m.mu21,
                        m.rho,
                        m.delta_o,
                        m.delta_mu,
                        zeta(m)
                    )
                };
                csv.push_str(&row("material", &material));
                if let Some(cmp) = &comparator {
                    csv.push_str(&row("comparator", cmp));
                    csv.push_str(&format!(
                        "ratio,,,,,,,{:e}\n",
                        zeta_ratio(&material, cmp)
                    ));
                }
                ctx.write_output(manifest, "fom_zeta.csv", &csv)?;
            }
        }
        FomCommand::Systems(args) => {
            let (ground, excited, _) = ctx.transition_pair(&args.transition)?;
            let resonator = match &args.resonator {
                Some(text) => parse_quantity(text, Dimension::Frequency)?,
                None => ctx.profile.cavity().omega0,
            };
            let range = (
                parse_quantity(&args.b_min, Dimension::Field)?,
                parse_quantity(&args.b_max, Dimension::Field)?,
            );
            let configs = enumerate_systems(&ground, &excited, resonator, range)?;
            if ctx.json {
                let rows: Vec<_> = configs
                    .iter()
                    .map(|c| {
                        json!({
                            "kind": c.kind,
                            "field_T": c.field,
                            "microwave_splitting_Hz": c.microwave_splitting,
                            "optical_offset_Hz": c.optical_offset,
                        })
                    })
                    .collect();
                ctx.write_output(
                    manifest,
                    "fom_systems.json",
                    &serde_json::to_string_pretty(&rows)?,
                )?;
            } else {
                let mut csv =
                    String::from("kind,field_T,microwave_splitting_Hz,optical_offset_Hz\n");
                for c in &configs {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        match c.kind {
                            SystemKind::Lambda => "lambda",
                            SystemKind::V => "v",
                        },
                        c.field,
                        c.microwave_splitting,
                        c.optical_offset
                    ));
                }
                ctx.write_output(manifest, "fom_systems.csv", &csv)?;
            }
        }
        FomCommand::Map(args) => {
            let (ground, excited, excited_label) = ctx.transition_pair(&args.transition)?;
            let b_start = parse_quantity(&args.b_start, Dimension::Field)?;
            let b_stop = parse_quantity(&args.b_stop, Dimension::Field)?;
            let span = parse_quantity(&args.f_span, Dimension::Frequency)?;
            let range = (b_start.min(1e-3), b_stop);
            let configs = enumerate_systems(&ground, &excited, ctx.profile.cavity().omega0, range)?;
            if configs.is_empty() {
                bail!("no Lambda/V configuration in the field range");
            }
            let fwhm = ctx
                .profile
                .optical_inhomogeneity(&excited_label)
                .ok_or_else(|| anyhow!("no optical inhomogeneity for {excited_label}"))?;
            let (d31, d32) = profile_legs(&ctx.profile, &args.transition)?;
            let weighted: Vec<_> = configs
                .iter()
                .map(|&c| {
                    let weight = RamanBranchWeight {
                        line: AbsorptionLine::gaussian(0.0, fwhm, 1.0).unwrap(),
                        dipole_product: d31 * d32,
                    };
                    (c, weight, weight)
                })
                .collect();
            let fields = linspace(b_start, b_stop, args.b_points.max(2));
            let freqs = linspace(-span / 2.0, span / 2.0, args.f_points.max(2));
            let map = raman_map(
                &ground,
                &excited,
                &weighted,
                &ctx.profile.cavity(),
                &fields,
                &freqs,
            )?;
            // intensities are arbitrary units by design: normalize to peak 1
            // and drop the empty background to keep files small
            let peak = map.intensity.iter().cloned().fold(0.0f64, f64::max);
            let mut csv = String::from("field_T,frequency_Hz,intensity\n");
            for (row, &b) in map.fields.iter().enumerate() {
                for (col, &f) in map.frequencies.iter().enumerate() {
                    let v = map.at(row, col) / peak;
                    if v > 1e-9 {
                        csv.push_str(&format!("{b},{f},{v:e}\n"));
                    }
                }
            }
            ctx.write_output(manifest, "fom_map.csv", &csv)?;
        }
    }
    Ok(())
}

