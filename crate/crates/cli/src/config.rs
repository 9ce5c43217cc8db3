//! Persisted analysis configuration.
//!
//! Every subcommand's arguments double as its serialized configuration, so
//! `config.json` written next to a result holds exactly what the command
//! line said, with the seed filled in and input paths made absolute.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use homfit_core::analysis::Normalization;
use homfit_core::estimation::{FitOptions, LsWeights, ModelSpec, ObjectiveKind, PeakLayout, PeakShape};
use homfit_core::model::InterferometerMode;
use homfit_core::{BeamSplitter, VoigtIrf};
use homfit_photonics::WaveguideGeometry;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub seed: u64,
    pub task: Task,
}

impl AnalysisConfig {
    /// Fills a missing seed from the OS generator and resolves input paths.
    pub fn new(task: Task, seed: Option<u64>) -> Result<Self, CliError> {
        let mut cfg = Self {
            seed: seed.unwrap_or_else(rand::random),
            task,
        };
        cfg.resolve_paths()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        cfg.check_inputs()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn fit_options(&self, fit: &FitArgs) -> FitOptions {
        FitOptions {
            objective: fit.objective.into(),
            ls_weights: fit.weights.into(),
            n_starts: fit.n_starts,
            seed: self.seed,
            ..Default::default()
        }
    }

    fn input_paths(&mut self) -> Vec<&mut PathBuf> {
        let mut v: Vec<&mut PathBuf> = Vec::new();
        match &mut self.task {
            Task::Simulate(_) | Task::Theory(_) | Task::LossBudget(_) | Task::ModeSolve(_) | Task::Overlap(_) => {}
            Task::FitIrf(a) => v.push(&mut a.input),
            Task::FitHom(a) => {
                v.push(&mut a.input);
                v.extend(a.irf.irf.as_mut());
            }
            Task::FitHbt(a) => {
                v.push(&mut a.input);
                v.extend(a.irf.irf.as_mut());
            }
            Task::FitCw(a) => {
                v.push(&mut a.input);
                v.extend(a.irf.irf.as_mut());
            }
            Task::CompareFitters(a) => {
                v.push(&mut a.input);
                v.extend(a.irf.irf.as_mut());
            }
            Task::Visibility(a) => {
                v.extend(a.fit_result.as_mut());
                v.extend(a.g2_result.as_mut());
                v.extend(a.cw_fit.as_mut());
            }
            Task::Taper(a) => v.extend(a.neff_table.as_mut()),
        }
        v
    }

    fn resolve_paths(&mut self) -> Result<(), CliError> {
        for p in self.input_paths() {
            *p = std::fs::canonicalize(&*p).map_err(|e| CliError::io(p.clone(), e))?;
        }
        Ok(())
    }

    fn check_inputs(&mut self) -> Result<(), CliError> {
        for p in self.input_paths() {
            if !p.is_file() {
                return Err(CliError::Input(format!("{}: referenced file does not exist", p.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "kebab-case")]
pub enum Task {
    /// Draw a synthetic histogram with known ground truth.
    Simulate(SimulateArgs),
    /// Fit a measured instrument response with Voigt and Gaussian shapes.
    FitIrf(FitIrfArgs),
    /// Fit an interference histogram and extract the visibility.
    FitHom(FitHomArgs),
    /// Fit an autocorrelation histogram and extract g2(0).
    FitHbt(FitHbtArgs),
    /// Fit the trough of a CW-excitation interference histogram.
    FitCw(FitCwArgs),
    /// Visibility from a fit result or from peak areas, with optional
    /// g2(0) and CW corrections.
    Visibility(VisibilityArgs),
    /// Visibility from radiative, dephasing and jitter rates, or the jitter
    /// rate implied by a visibility.
    Theory(TheoryArgs),
    /// Fit one histogram with each line-shape/objective pipeline.
    CompareFitters(CompareArgs),
    /// Adiabatic taper profile.
    Taper(TaperArgs),
    /// Fundamental scalar mode of a rectangular waveguide.
    ModeSolve(ModeSolveArgs),
    /// Overlap of the waveguide mode with a Gaussian fibre mode.
    Overlap(OverlapArgs),
    /// Source efficiency from a detected rate and a loss chain.
    LossBudget(LossBudgetArgs),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Simulate(_) => "simulate",
            Task::FitIrf(_) => "fit-irf",
            Task::FitHom(_) => "fit-hom",
            Task::FitHbt(_) => "fit-hbt",
            Task::FitCw(_) => "fit-cw",
            Task::Visibility(_) => "visibility",
            Task::Theory(_) => "theory",
            Task::CompareFitters(_) => "compare-fitters",
            Task::Taper(_) => "taper",
            Task::ModeSolve(_) => "mode-solve",
            Task::Overlap(_) => "overlap",
            Task::LossBudget(_) => "loss-budget",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    Mle,
    Ls,
}

impl From<Objective> for ObjectiveKind {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Mle => ObjectiveKind::Mle,
            Objective::Ls => ObjectiveKind::Ls,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weights {
    Neyman,
    Uniform,
}

impl From<Weights> for LsWeights {
    fn from(w: Weights) -> Self {
        match w {
            Weights::Neyman => LsWeights::Neyman,
            Weights::Uniform => LsWeights::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Cluster,
    Period,
}

impl From<Mode> for InterferometerMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Cluster => InterferometerMode::Cluster,
            Mode::Period => InterferometerMode::Period,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    ExpIrf,
    Lorentzian,
}

impl From<Shape> for PeakShape {
    fn from(s: Shape) -> Self {
        match s {
            Shape::ExpIrf => PeakShape::ExpIrf,
            Shape::Lorentzian => PeakShape::Lorentzian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    Curvature,
    Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationArg {
    NearestPeaks,
    Plateau,
}

impl From<NormalizationArg> for Normalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::NearestPeaks => Normalization::NearestPeaks,
            NormalizationArg::Plateau => Normalization::LongDelayPlateau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimKind {
    Hom,
    Cw,
    Hbt,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    #[arg(long, value_enum, default_value = "mle")]
    pub objective: Objective,
    /// Least-squares bin weights.
    #[arg(long, value_enum, default_value = "neyman")]
    pub weights: Weights,
    #[arg(long, default_value_t = 50)]
    pub n_starts: usize,
}

/// Excitation and interferometer parameters shared by simulation and fits.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SetupArgs {
    #[arg(long, value_enum, default_value = "cluster")]
    pub mode: Mode,
    /// Beam-splitter reflectivity.
    #[arg(long = "r", default_value_t = 0.5)]
    pub r: f64,
    /// Beam-splitter transmissivity.
    #[arg(long = "t", default_value_t = 0.5)]
    pub t: f64,
    /// Probability that the first splitter routes a photon to the short arm.
    #[arg(long, default_value_t = 0.5)]
    pub first_split: f64,
    #[arg(long = "laser-period", default_value_t = 13.16)]
    pub laser_period_ns: f64,
    #[arg(long = "mz-delay", default_value_t = 2.7)]
    pub mz_delay_ns: f64,
    #[arg(long = "decay-rate", default_value_t = 2.3)]
    pub decay_rate_per_ns: f64,
}

impl SetupArgs {
    pub fn beam_splitter(&self) -> Result<BeamSplitter, CliError> {
        Ok(BeamSplitter::new(self.r, self.t)?)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IrfArgs {
    /// Result file of `fit-irf`; its background-free kernel replaces the
    /// sigma and gamma below.
    #[arg(long)]
    pub irf: Option<PathBuf>,
    #[arg(long = "irf-sigma", default_value_t = 0.15)]
    pub irf_sigma_ns: f64,
    #[arg(long = "irf-gamma", default_value_t = 0.0)]
    pub irf_gamma_ns: f64,
}

impl IrfArgs {
    pub fn kernel(&self) -> Result<VoigtIrf, CliError> {
        match &self.irf {
            Some(path) => {
                let r = crate::report::read_result(path)?;
                r.detail::<VoigtIrf>("irf_kernel", path)
            }
            None => Ok(VoigtIrf::kernel(self.irf_sigma_ns, self.irf_gamma_ns)?),
        }
    }
}

/// Fit-only model options.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "exp-irf")]
    pub shape: Shape,
    /// Search half-range for the interferometer delay; 0 keeps it fixed.
    #[arg(long = "mz-delay-tol", default_value_t = 0.0)]
    pub mz_delay_tolerance_ns: f64,
    /// Fit the decay rate between these bounds instead of fixing it.
    #[arg(long = "decay-rate-min", requires = "decay_rate_max_per_ns")]
    pub decay_rate_min_per_ns: Option<f64>,
    #[arg(long = "decay-rate-max", requires = "decay_rate_min_per_ns")]
    pub decay_rate_max_per_ns: Option<f64>,
    /// Half-range of the global time-shift search.
    #[arg(long = "shift-range", default_value_t = 0.5)]
    pub shift_range_ns: f64,
    /// Period-mode peaks at or beyond this lag are far peaks.
    #[arg(long = "far-lag", default_value_t = 25.0)]
    pub far_lag_ns: f64,
    /// Let the central peak area go negative (CW trough underneath).
    #[arg(long)]
    pub negative_central: bool,
}

pub fn model_spec(setup: &SetupArgs, model: &ModelArgs, irf: VoigtIrf, layout: PeakLayout) -> Result<ModelSpec, CliError> {
    let mut spec = ModelSpec::exp_irf(
        setup.mode.into(),
        setup.beam_splitter()?,
        setup.laser_period_ns,
        setup.mz_delay_ns,
        setup.decay_rate_per_ns,
        irf,
    );
    spec.shape = model.shape.into();
    spec.layout = layout;
    spec.first_split = setup.first_split;
    spec.mz_delay_tolerance = model.mz_delay_tolerance_ns;
    spec.decay_rate_bounds = model.decay_rate_min_per_ns.zip(model.decay_rate_max_per_ns);
    spec.shift_bounds = (-model.shift_range_ns, model.shift_range_ns);
    spec.far_lag = model.far_lag_ns;
    spec.central_may_be_negative = model.negative_central;
    if spec.shape == PeakShape::Lorentzian {
        spec.background_lower = None;
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "hom")]
    pub kind: SimKind,
    #[command(flatten)]
    pub setup: SetupArgs,
    #[arg(long, default_value_t = 0.62)]
    pub visibility: f64,
    #[arg(long = "irf-sigma", default_value_t = 0.15)]
    pub irf_sigma_ns: f64,
    #[arg(long = "irf-gamma", default_value_t = 0.0)]
    pub irf_gamma_ns: f64,
    /// Expected total counts over the grid, every component included.
    #[arg(long = "counts", default_value_t = 2e4)]
    pub total_counts: f64,
    /// Fraction of the expected total in the CW trough.
    #[arg(long, default_value_t = 0.0)]
    pub cw_fraction: f64,
    #[arg(long = "cw-rate", default_value_t = 3.1)]
    pub cw_rate_per_ns: f64,
    /// Injected g2(0) for `--kind hbt`.
    #[arg(long, default_value_t = 0.0)]
    pub g2: f64,
    /// Fraction of time the emitter is bright; enables blinking.
    #[arg(long, requires = "blink_time_ns")]
    pub on_fraction: Option<f64>,
    #[arg(long = "blink-time", requires = "on_fraction")]
    pub blink_time_ns: Option<f64>,
    #[arg(long = "background", default_value_t = 1.0)]
    pub background_counts_per_bin: f64,
    #[arg(long = "time-shift", default_value_t = 0.0)]
    pub time_shift_ns: f64,
    #[arg(long = "t-min", default_value_t = -20.0, allow_hyphen_values = true)]
    pub t_min_ns: f64,
    #[arg(long = "t-max", default_value_t = 20.0, allow_hyphen_values = true)]
    pub t_max_ns: f64,
    #[arg(long = "bin-width", default_value_t = 0.05)]
    pub bin_width_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitIrfArgs {
    /// Histogram of the instrument response.
    pub input: PathBuf,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitHomArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub setup: SetupArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub irf: IrfArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// How the 95 % parameter intervals are computed.
    #[arg(long, value_enum, default_value = "curvature")]
    pub intervals: IntervalKind,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitHbtArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub setup: SetupArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub irf: IrfArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long, value_enum, default_value = "plateau")]
    pub normalization: NormalizationArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitCwArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub irf: IrfArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long = "rate-min", default_value_t = 0.2)]
    pub rate_min_per_ns: f64,
    #[arg(long = "rate-max", default_value_t = 20.0)]
    pub rate_max_per_ns: f64,
    #[arg(long = "shift-range", default_value_t = 0.5)]
    pub shift_range_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VisibilityArgs {
    /// Result file of `fit-hom`.
    #[arg(long, conflicts_with_all = ["a0", "a_plus", "a_minus", "a_far"])]
    pub fit_result: Option<PathBuf>,
    /// Central peak area.
    #[arg(long)]
    pub a0: Option<f64>,
    /// Neighbour areas of the cluster configuration.
    #[arg(long, requires = "a_minus")]
    pub a_plus: Option<f64>,
    #[arg(long, requires = "a_plus")]
    pub a_minus: Option<f64>,
    /// Far-peak area of the whole-period configuration.
    #[arg(long, conflicts_with = "a_plus")]
    pub a_far: Option<f64>,
    #[arg(long = "r", default_value_t = 0.5)]
    pub r: f64,
    #[arg(long = "t", default_value_t = 0.5)]
    pub t: f64,
    /// Correct for this g2(0).
    #[arg(long, conflicts_with = "g2_result")]
    pub g2: Option<f64>,
    /// Result file of `fit-hbt` supplying g2(0).
    #[arg(long)]
    pub g2_result: Option<PathBuf>,
    /// Result file of `fit-cw`; the central area is corrected for the CW
    /// trough.
    #[arg(long, requires = "fit_result")]
    pub cw_fit: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TheoryArgs {
    /// Radiative decay rate.
    #[arg(long = "grad")]
    pub gamma_rad_per_ns: f64,
    /// Pure dephasing rate.
    #[arg(long = "gph", default_value_t = 0.0)]
    pub gamma_ph_per_ns: f64,
    /// Jitter rate.
    #[arg(long = "gjitter", required_unless_present = "invert")]
    pub gamma_jitter_per_ns: Option<f64>,
    /// Solve for the jitter rate that gives this visibility.
    #[arg(long, conflicts_with = "gamma_jitter_per_ns")]
    pub invert: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub setup: SetupArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub irf: IrfArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GeometryArgs {
    #[arg(long = "thickness", default_value_t = 160.0)]
    pub thickness_nm: f64,
    #[arg(long, default_value_t = 3.4)]
    pub n_core: f64,
    #[arg(long, default_value_t = 1.0)]
    pub n_clad: f64,
    #[arg(long = "wavelength", default_value_t = 940.0)]
    pub wavelength_nm: f64,
}

impl GeometryArgs {
    pub fn geometry(&self, width_nm: f64) -> WaveguideGeometry {
        WaveguideGeometry {
            width_nm,
            thickness_nm: self.thickness_nm,
            n_core: self.n_core,
            n_clad: self.n_clad,
            wavelength_nm: self.wavelength_nm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GridArgs {
    /// Cell size across the width.
    #[arg(long = "dx", default_value_t = 5.0)]
    pub dx_nm: f64,
    /// Cell size across the thickness.
    #[arg(long = "dy", default_value_t = 2.5)]
    pub dy_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TaperArgs {
    #[arg(long = "w-start", default_value_t = 300.0)]
    pub w_start_nm: f64,
    #[arg(long = "w-end", default_value_t = 118.0)]
    pub w_end_nm: f64,
    #[arg(long = "dw", default_value_t = 1.0)]
    pub dw_nm: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// `width_nm,n_eff` table; without it (or `--neff`) the table comes
    /// from the mode solver.
    #[arg(long)]
    pub neff_table: Option<PathBuf>,
    /// Constant effective index.
    #[arg(long, conflicts_with = "neff_table")]
    pub neff: Option<f64>,
    /// Knot spacing of the solver table.
    #[arg(long = "knot-step", default_value_t = 20.0)]
    pub knot_step_nm: f64,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ModeSolveArgs {
    #[arg(long = "width", value_delimiter = ',', required = true)]
    pub widths_nm: Vec<f64>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OverlapArgs {
    #[arg(long = "width", value_delimiter = ',', required = true)]
    pub widths_nm: Vec<f64>,
    /// Mode-field diameter of the Gaussian beam.
    #[arg(long = "mfd", default_value_t = 2.5)]
    pub mfd_um: f64,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loss {
    pub name: String,
    pub transmission: f64,
}

fn parse_loss(s: &str) -> Result<Loss, String> {
    let (name, t) = s.split_once('=').ok_or_else(|| format!("expected NAME=TRANSMISSION, got `{s}`"))?;
    let transmission = t.trim().parse().map_err(|_| format!("transmission `{t}` is not a number"))?;
    Ok(Loss {
        name: name.trim().to_string(),
        transmission,
    })
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LossBudgetArgs {
    #[arg(long = "detected")]
    pub detected_rate_hz: f64,
    #[arg(long = "repetition", default_value_t = 76e6)]
    pub repetition_rate_hz: f64,
    /// One loss factor, repeatable.
    #[arg(long = "loss", value_parser = parse_loss)]
    pub losses: Vec<Loss>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theory() -> Task {
        Task::Theory(TheoryArgs {
            gamma_rad_per_ns: 2.3,
            gamma_ph_per_ns: 0.0,
            gamma_jitter_per_ns: Some(3.7),
            invert: None,
        })
    }

    #[test]
    fn seed_is_filled_and_persisted() {
        let cfg = AnalysisConfig::new(theory(), None).unwrap();
        let back: AnalysisConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert!(cfg.to_json().contains("\"seed\""));
        assert!(cfg.to_json().contains("\"pipeline\": \"theory\""));
    }

    #[test]
    fn hash_tracks_content() {
        let a = AnalysisConfig::new(theory(), Some(1)).unwrap();
        let b = AnalysisConfig::new(theory(), Some(2)).unwrap();
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn missing_input_is_an_input_error() {
        let task = Task::FitIrf(FitIrfArgs {
            input: "/nonexistent/irf.csv".into(),
            fit: FitArgs {
                objective: Objective::Mle,
                weights: Weights::Neyman,
                n_starts: 4,
            },
        });
        assert_eq!(AnalysisConfig::new(task, Some(1)).unwrap_err().exit_code(), crate::error::EXIT_INPUT);
    }

    #[test]
    fn loss_entries_parse() {
        assert_eq!(
            parse_loss("fibre = 0.26").unwrap(),
            Loss {
                name: "fibre".into(),
                transmission: 0.26
            }
        );
        assert!(parse_loss("0.26").is_err());
    }
}
