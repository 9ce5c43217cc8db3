//! Synthetic coincidence histograms with known ground truth.
//!
//! Expected counts come from the forward model; each bin is then drawn from
//! an independent Poisson law. The expected vector is returned alongside the
//! sampled histogram so that noiseless fits can use it directly.

mod enumeration;

pub use enumeration::{
    cluster_visibility_from_areas, peak_areas_by_enumeration, period_visibility_from_areas,
    EnumeratedAreas, LagKey,
};

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::model::{
    build_hom_train, BeamSplitter, CwTroughModel, Histogram, HomTrainConfig, InterferometerMode,
    ModelError, PeakTrainModel, TimeGrid, VoigtIrf,
};
use crate::rng::stream;

/// Two-state telegraph blinking of the emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blinking {
    pub on_fraction: f64,
    /// Correlation time of the telegraph process, ns.
    pub correlation_time: f64,
}

impl Blinking {
    /// Bunching envelope `1 + ((1 - p_on) / p_on) exp(-|t| / tau_b)`.
    pub fn envelope(&self, t: f64) -> f64 {
        1.0 + (1.0 - self.on_fraction) / self.on_fraction * (-t.abs() / self.correlation_time).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub mode: InterferometerMode,
    pub visibility: f64,
    pub bs: BeamSplitter,
    pub first_split: f64,
    pub decay_rate: f64,
    pub irf: VoigtIrf,
    pub laser_period: f64,
    pub mz_delay: f64,
    /// Expected total counts over the grid, all components included.
    pub integration_scale: f64,
    /// Fraction of the expected total contributed by the CW trough.
    pub cw_fraction: f64,
    pub cw_rate: f64,
    pub blinking: Option<Blinking>,
    /// Injected zero-delay autocorrelation for HBT simulations.
    pub g2_zero: f64,
    /// Flat background, counts per bin.
    pub flat_background: f64,
    pub time_shift: f64,
    pub grid: TimeGrid,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        use crate::model::{check_non_negative, check_positive};
        check_positive("decay_rate", self.decay_rate)?;
        check_positive("laser_period", self.laser_period)?;
        check_positive("integration_scale", self.integration_scale)?;
        check_positive("cw_rate", self.cw_rate)?;
        check_non_negative("flat_background", self.flat_background)?;
        check_non_negative("g2_zero", self.g2_zero)?;
        self.irf.validate()?;
        if !(0.0..=1.0).contains(&self.cw_fraction) {
            return Err(ModelError::InvalidParameter {
                name: "cw_fraction",
                reason: format!("must lie in [0, 1], got {}", self.cw_fraction),
            });
        }
        if let Some(b) = self.blinking {
            if !(b.on_fraction > 0.0 && b.on_fraction <= 1.0) {
                return Err(ModelError::InvalidParameter {
                    name: "on_fraction",
                    reason: format!("must lie in (0, 1], got {}", b.on_fraction),
                });
            }
            check_positive("correlation_time", b.correlation_time)?;
        }
        Ok(())
    }

    fn train_config(&self) -> HomTrainConfig {
        HomTrainConfig {
            mode: self.mode,
            visibility: self.visibility,
            bs: self.bs,
            first_split: self.first_split,
            overall_scale: 1.0,
            decay_rate: self.decay_rate,
            laser_period: self.laser_period,
            mz_delay: self.mz_delay,
            irf: self.irf,
            background: 0.0,
            time_shift: self.time_shift,
            window: (self.grid.start, self.grid.end()),
        }
    }

    fn budget(&self) -> Result<(f64, f64), ModelError> {
        let bg = self.flat_background * self.grid.len as f64;
        let cw = self.cw_fraction * self.integration_scale;
        let pulsed = self.integration_scale - bg - cw;
        if pulsed < 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "integration_scale",
                reason: "smaller than background plus CW counts".into(),
            });
        }
        Ok((pulsed, cw))
    }
}

/// Generating parameters of a simulated histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Peak train with areas in counts and the flat background.
    pub train: PeakTrainModel,
    pub cw: Option<CwTroughModel>,
    pub config: SimulationConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub histogram: Histogram,
    pub expected: Vec<f64>,
    pub truth: GroundTruth,
}

/// Rescales the peak areas so the train contributes `total` counts on the grid.
fn scale_train(train: &mut PeakTrainModel, grid: &TimeGrid, total: f64) -> Result<Vec<f64>, ModelError> {
    let profile = train.profile_for(grid)?;
    let f = train.eval_with(&profile, grid);
    let sum: f64 = f.iter().sum();
    let k = if sum > 0.0 { total / sum } else { 0.0 };
    for a in &mut train.peak_areas {
        *a *= k;
    }
    Ok(f.into_iter().map(|v| v * k).collect())
}

fn cw_component(cfg: &SimulationConfig, total: f64) -> Result<Option<(CwTroughModel, Vec<f64>)>, ModelError> {
    if total <= 0.0 {
        return Ok(None);
    }
    let mut cw = CwTroughModel {
        amplitude: 1.0,
        rate: cfg.cw_rate,
        irf: cfg.irf.as_kernel(),
        time_shift: cfg.time_shift,
    };
    let profile = cw.profile_for(&cfg.grid)?;
    let shape = cw.shape_with(&profile, &cfg.grid);
    cw.amplitude = total / shape.iter().sum::<f64>();
    Ok(Some((cw, shape.into_iter().map(|s| s * cw.amplitude).collect())))
}

/// Poisson draw per bin from the stream labelled `counts`.
pub fn sample_poisson(expected: &[f64], seed: u64) -> Vec<u64> {
    let mut rng = stream(seed, "counts", 0);
    expected
        .iter()
        .map(|&lam| {
            if lam > 0.0 {
                Poisson::new(lam).map(|d| d.sample(&mut rng) as u64).unwrap_or(0)
            } else {
                0
            }
        })
        .collect()
}

fn finish(cfg: &SimulationConfig, train: PeakTrainModel, cw: Option<CwTroughModel>, expected: Vec<f64>) -> Result<Simulation, ModelError> {
    let counts = sample_poisson(&expected, cfg.seed);
    Ok(Simulation {
        histogram: Histogram::new(cfg.grid, counts)?,
        expected,
        truth: GroundTruth {
            train,
            cw,
            config: cfg.clone(),
        },
    })
}

/// Interference histogram: peak train plus optional CW trough and background.
pub fn simulate_hom(cfg: &SimulationConfig) -> Result<Simulation, ModelError> {
    cfg.validate()?;
    let (pulsed, cw_total) = cfg.budget()?;
    let mut train = build_hom_train(&cfg.train_config())?;
    let mut expected = scale_train(&mut train, &cfg.grid, pulsed)?;
    train.background = cfg.flat_background;
    let cw = cw_component(cfg, cw_total)?;
    for (i, e) in expected.iter_mut().enumerate() {
        *e += cfg.flat_background + cw.as_ref().map_or(0.0, |c| c.1[i]);
    }
    finish(cfg, train, cw.map(|c| c.0), expected)
}

/// CW-excitation interference histogram: trough plus background only.
pub fn simulate_cw_hom(cfg: &SimulationConfig) -> Result<Simulation, ModelError> {
    cfg.validate()?;
    let bg = cfg.flat_background * cfg.grid.len as f64;
    let total = cfg.integration_scale - bg;
    let cw = cw_component(cfg, total)?.ok_or(ModelError::InvalidParameter {
        name: "integration_scale",
        reason: "no counts left for the CW trough".into(),
    })?;
    let expected = cw.1.iter().map(|v| v + cfg.flat_background).collect();
    let train = PeakTrainModel {
        peak_centers: vec![],
        peak_areas: vec![],
        decay_rate: cfg.decay_rate,
        time_shift: cfg.time_shift,
        background: cfg.flat_background,
        irf: cfg.irf.as_kernel(),
        laser_period: cfg.laser_period,
        mz_delay: cfg.mz_delay,
        allow_negative_central: false,
    };
    finish(cfg, train, Some(cw.0), expected)
}

/// Relative HBT peak areas at multiples of the laser period: the side peaks
/// follow the blinking envelope and the central peak is `g2_zero` times the
/// uncorrelated plateau.
pub fn hbt_relative_areas(cfg: &SimulationConfig, centers: &[f64]) -> Vec<f64> {
    centers
        .iter()
        .map(|&t| {
            if t.abs() < 0.5 * cfg.laser_period {
                cfg.g2_zero
            } else {
                cfg.blinking.map_or(1.0, |b| b.envelope(t))
            }
        })
        .collect()
}

/// Autocorrelation histogram of a pulsed source.
pub fn simulate_hbt(cfg: &SimulationConfig) -> Result<Simulation, ModelError> {
    cfg.validate()?;
    let (pulsed, cw_total) = cfg.budget()?;
    let pad = crate::model::DEFAULT_PAD_DECAY_LENGTHS / cfg.decay_rate + 10.0 * cfg.irf.fwhm();
    let lo = ((cfg.grid.start - cfg.time_shift - pad) / cfg.laser_period).ceil() as i64;
    let hi = ((cfg.grid.end() - cfg.time_shift + pad) / cfg.laser_period).floor() as i64;
    let centers: Vec<f64> = (lo..=hi).map(|k| k as f64 * cfg.laser_period).collect();
    let mut train = PeakTrainModel {
        peak_areas: hbt_relative_areas(cfg, &centers),
        peak_centers: centers,
        decay_rate: cfg.decay_rate,
        time_shift: cfg.time_shift,
        background: 0.0,
        irf: cfg.irf.as_kernel(),
        laser_period: cfg.laser_period,
        mz_delay: 0.0,
        allow_negative_central: false,
    };
    let mut expected = scale_train(&mut train, &cfg.grid, pulsed)?;
    train.background = cfg.flat_background;
    let cw = cw_component(cfg, cw_total)?;
    for (i, e) in expected.iter_mut().enumerate() {
        *e += cfg.flat_background + cw.as_ref().map_or(0.0, |c| c.1[i]);
    }
    finish(cfg, train, cw.map(|c| c.0), expected)
}
