use serde::{Deserialize, Serialize};

use super::histogram::TimeGrid;
use super::profile::{PeakProfile, DEFAULT_PAD_DECAY_LENGTHS};
use super::voigt::VoigtIrf;
use super::ModelError;
use crate::simulator::peak_areas_by_enumeration;

const SPLIT_SUM_TOL: f64 = 1e-6;

/// Reflectivity and transmissivity of the final (interfering) beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitter {
    pub r: f64,
    pub t: f64,
}

impl BeamSplitter {
    pub fn new(r: f64, t: f64) -> Result<Self, ModelError> {
        for (name, v) in [("R", r), ("T", t)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    reason: format!("must lie in (0, 1), got {v}"),
                });
            }
        }
        if (r + t - 1.0).abs() > SPLIT_SUM_TOL {
            return Err(ModelError::InvalidParameter {
                name: "R + T",
                reason: format!("must equal 1, got {}", r + t),
            });
        }
        Ok(Self { r, t })
    }

    pub fn balanced() -> Self {
        Self { r: 0.5, t: 0.5 }
    }

    pub fn swapped(&self) -> Self {
        Self {
            r: self.t,
            t: self.r,
        }
    }
}

/// How the unbalanced interferometer delay relates to the laser period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferometerMode {
    /// Two excitation pulses per period separated by the interferometer delay;
    /// produces five-peak clusters.
    Cluster,
    /// Delay equal to an integer number of laser periods.
    Period,
}

/// Peak train: unit-area two-sided exponentials convolved with the IRF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakTrainModel {
    pub peak_centers: Vec<f64>,
    pub peak_areas: Vec<f64>,
    pub decay_rate: f64,
    pub time_shift: f64,
    pub background: f64,
    pub irf: VoigtIrf,
    pub laser_period: f64,
    pub mz_delay: f64,
    /// Lets the zero-lag peak take a negative area (CW trough subtraction).
    #[serde(default)]
    pub allow_negative_central: bool,
}

impl PeakTrainModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        super::check_positive("decay_rate", self.decay_rate)?;
        super::check_non_negative("background", self.background)?;
        self.irf.validate()?;
        if self.peak_centers.len() != self.peak_areas.len() {
            return Err(ModelError::InvalidParameter {
                name: "peak_areas",
                reason: "length differs from peak_centers".into(),
            });
        }
        if self.peak_centers.windows(2).any(|w| w[1] < w[0]) {
            return Err(ModelError::InvalidParameter {
                name: "peak_centers",
                reason: "must be sorted".into(),
            });
        }
        let central = self.central_index();
        for (k, &a) in self.peak_areas.iter().enumerate() {
            let may_be_negative = self.allow_negative_central && Some(k) == central;
            if !a.is_finite() || (a < 0.0 && !may_be_negative) {
                return Err(ModelError::InvalidParameter {
                    name: "peak_areas",
                    reason: format!("area {k} is {a}"),
                });
            }
        }
        Ok(())
    }

    /// Index of the peak nearest zero lag.
    pub fn central_index(&self) -> Option<usize> {
        self.peak_centers
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(k, _)| k)
    }

    /// Builds the profile table needed to evaluate this model on `grid`.
    pub fn profile_for(&self, grid: &TimeGrid) -> Result<PeakProfile, ModelError> {
        let span = offset_span(grid, &self.peak_centers, self.time_shift);
        PeakProfile::new(self.decay_rate, &self.irf, grid.width, span)
    }

    /// Expected counts per bin using a prebuilt profile.
    pub fn eval_with(&self, profile: &PeakProfile, grid: &TimeGrid) -> Vec<f64> {
        let mut f = vec![self.background; grid.len];
        for (&c, &a) in self.peak_centers.iter().zip(&self.peak_areas) {
            if a == 0.0 {
                continue;
            }
            let c = c + self.time_shift;
            for (i, fi) in f.iter_mut().enumerate() {
                *fi += a * profile.bin_mass(grid.center(i) - c);
            }
        }
        f
    }
}

/// Largest |bin center - peak center| over a grid and a set of peaks.
pub(crate) fn offset_span(grid: &TimeGrid, centers: &[f64], shift: f64) -> f64 {
    let (lo, hi) = centers.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
        (lo.min(c + shift), hi.max(c + shift))
    });
    if !lo.is_finite() {
        return 0.0;
    }
    (grid.end() - lo).abs().max((hi - grid.start).abs())
}

/// Expected counts per bin: background plus bin-integrated peaks.
pub fn eval_model(model: &PeakTrainModel, grid: &TimeGrid) -> Result<Vec<f64>, ModelError> {
    model.validate()?;
    let profile = model.profile_for(grid)?;
    Ok(model.eval_with(&profile, grid))
}

/// CW trough `A_CW [1 - exp(-rate |t|)]` convolved with the IRF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CwTroughModel {
    pub amplitude: f64,
    pub rate: f64,
    pub irf: VoigtIrf,
    #[serde(default)]
    pub time_shift: f64,
}

impl CwTroughModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        super::check_non_negative("amplitude", self.amplitude)?;
        super::check_positive("cw_rate", self.rate)?;
        self.irf.validate()
    }

    pub fn profile_for(&self, grid: &TimeGrid) -> Result<PeakProfile, ModelError> {
        let span = offset_span(grid, &[0.0], self.time_shift);
        PeakProfile::new(self.rate, &self.irf, grid.width, span)
    }

    /// Unit-amplitude trough shape per bin (bin average).
    pub fn shape_with(&self, profile: &PeakProfile, grid: &TimeGrid) -> Vec<f64> {
        // 1 - e^{-g|t|} = 1 - (2/g) * [(g/2) e^{-g|t|}], and the bracket is a unit-area peak.
        let k = 2.0 / (self.rate * grid.width);
        (0..grid.len)
            .map(|i| 1.0 - k * profile.bin_mass(grid.center(i) - self.time_shift))
            .collect()
    }
}

pub fn eval_cw_trough(model: &CwTroughModel, grid: &TimeGrid) -> Result<Vec<f64>, ModelError> {
    model.validate()?;
    let profile = model.profile_for(grid)?;
    Ok(model
        .shape_with(&profile, grid)
        .into_iter()
        .map(|s| model.amplitude * s)
        .collect())
}

/// Inputs for generating an interference peak train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomTrainConfig {
    pub mode: InterferometerMode,
    pub visibility: f64,
    pub bs: BeamSplitter,
    /// Probability of the short arm at the first splitter.
    pub first_split: f64,
    /// Area per unit enumerated weight.
    pub overall_scale: f64,
    pub decay_rate: f64,
    pub laser_period: f64,
    pub mz_delay: f64,
    pub irf: VoigtIrf,
    pub background: f64,
    pub time_shift: f64,
    /// Time range (ns) the train must cover; peaks within ten decay lengths
    /// of it are kept.
    pub window: (f64, f64),
}

impl HomTrainConfig {
    pub fn check_mode(&self) -> Result<(), ModelError> {
        super::check_positive("laser_period", self.laser_period)?;
        super::check_positive("mz_delay", self.mz_delay)?;
        match self.mode {
            InterferometerMode::Cluster if self.mz_delay >= self.laser_period => {
                Err(ModelError::InconsistentMode(format!(
                    "cluster mode needs mz_delay < laser_period ({} >= {})",
                    self.mz_delay, self.laser_period
                )))
            }
            InterferometerMode::Period => self.delay_periods().map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Interferometer delay in laser periods (period mode).
    pub fn delay_periods(&self) -> Result<u32, ModelError> {
        let j = self.mz_delay / self.laser_period;
        let r = j.round();
        if r < 1.0 || (j - r).abs() > 1e-9 * j {
            return Err(ModelError::InconsistentMode(format!(
                "period mode needs mz_delay to be a multiple of laser_period, got ratio {j}"
            )));
        }
        Ok(r as u32)
    }
}

pub fn build_hom_train(cfg: &HomTrainConfig) -> Result<PeakTrainModel, ModelError> {
    cfg.check_mode()?;
    super::check_positive("decay_rate", cfg.decay_rate)?;
    super::check_non_negative("overall_scale", cfg.overall_scale)?;
    if !(0.0..=1.0).contains(&cfg.visibility) {
        return Err(ModelError::InvalidParameter {
            name: "visibility",
            reason: format!("must lie in [0, 1], got {}", cfg.visibility),
        });
    }
    if !(cfg.first_split > 0.0 && cfg.first_split < 1.0) {
        return Err(ModelError::InvalidParameter {
            name: "first_split",
            reason: format!("must lie in (0, 1), got {}", cfg.first_split),
        });
    }
    let delay = match cfg.mode {
        InterferometerMode::Cluster => 0,
        InterferometerMode::Period => cfg.delay_periods()?,
    };
    let pad = DEFAULT_PAD_DECAY_LENGTHS / cfg.decay_rate + 10.0 * cfg.irf.fwhm();
    let (lo, hi) = (cfg.window.0 - pad, cfg.window.1 + pad);
    let reach = lo.abs().max(hi.abs());
    let cycles = (reach / cfg.laser_period).ceil() as i64 + 1;
    let areas = peak_areas_by_enumeration(cfg.visibility, cfg.bs, cfg.first_split, cfg.mode, delay, cycles);

    let mut peaks: Vec<(f64, f64)> = areas
        .iter()
        .map(|(key, w)| (areas.lag_time(key, cfg.laser_period, cfg.mz_delay), w))
        .filter(|&(t, _)| t + cfg.time_shift >= lo && t + cfg.time_shift <= hi)
        .map(|(t, w)| (t, w * cfg.overall_scale))
        .collect();
    peaks.sort_by(|a, b| a.0.total_cmp(&b.0));

    let model = PeakTrainModel {
        peak_centers: peaks.iter().map(|p| p.0).collect(),
        peak_areas: peaks.iter().map(|p| p.1).collect(),
        decay_rate: cfg.decay_rate,
        time_shift: cfg.time_shift,
        background: cfg.background,
        irf: cfg.irf.as_kernel(),
        laser_period: cfg.laser_period,
        mz_delay: cfg.mz_delay,
        allow_negative_central: false,
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::shapes::eval_two_sided_exp;

    fn grid(lo: f64, hi: f64, w: f64) -> TimeGrid {
        TimeGrid::spanning(lo, hi, w).unwrap()
    }

    fn single(area: f64, irf: VoigtIrf, bg: f64) -> PeakTrainModel {
        PeakTrainModel {
            peak_centers: vec![0.0],
            peak_areas: vec![area],
            decay_rate: 2.3,
            time_shift: 0.0,
            background: bg,
            irf,
            laser_period: 13.16,
            mz_delay: 2.7,
            allow_negative_central: false,
        }
    }

    #[test]
    fn beam_splitter_validation() {
        assert!(BeamSplitter::new(0.46, 0.54).is_ok());
        assert!(BeamSplitter::new(0.46, 0.55).is_err());
        assert!(BeamSplitter::new(0.0, 1.0).is_err());
    }

    #[test]
    fn area_conservation_delta_irf() {
        let irf = VoigtIrf::kernel(1e-4, 0.0).unwrap();
        let g = grid(-6.0, 6.0, 0.05);
        let f = eval_model(&single(1000.0, irf, 3.0), &g).unwrap();
        let net: f64 = f.iter().sum::<f64>() - 3.0 * g.len as f64;
        assert!((net - 1000.0).abs() < 1.0, "{net}");
    }

    #[test]
    fn zero_peaks_gives_background() {
        let irf = VoigtIrf::kernel(0.1, 0.0).unwrap();
        let mut m = single(0.0, irf, 7.5);
        m.peak_centers.clear();
        m.peak_areas.clear();
        let f = eval_model(&m, &grid(-1.0, 1.0, 0.1)).unwrap();
        assert!(f.iter().all(|&v| v == 7.5));
    }

    #[test]
    fn model_matches_point_density_for_narrow_bins() {
        // With a tiny kernel and small bins, f / bw approaches the peak density.
        let irf = VoigtIrf::kernel(1e-4, 0.0).unwrap();
        let g = grid(0.5, 2.0, 0.001);
        let f = eval_model(&single(1.0, irf, 0.0), &g).unwrap();
        for i in (0..g.len).step_by(100) {
            let d = eval_two_sided_exp(g.center(i), 0.0, 2.3);
            assert!((f[i] / 0.001 - d).abs() < 1e-4 * d);
        }
    }

    #[test]
    fn negative_area_rejected_unless_central_allowed() {
        let irf = VoigtIrf::kernel(0.1, 0.0).unwrap();
        let mut m = single(-5.0, irf, 10.0);
        assert!(m.validate().is_err());
        m.allow_negative_central = true;
        assert!(m.validate().is_ok());
    }

    #[test]
    fn trough_limits() {
        let irf = VoigtIrf::kernel(1e-4, 0.0).unwrap();
        let m = CwTroughModel {
            amplitude: 50.0,
            rate: 3.1,
            irf,
            time_shift: 0.0,
        };
        let g = grid(-10.0, 10.0, 0.01);
        let f = eval_cw_trough(&m, &g).unwrap();
        assert!((f[0] - 50.0).abs() < 1e-9);
        let mid = g.bin_of(0.0).unwrap();
        // bin average of 50(1 - e^{-3.1|t|}) over [-0.005, 0.005]
        let want = 50.0 * (1.0 - (1.0 - (-3.1f64 * 0.005).exp()) / (3.1 * 0.005));
        assert!((f[mid] - want).abs() < 1e-3, "{} {want}", f[mid]);
    }

    fn cfg(mode: InterferometerMode, v: f64, bs: BeamSplitter, delay: f64) -> HomTrainConfig {
        HomTrainConfig {
            mode,
            visibility: v,
            bs,
            first_split: 0.5,
            overall_scale: 1000.0,
            decay_rate: 2.3,
            laser_period: 13.16,
            mz_delay: delay,
            irf: VoigtIrf::kernel(0.1, 0.0).unwrap(),
            background: 0.0,
            time_shift: 0.0,
            window: (-6.0, 6.0),
        }
    }

    fn area_at(m: &PeakTrainModel, t: f64) -> f64 {
        m.peak_centers
            .iter()
            .zip(&m.peak_areas)
            .filter(|(c, _)| (*c - t).abs() < 1e-9)
            .map(|(_, a)| *a)
            .sum()
    }

    #[test]
    fn cluster_pattern_balanced() {
        let m = build_hom_train(&cfg(InterferometerMode::Cluster, 0.0, BeamSplitter::balanced(), 2.7)).unwrap();
        let a: Vec<f64> = [-5.4, -2.7, 0.0, 2.7, 5.4].iter().map(|&t| area_at(&m, t)).collect();
        for (x, r) in a.iter().zip([1.0, 2.0, 2.0, 2.0, 1.0]) {
            assert!((x / a[0] - r).abs() < 1e-12, "{a:?}");
        }
        let m = build_hom_train(&cfg(InterferometerMode::Cluster, 1.0, BeamSplitter::balanced(), 2.7)).unwrap();
        assert_eq!(area_at(&m, 0.0), 0.0);
    }

    #[test]
    fn period_ratio() {
        let bs = BeamSplitter::new(0.46, 0.54).unwrap();
        let mut c = cfg(InterferometerMode::Period, 0.62, bs, 13.16);
        c.window = (-60.0, 60.0);
        let m = build_hom_train(&c).unwrap();
        let far = area_at(&m, 4.0 * 13.16);
        let ratio = area_at(&m, 0.0) / far;
        // R^2 + T^2 - 2 R T V = 0.5032 - 0.308016
        assert!((ratio - 0.195_184).abs() < 1e-12, "{ratio}");
    }

    #[test]
    fn inconsistent_modes() {
        let bs = BeamSplitter::balanced();
        assert!(matches!(
            build_hom_train(&cfg(InterferometerMode::Cluster, 0.5, bs, 14.0)),
            Err(ModelError::InconsistentMode(_))
        ));
        assert!(matches!(
            build_hom_train(&cfg(InterferometerMode::Period, 0.5, bs, 20.0)),
            Err(ModelError::InconsistentMode(_))
        ));
    }

    #[test]
    fn symmetric_train_is_even() {
        let m = build_hom_train(&cfg(InterferometerMode::Cluster, 0.3, BeamSplitter::balanced(), 2.7)).unwrap();
        let g = grid(-6.0, 6.0, 0.05);
        let f = eval_model(&m, &g).unwrap();
        for i in 0..g.len {
            let j = g.len - 1 - i;
            assert!((f[i] - f[j]).abs() < 1e-9 * f[i].max(1.0));
        }
    }
}
