//! Peak-train fits of coincidence histograms.
//!
//! Peak positions and the area ratios that do not depend on the visibility
//! come from path enumeration for the given splitter. Each group of peaks
//! shares one free area: the central peak, each pair of neighbours at the
//! same distance inside the zero-lag cluster, each cross cluster, and in
//! period mode each far peak. Peaks whose group lies outside the window are
//! tied to the nearest group inside it.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::separable::{fit_separable, Design, FitOptions, FitResult, LinearParam, NonlinearParam, SeparableModel, Transform};
use super::EstimationError;
use crate::model::{
    lorentzian_bin_mass, BeamSplitter, Histogram, InterferometerMode, ModelError, PeakProfile, ProfileBuilder,
    TimeGrid, VoigtIrf, DEFAULT_PAD_DECAY_LENGTHS,
};
use crate::simulator::{peak_areas_by_enumeration, LagKey};

pub const AREA_CENTRAL: &str = "area_central";
pub const AREA_TAU_PAIR: &str = "area_tau_pair";
pub const FAR_PREFIX: &str = "area_far_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakShape {
    /// Two-sided exponential convolved with the instrument response.
    ExpIrf,
    /// Plain Lorentzian with a free width.
    Lorentzian,
}

/// Which peaks a histogram contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakLayout {
    /// Interferometer peaks from path enumeration.
    #[default]
    Interference,
    /// One peak per laser period, each with its own area (autocorrelation).
    Autocorrelation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub shape: PeakShape,
    #[serde(default)]
    pub layout: PeakLayout,
    pub mode: InterferometerMode,
    pub bs: BeamSplitter,
    #[serde(default = "half")]
    pub first_split: f64,
    pub laser_period: f64,
    pub mz_delay: f64,
    /// Search half-range for the interferometer delay; 0 keeps it fixed.
    #[serde(default)]
    pub mz_delay_tolerance: f64,
    pub decay_rate: f64,
    /// Fit the decay rate inside these bounds instead of fixing it.
    #[serde(default)]
    pub decay_rate_bounds: Option<(f64, f64)>,
    pub irf: VoigtIrf,
    pub shift_bounds: (f64, f64),
    /// Lorentzian half-width range in ns.
    pub hwhm_bounds: (f64, f64),
    /// Period-mode peaks at or beyond this lag count as far peaks.
    pub far_lag: f64,
    #[serde(default)]
    pub central_may_be_negative: bool,
    /// `None` leaves the background unbounded.
    pub background_lower: Option<f64>,
}

fn half() -> f64 {
    0.5
}

impl ModelSpec {
    /// Exponential peaks with the instrument response, decay rate fixed.
    pub fn exp_irf(
        mode: InterferometerMode,
        bs: BeamSplitter,
        laser_period: f64,
        mz_delay: f64,
        decay_rate: f64,
        irf: VoigtIrf,
    ) -> Self {
        Self {
            shape: PeakShape::ExpIrf,
            layout: PeakLayout::Interference,
            mode,
            bs,
            first_split: 0.5,
            laser_period,
            mz_delay,
            mz_delay_tolerance: 0.0,
            decay_rate,
            decay_rate_bounds: None,
            irf: irf.as_kernel(),
            shift_bounds: (-0.5, 0.5),
            hwhm_bounds: (0.01, 5.0),
            far_lag: 25.0,
            central_may_be_negative: false,
            background_lower: Some(0.0),
        }
    }

    pub fn with_shape(&self, shape: PeakShape) -> Self {
        Self { shape, ..self.clone() }
    }

    fn delay_periods(&self) -> Result<u32, EstimationError> {
        let j = self.mz_delay / self.laser_period;
        let r = j.round();
        if r < 1.0 || (j - r).abs() > 1e-6 {
            return Err(EstimationError::InvalidSpec(format!(
                "period mode needs mz_delay to be a multiple of laser_period, got ratio {j}"
            )));
        }
        Ok(r as u32)
    }

    fn check(&self) -> Result<(), EstimationError> {
        let bad = |m: &str| Err(EstimationError::InvalidSpec(m.into()));
        BeamSplitter::new(self.bs.r, self.bs.t)?;
        self.irf.validate()?;
        if !(self.laser_period > 0.0 && self.laser_period.is_finite()) {
            return bad("laser_period must be positive");
        }
        if !(self.decay_rate > 0.0 && self.decay_rate.is_finite()) {
            return bad("decay_rate must be positive");
        }
        if !(self.first_split > 0.0 && self.first_split < 1.0) {
            return bad("first_split must lie in (0, 1)");
        }
        if !(self.mz_delay_tolerance >= 0.0 && self.mz_delay_tolerance.is_finite()) {
            return bad("mz_delay_tolerance must be finite and non-negative");
        }
        if self.layout == PeakLayout::Interference && self.mode == InterferometerMode::Cluster {
            if !(self.mz_delay > self.mz_delay_tolerance && self.mz_delay < 0.5 * self.laser_period) {
                return bad("cluster mode needs 0 < mz_delay < laser_period / 2");
            }
        }
        if let Some((lo, hi)) = self.decay_rate_bounds {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return bad("decay_rate_bounds must satisfy 0 < lo < hi");
            }
        }
        if self.shape == PeakShape::Lorentzian && !(self.hwhm_bounds.0 > 0.0 && self.hwhm_bounds.1 > self.hwhm_bounds.0) {
            return bad("hwhm_bounds must satisfy 0 < lo < hi");
        }
        Ok(())
    }

    /// Fixes the peak layout and parameterisation for a data grid.
    pub fn bind(&self, grid: &TimeGrid) -> Result<BoundPeakModel, EstimationError> {
        self.check()?;
        BoundPeakModel::new(self.clone(), *grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    Central,
    /// Neighbours at `±n` steps inside the zero-lag cluster, or at `±n`
    /// periods in period mode.
    Pair(i64),
    /// All peaks of the cluster `n` laser periods away.
    Cluster(i64),
    Far(i64),
    /// Single peak at `n` periods (autocorrelation layout).
    Peak(i64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakGroup {
    pub name: String,
    pub kind: GroupKind,
}

#[derive(Debug, Clone)]
struct BoundPeak {
    key: LagKey,
    group: usize,
    weight: f64,
}

#[derive(Debug, Clone, Copy)]
struct Slots {
    shift: usize,
    delay: Option<usize>,
    rate: Option<usize>,
    hwhm: Option<usize>,
}

/// A [`ModelSpec`] laid out on a grid; implements [`SeparableModel`].
///
/// Linear parameters are the background followed by one area per group.
#[derive(Debug, Clone)]
pub struct BoundPeakModel {
    spec: ModelSpec,
    grid: TimeGrid,
    peaks: Vec<BoundPeak>,
    groups: Vec<PeakGroup>,
    nl: Vec<NonlinearParam>,
    lin: Vec<LinearParam>,
    slots: Slots,
    profile: Option<PeakProfile>,
    builder: Option<ProfileBuilder>,
}

fn group_name(kind: GroupKind, mode: InterferometerMode) -> String {
    match kind {
        GroupKind::Central => AREA_CENTRAL.into(),
        GroupKind::Pair(1) if mode == InterferometerMode::Cluster => AREA_TAU_PAIR.into(),
        GroupKind::Pair(n) if mode == InterferometerMode::Cluster => format!("area_{n}tau_pair"),
        GroupKind::Pair(n) => format!("area_pair_{n}"),
        GroupKind::Cluster(n) => format!("area_cluster_{n:+}"),
        GroupKind::Far(n) => format!("{FAR_PREFIX}{n:+}"),
        GroupKind::Peak(n) => format!("area_peak_{n:+}"),
    }
}

impl BoundPeakModel {
    fn new(spec: ModelSpec, grid: TimeGrid) -> Result<Self, EstimationError> {
        let period = spec.laser_period;
        let (rate_lo, rate_hi) = spec.decay_rate_bounds.unwrap_or((spec.decay_rate, spec.decay_rate));
        let pad = DEFAULT_PAD_DECAY_LENGTHS / rate_lo + 10.0 * spec.irf.fwhm();
        let (s_lo, s_hi) = spec.shift_bounds;
        if !(s_lo.is_finite() && s_hi.is_finite() && s_hi > s_lo) {
            return Err(EstimationError::InvalidSpec("shift_bounds must satisfy lo < hi".into()));
        }
        let (lo, hi) = (grid.start - pad - s_hi, grid.end() + pad - s_lo);
        let cycles = (lo.abs().max(hi.abs()) / period).ceil() as i64 + 1;

        let weights: Vec<(LagKey, f64)> = match spec.layout {
            PeakLayout::Autocorrelation => (-cycles..=cycles).map(|c| ((c, 0), 1.0)).collect(),
            PeakLayout::Interference => {
                let delay = match spec.mode {
                    InterferometerMode::Cluster => 0,
                    InterferometerMode::Period => spec.delay_periods()?,
                };
                // visibility only changes the central area, which has its own group
                peak_areas_by_enumeration(0.0, spec.bs, spec.first_split, spec.mode, delay, cycles)
                    .iter()
                    .collect()
            }
        };
        let lag = |k: LagKey| k.0 as f64 * period + k.1 as f64 * spec.mz_delay;
        let kind_of = |k: LagKey| -> GroupKind {
            if k == (0, 0) {
                return GroupKind::Central;
            }
            match (spec.layout, spec.mode) {
                (PeakLayout::Autocorrelation, _) => GroupKind::Peak(k.0),
                (_, InterferometerMode::Cluster) if k.0 == 0 => GroupKind::Pair(k.1.abs()),
                (_, InterferometerMode::Cluster) => GroupKind::Cluster(k.0),
                (_, InterferometerMode::Period) if lag(k).abs() >= spec.far_lag => GroupKind::Far(k.0),
                (_, InterferometerMode::Period) => GroupKind::Pair(k.0.abs()),
            }
        };
        let kept: Vec<(LagKey, f64, GroupKind)> = weights
            .into_iter()
            .filter(|&(k, w)| w > 0.0 && lag(k) >= lo && lag(k) <= hi)
            .map(|(k, w)| (k, w, kind_of(k)))
            .collect();
        let inside = |k: LagKey| lag(k) >= grid.start && lag(k) <= grid.end();

        // Groups with a member inside the window, in order of first lag.
        let mut groups: Vec<(GroupKind, f64, usize, f64)> = Vec::new(); // kind, weight sum, members, nearest lag
        for &(k, _, g) in &kept {
            if !inside(k) || groups.iter().any(|e| e.0 == g) {
                continue;
            }
            groups.push((g, 0.0, 0, lag(k)));
        }
        for &(_, w, g) in &kept {
            if let Some(e) = groups.iter_mut().find(|e| e.0 == g) {
                e.1 += w;
                e.2 += 1;
            }
        }
        if !groups.iter().any(|e| e.0 == GroupKind::Central) {
            return Err(EstimationError::InvalidSpec("zero lag lies outside the histogram".into()));
        }
        groups.sort_by(|a, b| {
            let rank = |g: &GroupKind| if *g == GroupKind::Central { 0 } else { 1 };
            rank(&a.0).cmp(&rank(&b.0)).then(a.3.total_cmp(&b.3))
        });

        let mut peaks = Vec::new();
        for &(k, w, g) in &kept {
            let target = match groups.iter().position(|e| e.0 == g) {
                Some(i) => i,
                None => {
                    // nearest active group of the same class, else nearest non-central group
                    let same_class = |other: &GroupKind| std::mem::discriminant(other) == std::mem::discriminant(&g);
                    let pick = |filter: &dyn Fn(&GroupKind) -> bool| {
                        groups
                            .iter()
                            .enumerate()
                            .filter(|(_, e)| filter(&e.0))
                            .min_by(|a, b| (a.1 .3 - lag(k)).abs().total_cmp(&(b.1 .3 - lag(k)).abs()))
                            .map(|(i, _)| i)
                    };
                    match pick(&same_class).or_else(|| pick(&|o: &GroupKind| *o != GroupKind::Central)) {
                        Some(i) => i,
                        None => continue,
                    }
                }
            };
            let e = &groups[target];
            let mean = e.1 / e.2 as f64;
            peaks.push(BoundPeak {
                key: k,
                group: target,
                weight: w / mean,
            });
        }
        let groups: Vec<PeakGroup> = groups
            .into_iter()
            .map(|e| PeakGroup {
                name: group_name(e.0, spec.mode),
                kind: e.0,
            })
            .collect();

        let mut nl = vec![NonlinearParam::new("time_shift", "ns", s_lo, s_hi, Transform::Linear)];
        let mut slots = Slots {
            shift: 0,
            delay: None,
            rate: None,
            hwhm: None,
        };
        let steps_used = peaks.iter().any(|p| p.key.1 != 0);
        if spec.mz_delay_tolerance > 0.0 && steps_used {
            slots.delay = Some(nl.len());
            nl.push(NonlinearParam::new(
                "mz_delay",
                "ns",
                spec.mz_delay - spec.mz_delay_tolerance,
                spec.mz_delay + spec.mz_delay_tolerance,
                Transform::Linear,
            ));
        }
        match spec.shape {
            PeakShape::ExpIrf => {
                if let Some((a, b)) = spec.decay_rate_bounds {
                    slots.rate = Some(nl.len());
                    nl.push(NonlinearParam::new("decay_rate", "1/ns", a, b, Transform::Log));
                }
            }
            PeakShape::Lorentzian => {
                slots.hwhm = Some(nl.len());
                nl.push(NonlinearParam::new("hwhm", "ns", spec.hwhm_bounds.0, spec.hwhm_bounds.1, Transform::Log));
            }
        }

        let mut lin = vec![LinearParam {
            name: "background".into(),
            unit: "counts/bin".into(),
            lower: spec.background_lower,
            fixed: None,
        }];
        for g in &groups {
            let mut p = LinearParam::non_negative(&g.name, "counts");
            if g.kind == GroupKind::Central && spec.central_may_be_negative {
                p.lower = None;
            }
            lin.push(p);
        }

        let (mut profile, mut builder) = (None, None);
        if spec.shape == PeakShape::ExpIrf {
            let tol = spec.mz_delay_tolerance;
            let span = peaks
                .iter()
                .map(|p| {
                    let c = lag(p.key);
                    let slack = p.key.1.abs() as f64 * tol;
                    (grid.end() - (c - slack + s_lo)).abs().max((c + slack + s_hi - grid.start).abs())
                })
                .fold(0.0, f64::max);
            let b = ProfileBuilder::new(&spec.irf, grid.width, span, rate_lo, rate_hi)?;
            if spec.decay_rate_bounds.is_some() {
                builder = Some(b);
            } else {
                profile = Some(b.build(spec.decay_rate)?);
            }
        }
        Ok(Self {
            spec,
            grid,
            peaks,
            groups,
            nl,
            lin,
            slots,
            profile,
            builder,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn groups(&self) -> &[PeakGroup] {
        &self.groups
    }

    /// Peak lags and their group index, in the order used by the design.
    pub fn peak_lags(&self) -> Vec<(f64, usize)> {
        self.peaks
            .iter()
            .map(|p| (self.lag(p.key, self.spec.mz_delay), p.group))
            .collect()
    }

    fn lag(&self, k: LagKey, delay: f64) -> f64 {
        k.0 as f64 * self.spec.laser_period + k.1 as f64 * delay
    }

    fn shape_at(&self, theta: &[f64]) -> Result<Shape<'_>, ModelError> {
        Ok(match self.spec.shape {
            PeakShape::ExpIrf => match (&self.profile, &self.builder, self.slots.rate) {
                (Some(p), _, _) => Shape::Table(Cow::Borrowed(p), self.spec.irf.gamma == 0.0),
                (None, Some(b), Some(k)) => Shape::Table(Cow::Owned(b.build(theta[k])?), self.spec.irf.gamma == 0.0),
                _ => unreachable!("exp-irf model without a profile"),
            },
            PeakShape::Lorentzian => Shape::Lorentzian(theta[self.slots.hwhm.expect("hwhm slot")]),
        })
    }

    fn delay_at(&self, theta: &[f64]) -> f64 {
        self.slots.delay.map_or(self.spec.mz_delay, |k| theta[k])
    }

    /// Fitted function value for a bin centered at `t`, background included.
    pub fn value_at(&self, theta: &[f64], linear: &[f64], t: f64) -> Result<f64, ModelError> {
        let shape = self.shape_at(theta)?;
        let shift = theta[self.slots.shift];
        let delay = self.delay_at(theta);
        let bw = self.grid.width;
        let mut f = linear[0];
        for p in &self.peaks {
            let c = self.lag(p.key, delay) + shift;
            f += p.weight * linear[1 + p.group] * shape.mass(t - c, bw);
        }
        Ok(f)
    }

    /// Fitted values at the best fit of `result`.
    pub fn value_at_fit(&self, result: &FitResult, t: f64) -> Result<f64, ModelError> {
        self.value_at(&result.theta, &result.linear, t)
    }
}

enum Shape<'a> {
    /// Profile table and whether the kernel has no Lorentzian tail.
    Table(Cow<'a, PeakProfile>, bool),
    Lorentzian(f64),
}

impl Shape<'_> {
    fn mass(&self, u: f64, bw: f64) -> f64 {
        match self {
            Shape::Table(p, _) => p.bin_mass(u),
            Shape::Lorentzian(h) => lorentzian_bin_mass(u - 0.5 * bw, u + 0.5 * bw, 0.0, *h),
        }
    }

    /// Offsets beyond which the mass is exactly zero.
    fn support(&self) -> Option<f64> {
        match self {
            Shape::Table(p, true) => Some(p.reach()),
            _ => None,
        }
    }
}

impl SeparableModel for BoundPeakModel {
    fn nonlinear(&self) -> &[NonlinearParam] {
        &self.nl
    }

    fn linear(&self) -> &[LinearParam] {
        &self.lin
    }

    fn design(&self, theta: &[f64]) -> Result<Design, ModelError> {
        let shape = self.shape_at(theta)?;
        let shift = theta[self.slots.shift];
        let delay = self.delay_at(theta);
        let g = &self.grid;
        let n = g.len;
        let mut columns = vec![vec![0.0; n]; 1 + self.groups.len()];
        columns[0].iter_mut().for_each(|v| *v = 1.0);
        let support = shape.support();
        for p in &self.peaks {
            let c = self.lag(p.key, delay) + shift;
            let (i0, i1) = match support {
                Some(r) => {
                    let a = ((c - r - g.start) / g.width).floor().max(0.0);
                    let b = ((c + r - g.start) / g.width).ceil().min(n as f64 - 1.0);
                    if b < a {
                        continue;
                    }
                    (a as usize, b as usize)
                }
                None => (0, n - 1),
            };
            let col = &mut columns[1 + p.group];
            for (i, v) in col.iter_mut().enumerate().take(i1 + 1).skip(i0) {
                *v += p.weight * shape.mass(g.center(i) - c, g.width);
            }
        }
        Ok(Design {
            columns,
            offset: vec![],
        })
    }

    fn len(&self) -> usize {
        self.grid.len
    }
}

/// Multi-start fit of a peak train to a histogram.
pub fn fit(spec: &ModelSpec, data: &Histogram, opts: &FitOptions) -> Result<FitResult, EstimationError> {
    let model = spec.bind(data.grid())?;
    fit_separable(&model, &data.counts_f64(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hom_train, eval_model, HomTrainConfig};

    fn irf() -> VoigtIrf {
        VoigtIrf::kernel(0.05, 0.0).unwrap()
    }

    fn bs() -> BeamSplitter {
        BeamSplitter::new(0.46, 0.54).unwrap()
    }

    fn truth(v: f64, grid: &TimeGrid) -> Vec<f64> {
        let cfg = HomTrainConfig {
            mode: InterferometerMode::Cluster,
            visibility: v,
            bs: bs(),
            first_split: 0.5,
            overall_scale: 4000.0,
            decay_rate: 2.3,
            laser_period: 13.0,
            mz_delay: 2.7,
            irf: irf(),
            background: 2.0,
            time_shift: 0.07,
            window: (grid.start, grid.end()),
        };
        eval_model(&build_hom_train(&cfg).unwrap(), grid).unwrap()
    }

    fn spec() -> ModelSpec {
        ModelSpec::exp_irf(InterferometerMode::Cluster, bs(), 13.0, 2.7, 2.3, irf())
    }

    #[test]
    fn cluster_groups_and_weights() {
        let grid = TimeGrid::spanning(-20.0, 20.0, 0.1).unwrap();
        let m = spec().bind(&grid).unwrap();
        let mut names: Vec<&str> = m.groups().iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names[0], AREA_CENTRAL);
        names.sort();
        assert_eq!(
            names,
            ["area_2tau_pair", AREA_CENTRAL, "area_cluster_+1", "area_cluster_-1", AREA_TAU_PAIR]
        );
        // pairs are normalized to a unit mean; the 2tau pair is R:T asymmetric
        let pair = |n: i64| -> Vec<f64> {
            m.peaks.iter().filter(|p| p.key.0 == 0 && p.key.1.abs() == n).map(|p| p.weight).collect()
        };
        let (w1, w2) = (pair(1), pair(2));
        assert_eq!((w1.len(), w2.len()), (2, 2));
        assert!((w1[0] + w1[1] - 2.0).abs() < 1e-12, "{w1:?}");
        assert!((w2[0] + w2[1] - 2.0).abs() < 1e-12 && (w2[0] - w2[1]).abs() > 1e-3, "{w2:?}");
    }

    #[test]
    fn noiseless_recovery() {
        let grid = TimeGrid::spanning(-20.0, 20.0, 0.05).unwrap();
        let y = truth(0.62, &grid);
        let h = Histogram::new(grid, vec![0; grid.len]).unwrap();
        let m = spec().bind(h.grid()).unwrap();
        let r = fit_separable(&m, &y, &FitOptions { n_starts: 4, ..Default::default() }).unwrap();
        assert!((r.value("time_shift").unwrap() - 0.07).abs() < 1e-5);
        assert!((r.value("background").unwrap() / 2.0 - 1.0).abs() < 1e-4);
        let a0 = r.value(AREA_CENTRAL).unwrap();
        let ap = r.value(AREA_TAU_PAIR).unwrap();
        let v = (0.46f64.powi(2) + 0.54f64.powi(2)) / (2.0 * 0.46 * 0.54) - a0 / ap;
        assert!((v / 0.62 - 1.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn free_decay_rate_and_delay() {
        let grid = TimeGrid::spanning(-10.0, 10.0, 0.05).unwrap();
        let y = truth(0.3, &grid);
        let mut s = spec();
        s.decay_rate_bounds = Some((1.0, 5.0));
        s.mz_delay_tolerance = 0.2;
        let m = s.bind(&grid).unwrap();
        let r = fit_separable(&m, &y, &FitOptions { n_starts: 4, ..Default::default() }).unwrap();
        assert!((r.value("decay_rate").unwrap() / 2.3 - 1.0).abs() < 1e-4);
        assert!((r.value("mz_delay").unwrap() - 2.7).abs() < 1e-4);
    }

    #[test]
    fn period_mode_far_groups() {
        let grid = TimeGrid::spanning(-60.0, 60.0, 0.1).unwrap();
        let mut s = spec();
        s.mode = InterferometerMode::Period;
        s.mz_delay = 13.0;
        let m = s.bind(&grid).unwrap();
        let far: Vec<&str> = m.groups().iter().map(|g| g.name.as_str()).filter(|n| n.starts_with(FAR_PREFIX)).collect();
        assert_eq!(far, ["area_far_-4", "area_far_-3", "area_far_-2", "area_far_+2", "area_far_+3", "area_far_+4"]);
        assert!(m.groups().iter().any(|g| g.name == "area_pair_1"));
    }

    #[test]
    fn lorentzian_design_columns_have_unit_mass() {
        let grid = TimeGrid::spanning(-400.0, 400.0, 0.1).unwrap();
        let s = spec().with_shape(PeakShape::Lorentzian);
        let m = s.bind(&TimeGrid::spanning(-20.0, 20.0, 0.1).unwrap()).unwrap();
        let d = m.design(&[0.0, 0.3]).unwrap();
        assert_eq!(d.columns.len(), 1 + m.groups().len());
        // a single centered Lorentzian integrates to ~1 on a wide grid
        let wide = s.bind(&grid).unwrap();
        let dc = wide.design(&[0.0, 0.3]).unwrap();
        let total: f64 = dc.columns[1].iter().sum();
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn central_outside_window_is_rejected() {
        let grid = TimeGrid::spanning(5.0, 9.0, 0.1).unwrap();
        assert!(matches!(spec().bind(&grid), Err(EstimationError::InvalidSpec(_))));
    }
}
