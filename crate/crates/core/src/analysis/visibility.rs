//! Two-photon interference visibility from peak areas.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::estimation::{
    delta_chi2, fit_separable, profile_interval, BoundPeakModel, Design, EstimationError, FitOptions, FitResult,
    GroupKind, Interval, LinearParam, ModelSpec, NonlinearParam, SeparableModel, DELTA_CHI2_95,
};
use crate::model::{BeamSplitter, CwTroughModel, Histogram, InterferometerMode, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisibilityMethod {
    /// Cluster configuration: central peak against its two neighbours.
    Cluster,
    /// Delay of whole laser periods: central peak against far peaks.
    Period,
    /// As `Period` with the central area corrected for a finite g²(0).
    PeriodG2Corrected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    pub v: f64,
    pub method: VisibilityMethod,
    /// Central area (`A0` or `Ã0`).
    pub a0: f64,
    /// `A+ + A-` for the cluster method, the far-peak area `A` (or `Ã`) otherwise.
    pub reference: f64,
    pub bs: BeamSplitter,
    pub g2_zero: Option<f64>,
    /// Propagated 95 % half-width; 0 when no covariance was supplied.
    pub uncertainty: f64,
    /// `v` lies outside [0, 1]; it is reported unclamped.
    pub out_of_range: bool,
}

fn result(v: f64, method: VisibilityMethod, a0: f64, reference: f64, bs: BeamSplitter, g2: Option<f64>) -> VisibilityResult {
    VisibilityResult {
        v,
        method,
        a0,
        reference,
        bs,
        g2_zero: g2,
        uncertainty: 0.0,
        out_of_range: !(0.0..=1.0).contains(&v),
    }
}

fn check_area(name: &str, a: f64) -> Result<(), AnalysisError> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(AnalysisError::Invalid(format!("{name} must be finite, got {a}")))
    }
}

/// `V = (R^2 + T^2) / (2RT) - 2 A0 / (A+ + A-)`.
pub fn visibility_cluster(a0: f64, a_plus: f64, a_minus: f64, bs: BeamSplitter) -> Result<VisibilityResult, AnalysisError> {
    check_area("A0", a0)?;
    let side = a_plus + a_minus;
    if !(side > 0.0 && side.is_finite()) {
        return Err(AnalysisError::Invalid("side-peak areas must sum to a positive value".into()));
    }
    let (r, t) = (bs.r, bs.t);
    let v = (r * r + t * t) / (2.0 * r * t) - 2.0 * a0 / side;
    Ok(result(v, VisibilityMethod::Cluster, a0, side, bs, None))
}

/// `V = (R^2 + T^2 - A0 / A) / (2RT)`.
pub fn visibility_period(a0: f64, a_far: f64, bs: BeamSplitter) -> Result<VisibilityResult, AnalysisError> {
    check_area("A0", a0)?;
    if !(a_far > 0.0 && a_far.is_finite()) {
        return Err(AnalysisError::Invalid("far-peak area must be positive".into()));
    }
    let (r, t) = (bs.r, bs.t);
    let v = (r * r + t * t - a0 / a_far) / (2.0 * r * t);
    Ok(result(v, VisibilityMethod::Period, a0, a_far, bs, None))
}

/// `V = [(R^2 + T^2)(1 + g2) - Ã0 / Ã] / (2RT)`.
pub fn visibility_b3(a0_tilde: f64, a_tilde: f64, bs: BeamSplitter, g2_zero: f64) -> Result<VisibilityResult, AnalysisError> {
    check_area("A0", a0_tilde)?;
    if !(a_tilde > 0.0 && a_tilde.is_finite()) {
        return Err(AnalysisError::Invalid("far-peak area must be positive".into()));
    }
    if !(g2_zero >= 0.0 && g2_zero.is_finite()) {
        return Err(AnalysisError::Invalid(format!("g2(0) must be non-negative, got {g2_zero}")));
    }
    let (r, t) = (bs.r, bs.t);
    let v = ((r * r + t * t) * (1.0 + g2_zero) - a0_tilde / a_tilde) / (2.0 * r * t);
    Ok(result(v, VisibilityMethod::PeriodG2Corrected, a0_tilde, a_tilde, bs, Some(g2_zero)))
}

/// Central and far areas after removing the CW trough:
/// `Ã0 = f_P(0) - f_CW(0) A_bg / A_CW` and `Ã = f_P(2Δt)`.
///
/// All values are fitted function values in counts per bin.
pub fn cw_corrected_areas(f_p0: f64, f_p_far: f64, f_cw0: f64, a_bg: f64, a_cw: f64) -> Result<(f64, f64), AnalysisError> {
    if !(a_cw != 0.0 && a_cw.is_finite()) {
        return Err(AnalysisError::Invalid("A_CW must be non-zero".into()));
    }
    Ok((f_p0 - f_cw0 * a_bg / a_cw, f_p_far))
}

/// [`cw_corrected_areas`] evaluated from a pulsed peak-train fit and a CW
/// trough fit. Zero delay is the fitted peak position of each fit.
pub fn cw_corrected_central_area(
    pulsed: &BoundPeakModel,
    pulsed_fit: &FitResult,
    cw: &CwTroughModel,
) -> Result<(f64, f64), AnalysisError> {
    let shift = pulsed_fit.value("time_shift").unwrap_or(0.0);
    let delay = pulsed_fit.value("mz_delay").unwrap_or(pulsed.spec().mz_delay);
    let a_bg = pulsed_fit
        .value("background")
        .ok_or_else(|| AnalysisError::Invalid("pulsed fit has no background".into()))?;
    let f_p0 = pulsed.value_at_fit(pulsed_fit, shift)?;
    let f_far = pulsed.value_at_fit(pulsed_fit, shift + 2.0 * delay)?;
    let grid = crate::model::TimeGrid::new(cw.time_shift, pulsed.grid().width, 1)?;
    let f_cw0 = crate::model::eval_cw_trough(cw, &grid)?[0];
    cw_corrected_areas(f_p0, f_far, f_cw0, a_bg, cw.amplitude)
}

fn z95() -> f64 {
    DELTA_CHI2_95.sqrt()
}

/// Visibility from a peak-train fit, with the 95 % half-width propagated
/// from the area covariance.
pub fn visibility_from_fit(model: &BoundPeakModel, fit: &FitResult) -> Result<VisibilityResult, AnalysisError> {
    let spec = model.spec();
    let central = group_name(model, |k| k == GroupKind::Central)?;
    let a0 = fit.value(&central).ok_or_else(|| missing(&central))?;
    match spec.mode {
        InterferometerMode::Cluster => {
            let pair = group_name(model, |k| k == GroupKind::Pair(1))?;
            let p = fit.value(&pair).ok_or_else(|| missing(&pair))?;
            // the pair parameter is the mean of A+ and A-
            let mut out = visibility_cluster(a0, p, p, spec.bs)?;
            let grad = [(central.as_str(), -1.0 / p), (pair.as_str(), a0 / (p * p))];
            out.uncertainty = propagate(fit, &grad);
            Ok(out)
        }
        InterferometerMode::Period => {
            let far: Vec<String> = model
                .groups()
                .iter()
                .filter(|g| matches!(g.kind, GroupKind::Far(_)))
                .map(|g| g.name.clone())
                .collect();
            if far.is_empty() {
                return Err(AnalysisError::Invalid(format!(
                    "no far peaks at or beyond {} ns inside the histogram",
                    spec.far_lag
                )));
            }
            let values: Vec<f64> = far.iter().map(|n| fit.value(n).unwrap_or(0.0)).collect();
            let a = values.iter().sum::<f64>() / values.len() as f64;
            let mut out = visibility_period(a0, a, spec.bs)?;
            let k = 2.0 * spec.bs.r * spec.bs.t;
            let mut grad = vec![(central.as_str(), -1.0 / (a * k))];
            let each = a0 / (a * a * k * values.len() as f64);
            grad.extend(far.iter().map(|n| (n.as_str(), each)));
            out.uncertainty = propagate(fit, &grad);
            Ok(out)
        }
    }
}

fn missing(name: &str) -> AnalysisError {
    AnalysisError::Invalid(format!("fit has no parameter {name}"))
}

fn group_name(model: &BoundPeakModel, pred: impl Fn(GroupKind) -> bool) -> Result<String, AnalysisError> {
    model
        .groups()
        .iter()
        .find(|g| pred(g.kind))
        .map(|g| g.name.clone())
        .ok_or_else(|| AnalysisError::Invalid("peak group needed for the visibility is not in the fit".into()))
}

/// `z95 * sqrt(g' C g)` over the named free parameters.
fn propagate(fit: &FitResult, grad: &[(&str, f64)]) -> f64 {
    let mut var = 0.0;
    for &(a, ga) in grad {
        for &(b, gb) in grad {
            match fit.cov(a, b) {
                Some(c) => var += ga * gb * c,
                None => return f64::NAN,
            }
        }
    }
    z95() * var.max(0.0).sqrt()
}

/// Peak-train model whose central area is tied to the reference areas by a
/// fixed visibility.
struct FixedVisibility<'a> {
    inner: &'a BoundPeakModel,
    central: usize,
    /// (linear index, coefficient) pairs: `A0 = sum coef * area`.
    tie: Vec<(usize, f64)>,
    lin: Vec<LinearParam>,
}

impl SeparableModel for FixedVisibility<'_> {
    fn nonlinear(&self) -> &[NonlinearParam] {
        self.inner.nonlinear()
    }

    fn linear(&self) -> &[LinearParam] {
        &self.lin
    }

    fn design(&self, theta: &[f64]) -> Result<Design, ModelError> {
        let mut d = self.inner.design(theta)?;
        let c = d.columns.remove(self.central);
        for &(j, k) in &self.tie {
            let j = if j > self.central { j - 1 } else { j };
            for (x, y) in d.columns[j].iter_mut().zip(&c) {
                *x += k * y;
            }
        }
        Ok(d)
    }

    fn len(&self) -> usize {
        self.inner.len()
    }
}

/// Profile-likelihood interval on the visibility itself, refitting the
/// nonlinear parameters at each trial value.
pub fn visibility_profile_interval(
    spec: &ModelSpec,
    data: &Histogram,
    opts: &FitOptions,
    fit: &FitResult,
    level: f64,
) -> Result<Interval, AnalysisError> {
    let model = spec.bind(data.grid())?;
    let y = data.counts_f64();
    let best = visibility_from_fit(&model, fit)?;
    let lin = model.linear();
    let index = |name: &str| lin.iter().position(|p| p.name == name);
    let central = index(&group_name(&model, |k| k == GroupKind::Central)?).expect("central group");
    let (r, t) = (spec.bs.r, spec.bs.t);
    // A0 = slope(V) * reference
    let (refs, slope): (Vec<usize>, Box<dyn Fn(f64) -> f64>) = match spec.mode {
        InterferometerMode::Cluster => {
            let pair = index(&group_name(&model, |k| k == GroupKind::Pair(1))?).expect("pair group");
            (vec![pair], Box::new(move |v| (r * r + t * t) / (2.0 * r * t) - v))
        }
        InterferometerMode::Period => {
            let far: Vec<usize> = model
                .groups()
                .iter()
                .filter(|g| matches!(g.kind, GroupKind::Far(_)))
                .filter_map(|g| index(&g.name))
                .collect();
            let n = far.len() as f64;
            (far, Box::new(move |v| (r * r + t * t - 2.0 * r * t * v) / n))
        }
    };
    let local = FitOptions {
        n_starts: opts.n_starts.clamp(1, 4),
        ..*opts
    };
    let mut lin_tied = lin.to_vec();
    lin_tied.remove(central);
    let may_be_negative = lin[central].lower.is_none();
    let profiled = |v: f64| -> f64 {
        let k = slope(v);
        if k < 0.0 && !may_be_negative {
            return f64::INFINITY;
        }
        let tied = FixedVisibility {
            inner: &model,
            central,
            tie: refs.iter().map(|&j| (j, k)).collect(),
            lin: lin_tied.clone(),
        };
        match fit_separable(&tied, &y, &local) {
            Ok(r) => r.objective,
            Err(EstimationError::NonConvergence(r)) => r.objective,
            Err(_) => f64::INFINITY,
        }
    };
    let step = if best.uncertainty.is_finite() && best.uncertainty > 0.0 {
        best.uncertainty / z95()
    } else {
        0.01
    };
    Ok(profile_interval(
        profiled,
        best.v,
        fit.objective,
        step,
        f64::NEG_INFINITY,
        f64::INFINITY,
        delta_chi2(level),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(r: f64) -> BeamSplitter {
        BeamSplitter::new(r, 1.0 - r).unwrap()
    }

    #[test]
    fn cluster_examples() {
        assert!(visibility_cluster(1.0, 1.0, 1.0, bs(0.5)).unwrap().v.abs() < 1e-15);
        let v = visibility_cluster(0.39288, 1.0, 1.0, bs(0.46)).unwrap();
        assert!((v.v - 0.62).abs() < 1e-4, "{}", v.v);
        let top = visibility_cluster(0.0, 1.0, 1.0, bs(0.46)).unwrap();
        assert!((top.v - 1.012_882).abs() < 1e-6 && top.out_of_range);
        assert!(visibility_cluster(0.1, 0.0, 0.0, bs(0.5)).is_err());
    }

    #[test]
    fn period_examples() {
        assert!(visibility_period(0.5, 1.0, bs(0.5)).unwrap().v.abs() < 1e-15);
        assert_eq!(visibility_period(0.0, 1.0, bs(0.5)).unwrap().v, 1.0);
        assert!(visibility_period(0.3, 0.0, bs(0.5)).is_err());
    }

    #[test]
    fn b3_examples() {
        let v = visibility_b3(18.9, 148.9, bs(0.5), 0.0).unwrap();
        assert!((v.v - 0.746).abs() < 1e-3, "{}", v.v);
        let v = visibility_b3(18.9, 148.9, bs(0.5), 0.055).unwrap();
        assert!((v.v - 0.801).abs() < 1e-3, "{}", v.v);
        for &(a0, a, r) in &[(0.1, 1.0, 0.5), (18.9, 148.9, 0.46), (3.0, 2.0, 0.3)] {
            let p = visibility_period(a0, a, bs(r)).unwrap().v;
            assert_eq!(visibility_b3(a0, a, bs(r), 0.0).unwrap().v, p);
        }
    }

    #[test]
    fn cw_correction_limits() {
        assert_eq!(cw_corrected_areas(30.0, 150.0, 12.0, 0.0, 50.0).unwrap(), (30.0, 150.0));
        assert_eq!(cw_corrected_areas(30.0, 150.0, 0.0, 44.0, 50.0).unwrap(), (30.0, 150.0));
        let (a0, _) = cw_corrected_areas(30.0, 150.0, 10.0, 44.0, 40.0).unwrap();
        assert!((a0 - 19.0).abs() < 1e-12);
        assert!(cw_corrected_areas(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }
}
