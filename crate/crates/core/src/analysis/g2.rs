//! Zero-delay second-order correlation from a fitted autocorrelation
//! histogram.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::estimation::{
    fit_separable, BoundPeakModel, Design, EstimationError, FitOptions, FitResult, GroupKind, LinearParam, LsWeights,
    NonlinearParam, ObjectiveKind, PeakLayout, SeparableModel, Transform,
};
use crate::model::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Mean of the two peaks one period from zero.
    NearestPeaks,
    /// Long-delay limit `a` of `a + b exp(-|t| / tau)` fitted to the side peaks.
    LongDelayPlateau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub a: f64,
    pub b: f64,
    pub tau_ns: f64,
    pub sigma_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Result {
    pub g2_zero: f64,
    pub central_area: f64,
    pub reference_area: f64,
    /// Normalization actually used.
    pub normalization: Normalization,
    /// The plateau was requested but could not be resolved.
    pub fallback: bool,
    /// One standard deviation from the fitted-area covariances.
    pub sigma: f64,
    pub plateau: Option<Plateau>,
}

/// Side-peak areas `a + b exp(-|t| / tau)`, fitted in units of their standard
/// deviations.
struct Envelope {
    t: Vec<f64>,
    s: Vec<f64>,
    nl: Vec<NonlinearParam>,
    lin: Vec<LinearParam>,
}

impl SeparableModel for Envelope {
    fn nonlinear(&self) -> &[NonlinearParam] {
        &self.nl
    }

    fn linear(&self) -> &[LinearParam] {
        &self.lin
    }

    fn design(&self, theta: &[f64]) -> Result<Design, ModelError> {
        let tau = theta[0];
        Ok(Design {
            columns: vec![
                self.s.iter().map(|s| 1.0 / s).collect(),
                self.t.iter().zip(&self.s).map(|(t, s)| (-t.abs() / tau).exp() / s).collect(),
            ],
            offset: vec![],
        })
    }

    fn len(&self) -> usize {
        self.t.len()
    }
}

fn plateau(side: &[(f64, f64, f64)], period: f64, opts: &FitOptions) -> Result<(Plateau, bool), AnalysisError> {
    let t_max = side.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let model = Envelope {
        t: side.iter().map(|p| p.0).collect(),
        s: side.iter().map(|p| p.2).collect(),
        nl: vec![NonlinearParam::new("tau", "ns", 0.25 * period, 10.0 * t_max, Transform::Log)],
        lin: vec![LinearParam::non_negative("a", "counts"), LinearParam::non_negative("b", "counts")],
    };
    let y: Vec<f64> = side.iter().map(|p| p.1 / p.2).collect();
    let fit_opts = FitOptions {
        objective: ObjectiveKind::Ls,
        ls_weights: LsWeights::Uniform,
        ..*opts
    };
    let r = match fit_separable(&model, &y, &fit_opts) {
        Ok(r) => r,
        Err(EstimationError::NonConvergence(r)) => *r,
        Err(e) => return Err(e.into()),
    };
    let (tau, a, b) = (r.theta[0], r.linear[0], r.linear[1]);
    let (sigma_a, sigma_b) = envelope_sd(side, tau, b);
    let flat = !(b > 2.0 * sigma_b);
    let reached = t_max >= 2.0 * tau;
    let resolved = sigma_a.is_finite() && sigma_a < 0.5 * a && (flat || reached);
    Ok((Plateau { a, b, tau_ns: tau, sigma_a }, resolved))
}

/// Standard deviations of `a` and `b` from the Fisher matrix with the
/// side-peak uncertainties taken as known.
fn envelope_sd(side: &[(f64, f64, f64)], tau: f64, b: f64) -> (f64, f64) {
    let mut f = [[0.0; 3]; 3];
    for &(t, _, s) in side {
        let e = (-t.abs() / tau).exp();
        let j = [1.0 / s, e / s, b * t.abs() * e / (tau * tau * s)];
        for (r, jr) in f.iter_mut().zip(j) {
            for (x, jc) in r.iter_mut().zip(j) {
                *x += jr * jc;
            }
        }
    }
    let det = f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1]) - f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0])
        + f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0]);
    let diag = f[0][0] * f[1][1] * f[2][2];
    if !(det > 1e-10 * diag) || !det.is_finite() {
        return (f64::INFINITY, f64::INFINITY);
    }
    let caa = (f[1][1] * f[2][2] - f[1][2] * f[2][1]) / det;
    let cbb = (f[0][0] * f[2][2] - f[0][2] * f[2][0]) / det;
    (caa.max(0.0).sqrt(), cbb.max(0.0).sqrt())
}

/// `g2(0)` as the fitted central area over the chosen reference.
///
/// `model` must use the autocorrelation layout so that every peak has its
/// own area.
pub fn g2_from_fit(
    model: &BoundPeakModel,
    fit: &FitResult,
    normalization: Normalization,
    opts: &FitOptions,
) -> Result<G2Result, AnalysisError> {
    if model.spec().layout != PeakLayout::Autocorrelation {
        return Err(AnalysisError::Invalid("g2 needs an autocorrelation-layout fit".into()));
    }
    let period = model.spec().laser_period;
    let sd = |name: &str| fit.cov(name, name).map_or(f64::NAN, |v| v.max(0.0).sqrt());
    let mut central = None;
    let mut side = Vec::new();
    let mut nearest = Vec::new();
    for g in model.groups() {
        let a = fit.value(&g.name).unwrap_or(0.0);
        match g.kind {
            GroupKind::Central => central = Some((a, sd(&g.name))),
            GroupKind::Peak(k) => {
                side.push((k as f64 * period, a, sd(&g.name)));
                if k.abs() == 1 {
                    nearest.push((a, sd(&g.name)));
                }
            }
            _ => {}
        }
    }
    let (a0, s0) = central.ok_or_else(|| AnalysisError::Invalid("fit has no zero-delay peak".into()))?;
    if nearest.is_empty() {
        return Err(AnalysisError::Invalid("no peak one period from zero".into()));
    }
    let n = nearest.len() as f64;
    let near = nearest.iter().map(|p| p.0).sum::<f64>() / n;
    let near_sd = nearest.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt() / n;

    let mut out = G2Result {
        g2_zero: 0.0,
        central_area: a0,
        reference_area: near,
        normalization: Normalization::NearestPeaks,
        fallback: false,
        sigma: 0.0,
        plateau: None,
    };
    let mut ref_sd = near_sd;
    if normalization == Normalization::LongDelayPlateau {
        let usable = side.len() >= 3 && side.iter().all(|p| p.2.is_finite() && p.2 > 0.0);
        let fitted = if usable { Some(plateau(&side, period, opts)?) } else { None };
        match fitted {
            Some((p, true)) => {
                out.reference_area = p.a;
                out.normalization = Normalization::LongDelayPlateau;
                out.plateau = Some(p);
                ref_sd = p.sigma_a;
            }
            Some((p, false)) => {
                out.fallback = true;
                out.plateau = Some(p);
            }
            None => out.fallback = true,
        }
    }
    if !(out.reference_area > 0.0) {
        return Err(AnalysisError::Invalid("reference area is not positive".into()));
    }
    let r = out.reference_area;
    out.g2_zero = a0 / r;
    out.sigma = ((s0 / r).powi(2) + (a0 * ref_sd / (r * r)).powi(2)).sqrt();
    Ok(out)
}
