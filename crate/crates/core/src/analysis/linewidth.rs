//! Lorentzian linewidth of a resonant laser scan.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::estimation::{
    fit_separable, Design, EstimationError, FitOptions, FitResult, LinearParam, LsWeights, NonlinearParam,
    ObjectiveKind, SeparableModel, Transform,
};
use crate::model::{lorentzian, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinewidthScan {
    /// Laser detuning in GHz.
    pub detuning_ghz: Vec<f64>,
    pub intensity: Vec<f64>,
    /// Absolute frequency at zero detuning in THz.
    #[serde(default)]
    pub reference_thz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinewidthResult {
    pub fwhm_ghz: f64,
    /// 95 % half-width of `fwhm_ghz`.
    pub fwhm_uncertainty_ghz: f64,
    pub center_thz: f64,
    /// `fwhm / (decay_rate / 2 pi)` when a decay rate is supplied.
    pub ratio_to_natural: Option<f64>,
    pub fit: FitResult,
}

struct LineScan {
    x: Vec<f64>,
    nl: Vec<NonlinearParam>,
    lin: Vec<LinearParam>,
}

impl SeparableModel for LineScan {
    fn nonlinear(&self) -> &[NonlinearParam] {
        &self.nl
    }

    fn linear(&self) -> &[LinearParam] {
        &self.lin
    }

    fn design(&self, theta: &[f64]) -> Result<Design, ModelError> {
        let (c, h) = (theta[0], theta[1]);
        Ok(Design {
            columns: vec![
                self.x.iter().map(|&x| PI * h * lorentzian(x, c, h)).collect(),
                vec![1.0; self.x.len()],
            ],
            offset: vec![],
        })
    }

    fn len(&self) -> usize {
        self.x.len()
    }
}

/// Least-squares fit of `height / (1 + ((x - c) / hwhm)^2) + background`.
///
/// `decay_rate` is in 1/ns; its natural linewidth is `decay_rate / 2 pi` GHz.
pub fn fit_lorentzian_linewidth(
    scan: &LinewidthScan,
    decay_rate: Option<f64>,
    opts: &FitOptions,
) -> Result<LinewidthResult, AnalysisError> {
    let x = &scan.detuning_ghz;
    let y = &scan.intensity;
    if x.len() != y.len() || x.len() < 10 {
        return Err(AnalysisError::Invalid("scan needs at least 10 points of (detuning, intensity)".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AnalysisError::Invalid("scan contains non-finite values".into()));
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut xs = x.clone();
    xs.sort_by(f64::total_cmp);
    let step = xs.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    if !(hi > lo) || !step.is_finite() {
        return Err(AnalysisError::Invalid("scan has no frequency spread".into()));
    }
    let model = LineScan {
        x: x.clone(),
        nl: vec![
            NonlinearParam::new("center", "GHz", lo, hi, Transform::Linear),
            NonlinearParam::new("hwhm", "GHz", 0.25 * step, hi - lo, Transform::Log),
        ],
        lin: vec![LinearParam::non_negative("height", "a.u."), LinearParam::unbounded("background", "a.u.")],
    };
    let fit_opts = FitOptions {
        objective: ObjectiveKind::Ls,
        ls_weights: LsWeights::Uniform,
        ..*opts
    };
    let fit = match fit_separable(&model, y, &fit_opts) {
        Ok(f) => f,
        Err(EstimationError::NonConvergence(f)) => *f,
        Err(e) => return Err(e.into()),
    };
    let (c, h, height) = (fit.theta[0], fit.theta[1], fit.linear[0]);
    let noise = (fit.objective / (fit.n - fit.nu) as f64).sqrt();
    if !(height > 3.0 * noise) || h >= 0.5 * (hi - lo) {
        return Err(AnalysisError::NotPeaked);
    }
    let fwhm = 2.0 * h;
    let half_width = fit.get("hwhm").and_then(|p| p.interval).map_or(f64::NAN, |iv| iv.upper - iv.lower);
    Ok(LinewidthResult {
        fwhm_ghz: fwhm,
        fwhm_uncertainty_ghz: half_width,
        center_thz: scan.reference_thz + c * 1e-3,
        ratio_to_natural: decay_rate.map(|g| fwhm / (g / (2.0 * PI))),
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn scan(noise: f64, seed: u64) -> LinewidthScan {
        let mut rng = crate::rng::stream(seed, "scan", 0);
        let x: Vec<f64> = (0..81).map(|i| -4.0 + 0.1 * i as f64).collect();
        let y = x
            .iter()
            .map(|&d| {
                let l = 1.0 / (1.0 + ((d - 0.2) / 0.56).powi(2));
                100.0 * l + 5.0 + noise * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        LinewidthScan {
            detuning_ghz: x,
            intensity: y,
            reference_thz: 319.0,
        }
    }

    #[test]
    fn recovers_width_with_noise() {
        let r = fit_lorentzian_linewidth(&scan(2.0, 7), None, &FitOptions { n_starts: 8, ..Default::default() }).unwrap();
        assert!((r.fwhm_ghz / 1.12 - 1.0).abs() < 0.03, "{}", r.fwhm_ghz);
        assert!((r.center_thz - 319.0002).abs() < 1e-4);
    }

    #[test]
    fn ratio_to_natural_width() {
        let r = fit_lorentzian_linewidth(&scan(0.0, 1), Some(2.0 * PI * 0.862), &FitOptions { n_starts: 4, ..Default::default() })
            .unwrap();
        assert!((r.ratio_to_natural.unwrap() - 1.12 / 0.862).abs() < 1e-5);
        assert!((r.ratio_to_natural.unwrap() - 1.3).abs() < 0.01);
    }

    #[test]
    fn flat_scan_is_rejected() {
        let mut s = scan(1.0, 3);
        s.intensity.iter_mut().enumerate().for_each(|(i, v)| *v = 5.0 + if i % 2 == 0 { 0.5 } else { -0.5 });
        assert!(fit_lorentzian_linewidth(&s, None, &FitOptions { n_starts: 4, ..Default::default() }).is_err());
    }
}
