//! Instrument-response fit: Voigt plus flat background, with a Gaussian
//! fit for comparison.

use serde::{Deserialize, Serialize};

use super::separable::{fit_separable, Design, FitOptions, FitResult, LinearParam, NonlinearParam, SeparableModel, Transform};
use super::EstimationError;
use crate::model::{voigt_bin_mass, Histogram, ModelError, TimeGrid, VoigtIrf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfFit {
    /// Fitted line with its area, center and background.
    pub irf: VoigtIrf,
    /// Background-free, unit-area, zero-centered kernel.
    pub kernel: VoigtIrf,
    pub voigt: FitResult,
    pub gaussian: FitResult,
}

impl IrfFit {
    pub fn chi2_voigt(&self) -> f64 {
        self.voigt.chi2_normalized
    }

    pub fn chi2_gaussian(&self) -> f64 {
        self.gaussian.chi2_normalized
    }
}

struct LineModel {
    grid: TimeGrid,
    with_gamma: bool,
    nl: Vec<NonlinearParam>,
    lin: Vec<LinearParam>,
}

impl SeparableModel for LineModel {
    fn nonlinear(&self) -> &[NonlinearParam] {
        &self.nl
    }

    fn linear(&self) -> &[LinearParam] {
        &self.lin
    }

    fn design(&self, theta: &[f64]) -> Result<Design, ModelError> {
        let irf = VoigtIrf {
            sigma: theta[1],
            gamma: if self.with_gamma { theta[2] } else { 0.0 },
            center: theta[0],
            area: 1.0,
            background: 0.0,
        };
        irf.validate()?;
        let h = 0.5 * self.grid.width;
        let col = (0..self.grid.len)
            .map(|i| {
                let t = self.grid.center(i);
                voigt_bin_mass(t - h, t + h, &irf)
            })
            .collect();
        Ok(Design {
            columns: vec![col, vec![1.0; self.grid.len]],
            offset: vec![],
        })
    }

    fn len(&self) -> usize {
        self.grid.len
    }
}

/// Rough location and FWHM of the tallest peak.
fn locate(grid: &TimeGrid, y: &[f64]) -> Result<(f64, f64), EstimationError> {
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let (imax, &max) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .ok_or(EstimationError::NoPeak { max: 0.0, median: 0.0 })?;
    if max <= 3.0 * median || max <= 0.0 {
        return Err(EstimationError::NoPeak { max, median });
    }
    let half = median + 0.5 * (max - median);
    let mut l = imax;
    while l > 0 && y[l - 1] > half {
        l -= 1;
    }
    let mut r = imax;
    while r + 1 < y.len() && y[r + 1] > half {
        r += 1;
    }
    let fwhm = ((r - l + 1) as f64 * grid.width).max(grid.width);
    Ok((grid.center(imax), fwhm))
}

/// Fits a Voigt line and, for comparison, a Gaussian line to an isolated
/// laser-pulse histogram.
pub fn fit_irf(data: &Histogram, opts: &FitOptions) -> Result<IrfFit, EstimationError> {
    let grid = *data.grid();
    let y = data.counts_f64();
    let (t0, w) = locate(&grid, &y)?;
    let reach = 2.0 * w + 2.0 * grid.width;
    let sigma = NonlinearParam::new("sigma", "ns", (0.02 * w).max(1e-4), 2.0 * w, Transform::Log);
    let center = NonlinearParam::new("center", "ns", t0 - reach, t0 + reach, Transform::Linear);
    let lin = vec![LinearParam::non_negative("area", "counts"), LinearParam::non_negative("background", "counts/bin")];

    let gauss = LineModel {
        grid,
        with_gamma: false,
        nl: vec![center.clone(), sigma.clone()],
        lin: lin.clone(),
    };
    let voigt = LineModel {
        grid,
        with_gamma: true,
        nl: vec![center, sigma, NonlinearParam::new("gamma", "ns", 0.0, 2.0 * w, Transform::Linear)],
        lin,
    };
    let gaussian = fit_separable(&gauss, &y, opts)?;
    let voigt = fit_separable(&voigt, &y, opts)?;
    let irf = VoigtIrf {
        sigma: voigt.theta[1],
        gamma: voigt.theta[2],
        center: voigt.theta[0],
        area: voigt.linear[0],
        background: voigt.linear[1],
    };
    Ok(IrfFit {
        irf,
        kernel: irf.as_kernel(),
        voigt,
        gaussian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::sample_poisson;

    fn synth(sigma: f64, gamma: f64, seed: u64) -> Histogram {
        let grid = TimeGrid::spanning(-2.0, 2.0, 0.008).unwrap();
        let irf = VoigtIrf {
            sigma,
            gamma,
            center: 0.1,
            area: 2e5,
            background: 3.0,
        };
        let f: Vec<f64> = (0..grid.len)
            .map(|i| {
                let t = grid.center(i);
                irf.background + irf.area * voigt_bin_mass(t - 0.004, t + 0.004, &irf)
            })
            .collect();
        Histogram::new(grid, sample_poisson(&f, seed)).unwrap()
    }

    #[test]
    fn voigt_parameters_recovered() {
        let h = synth(0.03, 0.02, 6);
        let fit = fit_irf(&h, &FitOptions { n_starts: 6, seed: 2, ..Default::default() }).unwrap();
        for (name, truth) in [("sigma", 0.03), ("gamma", 0.02), ("center", 0.1)] {
            let iv = fit.voigt.get(name).unwrap().interval.unwrap();
            assert!(iv.contains(truth), "{name}: {iv:?}");
        }
        assert!(fit.voigt.objective < fit.gaussian.objective);
        assert_eq!(fit.kernel.area, 1.0);
        assert_eq!(fit.kernel.background, 0.0);
    }

    #[test]
    fn gaussian_data_gives_gamma_near_zero() {
        let h = synth(0.03, 0.0, 4);
        let fit = fit_irf(&h, &FitOptions { n_starts: 6, seed: 2, ..Default::default() }).unwrap();
        let iv = fit.voigt.get("gamma").unwrap().interval.unwrap();
        assert!(iv.contains(0.0) || iv.lower < 2e-3, "{iv:?}");
    }

    #[test]
    fn flat_data_has_no_peak() {
        let grid = TimeGrid::spanning(0.0, 1.0, 0.1).unwrap();
        let h = Histogram::new(grid, vec![5; grid.len]).unwrap();
        assert!(matches!(fit_irf(&h, &FitOptions::default()), Err(EstimationError::NoPeak { .. })));
    }
}
