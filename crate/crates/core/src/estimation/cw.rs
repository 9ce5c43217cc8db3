//! Fit of the coincidence trough measured under CW excitation.

use serde::{Deserialize, Serialize};

use super::separable::{fit_separable, Design, FitOptions, FitResult, LinearParam, NonlinearParam, SeparableModel, Transform};
use super::EstimationError;
use crate::model::{CwTroughModel, Histogram, ModelError, ProfileBuilder, TimeGrid, VoigtIrf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwFitSpec {
    pub irf: VoigtIrf,
    /// Search range for the trough recovery rate in 1/ns.
    pub rate_bounds: (f64, f64),
    pub shift_bounds: (f64, f64),
}

impl CwFitSpec {
    pub fn new(irf: VoigtIrf) -> Self {
        Self {
            irf: irf.as_kernel(),
            rate_bounds: (0.2, 20.0),
            shift_bounds: (-0.5, 0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwFit {
    pub model: CwTroughModel,
    pub result: FitResult,
}

struct TroughModel {
    grid: TimeGrid,
    builder: ProfileBuilder,
    nl: Vec<NonlinearParam>,
    lin: Vec<LinearParam>,
}

impl SeparableModel for TroughModel {
    fn nonlinear(&self) -> &[NonlinearParam] {
        &self.nl
    }

    fn linear(&self) -> &[LinearParam] {
        &self.lin
    }

    fn design(&self, theta: &[f64]) -> Result<Design, ModelError> {
        let (shift, rate) = (theta[0], theta[1]);
        let profile = self.builder.build(rate)?;
        let k = 2.0 / (rate * self.grid.width);
        let col = (0..self.grid.len)
            .map(|i| 1.0 - k * profile.bin_mass(self.grid.center(i) - shift))
            .collect();
        Ok(Design {
            columns: vec![col],
            offset: vec![],
        })
    }

    fn len(&self) -> usize {
        self.grid.len
    }
}

/// Fits `A_CW [1 - exp(-rate |t - shift|)]` convolved with the IRF.
pub fn fit_cw(spec: &CwFitSpec, data: &Histogram, opts: &FitOptions) -> Result<CwFit, EstimationError> {
    let grid = *data.grid();
    let (lo, hi) = spec.rate_bounds;
    let span = (grid.start - spec.shift_bounds.1)
        .abs()
        .max((grid.end() - spec.shift_bounds.0).abs());
    let model = TroughModel {
        grid,
        builder: ProfileBuilder::new(&spec.irf, grid.width, span, lo, hi)?,
        nl: vec![
            NonlinearParam::new("time_shift", "ns", spec.shift_bounds.0, spec.shift_bounds.1, Transform::Linear),
            NonlinearParam::new("cw_rate", "1/ns", lo, hi, Transform::Log),
        ],
        lin: vec![LinearParam::non_negative("cw_amplitude", "counts/bin")],
    };
    let result = fit_separable(&model, &data.counts_f64(), opts)?;
    let cw = CwTroughModel {
        amplitude: result.linear[0],
        rate: result.theta[1],
        irf: spec.irf.as_kernel(),
        time_shift: result.theta[0],
    };
    Ok(CwFit { model: cw, result })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eval_cw_trough;

    #[test]
    fn recovers_noiseless_trough() {
        let grid = TimeGrid::spanning(-8.0, 8.0, 0.05).unwrap();
        let irf = VoigtIrf::kernel(0.05, 0.0).unwrap();
        let truth = CwTroughModel {
            amplitude: 120.0,
            rate: 3.1,
            irf,
            time_shift: 0.04,
        };
        let y = eval_cw_trough(&truth, &grid).unwrap();
        // expected counts need not be integers for the objective
        let (lo, hi) = CwFitSpec::new(irf).rate_bounds;
        let model = TroughModel {
            grid,
            builder: ProfileBuilder::new(&irf, grid.width, 9.0, lo, hi).unwrap(),
            nl: vec![
                NonlinearParam::new("time_shift", "ns", -0.5, 0.5, Transform::Linear),
                NonlinearParam::new("cw_rate", "1/ns", lo, hi, Transform::Log),
            ],
            lin: vec![LinearParam::non_negative("cw_amplitude", "counts/bin")],
        };
        let r = fit_separable(&model, &y, &FitOptions { n_starts: 3, ..Default::default() }).unwrap();
        assert!((r.theta[1] / 3.1 - 1.0).abs() < 1e-4, "{:?}", r.theta);
        assert!((r.linear[0] / 120.0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn poisson_trough_via_public_entry() {
        let grid = TimeGrid::spanning(-8.0, 8.0, 0.1).unwrap();
        let irf = VoigtIrf::kernel(0.05, 0.0).unwrap();
        let truth = CwTroughModel {
            amplitude: 400.0,
            rate: 3.1,
            irf,
            time_shift: 0.0,
        };
        let f = eval_cw_trough(&truth, &grid).unwrap();
        let counts = crate::simulator::sample_poisson(&f, 5);
        let h = Histogram::new(grid, counts).unwrap();
        let fit = fit_cw(&CwFitSpec::new(irf), &h, &FitOptions { n_starts: 4, seed: 1, ..Default::default() }).unwrap();
        assert!((fit.model.rate - 3.1).abs() < 0.4, "{}", fit.model.rate);
        assert!((fit.model.amplitude / 400.0 - 1.0).abs() < 0.03);
    }
}
