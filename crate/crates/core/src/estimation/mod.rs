//! Objectives, the multi-start separable fitter, confidence intervals and
//! the fits built on them (peak trains, instrument response, CW trough).

mod compare;
mod cw;
mod intervals;
mod irf;
mod objective;
mod peaks;
mod separable;
mod simplex;

pub use compare::{compare_fitters, ComparisonReport, ComparisonRow, Pipeline};
pub use cw::{fit_cw, CwFit, CwFitSpec};
pub use intervals::{
    curvature_interval, delta_chi2, normal_quantile, profile_interval, profile_intervals, Interval, IntervalMethod,
    DELTA_CHI2_95,
};
pub use irf::{fit_irf, IrfFit};
pub use objective::{chi2_ls, chi2_mle, LsValue, LsWeights, ObjectiveKind};
pub use peaks::{
    fit, BoundPeakModel, GroupKind, ModelSpec, PeakGroup, PeakLayout, PeakShape, AREA_CENTRAL, AREA_TAU_PAIR, FAR_PREFIX,
};
pub use separable::{
    fit_separable, Design, FitOptions, FitResult, FittedParameter, LinearParam, NonlinearParam, SeparableModel,
    Transform,
};
pub use simplex::{minimize_bounded, SimplexOptions, SimplexOutcome};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("objective undefined: every bin is zero")]
    UndefinedObjective,
    #[error("no start converged (best objective {})", .0.objective)]
    NonConvergence(Box<FitResult>),
    #[error("no peak found: maximum {max} is not above 3x the median {median}")]
    NoPeak { max: f64, median: f64 },
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Confidence intervals for `names` (every free parameter when empty) by
/// profiling, keeping the curvature interval where profiling fails.
pub fn confidence_intervals(
    spec: &ModelSpec,
    data: &crate::Histogram,
    opts: &FitOptions,
    result: &mut FitResult,
    names: &[&str],
    level: f64,
) -> Result<(), EstimationError> {
    let model = spec.bind(data.grid())?;
    let y = data.counts_f64();
    profile_intervals(&model, &y, opts, result, names, level)
}
