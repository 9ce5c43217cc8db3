//! Quantities derived from fits: visibility, g²(0), the jitter and dephasing
//! visibility model, and linewidths.

mod g2;
mod linewidth;
mod theory;
mod visibility;

pub use g2::{g2_from_fit, G2Result, Normalization, Plateau};
pub use linewidth::{fit_lorentzian_linewidth, LinewidthResult, LinewidthScan};
pub use theory::{invert_jitter, visibility_theory, JitterInversion, RateModel};
pub use visibility::{
    cw_corrected_areas, cw_corrected_central_area, visibility_b3, visibility_cluster, visibility_from_fit,
    visibility_period, visibility_profile_interval, VisibilityMethod, VisibilityResult,
};

use thiserror::Error;

use crate::estimation::EstimationError;
use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{0}")]
    Invalid(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("scan shows no resolvable peak")]
    NotPeaked,
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

impl From<ModelError> for AnalysisError {
    fn from(e: ModelError) -> Self {
        AnalysisError::Estimation(e.into())
    }
}
