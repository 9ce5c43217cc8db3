//! Line-shape primitives and the forward model from physical parameters to
//! expected coincidence counts per bin.

mod histogram;
mod profile;
pub(crate) mod shapes;
mod train;
mod voigt;

pub use histogram::{Histogram, TimeGrid};
pub use profile::{PeakProfile, ProfileBuilder, DEFAULT_PAD_DECAY_LENGTHS};
pub use shapes::{
    eval_two_sided_exp, gaussian_bin_mass, lorentzian, lorentzian_bin_mass, two_sided_exp_bin_mass,
};
pub use train::{
    build_hom_train, eval_cw_trough, eval_model, BeamSplitter, CwTroughModel, HomTrainConfig,
    InterferometerMode, PeakTrainModel,
};
pub use voigt::{eval_voigt, faddeeva, voigt_bin_mass, VoigtIrf};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("degenerate instrument response: sigma and gamma are both zero")]
    DegenerateKernel,
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("time grid is not uniform at bin {index}")]
    NonUniformGrid { index: usize },
    #[error("grid must contain at least {min} bins, got {got}")]
    GridTooShort { min: usize, got: usize },
    #[error("inconsistent interferometer configuration: {0}")]
    InconsistentMode(String),
}

pub(crate) fn check_positive(name: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {v}"),
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            reason: format!("must be finite and >= 0, got {v}"),
        })
    }
}
