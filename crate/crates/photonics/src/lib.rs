//! Nanobeam waveguide design: scalar finite-difference mode solving,
//! adiabatic taper profiles, Gaussian mode overlap and source-efficiency
//! loss budgets.
//!
//! Lengths follow the conventions of the fabrication drawings: widths and
//! thicknesses in nm, taper positions and mode-field diameters in µm.

mod band;
pub mod budget;
pub mod geometry;
pub mod mode;
pub mod neff;
pub mod overlap;
pub mod taper;

pub use budget::{loss_budget, LossBudget, LossFactor};
pub use geometry::WaveguideGeometry;
pub use mode::{solve_scalar_mode, ModeGrid, ModeSolution, TransverseField};
pub use neff::{read_neff_table, sweep_neff, write_neff_table, NeffTable};
pub use overlap::{gaussian_field, mode_overlap, overlap};
pub use taper::{generate_taper, write_taper, NeffSource, TaperProfile, ALPHA_DEVICE_A, ALPHA_DEVICE_B};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhotonicsError {
    #[error("{0}")]
    Invalid(String),
    /// The fundamental mode is not confined by the core.
    #[error("no guided mode at width {width_nm} nm (n_eff = {n_eff})")]
    Cutoff { width_nm: f64, n_eff: f64 },
    #[error("n_eff({width_nm} nm) = {n_eff} is not above the cladding index")]
    NotGuided { width_nm: f64, n_eff: f64 },
    #[error("width {width_nm} nm outside table range [{lo}, {hi}] nm")]
    Extrapolation { width_nm: f64, lo: f64, hi: f64 },
    #[error("field has zero power")]
    ZeroPower,
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<(), PhotonicsError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(PhotonicsError::Invalid(format!("{name} must be positive and finite, got {v}")))
    }
}
