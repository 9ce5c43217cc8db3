use serde::{Deserialize, Serialize};

use crate::{check_positive, PhotonicsError};

/// Rectangular core in a uniform cladding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideGeometry {
    pub width_nm: f64,
    pub thickness_nm: f64,
    pub n_core: f64,
    pub n_clad: f64,
    pub wavelength_nm: f64,
}

impl WaveguideGeometry {
    /// Suspended GaAs membrane (160 nm, n = 3.4) in air at 940 nm.
    pub fn gaas(width_nm: f64) -> Self {
        Self {
            width_nm,
            thickness_nm: 160.0,
            n_core: 3.4,
            n_clad: 1.0,
            wavelength_nm: 940.0,
        }
    }

    pub fn with_width(&self, width_nm: f64) -> Self {
        Self { width_nm, ..*self }
    }

    pub fn validate(&self) -> Result<(), PhotonicsError> {
        check_positive("width", self.width_nm)?;
        check_positive("thickness", self.thickness_nm)?;
        check_positive("wavelength", self.wavelength_nm)?;
        if !(self.n_clad >= 1.0 && self.n_core > self.n_clad && self.n_core.is_finite()) {
            return Err(PhotonicsError::Invalid(format!(
                "need n_core > n_clad >= 1, got n_core = {}, n_clad = {}",
                self.n_core, self.n_clad
            )));
        }
        Ok(())
    }

    /// Free-space wavenumber in 1/nm.
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_nm
    }
}
