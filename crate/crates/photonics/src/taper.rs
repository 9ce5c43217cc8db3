//! Adiabatic taper profiles from the rule `dw/dz = (n_eff(w) - 1) / alpha`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::neff::NeffTable;
use crate::{check_positive, PhotonicsError};

/// Adiabatic factor of the taper on the device used for interference data.
pub const ALPHA_DEVICE_A: f64 = 10.0;
/// Adiabatic factor of the taper on the efficiency-characterization device.
pub const ALPHA_DEVICE_B: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NeffSource {
    Constant(f64),
    Table(NeffTable),
}

impl NeffSource {
    pub fn n_eff(&self, width_nm: f64) -> Result<f64, PhotonicsError> {
        match self {
            NeffSource::Constant(n) => Ok(*n),
            NeffSource::Table(t) => t.n_eff(width_nm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaperProfile {
    /// From 0 at the wide end, µm.
    pub z_um: Vec<f64>,
    /// Strictly decreasing, nm.
    pub widths_nm: Vec<f64>,
    /// `n_eff` at the wide end of each step.
    pub step_n_eff: Vec<f64>,
    pub alpha: f64,
    pub total_length_um: f64,
}

impl TaperProfile {
    /// Relative mismatch between each step's slope and the adiabatic rule.
    pub fn residuals(&self) -> Vec<f64> {
        (0..self.step_n_eff.len())
            .map(|i| {
                let dw = self.widths_nm[i] - self.widths_nm[i + 1];
                let dz_nm = 1e3 * (self.z_um[i + 1] - self.z_um[i]);
                let want = (self.step_n_eff[i] - 1.0) / self.alpha;
                (dw / dz_nm - want).abs() / want
            })
            .collect()
    }
}

/// Steps from `w_start_nm` down to `w_end_nm` in decrements of `dw_nm`
/// (the last one shorter if needed), with `Δz_i = Δw / (n_eff(w_i) - 1)` at
/// the wide end of each step. Positions are scaled by `alpha`.
pub fn generate_taper(
    w_start_nm: f64,
    w_end_nm: f64,
    dw_nm: f64,
    alpha: f64,
    source: &NeffSource,
) -> Result<TaperProfile, PhotonicsError> {
    check_positive("alpha", alpha)?;
    check_positive("width step", dw_nm)?;
    check_positive("end width", w_end_nm)?;
    if !(w_start_nm > w_end_nm && w_start_nm.is_finite()) {
        return Err(PhotonicsError::Invalid(format!(
            "start width {w_start_nm} nm must exceed end width {w_end_nm} nm"
        )));
    }
    let span = w_start_nm - w_end_nm;
    let mut steps = (span / dw_nm).floor() as usize;
    // a remainder below rounding noise is not a step of its own
    if span - steps as f64 * dw_nm > 1e-9 * dw_nm {
        steps += 1;
    }
    let mut widths = Vec::with_capacity(steps + 1);
    let mut z = Vec::with_capacity(steps + 1);
    let mut ns = Vec::with_capacity(steps);
    let mut sum_nm = 0.0;
    widths.push(w_start_nm);
    z.push(0.0);
    for i in 0..steps {
        let w = w_start_nm - i as f64 * dw_nm;
        let next = if i + 1 == steps { w_end_nm } else { w - dw_nm };
        let n = source.n_eff(w)?;
        if !(n > 1.0) {
            return Err(PhotonicsError::NotGuided { width_nm: w, n_eff: n });
        }
        sum_nm += (w - next) / (n - 1.0);
        ns.push(n);
        widths.push(next);
        z.push(alpha * sum_nm * 1e-3);
    }
    Ok(TaperProfile {
        total_length_um: alpha * sum_nm * 1e-3,
        z_um: z,
        widths_nm: widths,
        step_n_eff: ns,
        alpha,
    })
}

/// Two columns `z_um,width_nm`.
pub fn write_taper(p: &TaperProfile) -> String {
    let mut s = String::from("z_um,width_nm\n");
    for (z, w) in p.z_um.iter().zip(&p.widths_nm) {
        let _ = writeln!(s, "{z},{w}");
    }
    s
}
