//! Tabulated effective index versus width, with monotone cubic
//! interpolation.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::WaveguideGeometry;
use crate::mode::{solve_scalar_mode, ModeGrid};
use crate::PhotonicsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeffTable {
    /// Strictly increasing, nm.
    widths_nm: Vec<f64>,
    n_eff: Vec<f64>,
    slopes: Vec<f64>,
}

impl NeffTable {
    /// Rows may come in either width order.
    pub fn new(mut rows: Vec<(f64, f64)>) -> Result<Self, PhotonicsError> {
        if rows.len() < 2 {
            return Err(PhotonicsError::Invalid("n_eff table needs at least two rows".into()));
        }
        if rows.iter().any(|r| !r.0.is_finite() || !r.1.is_finite()) {
            return Err(PhotonicsError::Invalid("n_eff table has non-finite entries".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(PhotonicsError::Invalid("duplicate width in n_eff table".into()));
        }
        let incr = rows.windows(2).all(|w| w[1].1 >= w[0].1);
        let decr = rows.windows(2).all(|w| w[1].1 <= w[0].1);
        if !(incr || decr) {
            return Err(PhotonicsError::Invalid("n_eff table is not monotone in width".into()));
        }
        let (widths_nm, n_eff): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
        let slopes = pchip_slopes(&widths_nm, &n_eff);
        Ok(Self {
            widths_nm,
            n_eff,
            slopes,
        })
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths_nm
    }

    pub fn values(&self) -> &[f64] {
        &self.n_eff
    }

    pub fn range(&self) -> (f64, f64) {
        (self.widths_nm[0], *self.widths_nm.last().unwrap())
    }

    /// Monotone piecewise-cubic (Fritsch-Carlson) value at `width_nm`.
    pub fn n_eff(&self, width_nm: f64) -> Result<f64, PhotonicsError> {
        let (lo, hi) = self.range();
        if !(width_nm >= lo && width_nm <= hi) {
            return Err(PhotonicsError::Extrapolation { width_nm, lo, hi });
        }
        let x = &self.widths_nm;
        let k = match x.partition_point(|&w| w <= width_nm) {
            0 => 0,
            p => (p - 1).min(x.len() - 2),
        };
        let h = x[k + 1] - x[k];
        let t = (width_nm - x[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.n_eff[k] + h10 * h * self.slopes[k] + h01 * self.n_eff[k + 1] + h11 * h * self.slopes[k + 1])
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![d[0], d[0]];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if d[k - 1] * d[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    m[0] = end_slope(&x[..n.min(4)], &y[..n.min(4)], d[0]);
    let (xr, yr): (Vec<f64>, Vec<f64>) = (0..n.min(4)).map(|k| (-x[n - 1 - k], y[n - 1 - k])).unzip();
    m[n - 1] = -end_slope(&xr, &yr, -d[n - 2]);
    m
}

/// One-sided derivative at `x[0]` of the polynomial through the given
/// points, limited so the end interval stays monotone.
fn end_slope(x: &[f64], y: &[f64], d0: f64) -> f64 {
    // derivative of the Lagrange basis at x[0]
    let mut s = 0.0;
    for j in 0..x.len() {
        let dl = if j == 0 {
            (1..x.len()).map(|k| 1.0 / (x[0] - x[k])).sum::<f64>()
        } else {
            let num: f64 = (1..x.len()).filter(|&k| k != j).map(|k| x[0] - x[k]).product();
            let den: f64 = (0..x.len()).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
            num / den
        };
        s += y[j] * dl;
    }
    if s * d0 <= 0.0 {
        0.0
    } else {
        s.clamp(-3.0 * d0.abs(), 3.0 * d0.abs())
    }
}

/// Solves the mode at each width (in parallel) and tabulates `n_eff`.
///
/// Every width is solved on one grid: `spacing`'s cell sizes in the
/// smallest window admissible for the widest core.
pub fn sweep_neff(base: &WaveguideGeometry, widths_nm: &[f64], spacing: &ModeGrid) -> Result<NeffTable, PhotonicsError> {
    let widest = widths_nm.iter().cloned().fold(f64::NAN, f64::max);
    let grid = ModeGrid {
        dx_nm: spacing.dx_nm,
        dy_nm: spacing.dy_nm,
        ..ModeGrid::auto(&base.with_width(widest), spacing.dx_nm)
    };
    let rows = widths_nm
        .par_iter()
        .map(|&w| solve_scalar_mode(&base.with_width(w), &grid).map(|m| (w, m.n_eff)))
        .collect::<Result<Vec<_>, _>>()?;
    NeffTable::new(rows)
}

/// Parses `width_nm,n_eff` rows. A header line and `#` comments are
/// skipped; commas or whitespace separate the columns.
pub fn read_neff_table(text: &str) -> Result<NeffTable, PhotonicsError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if rows.is_empty() && cols.iter().any(|c| c.parse::<f64>().is_err()) && cols.iter().any(|c| c.contains("width")) {
            continue;
        }
        if cols.len() != 2 {
            return Err(PhotonicsError::Parse {
                line: lineno,
                msg: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| PhotonicsError::Parse {
                line: lineno,
                msg: format!("{s:?}: {e}"),
            })
        };
        rows.push((parse(cols[0])?, parse(cols[1])?));
    }
    NeffTable::new(rows)
}

pub fn write_neff_table(table: &NeffTable) -> String {
    let mut s = String::from("width_nm,n_eff\n");
    for (w, n) in table.widths_nm.iter().zip(&table.n_eff) {
        let _ = writeln!(s, "{w},{n}");
    }
    s
}
