//! Bin-integrated two-sided exponential convolved with a Voigt kernel.
//!
//! No closed form exists, so the convolution is carried out on a fine grid
//! of `m` cells per histogram bin (m odd, so that bin edges coincide with
//! cell edges). Cell masses of both factors are exact integrals, the
//! discrete convolution runs through an FFT, and the bin mass at offset
//! `u_n = n h` is the sum of the `m` cells covering the bin. Arbitrary
//! offsets are interpolated with a four-point cubic.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::shapes::two_sided_exp_bin_mass;
use super::voigt::{voigt_bin_mass, VoigtIrf};
use super::ModelError;

/// Decay lengths of padding added beyond the evaluated span.
pub const DEFAULT_PAD_DECAY_LENGTHS: f64 = 10.0;

const MIN_OVERSAMPLE: usize = 9;
// Fine cells per decay length; keeps the discretization error near 1e-5.
const CELLS_PER_DECAY: f64 = 40.0;

#[derive(Debug, Clone)]
pub struct PeakProfile {
    rate: f64,
    irf: VoigtIrf,
    bin_width: f64,
    h: f64,
    oversample: usize,
    // table[i] holds the bin mass at offset (i - half) * h
    half: usize,
    table: Vec<f64>,
}

/// Precomputed kernel spectrum for building profiles at several decay rates
/// on the same grid.
#[derive(Clone)]
pub struct ProfileBuilder {
    irf: VoigtIrf,
    bin_width: f64,
    m: usize,
    h: f64,
    half: usize,
    cells: usize,
    kernel: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ProfileBuilder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProfileBuilder")
            .field("irf", &self.irf)
            .field("bin_width", &self.bin_width)
            .field("oversample", &self.m)
            .field("half", &self.half)
            .finish()
    }
}

impl ProfileBuilder {
    /// Grid and kernel good for every rate in `[rate_lo, rate_hi]` and offsets
    /// up to `span`.
    pub fn new(irf: &VoigtIrf, bin_width: f64, span: f64, rate_lo: f64, rate_hi: f64) -> Result<Self, ModelError> {
        super::check_positive("decay_rate", rate_lo)?;
        super::check_positive("decay_rate", rate_hi)?;
        super::check_positive("bin_width", bin_width)?;
        super::check_non_negative("span", span)?;
        irf.validate()?;
        let irf = irf.as_kernel();

        let mut m = MIN_OVERSAMPLE.max((CELLS_PER_DECAY * bin_width * rate_hi).ceil() as usize);
        if m % 2 == 0 {
            m += 1;
        }
        let h = bin_width / m as f64;
        let pad = DEFAULT_PAD_DECAY_LENGTHS / rate_lo + 10.0 * irf.fwhm() + bin_width;
        let half = ((span + pad) / h).ceil() as usize;
        // cells needed to cover every bin in the table
        let cells = half + m / 2 + 1;
        let n = 2 * cells + 1;
        let len = (2 * n - 1).next_power_of_two();

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let mut kernel = vec![Complex64::new(0.0, 0.0); len];
        for (j, k) in kernel.iter_mut().take(n).enumerate() {
            let x = (j as f64 - cells as f64) * h;
            k.re = voigt_bin_mass(x - 0.5 * h, x + 0.5 * h, &irf);
        }
        fwd.process(&mut kernel);
        Ok(Self {
            irf,
            bin_width,
            m,
            h,
            half,
            cells,
            kernel,
            fwd,
            inv,
        })
    }

    pub fn build(&self, rate: f64) -> Result<PeakProfile, ModelError> {
        super::check_positive("decay_rate", rate)?;
        let (h, cells, m) = (self.h, self.cells, self.m);
        let n = 2 * cells + 1;
        let len = self.kernel.len();
        let mut e = vec![Complex64::new(0.0, 0.0); len];
        for (j, v) in e.iter_mut().take(n).enumerate() {
            let x = (j as f64 - cells as f64) * h;
            v.re = two_sided_exp_bin_mass(x - 0.5 * h, x + 0.5 * h, 0.0, rate);
        }
        self.fwd.process(&mut e);
        for (x, y) in e.iter_mut().zip(&self.kernel) {
            *x *= *y;
        }
        self.inv.process(&mut e);
        let scale = 1.0 / len as f64;
        // Both inputs start at cell -cells, so the product starts at -2 cells.
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in &e[cells..cells + n] {
            acc += (v.re * scale).max(0.0);
            prefix.push(acc);
        }
        let r = m / 2;
        let half = self.half;
        let table = (0..=2 * half)
            .map(|i| {
                let c = i + cells - half;
                (prefix[c + r + 1] - prefix[c - r]).max(0.0)
            })
            .collect();
        Ok(PeakProfile {
            rate,
            irf: self.irf,
            bin_width: self.bin_width,
            h,
            oversample: m,
            half,
            table,
        })
    }
}

impl PeakProfile {
    /// Tabulates the unit-area bin mass for offsets `|u| <= span` plus
    /// padding.
    pub fn new(rate: f64, irf: &VoigtIrf, bin_width: f64, span: f64) -> Result<Self, ModelError> {
        ProfileBuilder::new(irf, bin_width, span, rate, rate)?.build(rate)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    /// Largest offset covered by the table.
    pub fn reach(&self) -> f64 {
        (self.half - 1) as f64 * self.h
    }

    /// Mass of the unit-area peak inside a bin whose center lies `u` from
    /// the peak center.
    pub fn bin_mass(&self, u: f64) -> f64 {
        let x = u / self.h + self.half as f64;
        let i = x.floor();
        if i < 1.0 || i + 2.0 >= self.table.len() as f64 {
            // beyond the table only the kernel's Lorentzian tail survives
            return if self.irf.gamma > 0.0 {
                self.bin_width * self.irf.density(u)
            } else {
                0.0
            };
        }
        let t = x - i;
        let i = i as usize;
        let (p0, p1, p2, p3) = (
            self.table[i - 1],
            self.table[i],
            self.table[i + 1],
            self.table[i + 2],
        );
        let v = p1
            + 0.5
                * t
                * (p2 - p0
                    + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
        v.max(0.0)
    }
}
