//! Closed-form unit-area peak shapes and their bin integrals.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rustfft::num_complex::Complex64;

use super::voigt::faddeeva;

/// Two-sided exponential `(rate/2) exp(-rate |t - center|)`, unit area.
pub fn eval_two_sided_exp(t: f64, center: f64, rate: f64) -> f64 {
    0.5 * rate * (-rate * (t - center).abs()).exp()
}

/// Mass of the two-sided exponential on `[a, b]`.
pub fn two_sided_exp_bin_mass(a: f64, b: f64, center: f64, rate: f64) -> f64 {
    // CDF(x) = 0.5 e^{rate x} for x < 0, 1 - 0.5 e^{-rate x} otherwise.
    let (a, b) = (a - center, b - center);
    if b <= 0.0 {
        0.5 * ((rate * b).exp() - (rate * a).exp())
    } else if a >= 0.0 {
        0.5 * ((-rate * a).exp() - (-rate * b).exp())
    } else {
        1.0 - 0.5 * (rate * a).exp() - 0.5 * (-rate * b).exp()
    }
}

/// Unit-area Lorentzian with half-width at half-maximum `hwhm`.
pub fn lorentzian(t: f64, center: f64, hwhm: f64) -> f64 {
    let x = t - center;
    hwhm / (PI * (x * x + hwhm * hwhm))
}

/// Mass of the unit-area Lorentzian on `[a, b]`.
pub fn lorentzian_bin_mass(a: f64, b: f64, center: f64, hwhm: f64) -> f64 {
    let (a, b) = ((a - center) / hwhm, (b - center) / hwhm);
    // atan difference written to avoid cancellation in the far tails
    ((b - a) / (1.0 + a * b)).atan().abs() / PI
        + if a * b < -1.0 { 1.0 } else { 0.0 }
}

/// Complementary error function via `erfc(x) = exp(-x^2) w(ix)`.
pub(crate) fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        (-x * x).exp() * faddeeva(Complex64::new(0.0, x)).re
    } else {
        2.0 - erfc(-x)
    }
}

/// Mass of a zero-centered Gaussian with standard deviation `sigma` on `[a, b]`.
pub fn gaussian_bin_mass(a: f64, b: f64, sigma: f64) -> f64 {
    let (a, b) = (a / sigma * FRAC_1_SQRT_2, b / sigma * FRAC_1_SQRT_2);
    if a >= 0.0 {
        0.5 * (erfc(a) - erfc(b))
    } else if b <= 0.0 {
        0.5 * (erfc(-b) - erfc(-a))
    } else {
        1.0 - 0.5 * erfc(-a) - 0.5 * erfc(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sided_exp_values() {
        assert!((eval_two_sided_exp(0.3, 0.3, 2.0) - 1.0).abs() < 1e-15);
        let half = 2f64.ln() / 2.0;
        assert!((eval_two_sided_exp(0.3 + half, 0.3, 2.0) - 0.5).abs() < 1e-15);
        assert!((eval_two_sided_exp(0.3 - half, 0.3, 2.0) - 0.5).abs() < 1e-15);
        // 1.15 e^{-2.3} = 0.115297670...
        let v = eval_two_sided_exp(1.0, 0.0, 2.3);
        assert!((v - 0.115_297_670_281_224).abs() < 1e-14, "{v}");
    }

    #[test]
    fn two_sided_exp_mass_is_unit() {
        let total = two_sided_exp_bin_mass(-50.0, 50.0, 0.2, 2.3);
        assert!((total - 1.0).abs() < 1e-12);
        let split = two_sided_exp_bin_mass(-50.0, 0.7, 0.2, 2.3)
            + two_sided_exp_bin_mass(0.7, 50.0, 0.2, 2.3);
        assert!((split - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_mass() {
        assert!((lorentzian_bin_mass(-1.0, 1.0, 0.0, 1.0) - 0.5).abs() < 1e-14);
        assert!((lorentzian_bin_mass(-1e9, 1e9, 0.0, 1.0) - 1.0).abs() < 1e-8);
        assert!((lorentzian_bin_mass(-3.0, 5.0, 0.0, 0.5) - lorentzian_bin_mass(-5.0, 3.0, 0.0, 0.5)).abs() < 1e-14);
        let far = lorentzian_bin_mass(100.0, 101.0, 0.0, 1.0);
        assert!((far - (101f64.atan() - 100f64.atan()) / PI).abs() < 1e-15);
    }

    #[test]
    fn erfc_reference_values() {
        // erfc(0.5) = 0.4795001221869534, erfc(2) = 0.004677734981047266
        assert!((erfc(0.5) - 0.479_500_122_186_953_4).abs() < 1e-14);
        assert!((erfc(2.0) - 0.004_677_734_981_047_266).abs() < 1e-16);
        assert!((erfc(-1.0) - 1.842_700_792_949_715).abs() < 1e-14);
    }

    #[test]
    fn gaussian_mass() {
        assert!((gaussian_bin_mass(-1.0, 1.0, 1.0) - 0.682_689_492_137_086).abs() < 1e-13);
        assert!((gaussian_bin_mass(-40.0, 40.0, 1e-4) - 1.0).abs() < 1e-15);
    }
}
