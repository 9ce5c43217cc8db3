//! Visibility limited by pure dephasing and timing jitter.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Rates in 1/ns. `gamma_jitter` may be infinite (no jitter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub gamma_rad: f64,
    pub gamma_ph: f64,
    pub gamma_jitter: f64,
}

impl RateModel {
    pub fn new(gamma_rad: f64, gamma_ph: f64, gamma_jitter: f64) -> Result<Self, AnalysisError> {
        let m = Self {
            gamma_rad,
            gamma_ph,
            gamma_jitter,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.gamma_rad > 0.0 && self.gamma_rad.is_finite()) {
            return Err(AnalysisError::Invalid(format!("gamma_rad must be > 0, got {}", self.gamma_rad)));
        }
        if !(self.gamma_ph >= 0.0 && self.gamma_ph.is_finite()) {
            return Err(AnalysisError::Invalid(format!("gamma_ph must be >= 0, got {}", self.gamma_ph)));
        }
        if !(self.gamma_jitter > 0.0) {
            return Err(AnalysisError::Invalid(format!(
                "gamma_jitter must be > 0, got {}",
                self.gamma_jitter
            )));
        }
        Ok(())
    }
}

/// `V = G_rad / [(G_rad + G_ph)(1 + G_rad / G_jitter)]`.
pub fn visibility_theory(rates: &RateModel) -> Result<f64, AnalysisError> {
    rates.validate()?;
    let g = rates.gamma_rad;
    Ok(g / ((g + rates.gamma_ph) * (1.0 + g / rates.gamma_jitter)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterInversion {
    pub gamma_jitter: f64,
    /// `V` equals the dephasing-only limit, so no finite jitter rate fits.
    pub unbounded: bool,
}

/// Solves the visibility model for `G_jitter` given a measured `V`.
pub fn invert_jitter(v: f64, gamma_rad: f64, gamma_ph: f64) -> Result<JitterInversion, AnalysisError> {
    RateModel::new(gamma_rad, gamma_ph, f64::INFINITY)?;
    let limit = gamma_rad / (gamma_rad + gamma_ph);
    if !(v > 0.0 && v <= limit) {
        return Err(AnalysisError::Infeasible(format!(
            "visibility {v} outside (0, {limit}] reachable with gamma_ph = {gamma_ph}"
        )));
    }
    let excess = limit / v - 1.0;
    if excess <= 0.0 {
        return Ok(JitterInversion {
            gamma_jitter: f64::INFINITY,
            unbounded: true,
        });
    }
    Ok(JitterInversion {
        gamma_jitter: gamma_rad / excess,
        unbounded: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let v = visibility_theory(&RateModel::new(2.3, 0.0, f64::INFINITY).unwrap()).unwrap();
        assert_eq!(v, 1.0);
        let v = visibility_theory(&RateModel::new(2.3, 0.0, 3.7).unwrap()).unwrap();
        assert!((v - 3.7 / 6.0).abs() < 1e-15);
        let gph: f64 = 2.3 * (1.0 / 0.94 - 1.0);
        assert!((gph - 0.146_808_510_638_297_9).abs() < 1e-12);
        let v = visibility_theory(&RateModel::new(2.3, gph, f64::INFINITY).unwrap()).unwrap();
        assert!((v - 0.94).abs() < 1e-14);
    }

    #[test]
    fn inversion_examples() {
        let j = invert_jitter(0.6167, 2.3, 0.0).unwrap();
        assert!((j.gamma_jitter - 3.70).abs() < 0.01, "{j:?}");
        let edge = invert_jitter(1.0, 2.3, 0.0).unwrap();
        assert!(edge.unbounded && edge.gamma_jitter.is_infinite());
        assert!(matches!(invert_jitter(0.99, 2.3, 0.1468), Err(AnalysisError::Infeasible(_))));
        assert!(invert_jitter(0.0, 2.3, 0.0).is_err());
    }

    #[test]
    fn inversion_matches_bracketing_scan() {
        let (v, g, ph) = (0.58, 2.3, 0.1468);
        let f = |j: f64| visibility_theory(&RateModel::new(g, ph, j).unwrap()).unwrap() - v;
        let (mut lo, mut hi) = (1e-3, 1e4);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let j = invert_jitter(v, g, ph).unwrap().gamma_jitter;
        assert!(j.is_finite() && j > 0.0);
        assert!((j / lo - 1.0).abs() < 1e-9, "{j} {lo}");
    }

    #[test]
    fn monotone_on_grid() {
        // 1000 points: 10 x 10 x 10
        for i in 0..10 {
            let g = 0.5 + 0.4 * i as f64;
            for k in 0..10 {
                let j = 0.5 + 1.1 * k as f64;
                let mut prev = f64::INFINITY;
                for p in 0..10 {
                    let ph = 0.05 * p as f64;
                    let v = visibility_theory(&RateModel::new(g, ph, j).unwrap()).unwrap();
                    assert!(v < prev);
                    prev = v;
                    let v2 = visibility_theory(&RateModel::new(g, ph, j * 1.01).unwrap()).unwrap();
                    assert!(v2 > v);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(g in 0.1f64..10.0, ph in 0.0f64..3.0, j in 0.1f64..50.0) {
            let v = visibility_theory(&RateModel::new(g, ph, j).unwrap()).unwrap();
            let back = invert_jitter(v, g, ph).unwrap().gamma_jitter;
            prop_assert!((back / j - 1.0).abs() < 1e-10, "{} {}", back, j);
        }
    }
}
