//! Source efficiency from a detected rate and a chain of transmissions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{check_positive, PhotonicsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossFactor {
    pub name: String,
    pub transmission: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBudget {
    pub detected_rate_hz: f64,
    pub repetition_rate_hz: f64,
    pub losses: Vec<LossFactor>,
    /// `detected / (repetition * Π transmissions)`.
    pub eta_sp: f64,
}

impl LossBudget {
    /// Detected photons per pulse before any loss correction.
    pub fn raw_probability(&self) -> f64 {
        self.detected_rate_hz / self.repetition_rate_hz
    }

    pub fn render(&self) -> String {
        let mut s = format!("detected per pulse  {:.6}\n", self.raw_probability());
        for f in &self.losses {
            let _ = writeln!(s, "{:<20}{:.4}", f.name, f.transmission);
        }
        let _ = writeln!(s, "eta_sp              {:.4}", self.eta_sp);
        s
    }
}

pub fn loss_budget(detected_rate_hz: f64, repetition_rate_hz: f64, losses: &[(String, f64)]) -> Result<LossBudget, PhotonicsError> {
    check_positive("detected rate", detected_rate_hz)?;
    check_positive("repetition rate", repetition_rate_hz)?;
    for (name, t) in losses {
        if !(*t > 0.0 && *t <= 1.0) {
            return Err(PhotonicsError::Invalid(format!("transmission {name} = {t} outside (0, 1]")));
        }
    }
    let product: f64 = losses.iter().map(|l| l.1).product();
    Ok(LossBudget {
        detected_rate_hz,
        repetition_rate_hz,
        losses: losses
            .iter()
            .map(|(name, t)| LossFactor {
                name: name.clone(),
                transmission: *t,
            })
            .collect(),
        eta_sp: detected_rate_hz / (repetition_rate_hz * product),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain(ts: &[f64]) -> Vec<(String, f64)> {
        ts.iter().enumerate().map(|(i, &t)| (format!("t{i}"), t)).collect()
    }

    #[test]
    fn examples() {
        let b = loss_budget(76e6, 76e6, &chain(&[1.0, 1.0])).unwrap();
        assert_eq!(b.eta_sp, 1.0);
        let b = loss_budget(1e6, 76e6, &chain(&[0.26, 0.30, 0.79, 0.79])).unwrap();
        let direct = 1.0 / 76.0 / (0.26 * 0.30 * 0.79 * 0.79);
        assert!((b.eta_sp - direct).abs() < 1e-15);
        assert!((b.eta_sp - 0.270).abs() < 5e-4);
        let empty = loss_budget(1e6, 76e6, &[]).unwrap();
        assert_eq!(empty.eta_sp, empty.raw_probability());
        assert!(loss_budget(1e6, 76e6, &chain(&[1.2])).is_err());
        assert!(loss_budget(1e6, 76e6, &chain(&[0.0])).is_err());
    }

    proptest! {
        #[test]
        fn removing_a_factor(ts in proptest::collection::vec(0.01f64..=1.0, 1..6), k in 0usize..6) {
            let k = k % ts.len();
            let full = loss_budget(1e6, 76e6, &chain(&ts)).unwrap();
            let mut fewer = ts.clone();
            let t = fewer.remove(k);
            let part = loss_budget(1e6, 76e6, &chain(&fewer)).unwrap();
            prop_assert!((part.eta_sp / (full.eta_sp * t) - 1.0).abs() < 1e-12);
        }
    }
}
