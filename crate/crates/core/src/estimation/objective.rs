use serde::{Deserialize, Serialize};

use super::EstimationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ObjectiveKind {
    /// Poisson likelihood ratio, twice the negative log.
    Mle,
    /// Neyman-weighted least squares.
    Ls,
}

/// Bin weighting for least squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LsWeights {
    /// `1 / y_i`, zero bins excluded.
    Neyman,
    /// Unit weights, for non-count data.
    Uniform,
}

/// `2 sum(f - y) - 2 sum_{y != 0} y ln(f / y)`.
///
/// Returns `+inf` when `f_i <= 0` at a bin with counts or `f_i < 0` anywhere.
pub fn chi2_mle(y: &[f64], f: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&yi, &fi) in y.iter().zip(f) {
        s += mle_term(yi, fi);
    }
    s
}

#[inline]
pub(crate) fn mle_term(y: f64, f: f64) -> f64 {
    if y > 0.0 {
        if f > 0.0 {
            2.0 * (f - y) - 2.0 * y * (f / y).ln()
        } else {
            f64::INFINITY
        }
    } else if f >= 0.0 {
        2.0 * f
    } else {
        f64::INFINITY
    }
}

/// Least-squares value with the number of bins skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsValue {
    pub value: f64,
    pub skipped: usize,
}

/// `sum (y - f)^2 / y` over bins with `y > 0`; zero bins are skipped and
/// counted.
pub fn chi2_ls(y: &[f64], f: &[f64]) -> Result<LsValue, EstimationError> {
    let mut value = 0.0;
    let mut skipped = 0;
    for (&yi, &fi) in y.iter().zip(f) {
        if yi > 0.0 {
            value += (yi - fi) * (yi - fi) / yi;
        } else {
            skipped += 1;
        }
    }
    if skipped == y.len() {
        return Err(EstimationError::UndefinedObjective);
    }
    Ok(LsValue { value, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mle_examples() {
        assert_eq!(chi2_mle(&[3.0, 7.0], &[3.0, 7.0]), 0.0);
        assert_eq!(chi2_mle(&[0.0], &[3.0]), 6.0);
        let v = chi2_mle(&[2.0], &[1.0]);
        assert!((v - (-2.0 + 4.0 * 2f64.ln())).abs() < 1e-15);
        assert!((v - 0.772_588_722_239_781).abs() < 1e-12);
        assert_eq!(chi2_mle(&[2.0], &[0.0]), f64::INFINITY);
        assert_eq!(chi2_mle(&[0.0], &[-0.1]), f64::INFINITY);
    }

    #[test]
    fn ls_examples() {
        assert_eq!(chi2_ls(&[4.0], &[4.0]).unwrap().value, 0.0);
        assert_eq!(chi2_ls(&[4.0], &[2.0]).unwrap().value, 1.0);
        let v = chi2_ls(&[4.0, 0.0, 9.0], &[2.0, 1.0, 9.0]).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.skipped, 1);
        assert!(matches!(chi2_ls(&[0.0, 0.0], &[1.0, 1.0]), Err(EstimationError::UndefinedObjective)));
    }

    proptest! {
        #[test]
        fn mle_non_negative(pairs in proptest::collection::vec((0u32..50, 0.01f64..60.0), 1..40)) {
            let y: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let f: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            prop_assert!(chi2_mle(&y, &f) >= -1e-12);
        }

        #[test]
        fn mle_zero_only_at_perfect_fit(y in proptest::collection::vec(1u32..50, 1..20), k in 0usize..20, d in 0.01f64..3.0) {
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            prop_assert_eq!(chi2_mle(&y, &y), 0.0);
            let mut f = y.clone();
            let k = k % f.len();
            f[k] += d;
            prop_assert!(chi2_mle(&y, &f) > 0.0);
        }
    }
}
