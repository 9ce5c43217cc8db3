//! Power coupling between transverse fields.

use crate::mode::{ModeSolution, TransverseField};
use crate::{check_positive, PhotonicsError};

/// `|<E1, E2>|² / (<E1, E1> <E2, E2>)` for two fields on the same grid.
pub fn overlap(a: &TransverseField, b: &TransverseField) -> Result<f64, PhotonicsError> {
    if a.nx != b.nx || a.ny != b.ny || a.dx_nm != b.dx_nm || a.dy_nm != b.dy_nm {
        return Err(PhotonicsError::Invalid("fields are on different grids".into()));
    }
    let ab: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    let aa: f64 = a.values.iter().map(|x| x * x).sum();
    let bb: f64 = b.values.iter().map(|x| x * x).sum();
    if !(aa > 0.0 && bb > 0.0) {
        return Err(PhotonicsError::ZeroPower);
    }
    Ok((ab * ab / (aa * bb)).min(1.0))
}

/// `exp(-r² / w0²)` with `w0 = mfd / 2` on the grid of `like`.
pub fn gaussian_field(mfd_um: f64, like: &TransverseField) -> Result<TransverseField, PhotonicsError> {
    check_positive("mode-field diameter", mfd_um)?;
    let w0 = 0.5e3 * mfd_um;
    let mut g = like.clone();
    for i in 0..g.nx {
        for j in 0..g.ny {
            let r2 = g.x(i).powi(2) + g.y(j).powi(2);
            g.values[i * g.ny + j] = (-r2 / (w0 * w0)).exp();
        }
    }
    Ok(g)
}

/// Overlap of a mode with a centred Gaussian beam of the given mode-field
/// diameter.
///
/// The Gaussian's norm is taken over the whole plane, so a window that
/// clips the beam lowers the result rather than inflating it.
pub fn mode_overlap(mode: &ModeSolution, mfd_um: f64) -> Result<f64, PhotonicsError> {
    let f = &mode.field;
    let g = gaussian_field(mfd_um, f)?;
    let w0 = 0.5e3 * mfd_um;
    let da = 4.0 * f.dx_nm * f.dy_nm;
    let fg: f64 = da * f.values.iter().zip(&g.values).map(|(x, y)| x * y).sum::<f64>();
    let ff = f.power();
    if !(ff > 0.0) {
        return Err(PhotonicsError::ZeroPower);
    }
    let gg = 0.5 * std::f64::consts::PI * w0 * w0;
    Ok((fg * fg / (ff * gg)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn canvas(h: f64, n: usize) -> TransverseField {
        TransverseField {
            dx_nm: h,
            dy_nm: h,
            nx: n,
            ny: n,
            values: vec![0.0; n * n],
        }
    }

    #[test]
    fn self_overlap_is_one() {
        let g = gaussian_field(2.5, &canvas(50.0, 120)).unwrap();
        assert!((overlap(&g, &g).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_is_an_error() {
        let c = canvas(10.0, 4);
        assert_eq!(overlap(&c, &c), Err(PhotonicsError::ZeroPower));
    }

    proptest! {
        #[test]
        fn gaussians_match_closed_form(a in 0.5f64..3.0, b in 0.5f64..3.0) {
            // window 12 um wide, 25 nm cells
            let c = canvas(25.0, 240);
            let (ga, gb) = (gaussian_field(a, &c).unwrap(), gaussian_field(b, &c).unwrap());
            let want = (2.0 * a * b / (a * a + b * b)).powi(2);
            let got = overlap(&ga, &gb).unwrap();
            prop_assert!((got - want).abs() < 1e-9, "{} {}", got, want);
            prop_assert!((overlap(&gb, &ga).unwrap() - got).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&got));
        }
    }
}
