//! Scalar Helmholtz eigenproblem on a uniform rectangular grid.
//!
//! The fundamental mode is even in both transverse directions, so only the
//! quadrant `x, y >= 0` is discretized: mirror (zero-derivative) conditions on
//! the symmetry planes and a zero field one cell beyond the outer edges.

use serde::{Deserialize, Serialize};

use crate::band::BandCholesky;
use crate::geometry::WaveguideGeometry;
use crate::{check_positive, PhotonicsError};

/// Grid spacing and half-extent of the computational window, in nm.
///
/// The solver shrinks each spacing just enough for the core edges to fall on
/// cell faces, so `n_eff` varies smoothly with the core size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub dx_nm: f64,
    pub dy_nm: f64,
    pub half_x_nm: f64,
    pub half_y_nm: f64,
}

impl ModeGrid {
    /// Cells of 5 nm across the width and 2.5 nm across the thickness in the
    /// smallest admissible window.
    pub fn standard(geom: &WaveguideGeometry) -> Self {
        Self {
            dy_nm: 2.5,
            ..Self::auto(geom, 5.0)
        }
    }

    /// Square cells of side `h_nm` in the smallest admissible window.
    pub fn auto(geom: &WaveguideGeometry, h_nm: f64) -> Self {
        let half = 0.5 * Self::min_extent(geom, geom.width_nm.max(geom.thickness_nm));
        Self {
            dx_nm: h_nm,
            dy_nm: h_nm,
            half_x_nm: half,
            half_y_nm: half,
        }
    }

    /// Window side required around a core dimension `size_nm`.
    pub fn min_extent(geom: &WaveguideGeometry, size_nm: f64) -> f64 {
        (6.0 * size_nm).max(3.0 * geom.wavelength_nm)
    }

    pub fn nx(&self) -> usize {
        (self.half_x_nm / self.dx_nm).round() as usize
    }

    pub fn ny(&self) -> usize {
        (self.half_y_nm / self.dy_nm).round() as usize
    }

    /// Halves both spacings over the same window.
    pub fn refined(&self) -> Self {
        Self {
            dx_nm: 0.5 * self.dx_nm,
            dy_nm: 0.5 * self.dy_nm,
            ..*self
        }
    }

    fn validate(&self, geom: &WaveguideGeometry) -> Result<(), PhotonicsError> {
        check_positive("dx", self.dx_nm)?;
        check_positive("dy", self.dy_nm)?;
        let need_x = Self::min_extent(geom, geom.width_nm);
        let need_y = Self::min_extent(geom, geom.thickness_nm);
        if 2.0 * self.half_x_nm < need_x * (1.0 - 1e-12) || 2.0 * self.half_y_nm < need_y * (1.0 - 1e-12) {
            return Err(PhotonicsError::Invalid(format!(
                "window {} x {} nm is smaller than the required {need_x} x {need_y} nm",
                2.0 * self.half_x_nm,
                2.0 * self.half_y_nm
            )));
        }
        if self.nx() < 2 || self.ny() < 2 {
            return Err(PhotonicsError::Invalid("grid needs at least two cells per axis".into()));
        }
        Ok(())
    }
}

/// Field sampled at cell centres `((i + 1/2) dx, (j + 1/2) dy)` of the first
/// quadrant and extended by mirror symmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseField {
    pub dx_nm: f64,
    pub dy_nm: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major in `x`: value `(i, j)` at `i * ny + j`.
    pub values: Vec<f64>,
}

impl TransverseField {
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx_nm
    }

    pub fn y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy_nm
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    /// `∫|E|² dA` over the full plane, in nm².
    pub fn power(&self) -> f64 {
        4.0 * self.dx_nm * self.dy_nm * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// Bilinear interpolation at `|x|, |y|`; zero outside the window.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let u = x.abs() / self.dx_nm - 0.5;
        let v = y.abs() / self.dy_nm - 0.5;
        let get = |i: isize, j: isize| -> f64 {
            // mirror across the symmetry planes
            let i = if i < 0 { -i - 1 } else { i } as usize;
            let j = if j < 0 { -j - 1 } else { j } as usize;
            if i >= self.nx || j >= self.ny {
                0.0
            } else {
                self.at(i, j)
            }
        };
        let (i0, j0) = (u.floor(), v.floor());
        let (fu, fv) = (u - i0, v - j0);
        let (i0, j0) = (i0 as isize, j0 as isize);
        (1.0 - fu) * (1.0 - fv) * get(i0, j0)
            + fu * (1.0 - fv) * get(i0 + 1, j0)
            + (1.0 - fu) * fv * get(i0, j0 + 1)
            + fu * fv * get(i0 + 1, j0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub geometry: WaveguideGeometry,
    pub grid: ModeGrid,
    pub n_eff: f64,
    /// Normalized to unit power, positive at the centre.
    pub field: TransverseField,
    pub iterations: usize,
}

/// Area fraction of cell `[c - h/2, c + h/2]` inside `[0, a]`.
fn fill(c: f64, h: f64, a: f64) -> f64 {
    ((c + 0.5 * h).min(a) - (c - 0.5 * h).max(0.0)).clamp(0.0, h) / h
}

struct Operator {
    nx: usize,
    ny: usize,
    /// Relative permittivity per cell.
    eps: Vec<f64>,
    cx: f64,
    cy: f64,
}

impl Operator {
    /// `(M v)_p` with `M = ∇²/k0² + n²`.
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        for i in 0..nx {
            for j in 0..ny {
                let p = i * ny + j;
                let c = v[p];
                let xm = if i == 0 { c } else { v[p - ny] };
                let xp = if i + 1 == nx { 0.0 } else { v[p + ny] };
                let ym = if j == 0 { c } else { v[p - 1] };
                let yp = if j + 1 == ny { 0.0 } else { v[p + 1] };
                out[p] = self.cx * (xm - 2.0 * c + xp) + self.cy * (ym - 2.0 * c + yp) + self.eps[p] * c;
            }
        }
    }

    /// Band entries of `sigma I - M`.
    fn shifted(&self, sigma: f64) -> impl Fn(usize, usize) -> f64 + '_ {
        move |p: usize, k: usize| {
            let (i, j) = (p / self.ny, p % self.ny);
            match k {
                0 => {
                    let dx = if i == 0 { 1.0 } else { 2.0 };
                    let dy = if j == 0 { 1.0 } else { 2.0 };
                    sigma - self.eps[p] + self.cx * dx + self.cy * dy
                }
                1 if j > 0 => -self.cy,
                k if k == self.ny => -self.cx,
                _ => 0.0,
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fundamental mode by shifted inverse iteration.
///
/// The shift starts at `n_core²`, above the whole spectrum, and is moved
/// just above the current Rayleigh quotient once that has settled.
pub fn solve_scalar_mode(geom: &WaveguideGeometry, grid: &ModeGrid) -> Result<ModeSolution, PhotonicsError> {
    geom.validate()?;
    grid.validate(geom)?;
    if grid.ny() <= grid.nx() {
        return solve_oriented(geom, grid);
    }
    // keep the bandwidth equal to the shorter axis
    let swapped = WaveguideGeometry {
        width_nm: geom.thickness_nm,
        thickness_nm: geom.width_nm,
        ..*geom
    };
    let sgrid = ModeGrid {
        dx_nm: grid.dy_nm,
        dy_nm: grid.dx_nm,
        half_x_nm: grid.half_y_nm,
        half_y_nm: grid.half_x_nm,
    };
    let t = solve_oriented(&swapped, &sgrid).map_err(|e| match e {
        PhotonicsError::Cutoff { n_eff, .. } => PhotonicsError::Cutoff {
            width_nm: geom.width_nm,
            n_eff,
        },
        e => e,
    })?;
    let f = &t.field;
    let mut values = vec![0.0; f.values.len()];
    for i in 0..f.nx {
        for j in 0..f.ny {
            values[j * f.nx + i] = f.at(i, j);
        }
    }
    Ok(ModeSolution {
        geometry: *geom,
        grid: *grid,
        n_eff: t.n_eff,
        field: TransverseField {
            dx_nm: f.dy_nm,
            dy_nm: f.dx_nm,
            nx: f.ny,
            ny: f.nx,
            values,
        },
        iterations: t.iterations,
    })
}

/// Largest spacing not above `d` that puts the core edge `a` on a cell face,
/// and the cell count covering `half`.
fn snap(a: f64, d: f64, half: f64) -> (f64, usize) {
    let d = a / (a / d).ceil();
    (d, (half / d).ceil() as usize)
}

/// Cell count above which the first shift comes from a coarser grid.
const COARSE_START: usize = 40_000;

fn solve_oriented(geom: &WaveguideGeometry, grid: &ModeGrid) -> Result<ModeSolution, PhotonicsError> {
    let (dx, nx) = snap(0.5 * geom.width_nm, grid.dx_nm, grid.half_x_nm);
    let (dy, ny) = snap(0.5 * geom.thickness_nm, grid.dy_nm, grid.half_y_nm);
    let k0 = geom.k0();
    let (nc2, ncl2) = (geom.n_core * geom.n_core, geom.n_clad * geom.n_clad);
    let mut eps = vec![0.0; nx * ny];
    for i in 0..nx {
        let fx = fill((i as f64 + 0.5) * dx, dx, 0.5 * geom.width_nm);
        for j in 0..ny {
            let fy = fill((j as f64 + 0.5) * dy, dy, 0.5 * geom.thickness_nm);
            eps[i * ny + j] = ncl2 + (nc2 - ncl2) * fx * fy;
        }
    }
    let op = Operator {
        nx,
        ny,
        eps,
        cx: 1.0 / (k0 * dx).powi(2),
        cy: 1.0 / (k0 * dy).powi(2),
    };
    let n = nx * ny;

    let mut v: Vec<f64> = op.eps.iter().map(|e| e - ncl2 + 1e-3).collect();
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut mv = vec![0.0; n];
    // a coarse solve places the first shift near the answer, saving a
    // factorization of the large operator
    let coarse = ModeGrid {
        dx_nm: 2.0 * grid.dx_nm,
        dy_nm: 2.0 * grid.dy_nm,
        ..*grid
    };
    let first = (n > COARSE_START)
        .then(|| solve_oriented(geom, &coarse).ok())
        .flatten()
        .map(|c| {
            let l = c.n_eff * c.n_eff;
            l + 0.1 * (nc2 - l)
        })
        .and_then(|s| BandCholesky::factor(n, ny, op.shifted(s)).map(|f| (s, f)));
    let (mut sigma, mut fac) = match first {
        Some(sf) => sf,
        None => (
            nc2,
            BandCholesky::factor(n, ny, op.shifted(nc2))
                .ok_or_else(|| PhotonicsError::NoConvergence("operator is not bounded by n_core²".into()))?,
        ),
    };
    let mut lam = f64::NAN;
    let mut res = f64::INFINITY;
    let mut since_shift = 0usize;
    let mut iterations = 0usize;
    let converged = loop {
        if iterations >= 2000 {
            break false;
        }
        iterations += 1;
        since_shift += 1;
        fac.solve(&mut v);
        let nv = dot(&v, &v).sqrt();
        if !(nv > 0.0 && nv.is_finite()) {
            return Err(PhotonicsError::NoConvergence("iterate vanished".into()));
        }
        v.iter_mut().for_each(|x| *x /= nv);
        op.apply(&v, &mut mv);
        let prev = lam;
        lam = dot(&v, &mv);
        let prev_res = res;
        res = mv.iter().zip(&v).map(|(m, x)| (m - lam * x).powi(2)).sum::<f64>().sqrt();
        if res < 1e-11 * lam.abs() {
            break true;
        }
        let change = (lam - prev).abs();
        // re-shift once the Rayleigh quotient has stabilized, unless the
        // residual is already collapsing
        if since_shift >= 4 && change < 1e-4 * (sigma - lam) && res > 0.3 * prev_res {
            let mut margin = (1e3 * change).max(1e-12 * lam.abs()).max(res);
            loop {
                if lam + margin >= sigma {
                    break;
                }
                if let Some(f) = BandCholesky::factor(n, ny, op.shifted(lam + margin)) {
                    fac = f;
                    sigma = lam + margin;
                    since_shift = 0;
                    break;
                }
                margin *= 10.0;
            }
        }
    };
    if !converged {
        return Err(PhotonicsError::NoConvergence(format!("{iterations} inverse iterations")));
    }

    let n_eff = lam.max(0.0).sqrt();
    if !(n_eff > geom.n_clad + 1e-6) {
        return Err(PhotonicsError::Cutoff {
            width_nm: geom.width_nm,
            n_eff,
        });
    }
    if v[0] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let mut field = TransverseField {
        dx_nm: dx,
        dy_nm: dy,
        nx,
        ny,
        values: v,
    };
    let p = field.power();
    field.values.iter_mut().for_each(|x| *x /= p.sqrt());
    Ok(ModeSolution {
        geometry: *geom,
        grid: *grid,
        n_eff,
        field,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (WaveguideGeometry, ModeGrid) {
        let g = WaveguideGeometry::gaas(300.0);
        (g, ModeGrid::auto(&g, 20.0))
    }

    #[test]
    fn bounds_and_normalization() {
        let (g, grid) = small();
        let m = solve_scalar_mode(&g, &grid).unwrap();
        assert!(m.n_eff > g.n_clad && m.n_eff < g.n_core, "{}", m.n_eff);
        assert!((m.field.power() - 1.0).abs() < 1e-9);
        assert!(m.field.at(0, 0) > 0.0);
        assert!(m.field.values.iter().all(|&v| v >= -1e-12), "fundamental mode has no node");
    }

    #[test]
    fn eigen_residual_matches_operator() {
        let (g, grid) = small();
        let m = solve_scalar_mode(&g, &grid).unwrap();
        // direct Rayleigh quotient with an independently assembled 5-point stencil
        let (nx, ny) = (m.field.nx, m.field.ny);
        let (dx, dy) = (m.field.dx_nm, m.field.dy_nm);
        let k0 = g.k0();
        let e = |i: isize, j: isize| -> f64 {
            let i = if i < 0 { 0 } else { i as usize };
            let j = if j < 0 { 0 } else { j as usize };
            if i >= nx || j >= ny {
                0.0
            } else {
                m.field.at(i, j)
            }
        };
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..nx as isize {
            for j in 0..ny as isize {
                let c = e(i, j);
                let lap = (e(i - 1, j) - 2.0 * c + e(i + 1, j)) / (dx * dx) + (e(i, j - 1) - 2.0 * c + e(i, j + 1)) / (dy * dy);
                let x = (i as f64 + 0.5) * dx;
                let y = (j as f64 + 0.5) * dy;
                let fx = fill(x, dx, 150.0);
                let fy = fill(y, dy, 80.0);
                let n2 = 1.0 + (3.4f64.powi(2) - 1.0) * fx * fy;
                num += c * (lap / (k0 * k0) + n2 * c);
                den += c * c;
            }
        }
        assert!((num / den - m.n_eff * m.n_eff).abs() < 1e-9);
    }

    #[test]
    fn rejects_small_window() {
        let g = WaveguideGeometry::gaas(300.0);
        let grid = ModeGrid {
            half_x_nm: 500.0,
            ..ModeGrid::auto(&g, 20.0)
        };
        assert!(matches!(solve_scalar_mode(&g, &grid), Err(PhotonicsError::Invalid(_))));
    }

    #[test]
    fn sample_mirrors_and_interpolates() {
        let f = TransverseField {
            dx_nm: 1.0,
            dy_nm: 1.0,
            nx: 2,
            ny: 2,
            values: vec![1.0, 2.0, 3.0, 4.0],
        };
        assert_eq!(f.sample(0.5, 0.5), 1.0);
        assert_eq!(f.sample(-1.5, 0.5), 3.0);
        assert_eq!(f.sample(1.0, 0.5), 2.0);
        assert_eq!(f.sample(5.0, 0.5), 0.0);
    }
}
