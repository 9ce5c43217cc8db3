//! Bounded Nelder-Mead.
//!
//! Each coordinate lives on the unit interval and is reached through
//! `u = (sin z + 1) / 2`, so the simplex moves freely in `z` while every
//! evaluated point stays inside the box. Coefficients follow Gao and Han
//! (Comput. Optim. Appl. 51, 2012) for two or more dimensions.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Stop when `f_worst - f_best <= ftol_rel * |f_best| + ftol_abs`.
    pub ftol_rel: f64,
    pub ftol_abs: f64,
    pub max_evals: usize,
    /// Initial edge length in `z`.
    pub initial_step: f64,
    /// Fresh simplices built at the incumbent after convergence.
    pub max_restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            ftol_rel: 1e-9,
            ftol_abs: 1e-12,
            max_evals: 20_000,
            initial_step: 0.3,
            max_restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub u: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

fn to_u(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&z| 0.5 * (z.sin() + 1.0)).collect()
}

fn to_z(u: &[f64]) -> Vec<f64> {
    u.iter().map(|&u| (2.0 * u.clamp(0.0, 1.0) - 1.0).asin()).collect()
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, z: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(&to_u(z));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimizes `f` over the unit box starting from `u0`.
pub fn minimize_bounded<F: FnMut(&[f64]) -> f64>(f: F, u0: &[f64], opts: &SimplexOptions) -> SimplexOutcome {
    let n = u0.len();
    let mut cf = Counted { f, evals: 0 };
    let mut best_z = to_z(u0);
    let mut best = cf.eval(&best_z);
    if n == 0 {
        return SimplexOutcome {
            u: vec![],
            value: best,
            evals: cf.evals,
            converged: true,
        };
    }
    let mut converged = false;
    for restart in 0..=opts.max_restarts {
        let (z, v, conv) = run(&mut cf, &best_z, best, opts);
        let gain = best - v;
        let improved_enough = gain > opts.ftol_rel * v.abs() + opts.ftol_abs;
        if v <= best {
            best = v;
            best_z = z;
        }
        converged = conv;
        if !conv || cf.evals >= opts.max_evals || (restart > 0 && !improved_enough) {
            break;
        }
    }
    SimplexOutcome {
        u: to_u(&best_z),
        value: best,
        evals: cf.evals,
        converged,
    }
}

fn run<F: FnMut(&[f64]) -> f64>(
    cf: &mut Counted<F>,
    z0: &[f64],
    f0: f64,
    opts: &SimplexOptions,
) -> (Vec<f64>, f64, bool) {
    let n = z0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut pts: Vec<Vec<f64>> = vec![z0.to_vec()];
    let mut vals = vec![f0];
    for i in 0..n {
        let mut p = z0.to_vec();
        p[i] += opts.initial_step;
        vals.push(cf.eval(&p));
        pts.push(p);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        let (ib, iw, is) = (order[0], order[n], order[n - 1]);
        let spread = vals[iw] - vals[ib];
        let tol = opts.ftol_rel * vals[ib].abs() + opts.ftol_abs;
        if vals[ib].is_finite() && spread <= tol {
            return (pts[ib].clone(), vals[ib], true);
        }
        let diameter = pts
            .iter()
            .map(|p| p.iter().zip(&pts[ib]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < 1e-13 {
            return (pts[ib].clone(), vals[ib], vals[ib].is_finite());
        }
        if cf.evals >= opts.max_evals {
            return (pts[ib].clone(), vals[ib], false);
        }

        let mut c = vec![0.0; n];
        for &k in &order[..n] {
            for (cj, pj) in c.iter_mut().zip(&pts[k]) {
                *cj += pj / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> { c.iter().zip(&pts[iw]).map(|(cj, wj)| cj + t * (cj - wj)).collect() };

        let xr = along(alpha);
        let fr = cf.eval(&xr);
        if fr < vals[ib] {
            let xe = along(alpha * beta);
            let fe = cf.eval(&xe);
            if fe < fr {
                pts[iw] = xe;
                vals[iw] = fe;
            } else {
                pts[iw] = xr;
                vals[iw] = fr;
            }
            continue;
        }
        if fr < vals[is] {
            pts[iw] = xr;
            vals[iw] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[iw] {
            let x = along(alpha * gamma);
            let v = cf.eval(&x);
            (x, v)
        } else {
            let x = along(-gamma);
            let v = cf.eval(&x);
            (x, v)
        };
        if fc < vals[iw].min(fr) {
            pts[iw] = xc;
            vals[iw] = fc;
            continue;
        }
        let best = pts[ib].clone();
        for k in 0..=n {
            if k == ib {
                continue;
            }
            for (pj, bj) in pts[k].iter_mut().zip(&best) {
                *pj = bj + delta * (*pj - bj);
            }
            vals[k] = cf.eval(&pts[k]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum() {
        let f = |u: &[f64]| (u[0] - 0.3).powi(2) + 10.0 * (u[1] - 0.7).powi(2) + 1.0;
        let out = minimize_bounded(f, &[0.9, 0.1], &SimplexOptions::default());
        assert!(out.converged);
        assert!((out.u[0] - 0.3).abs() < 1e-4 && (out.u[1] - 0.7).abs() < 1e-4, "{:?}", out.u);
    }

    #[test]
    fn respects_box() {
        let f = |u: &[f64]| u[0] + (u[1] - 2.0).powi(2);
        let out = minimize_bounded(f, &[0.5, 0.5], &SimplexOptions::default());
        assert!(out.u.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(out.u[0] < 1e-6 && out.u[1] > 1.0 - 1e-6);
    }

    #[test]
    fn rosenbrock_in_box() {
        let f = |u: &[f64]| {
            let (x, y) = (4.0 * u[0] - 2.0, 4.0 * u[1] - 2.0);
            (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
        };
        let out = minimize_bounded(f, &[0.1, 0.9], &SimplexOptions::default());
        assert!((4.0 * out.u[0] - 3.0).abs() < 1e-3, "{:?}", out);
    }

    #[test]
    fn one_dimensional() {
        let out = minimize_bounded(|u: &[f64]| (u[0] - 0.25).powi(2), &[0.8], &SimplexOptions::default());
        assert!((out.u[0] - 0.25).abs() < 1e-5);
    }
}
