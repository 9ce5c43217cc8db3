//! Confidence intervals: Gauss-Newton curvature and profile likelihood.

use serde::{Deserialize, Serialize};

use super::objective::{LsWeights, ObjectiveKind};
use super::separable::{cholesky, chol_solve, FitOptions, FitResult, Profiled, SeparableModel};
use super::simplex::SimplexOptions;
use super::EstimationError;
use crate::model::shapes::erfc;

/// 95 % quantile of chi-square with one degree of freedom.
pub const DELTA_CHI2_95: f64 = 3.841_458_820_694_124;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMethod {
    Curvature,
    Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub method: IntervalMethod,
    /// The interval reached a parameter bound and was cut there.
    pub lower_clipped: bool,
    pub upper_clipped: bool,
    /// The profile never crossed the threshold on this side.
    pub open_lower: bool,
    pub open_upper: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

/// Two-sided normal quantile for a confidence level.
pub fn normal_quantile(level: f64) -> f64 {
    // solve P(|Z| > z) = 1 - level by bisection
    let target = 1.0 - level;
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erfc(mid / std::f64::consts::SQRT_2) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Chi-square threshold for a one-parameter interval at `level`.
pub fn delta_chi2(level: f64) -> f64 {
    if (level - 0.95).abs() < 1e-15 {
        DELTA_CHI2_95
    } else {
        normal_quantile(level).powi(2)
    }
}

/// `value +- z sigma`, cut at the bounds.
pub fn curvature_interval(value: f64, sigma: f64, lo: f64, hi: f64, level: f64) -> Interval {
    let z = delta_chi2(level).sqrt();
    let (a, b) = (value - z * sigma, value + z * sigma);
    Interval {
        lower: a.max(lo),
        upper: b.min(hi),
        method: IntervalMethod::Curvature,
        lower_clipped: a < lo,
        upper_clipped: b > hi,
        open_lower: false,
        open_upper: false,
    }
}

fn bounds_of<M: SeparableModel + ?Sized>(model: &M, name: &str) -> (f64, f64) {
    if let Some(p) = model.nonlinear().iter().find(|p| p.name == name) {
        return (p.lo, p.hi);
    }
    let p = model.linear().iter().find(|p| p.name == name);
    (p.and_then(|p| p.lower).unwrap_or(f64::NEG_INFINITY), f64::INFINITY)
}

/// Fills the covariance and curvature intervals of `result`.
pub(crate) fn attach_curvature<M: SeparableModel + ?Sized>(prof: &Profiled<M>, result: &mut FitResult, opts: &FitOptions) {
    let model = prof.model;
    let n = model.len();
    let nl = model.nonlinear();
    let lin = model.linear();
    let mut jac: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();

    let base = match model.design(&result.theta) {
        Ok(d) => d,
        Err(_) => return,
    };
    for (k, p) in nl.iter().enumerate() {
        if prof.fixed_theta[k].is_some() {
            continue;
        }
        let x = result.theta[k];
        let h = match p.transform {
            super::Transform::Linear => 1e-5 * (p.hi - p.lo),
            super::Transform::Log => 1e-5 * x,
        };
        let (xm, xp) = ((x - h).max(p.lo), (x + h).min(p.hi));
        let eval = |v: f64| {
            let mut th = result.theta.clone();
            th[k] = v;
            model.design(&th).map(|d| d.eval(&result.linear, n))
        };
        let (Ok(fm), Ok(fp)) = (eval(xm), eval(xp)) else {
            return;
        };
        jac.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (xp - xm)).collect());
        names.push(p.name.clone());
    }
    for (j, p) in lin.iter().enumerate() {
        if p.fixed.is_none() {
            jac.push(base.columns[j].clone());
            names.push(p.name.clone());
        }
    }

    let w: Vec<f64> = match opts.objective {
        ObjectiveKind::Mle => result.fitted.iter().map(|&f| if f > 0.0 { 1.0 / f } else { 0.0 }).collect(),
        ObjectiveKind::Ls => prof.loss.w.clone(),
    };
    let m = jac.len();
    let mut fisher = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let s: f64 = (0..n).map(|i| jac[a][i] * jac[b][i] * w[i]).sum();
            fisher[a * m + b] = s;
            fisher[b * m + a] = s;
        }
    }
    let scale = (0..m).map(|i| fisher[i * m + i]).fold(0.0, f64::max).max(1e-300);
    let Some(l) = cholesky(&fisher, m, 1e-14 * scale).or_else(|| cholesky(&fisher, m, 1e-10 * scale)) else {
        return;
    };
    let s2 = if opts.objective == ObjectiveKind::Ls && opts.ls_weights == LsWeights::Uniform {
        result.chi2_normalized
    } else {
        1.0
    };
    let mut cov = vec![vec![0.0; m]; m];
    for b in 0..m {
        let mut e = vec![0.0; m];
        e[b] = 1.0;
        let col = chol_solve(&l, &e, m);
        for a in 0..m {
            cov[a][b] = s2 * col[a];
        }
    }
    for (i, name) in names.iter().enumerate() {
        let (lo, hi) = bounds_of(model, name);
        if let Some(p) = result.parameters.iter_mut().find(|p| &p.name == name) {
            p.interval = Some(curvature_interval(p.value, cov[i][i].max(0.0).sqrt(), lo, hi, 0.95));
        }
    }
    result.covariance = Some(cov);
    result.covariance_names = names;
}

/// Locates where `profiled(x) - chi2_min` crosses `delta` on both sides of
/// `p_hat`, stepping outwards in multiples of `step`.
pub fn profile_interval<F: FnMut(f64) -> f64>(
    mut profiled: F,
    p_hat: f64,
    chi2_min: f64,
    step: f64,
    lo: f64,
    hi: f64,
    delta: f64,
) -> Interval {
    let step = if step > 0.0 && step.is_finite() { step } else { 1e-3 * p_hat.abs().max(1e-3) };
    let mut side = |dir: f64, bound: f64| -> (f64, bool, bool) {
        let mut x_in = p_hat;
        let mut d_in = 0.0;
        let mut k = 0.5;
        for _ in 0..60 {
            k *= 2.0;
            let mut x = p_hat + dir * k * step;
            let at_bound = (dir > 0.0 && x >= bound) || (dir < 0.0 && x <= bound);
            if at_bound {
                x = bound;
            }
            let d = profiled(x) - chi2_min;
            if d >= delta || !d.is_finite() {
                // bracketed between x_in and x
                let mut x_out = x;
                let mut d_out = d;
                for _ in 0..60 {
                    let mid = if d_out.is_finite() {
                        let t = (delta - d_in) / (d_out - d_in);
                        x_in + t.clamp(0.1, 0.9) * (x_out - x_in)
                    } else {
                        0.5 * (x_in + x_out)
                    };
                    let dm = profiled(mid) - chi2_min;
                    if dm >= delta || !dm.is_finite() {
                        x_out = mid;
                        d_out = dm;
                    } else {
                        x_in = mid;
                        d_in = dm;
                    }
                    if (x_out - x_in).abs() < 1e-7 * step {
                        break;
                    }
                }
                let root = if d_out.is_finite() && d_out != d_in {
                    x_in + (delta - d_in) / (d_out - d_in) * (x_out - x_in)
                } else {
                    x_in
                };
                return (root, false, false);
            }
            if at_bound {
                return (bound, true, false);
            }
            x_in = x;
            d_in = d.max(0.0);
        }
        (x_in, false, true)
    };
    let (lower, lower_clipped, open_lower) = side(-1.0, lo);
    let (upper, upper_clipped, open_upper) = side(1.0, hi);
    Interval {
        lower,
        upper,
        method: IntervalMethod::Profile,
        lower_clipped,
        upper_clipped,
        open_lower,
        open_upper,
    }
}

/// Recomputes intervals for `names` (all free parameters when empty) by
/// profiling the objective. Parameters whose profile fails keep their
/// curvature interval.
pub fn profile_intervals<M: SeparableModel + ?Sized>(
    model: &M,
    y: &[f64],
    opts: &FitOptions,
    result: &mut FitResult,
    names: &[&str],
    level: f64,
) -> Result<(), EstimationError> {
    let delta = delta_chi2(level);
    let local = SimplexOptions {
        initial_step: 0.05,
        max_restarts: 1,
        ..opts.simplex
    };
    let nl = model.nonlinear();
    let lin = model.linear();
    let targets: Vec<String> = if names.is_empty() {
        result.parameters.iter().filter(|p| p.free).map(|p| p.name.clone()).collect()
    } else {
        names.iter().map(|s| s.to_string()).collect()
    };
    for name in targets {
        let Some(idx) = result.parameters.iter().position(|p| p.name == name && p.free) else {
            continue;
        };
        let p_hat = result.parameters[idx].value;
        let sigma = result
            .cov(&name, &name)
            .map(|v| v.max(0.0).sqrt())
            .filter(|s| *s > 0.0)
            .unwrap_or(1e-3 * p_hat.abs().max(1e-6));
        let (lo, hi) = bounds_of(model, &name);
        let nonlin = nl.iter().position(|p| p.name == name);
        let linear = lin.iter().position(|p| p.name == name);
        let mut failed = false;
        let interval = profile_interval(
            |x| {
                let mut prof = Profiled::new(model, y, opts);
                let mut theta = result.theta.clone();
                let mut c = result.linear.clone();
                if let Some(k) = nonlin {
                    prof.fixed_theta[k] = Some(x);
                    theta[k] = x;
                } else if let Some(j) = linear {
                    prof.fixed_linear[j] = Some(x);
                    c[j] = x;
                }
                let v = if prof.fixed_theta.iter().all(|f| f.is_some()) {
                    prof.value_at(&theta, &mut c)
                } else {
                    prof.minimize_from(&theta, &c, &local).value
                };
                if v < result.objective - 1e-6 * (1.0 + result.objective.abs()) {
                    failed = true;
                }
                v
            },
            p_hat,
            result.objective,
            sigma,
            lo,
            hi,
            delta,
        );
        if !failed {
            result.parameters[idx].interval = Some(interval);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_profile_is_gaussian_interval() {
        let (p0, s) = (3.0, 0.4);
        let iv = profile_interval(|p| ((p - p0) / s).powi(2), p0, 0.0, 0.1, f64::NEG_INFINITY, f64::INFINITY, DELTA_CHI2_95);
        assert!((iv.lower - (p0 - 1.959_964 * s)).abs() < 1e-5, "{iv:?}");
        assert!((iv.upper - (p0 + 1.959_964 * s)).abs() < 1e-5, "{iv:?}");
        assert!(!iv.lower_clipped && !iv.open_upper);
    }

    #[test]
    fn bound_clips_profile() {
        let iv = profile_interval(|p| (p / 0.5).powi(2), 0.1, 0.04, 0.2, 0.0, 10.0, DELTA_CHI2_95);
        assert_eq!(iv.lower, 0.0);
        assert!(iv.lower_clipped);
    }

    #[test]
    fn flat_profile_is_open() {
        let iv = profile_interval(|_| 0.0, 1.0, 0.0, 0.1, f64::NEG_INFINITY, f64::INFINITY, DELTA_CHI2_95);
        assert!(iv.open_lower && iv.open_upper);
    }

    #[test]
    fn quantiles() {
        assert!((normal_quantile(0.95) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((delta_chi2(0.6827) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn curvature_clipping() {
        let iv = curvature_interval(0.5, 1.0, 0.0, f64::INFINITY, 0.95);
        assert_eq!(iv.lower, 0.0);
        assert!(iv.lower_clipped && !iv.upper_clipped);
    }
}
