//! Levenberg–Marquardt on the unit sphere with a forward-difference Jacobian.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub(crate) struct LmSettings {
    pub max_iter: usize,
    pub fd_step: f64,
    pub damping_init: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct LmOutcome {
    pub y: Vec<f64>,
    /// `None` if the residual could not be evaluated at the start point.
    pub residual: Option<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn normalize(y: &mut [f64]) {
    let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        for v in y.iter_mut() {
            *v /= n;
        }
    }
}

fn sq_norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes `|f(y)|^2` over unit vectors `y`. `f` must be invariant under
/// positive scaling of `y`; `None` marks points where it is undefined.
/// Iteration stops as soon as `done(residual)` holds.
pub(crate) fn levenberg_marquardt<F, D>(y0: Vec<f64>, f: F, done: D, cfg: &LmSettings) -> LmOutcome
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
    D: Fn(&[f64]) -> bool,
{
    let mut y = y0;
    normalize(&mut y);
    let Some(mut r) = f(&y) else {
        return LmOutcome {
            y,
            residual: None,
            iterations: 0,
            converged: false,
        };
    };
    let n = y.len();
    let mut cost = sq_norm(&r);
    let mut lambda: Option<f64> = None;
    let mut nu = 2.0;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        if done(&r) {
            return LmOutcome {
                y,
                residual: Some(r),
                iterations,
                converged: true,
            };
        }
        iterations += 1;
        let m = r.len();
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for i in 0..n {
            let h = cfg.fd_step * y[i].abs().max(1.0);
            let mut yp = y.clone();
            yp[i] += h;
            if let Some(rp) = f(&yp) {
                for k in 0..m {
                    jac[(k, i)] = (rp[k] - r[k]) / h;
                }
            } else {
                yp[i] = y[i] - h;
                if let Some(rm) = f(&yp) {
                    for k in 0..m {
                        jac[(k, i)] = (r[k] - rm[k]) / h;
                    }
                }
            }
        }
        let rv = DVector::from_column_slice(&r);
        let a = jac.transpose() * &jac;
        let g = jac.transpose() * &rv;
        let lam = lambda.get_or_insert_with(|| {
            let d = a.diagonal().max();
            cfg.damping_init * if d > 0.0 { d } else { 1.0 }
        });

        let mut accepted = false;
        let mut step_norm = f64::INFINITY;
        for _ in 0..40 {
            let mut damped = a.clone();
            for i in 0..n {
                damped[(i, i)] += *lam;
            }
            let Some(chol) = damped.cholesky() else {
                *lam *= nu;
                nu *= 2.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            step_norm = delta.norm();
            let mut y_new: Vec<f64> = y.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            normalize(&mut y_new);
            let r_new = f(&y_new);
            let cost_new = r_new.as_deref().map_or(f64::INFINITY, sq_norm);
            let predicted = 0.5 * delta.dot(&(&delta * *lam - &g));
            let rho = if predicted > 0.0 {
                0.5 * (cost - cost_new) / predicted
            } else {
                -1.0
            };
            if rho > 0.0 && cost_new < cost {
                y = y_new;
                r = r_new.unwrap();
                cost = cost_new;
                *lam *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
                nu = 2.0;
                accepted = true;
                break;
            }
            *lam *= nu;
            nu *= 2.0;
            if step_norm < 1e-15 {
                break;
            }
        }
        if !accepted || step_norm < 1e-15 {
            break;
        }
    }
    let converged = done(&r);
    LmOutcome {
        y,
        residual: Some(r),
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_direction_on_circle() {
        // Zero where the direction of y is (cos 0.3, sin 0.3).
        let target = 0.3f64;
        let f = |y: &[f64]| Some(vec![y[1].atan2(y[0]) - target]);
        let out = levenberg_marquardt(
            vec![1.0, -0.5],
            f,
            |r| r[0].abs() < 1e-12,
            &LmSettings {
                max_iter: 100,
                fd_step: 1e-7,
                damping_init: 1e-3,
            },
        );
        assert!(out.converged);
        assert!((out.y[1].atan2(out.y[0]) - target).abs() < 1e-12);
        assert!((out.y[0].hypot(out.y[1]) - 1.0).abs() < 1e-15);
    }
}
