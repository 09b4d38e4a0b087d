//! Offsets that split one measure evenly for fixed slopes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{halfplane_clip, ConvexPolygon, Point2, EPS_SEP};
use crate::measures::AreaMeasure;

/// Cell `j` of the partition with slopes `a` and offsets `b`.
fn cell(body: &ConvexPolygon, a: &[Point2], b: &[f64], j: usize) -> ConvexPolygon {
    let mut c = body.clone();
    for l in 0..a.len() {
        if l != j {
            c = halfplane_clip(&c, a[j] - a[l], b[j] - b[l]);
            if c.is_empty() {
                break;
            }
        }
    }
    c
}

fn masses(body: &ConvexPolygon, m: &AreaMeasure, a: &[Point2], b: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|j| m.mass_in_cell(&cell(body, a, b, j)))
        .collect()
}

fn max_dev(masses: &[f64], target: f64) -> f64 {
    masses.iter().fold(0.0, |d, v| d.max((v - target).abs()))
}

/// Offsets `b` such that every cell of `u_j = a_j . x + b_j` carries `1/q`
/// of the mass `m` puts on `body`.
///
/// Gauss–Seidel sweeps bisect each offset in turn (cell `j` grows with
/// `b_j`), then a damped Newton iteration on the first `q - 1` offsets
/// polishes the result. On failure the error carries the best offsets.
pub fn balance_offsets(
    body: &ConvexPolygon,
    m: &AreaMeasure,
    directions: &[Point2],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let q = directions.len();
    if q == 0 {
        return Err(Error::InvalidInput("no directions".into()));
    }
    if body.is_empty() {
        return Err(Error::InvalidPolygon("empty body".into()));
    }
    for i in 0..q {
        for j in i + 1..q {
            if (directions[i] - directions[j]).norm() <= EPS_SEP {
                return Err(Error::DegenerateFamily {
                    first: i,
                    second: j,
                });
            }
        }
    }
    let total = m.mass_in_cell(body);
    if !(total > 0.0) {
        return Err(Error::InvalidMeasure(
            "measure has no mass in the body".into(),
        ));
    }
    let target = total / q as f64;
    let mut b = vec![0.0; q];
    if q == 1 {
        return Ok(b);
    }
    let verts = body.vertices();
    let range = |d: Point2| {
        verts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                let t = d.dot(v);
                (lo.min(t), hi.max(t))
            })
    };

    let mut best = b.clone();
    let mut best_dev = f64::INFINITY;
    let mut iterations = 0;
    let mut current = masses(body, m, directions, &b);
    let mut dev = max_dev(&current, target);
    let sweeps = max_iter.min(8);
    while dev > tol && iterations < sweeps {
        iterations += 1;
        for j in 0..q {
            // Below `lo` the cell is null, above `hi` it is the whole body.
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for l in 0..q {
                if l != j {
                    let (rlo, rhi) = range(directions[j] - directions[l]);
                    lo = lo.max(b[l] - rhi);
                    hi = hi.max(b[l] - rlo);
                }
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                b[j] = mid;
                let mj = m.mass_in_cell(&cell(body, directions, &b, j));
                if (mj - target).abs() <= 0.1 * tol {
                    break;
                }
                if mj < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        current = masses(body, m, directions, &b);
        dev = max_dev(&current, target);
        if dev < best_dev {
            best_dev = dev;
            best.clone_from(&b);
        }
    }
    if dev < best_dev {
        best_dev = dev;
        best.clone_from(&b);
    }

    // Newton polish with b[q - 1] fixed.
    let scale = directions
        .iter()
        .map(|&d| {
            let (lo, hi) = range(d);
            hi - lo
        })
        .fold(0.0, f64::max)
        .max(1e-12);
    let h = 1e-7 * scale;
    let mut b = best.clone();
    let mut current = masses(body, m, directions, &b);
    let mut dev = max_dev(&current, target);
    while dev > tol && iterations < max_iter {
        iterations += 1;
        let n = q - 1;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let mut bp = b.clone();
            bp[k] += h;
            let mp = masses(body, m, directions, &bp);
            for i in 0..n {
                jac[(i, k)] = (mp[i] - current[i]) / h;
            }
        }
        let rhs = DVector::from_iterator(n, (0..n).map(|i| target - current[i]));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = (0..q)
                .map(|i| if i < n { b[i] + t * step[i] } else { b[i] })
                .collect();
            let mt = masses(body, m, directions, &trial);
            let dt = max_dev(&mt, target);
            if dt < dev {
                b = trial;
                current = mt;
                dev = dt;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if dev < best_dev {
        best_dev = dev;
        best = b;
    }
    if best_dev <= tol {
        Ok(best)
    } else {
        Err(Error::NoConvergence {
            iterations,
            residual: best_dev,
            best,
        })
    }
}
