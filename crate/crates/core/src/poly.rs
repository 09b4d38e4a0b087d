//! Dense univariate polynomials and real root isolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Roots closer than this are flagged as ill-conditioned.
pub const ROOT_SEPARATION_GUARD: f64 = 1e-10;

/// Coefficients in ascending degree. Trailing zeros are trimmed, so the zero
/// polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial1D {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Polynomial1D {
    fn from(coeffs: Vec<f64>) -> Self {
        Polynomial1D::new(coeffs)
    }
}

impl From<Polynomial1D> for Vec<f64> {
    fn from(p: Polynomial1D) -> Self {
        p.coeffs
    }
}

impl Polynomial1D {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `prod (x - r)` over the given roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut coeffs = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    /// Interpolating polynomial through `(nodes[i], values[i])`, via Newton
    /// divided differences expanded into the monomial basis.
    pub fn interpolate(nodes: &[f64], values: &[f64]) -> Self {
        assert_eq!(nodes.len(), values.len());
        let n = nodes.len();
        let mut dd = values.to_vec();
        for level in 1..n {
            for i in (level..n).rev() {
                dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - level]);
            }
        }
        let mut acc = Polynomial1D::zero();
        for i in (0..n).rev() {
            // acc = acc * (x - nodes[i]) + dd[i]
            acc = acc.mul_linear(nodes[i]).add(&Polynomial1D::constant(dd[i]));
        }
        acc
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Bound on `|sum |c_k| x^k|`, the scale of rounding error in `eval`.
    pub fn magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        Self::new(coeffs)
    }

    pub fn add(&self, other: &Polynomial1D) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Polynomial1D) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    fn mul_linear(&self, root: f64) -> Self {
        Self::new({
            let mut next = vec![0.0; self.coeffs.len() + 1];
            for (k, &c) in self.coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= root * c;
            }
            next
        })
    }

    /// `x -> p(x + shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        // Repeated synthetic division by (x - shift) yields Taylor coefficients.
        for i in 0..n {
            for k in (i..n - 1).rev() {
                c[k] += shift * c[k + 1];
            }
        }
        Self::new(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub x: f64,
    /// Odd multiplicity: the polynomial changes sign here.
    pub crossing: bool,
    /// Reported as a multiple root (a root of the derivative as well).
    pub multiple: bool,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<RealRoot>,
    /// Two roots closer than [`ROOT_SEPARATION_GUARD`].
    pub ill_conditioned: bool,
}

impl RootSet {
    pub fn xs(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.x).collect()
    }
}

/// All real roots of `p` in `[lo, hi]`, sorted.
///
/// The interval is split at the real roots of `p'` (found recursively), so
/// `p` is monotone on every piece; each sign change is then refined by
/// safeguarded Newton–bisection. Critical points where `p` vanishes are
/// reported once as multiple roots, with the crossing flag derived from the
/// parity of the first non-vanishing derivative.
pub fn real_roots(p: &Polynomial1D, lo: f64, hi: f64) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::InvalidInput(
            "real_roots called on the zero polynomial".into(),
        ));
    }
    if !(lo <= hi) {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    let mut roots = roots_in(p, lo, hi);
    roots.sort_by(|a, b| a.x.total_cmp(&b.x));
    let merge = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    let mut merged: Vec<RealRoot> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last_mut() {
            Some(last) if r.x - last.x <= merge => {
                if r.multiple && !last.multiple {
                    *last = r;
                }
            }
            _ => merged.push(r),
        }
    }
    let ill_conditioned = merged
        .windows(2)
        .any(|w| w[1].x - w[0].x < ROOT_SEPARATION_GUARD);
    Ok(RootSet {
        roots: merged,
        ill_conditioned,
    })
}

fn near_zero(p: &Polynomial1D, x: f64) -> bool {
    let deg = p.degree().unwrap_or(0).max(1) as f64;
    p.eval(x).abs() <= 16.0 * f64::EPSILON * deg * p.magnitude(x)
}

fn roots_in(p: &Polynomial1D, lo: f64, hi: f64) -> Vec<RealRoot> {
    match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(1) => {
            let x = -p.coeffs[0] / p.coeffs[1];
            return if (lo..=hi).contains(&x) {
                vec![RealRoot {
                    x,
                    crossing: true,
                    multiple: false,
                }]
            } else {
                Vec::new()
            };
        }
        _ => {}
    }
    let dp = p.derivative();
    let critical: Vec<f64> = roots_in(&dp, lo, hi)
        .into_iter()
        .map(|r| r.x)
        .filter(|&x| x > lo && x < hi)
        .collect();

    let mut out = Vec::new();
    let mut knots = Vec::with_capacity(critical.len() + 2);
    knots.push(lo);
    knots.extend_from_slice(&critical);
    knots.push(hi);
    knots.dedup();

    let values: Vec<f64> = knots.iter().map(|&x| p.eval(x)).collect();
    let zero_at: Vec<bool> = knots.iter().map(|&x| near_zero(p, x)).collect();

    for (i, &x) in knots.iter().enumerate() {
        if !zero_at[i] {
            continue;
        }
        let interior = i > 0 && i + 1 < knots.len();
        if interior {
            out.push(RealRoot {
                x,
                crossing: odd_multiplicity(p, x),
                multiple: true,
            });
        } else {
            out.push(RealRoot {
                x,
                crossing: true,
                multiple: near_zero(&dp, x),
            });
        }
    }
    for i in 0..knots.len() - 1 {
        if zero_at[i] || zero_at[i + 1] {
            continue;
        }
        let (fu, fv) = (values[i], values[i + 1]);
        if (fu < 0.0 && fv > 0.0) || (fu > 0.0 && fv < 0.0) {
            out.push(RealRoot {
                x: refine_monotone(p, &dp, knots[i], knots[i + 1], fu),
                crossing: true,
                multiple: false,
            });
        }
    }
    out
}

/// Parity of the order of the first derivative that does not vanish at `x`.
fn odd_multiplicity(p: &Polynomial1D, x: f64) -> bool {
    let mut d = p.derivative();
    let mut order = 1;
    while !d.is_zero() && near_zero(&d, x) {
        d = d.derivative();
        order += 1;
    }
    order % 2 == 1
}

fn refine_monotone(p: &Polynomial1D, dp: &Polynomial1D, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let rising = fa < 0.0;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = p.eval(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == rising {
            a = x;
        } else {
            b = x;
        }
        if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let d = dp.eval(x);
        let newton = x - fx / d;
        x = if d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_roots() {
        let p = Polynomial1D::new(vec![-1.0, 0.0, 1.0]);
        assert_eq!(real_roots(&p, -2.0, 2.0).unwrap().xs(), vec![-1.0, 1.0]);
        let q = Polynomial1D::new(vec![1.0, 0.0, 1.0]);
        assert!(real_roots(&q, -10.0, 10.0).unwrap().roots.is_empty());
        assert!(real_roots(&Polynomial1D::zero(), 0.0, 1.0).is_err());
    }

    #[test]
    fn wilkinson_lite() {
        let roots: Vec<f64> = (1..=6).map(|k| k as f64 / 7.0).collect();
        let p = Polynomial1D::from_roots(&roots);
        let found = real_roots(&p, 0.0, 1.0).unwrap();
        assert_eq!(found.roots.len(), 6);
        for (r, e) in found.roots.iter().zip(&roots) {
            assert!((r.x - e).abs() < 1e-10, "{} vs {}", r.x, e);
            assert!(r.crossing && !r.multiple);
        }
        assert!(!found.ill_conditioned);
    }

    #[test]
    fn double_and_triple_roots() {
        // (x - 0.5)^2 (x + 0.25)
        let p = Polynomial1D::from_roots(&[0.5, 0.5, -0.25]);
        let found = real_roots(&p, -1.0, 1.0).unwrap();
        assert_eq!(found.roots.len(), 2);
        assert!((found.roots[0].x + 0.25).abs() < 1e-12 && found.roots[0].crossing);
        assert!((found.roots[1].x - 0.5).abs() < 1e-7);
        assert!(found.roots[1].multiple && !found.roots[1].crossing);

        let cube = Polynomial1D::from_roots(&[0.0, 0.0, 0.0]);
        let found = real_roots(&cube, -1.0, 1.0).unwrap();
        assert_eq!(found.roots.len(), 1);
        assert!(found.roots[0].crossing && found.roots[0].multiple);
    }

    #[test]
    fn shift_and_interpolate() {
        let p = Polynomial1D::new(vec![1.0, -2.0, 0.5, 3.0]);
        let s = p.shifted(0.7);
        for x in [-1.0, 0.0, 0.3, 2.0] {
            assert!((s.eval(x) - p.eval(x + 0.7)).abs() < 1e-12);
        }
        let nodes = [0.0, 0.25, 0.6, 1.0];
        let values: Vec<f64> = nodes.iter().map(|&x| p.eval(x)).collect();
        let q = Polynomial1D::interpolate(&nodes, &values);
        for (a, b) in q.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn antiderivative_roundtrip() {
        let p = Polynomial1D::new(vec![0.0, 6.0, -6.0]);
        let big = p.antiderivative();
        assert!((big.eval(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(big.derivative(), p);
    }
}
