//! Splitting an interval among `r` parts so that every measure is shared
//! equally, using the argmax partition of `r` polynomials.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::envelope::{upper_envelope, EnvelopeProfile};
use crate::error::{Error, Result};
use crate::measures::{interval_mass, IntervalMeasure};
use crate::poly::Polynomial1D;
use crate::residuals::{Determinacy, ZeroSumVector};
use crate::solver::{
    levenberg_marquardt, multistart, normalize, start_rng, BlockReport, SolveReport, SolveStatus,
    SolverConfig, StartOutcome,
};

/// Segments of `[0, 1]` between consecutive cuts and the part (1-based)
/// owning each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecklaceSplit {
    pub cuts: Vec<f64>,
    pub owners: Vec<usize>,
}

impl NecklaceSplit {
    /// Builds a split from consecutive segments `(a, b, owner)` covering
    /// `[0, 1]`, merging neighbors with the same owner.
    pub fn from_segments(segments: &[(f64, f64, usize)]) -> Self {
        let mut cuts = Vec::new();
        let mut owners: Vec<usize> = Vec::new();
        for &(a, b, o) in segments {
            if b <= a {
                continue;
            }
            match owners.last() {
                Some(&last) if last == o => {}
                Some(_) => {
                    cuts.push(a);
                    owners.push(o);
                }
                None => owners.push(o),
            }
        }
        NecklaceSplit { cuts, owners }
    }

    pub fn segment_count(&self) -> usize {
        self.owners.len()
    }

    /// `(a, b, owner)` for every segment.
    pub fn segments(&self) -> Vec<(f64, f64, usize)> {
        (0..self.owners.len())
            .map(|i| {
                let a = if i == 0 { 0.0 } else { self.cuts[i - 1] };
                let b = self.cuts.get(i).copied().unwrap_or(1.0);
                (a, b, self.owners[i])
            })
            .collect()
    }

    /// Segments owned by part `owner` (1-based).
    pub fn part(&self, owner: usize) -> Vec<(f64, f64)> {
        self.segments()
            .into_iter()
            .filter(|s| s.2 == owner)
            .map(|(a, b, _)| (a, b))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecklaceOutcome {
    pub split: NecklaceSplit,
    pub report: SolveReport,
    /// `n (r - 1) + 1`.
    pub segment_bound: usize,
    /// `masses[i][j]`: measure `i` on part `j + 1`.
    pub masses: Vec<Vec<f64>>,
}

/// Checks that every measure gives every part `1/r` within `tol`.
pub fn verify_split(
    split: &NecklaceSplit,
    measures: &[IntervalMeasure],
    r: usize,
    tol: f64,
) -> (bool, Vec<Vec<f64>>) {
    let masses = part_masses(split, measures, r);
    let target = 1.0 / r as f64;
    let ok = masses.iter().flatten().all(|m| (m - target).abs() <= tol);
    (ok, masses)
}

fn part_masses(split: &NecklaceSplit, measures: &[IntervalMeasure], r: usize) -> Vec<Vec<f64>> {
    measures
        .iter()
        .map(|m| (1..=r).map(|o| interval_mass(m, &split.part(o))).collect())
        .collect()
}

/// Prime-power factors of `r` in increasing order of the prime.
fn prime_power_factors(mut r: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while r > 1 {
        if r % p == 0 {
            let mut f = 1;
            while r % p == 0 {
                r /= p;
                f *= p;
            }
            out.push(f);
        }
        p += 1;
    }
    out
}

/// Polynomial family in gauge coordinates: `n + 1` coefficient blocks of
/// `q - 1` Helmert coordinates each.
struct PolyChart {
    q: usize,
    degree: usize,
}

impl PolyChart {
    fn basis(&self, k: usize, i: usize) -> f64 {
        let n = (k + 1) as f64;
        let norm = (n * (n + 1.0)).sqrt();
        match i {
            i if i <= k => 1.0 / norm,
            i if i == k + 1 => -n / norm,
            _ => 0.0,
        }
    }

    fn polys(&self, y: &[f64]) -> Vec<Polynomial1D> {
        let k = self.q - 1;
        (0..self.q)
            .map(|j| {
                Polynomial1D::new(
                    (0..=self.degree)
                        .map(|c| (0..k).map(|t| y[c * k + t] * self.basis(t, j)).sum())
                        .collect(),
                )
            })
            .collect()
    }

    fn coords(&self, coeffs: &[Vec<f64>]) -> Vec<f64> {
        let k = self.q - 1;
        let mut y = Vec::with_capacity((self.degree + 1) * k);
        for c in 0..=self.degree {
            let column: Vec<f64> = coeffs.iter().map(|p| p[c]).collect();
            let mean = column.iter().sum::<f64>() / self.q as f64;
            for t in 0..k {
                y.push(
                    column
                        .iter()
                        .enumerate()
                        .map(|(j, v)| (v - mean) * self.basis(t, j))
                        .sum(),
                );
            }
        }
        normalize(&mut y);
        y
    }
}

fn owner_masses(profile: &EnvelopeProfile, m: &IntervalMeasure, q: usize) -> Vec<f64> {
    let mut out = vec![0.0; q];
    for (a, b, owner) in profile.pieces() {
        out[owner] += interval_mass(m, &[(a, b)]);
    }
    out
}

struct NecklaceObjective<'a> {
    measures: &'a [IntervalMeasure],
    q: usize,
    penalty_sqrt: f64,
    tol: f64,
}

impl NecklaceObjective<'_> {
    fn residual(&self, polys: &[Polynomial1D]) -> Option<Vec<f64>> {
        let profile = upper_envelope(polys, 0.0, 1.0).ok()?;
        let mut r = Vec::with_capacity((self.measures.len() + 1) * self.q);
        let mut first = Vec::new();
        for (i, m) in self.measures.iter().enumerate() {
            let masses = owner_masses(&profile, m, self.q);
            r.extend_from_slice(ZeroSumVector::centered(&masses).entries());
            if i == 0 {
                first = masses;
            }
        }
        let target = 0.5 / self.q as f64;
        r.extend(
            first
                .iter()
                .map(|&m| self.penalty_sqrt * (target - m).max(0.0)),
        );
        Some(r)
    }

    fn done(&self, r: &[f64]) -> bool {
        r[..self.measures.len() * self.q]
            .iter()
            .all(|v| v.abs() <= self.tol)
    }
}

/// Random coefficients with constant terms balanced on the first measure by
/// Gauss–Seidel bisection, so every member starts with a nonempty part.
fn initial_coefficients(
    measures: &[IntervalMeasure],
    q: usize,
    degree: usize,
    seed: u64,
    start: usize,
) -> Vec<Vec<f64>> {
    let mut rng = start_rng(seed, start);
    let mut coeffs: Vec<Vec<f64>> = (0..q)
        .map(|_| {
            (0..=degree)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect()
        })
        .collect();
    let bound: f64 = coeffs
        .iter()
        .map(|c| c.iter().map(|v: &f64| v.abs()).sum::<f64>())
        .sum::<f64>()
        + 1.0;
    let target = 1.0 / q as f64;
    let mass_of = |coeffs: &[Vec<f64>], j: usize| -> f64 {
        let polys: Vec<Polynomial1D> = coeffs
            .iter()
            .map(|c| Polynomial1D::new(c.clone()))
            .collect();
        upper_envelope(&polys, 0.0, 1.0)
            .map(|p| owner_masses(&p, &measures[0], q)[j])
            .unwrap_or(0.0)
    };
    for _ in 0..4 {
        for j in 0..q {
            let (mut lo, mut hi) = (-2.0 * bound, 2.0 * bound);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                coeffs[j][0] = mid;
                let m = mass_of(&coeffs, j);
                if (m - target).abs() < 1e-4 * target {
                    break;
                }
                if m < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }
    coeffs
}

struct Level {
    segments: Vec<(f64, f64, usize)>,
    report: SolveReport,
}

/// One prime-power level on `[0, 1]`: `q` polynomials of degree `n`.
fn solve_level(measures: &[IntervalMeasure], q: usize, cfg: &SolverConfig) -> Level {
    let n = measures.len();
    let chart = PolyChart { q, degree: n };
    let objective = NecklaceObjective {
        measures,
        q,
        penalty_sqrt: cfg.penalty_for(q).sqrt(),
        tol: cfg.tol,
    };
    let blocks = n * q;
    let (_, chosen, starts_used) = multistart(cfg.multistart, |k| {
        let y0 = chart.coords(&initial_coefficients(measures, q, n, cfg.seed, k));
        let out = levenberg_marquardt(
            y0,
            |y| objective.residual(&chart.polys(y)),
            |r| objective.done(r),
            &cfg.lm_settings(),
        );
        let score = out.residual.as_ref().map_or(f64::INFINITY, |r| {
            r[..blocks].iter().fold(0.0, |m, v| m.max(v.abs()))
        });
        StartOutcome {
            y: out.y,
            iterations: out.iterations,
            converged: out.converged,
            score,
        }
    });
    let polys = chart.polys(&chosen.y);
    let segments: Vec<(f64, f64, usize)> = match upper_envelope(&polys, 0.0, 1.0) {
        Ok(profile) => profile.pieces().collect(),
        Err(_) => vec![(0.0, 1.0, 0)],
    };
    let split = NecklaceSplit::from_segments(
        &segments
            .iter()
            .map(|&(a, b, o)| (a, b, o + 1))
            .collect::<Vec<_>>(),
    );
    let masses = part_masses(&split, measures, q);
    let report = necklace_report(&masses, cfg.tol, chosen.iterations, starts_used, Vec::new());
    Level { segments, report }
}

fn necklace_report(
    masses: &[Vec<f64>],
    tol: f64,
    iterations: usize,
    starts_used: usize,
    warnings: Vec<String>,
) -> SolveReport {
    let blocks: Vec<BlockReport> = masses
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let r = ZeroSumVector::centered(m);
            BlockReport {
                constraint: format!("interval_measure:{i}"),
                norm_inf: r.norm_inf(),
                residual: r.into_vec(),
            }
        })
        .collect();
    let residual_norm = blocks.iter().fold(0.0_f64, |m, b| m.max(b.norm_inf));
    let converged = residual_norm <= tol;
    SolveReport {
        status: if converged {
            SolveStatus::Converged
        } else {
            SolveStatus::BestEffort
        },
        residual_norm,
        iterations,
        starts_used,
        on_zero_set: converged,
        blocks,
        determinacy: Determinacy::Exact,
        warnings,
    }
}

/// Maps segments `(t0, t1, owner)` of the concatenation of `host` (rescaled
/// to `[0, 1]`) back to the original line.
fn pull_back(host: &[(f64, f64)], segments: &[(f64, f64, usize)]) -> Vec<(f64, f64, usize)> {
    let total: f64 = host.iter().map(|(a, b)| b - a).sum();
    let mut out = Vec::new();
    for &(t0, t1, o) in segments {
        let (s0, s1) = (t0 * total, t1 * total);
        let mut offset = 0.0;
        for (i, &(a, b)) in host.iter().enumerate() {
            let len = b - a;
            let lo = s0.max(offset);
            let hi = s1.min(offset + len);
            if hi > lo {
                let x0 = a + (lo - offset);
                // Land exactly on segment ends to avoid gaps.
                let x1 = if hi >= offset + len || i + 1 == host.len() && t1 >= 1.0 {
                    b
                } else {
                    a + (hi - offset)
                };
                out.push((x0, x1, o));
            }
            offset += len;
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Splits `[0, 1]` into parts `1..=r` that each receive `1/r` of every
/// measure. Prime-power `r` is solved directly with `r` polynomials of
/// degree `n = measures.len()`; composite `r` splits by its prime-power
/// factors in turn, each part being split again as the concatenation of
/// its segments.
pub fn split_necklace(
    measures: &[IntervalMeasure],
    r: usize,
    cfg: &SolverConfig,
) -> Result<NecklaceOutcome> {
    cfg.validate()?;
    if measures.is_empty() {
        return Err(Error::InvalidInput(
            "at least one measure is required".into(),
        ));
    }
    if r < 2 {
        return Err(Error::InvalidInput(format!(
            "r must be at least 2, got {r}"
        )));
    }
    let n = measures.len();
    let factors = prime_power_factors(r);
    let mut warnings = Vec::new();
    if factors.len() > 1 {
        warnings.push(format!("composite r = {r} split by factors {factors:?}"));
    }

    // Each entry: the segments of one current part, in order.
    let mut parts: Vec<Vec<(f64, f64)>> = vec![vec![(0.0, 1.0)]];
    let mut iterations = 0;
    let mut starts_used = 0;
    for (level, &q) in factors.iter().enumerate() {
        let mut next = Vec::with_capacity(parts.len() * q);
        for (index, host) in parts.iter().enumerate() {
            let local: Vec<IntervalMeasure> = measures
                .iter()
                .map(|m| {
                    m.concatenated(host)
                        .unwrap_or_else(IntervalMeasure::uniform)
                })
                .collect();
            let sub_cfg = SolverConfig {
                seed: if level == 0 {
                    cfg.seed
                } else {
                    cfg.seed.wrapping_add(((level as u64) << 32) | index as u64)
                },
                ..cfg.clone()
            };
            let solved = solve_level(&local, q, &sub_cfg);
            iterations += solved.report.iterations;
            starts_used += solved.report.starts_used;
            let back = pull_back(host, &solved.segments);
            for owner in 0..q {
                next.push(
                    back.iter()
                        .filter(|s| s.2 == owner)
                        .map(|&(a, b, _)| (a, b))
                        .collect(),
                );
            }
        }
        parts = next;
    }
    let mut segments: Vec<(f64, f64, usize)> = parts
        .iter()
        .enumerate()
        .flat_map(|(j, segs)| segs.iter().map(move |&(a, b)| (a, b, j + 1)))
        .collect();
    segments.sort_by(|x, y| x.0.total_cmp(&y.0));
    let split = NecklaceSplit::from_segments(&segments);
    let masses = part_masses(&split, measures, r);
    let mut report = necklace_report(&masses, cfg.tol, iterations, starts_used, warnings);
    let bound = n * (r - 1) + 1;
    if split.segment_count() > bound {
        report.warnings.push(format!(
            "{} segments exceed n (r - 1) + 1 = {bound}",
            split.segment_count()
        ));
    }
    Ok(NecklaceOutcome {
        split,
        report,
        segment_bound: bound,
        masses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig {
            tol: 1e-10,
            multistart: 8,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn factors() {
        assert_eq!(prime_power_factors(12), vec![4, 3]);
        assert_eq!(prime_power_factors(9), vec![9]);
        assert_eq!(prime_power_factors(30), vec![2, 3, 5]);
    }

    #[test]
    fn uniform_halves() {
        let out = split_necklace(&[IntervalMeasure::uniform()], 2, &cfg()).unwrap();
        assert_eq!(out.report.status, SolveStatus::Converged);
        assert_eq!(out.split.cuts.len(), 1);
        assert!((out.split.cuts[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn median_cut() {
        let m = IntervalMeasure::from_polynomial(Polynomial1D::new(vec![0.0, 2.0])).unwrap();
        let out = split_necklace(std::slice::from_ref(&m), 2, &cfg()).unwrap();
        assert_eq!(out.split.cuts.len(), 1);
        assert!((out.split.cuts[0] - 0.5f64.sqrt()).abs() < 1e-8);
        let (ok, _) = verify_split(&out.split, &[m], 2, 1e-9);
        assert!(ok);
    }

    #[test]
    fn verify_rejects_shifted_cut() {
        let split = NecklaceSplit {
            cuts: vec![0.6],
            owners: vec![1, 2],
        };
        let (ok, masses) = verify_split(&split, &[IntervalMeasure::uniform()], 2, 1e-6);
        assert!(!ok);
        assert!((masses[0][0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn composite_six() {
        let out = split_necklace(&[IntervalMeasure::uniform()], 6, &cfg()).unwrap();
        let (ok, _) = verify_split(&out.split, &[IntervalMeasure::uniform()], 6, 1e-8);
        assert!(ok, "{:?}", out);
        assert!(out.split.owners.iter().all(|&o| (1..=6).contains(&o)));
    }
}
