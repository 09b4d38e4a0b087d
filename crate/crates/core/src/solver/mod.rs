//! Search for configurations whose stacked residual vanishes.

mod balance;
mod iterated;
mod lm;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    build_partition, AffineFunction2, CellSet, ConvexPolygon, FunctionFamily, Point2,
};
use crate::measures::AreaMeasure;
use crate::residuals::{
    constraint_block, evaluate_cells, Constraint, ConstraintSet, Determinacy, ZeroSumVector,
};

pub use balance::balance_offsets;
pub use iterated::{solve_iterated, IteratedPartition};
pub(crate) use lm::{levenberg_marquardt, normalize, LmSettings};

/// Starts run concurrently in chunks of this size; the earliest converged
/// start of the first chunk that has one wins.
const CHUNK: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Acceptance threshold on the max-norm of the residual blocks.
    pub tol: f64,
    /// Iterations per start.
    pub max_iter: usize,
    pub multistart: usize,
    pub seed: u64,
    pub fd_step: f64,
    /// Initial damping relative to the largest diagonal entry of `J^T J`.
    pub damping_init: f64,
    /// Weight of the empty-cell barrier; `None` means `10 q`.
    pub penalty_weight: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-6,
            max_iter: 500,
            multistart: 64,
            seed: 0,
            fd_step: 1e-6,
            damping_init: 1e-3,
            penalty_weight: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::InvalidInput("fd_step must be positive".into()));
        }
        if !(self.damping_init > 0.0) {
            return Err(Error::InvalidInput("damping_init must be positive".into()));
        }
        if self.multistart == 0 || self.max_iter == 0 {
            return Err(Error::InvalidInput(
                "multistart and max_iter must be at least 1".into(),
            ));
        }
        if let Some(w) = self.penalty_weight {
            if !(w >= 0.0) {
                return Err(Error::InvalidInput(
                    "penalty_weight must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn penalty_for(&self, q: usize) -> f64 {
        self.penalty_weight.unwrap_or(10.0 * q as f64)
    }

    pub(crate) fn lm_settings(&self) -> LmSettings {
        LmSettings {
            max_iter: self.max_iter,
            fd_step: self.fd_step,
            damping_init: self.damping_init,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Converged,
    BestEffort,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub constraint: String,
    pub residual: Vec<f64>,
    pub norm_inf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub residual_norm: f64,
    pub iterations: usize,
    pub starts_used: usize,
    /// Every area-measure block is within tolerance.
    pub on_zero_set: bool,
    pub blocks: Vec<BlockReport>,
    pub determinacy: Determinacy,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub family: FunctionFamily,
    pub cells: CellSet,
    pub report: SolveReport,
}

/// Orthonormal basis of the zero-sum hyperplane in `R^q` (Helmert
/// contrasts), as `q - 1` columns.
fn helmert(q: usize) -> Vec<Vec<f64>> {
    (0..q - 1)
        .map(|k| {
            let n = (k + 1) as f64;
            let norm = (n * (n + 1.0)).sqrt();
            (0..q)
                .map(|i| match i {
                    i if i <= k => 1.0 / norm,
                    i if i == k + 1 => -n / norm,
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Maps between gauge coordinates `y` in `R^{3(q-1)}` (blocks for the x
/// slopes, y slopes and offsets) and families on the original body, which
/// the solver sees shifted to its centroid and scaled to unit area.
pub(crate) struct Chart {
    q: usize,
    basis: Vec<Vec<f64>>,
    center: Point2,
    scale: f64,
}

impl Chart {
    pub(crate) fn new(body: &ConvexPolygon, q: usize) -> Self {
        Chart {
            q,
            basis: helmert(q),
            center: body.centroid().unwrap_or_default(),
            scale: body.area().sqrt(),
        }
    }

    fn expand(&self, coords: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.q];
        for (c, col) in coords.iter().zip(&self.basis) {
            for (vi, bi) in v.iter_mut().zip(col) {
                *vi += c * bi;
            }
        }
        v
    }

    fn reduce(&self, v: &[f64]) -> Vec<f64> {
        self.basis
            .iter()
            .map(|col| col.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub(crate) fn family(&self, y: &[f64]) -> FunctionFamily {
        let k = self.q - 1;
        let ax = self.expand(&y[..k]);
        let ay = self.expand(&y[k..2 * k]);
        let b = self.expand(&y[2 * k..]);
        let members = (0..self.q)
            .map(|j| {
                let a = Point2::new(ax[j], ay[j]) * (1.0 / self.scale);
                AffineFunction2::new(a.x, a.y, b[j] - a.dot(self.center))
            })
            .collect();
        FunctionFamily::new(members).expect("finite coefficients")
    }

    pub(crate) fn coords(&self, family: &FunctionFamily) -> Vec<f64> {
        let members = family.members();
        let ax: Vec<f64> = members.iter().map(|u| u.a.x * self.scale).collect();
        let ay: Vec<f64> = members.iter().map(|u| u.a.y * self.scale).collect();
        let b: Vec<f64> = members.iter().map(|u| u.b + u.a.dot(self.center)).collect();
        let center = |v: Vec<f64>| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.into_iter().map(|x| x - mean).collect::<Vec<_>>()
        };
        let mut y = self.reduce(&center(ax));
        y.extend(self.reduce(&center(ay)));
        y.extend(self.reduce(&center(b)));
        normalize(&mut y);
        y
    }
}

/// Residual blocks plus the empty-cell barrier for one family.
pub(crate) struct Objective<'a> {
    pub body: &'a ConvexPolygon,
    pub constraints: &'a ConstraintSet,
    pub q: usize,
    pub penalty_sqrt: f64,
    pub tol: f64,
}

impl Objective<'_> {
    /// Index of the measure used by the barrier.
    fn barrier_measure(&self) -> Option<usize> {
        self.constraints
            .constraints()
            .iter()
            .position(|c| matches!(c, Constraint::Measure(_)))
    }

    /// Stacked residual with `q` barrier entries appended.
    pub(crate) fn residual(&self, family: &FunctionFamily) -> Option<Vec<f64>> {
        let cells = build_partition(self.body, family).ok()?;
        let barrier_masses: Vec<f64> = match self.barrier_measure() {
            Some(i) => match &self.constraints.constraints()[i] {
                Constraint::Measure(m) => cells.iter().map(|c| m.mass_in_cell(c)).collect(),
                _ => unreachable!(),
            },
            None => {
                let area = self.body.area();
                cells.iter().map(|c| c.area() / area).collect()
            }
        };
        let total: f64 = barrier_masses.iter().sum();
        let target = total / (2.0 * self.q as f64);
        let mut r = Vec::with_capacity((self.constraints.len() + 1) * self.q);
        let barrier_index = self.barrier_measure();
        for (i, c) in self.constraints.constraints().iter().enumerate() {
            if Some(i) == barrier_index {
                r.extend_from_slice(ZeroSumVector::centered(&barrier_masses).entries());
            } else {
                r.extend_from_slice(constraint_block(c, &cells, self.body).0.entries());
            }
        }
        r.extend(
            barrier_masses
                .iter()
                .map(|&m| self.penalty_sqrt * (target - m).max(0.0)),
        );
        Some(r)
    }

    pub(crate) fn blocks_done(&self, r: &[f64]) -> bool {
        let n = self.constraints.len() * self.q;
        r[..n].iter().all(|v| v.abs() <= self.tol)
    }
}

/// Random unit slopes, pairwise well apart.
fn random_directions(rng: &mut ChaCha8Rng, q: usize) -> Vec<Point2> {
    loop {
        let dirs: Vec<Point2> = (0..q)
            .map(|_| {
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                Point2::new(t.cos(), t.sin())
            })
            .collect();
        let separated = (0..q).all(|i| (i + 1..q).all(|j| (dirs[i] - dirs[j]).norm() > 1e-3));
        if separated {
            return dirs;
        }
    }
}

pub(crate) fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

pub(crate) struct StartOutcome {
    pub y: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the residual blocks at `y`.
    pub score: f64,
}

/// Runs starts `0..starts` in parallel chunks. Returns the lowest-index
/// converged start of the first chunk containing one, else the start with
/// the smallest score, together with the number of starts run.
pub(crate) fn multistart<F>(starts: usize, run: F) -> (usize, StartOutcome, usize)
where
    F: Fn(usize) -> StartOutcome + Sync,
{
    let mut best: Option<(usize, StartOutcome)> = None;
    let mut starts_used = 0;
    for chunk_start in (0..starts).step_by(CHUNK) {
        let chunk_end = (chunk_start + CHUNK).min(starts);
        let outcomes: Vec<StartOutcome> =
            (chunk_start..chunk_end).into_par_iter().map(&run).collect();
        starts_used = chunk_end;
        if let Some(offset) = outcomes.iter().position(|o| o.converged) {
            let out = outcomes.into_iter().nth(offset).unwrap();
            return (chunk_start + offset, out, starts_used);
        }
        for (offset, out) in outcomes.into_iter().enumerate() {
            if best.as_ref().is_none_or(|(_, b)| out.score < b.score) {
                best = Some((chunk_start + offset, out));
            }
        }
    }
    let (k, out) = best.expect("at least one start");
    (k, out, starts_used)
}

fn run_start(
    body: &ConvexPolygon,
    constraints: &ConstraintSet,
    q: usize,
    cfg: &SolverConfig,
    chart: &Chart,
    start: usize,
) -> StartOutcome {
    let unit = chart.scale;
    // Start 0 uses evenly spaced slopes, the rest are random.
    let dirs = if start == 0 {
        (0..q)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / q as f64;
                Point2::new(t.cos(), t.sin())
            })
            .collect()
    } else {
        random_directions(&mut start_rng(cfg.seed, start), q)
    };
    let dirs: Vec<Point2> = dirs.into_iter().map(|d| d * (1.0 / unit)).collect();
    let fallback;
    let measure = match constraints.first_measure() {
        Some(m) => m,
        None => {
            fallback = AreaMeasure::uniform(body.clone()).expect("nonempty body");
            &fallback
        }
    };
    let offsets = match balance_offsets(body, measure, &dirs, 1e-3 / q as f64, 12) {
        Ok(b) => b,
        Err(Error::NoConvergence { best, .. }) => best,
        Err(_) => vec![0.0; q],
    };
    let family = FunctionFamily::new(
        dirs.iter()
            .zip(&offsets)
            .map(|(a, &b)| AffineFunction2::new(a.x, a.y, b))
            .collect(),
    )
    .expect("finite start");
    let y0 = chart.coords(&family);

    let objective = Objective {
        body,
        constraints,
        q,
        penalty_sqrt: cfg.penalty_for(q).sqrt(),
        tol: cfg.tol,
    };
    let out = levenberg_marquardt(
        y0,
        |y| objective.residual(&chart.family(y)),
        |r| objective.blocks_done(r),
        &cfg.lm_settings(),
    );
    let n = constraints.len() * q;
    let score = out.residual.as_ref().map_or(f64::INFINITY, |r| {
        r[..n].iter().fold(0.0, |m, v| m.max(v.abs()))
    });
    StartOutcome {
        y: out.y,
        iterations: out.iterations,
        converged: out.converged,
        score,
    }
}

fn is_prime_power(q: usize) -> bool {
    if q < 2 {
        return false;
    }
    let p = (2..=q).find(|p| q % p == 0).unwrap();
    let mut r = q;
    while r % p == 0 {
        r /= p;
    }
    r == 1
}

fn report_for(
    body: &ConvexPolygon,
    family: &FunctionFamily,
    constraints: &ConstraintSet,
    cfg: &SolverConfig,
    iterations: usize,
    starts_used: usize,
    warnings: Vec<String>,
) -> Result<(CellSet, SolveReport)> {
    let cells = build_partition(body, family)?;
    let eval = evaluate_cells(body, cells, constraints);
    let blocks: Vec<BlockReport> = constraints
        .constraints()
        .iter()
        .zip(&eval.blocks)
        .map(|(c, b)| BlockReport {
            constraint: c.label(),
            residual: b.entries().to_vec(),
            norm_inf: b.norm_inf(),
        })
        .collect();
    let residual_norm = eval.norm_inf();
    let on_zero_set = constraints
        .constraints()
        .iter()
        .zip(&eval.blocks)
        .filter(|(c, _)| matches!(c, Constraint::Measure(_)))
        .all(|(_, b)| b.norm_inf() <= cfg.tol);
    let status = if residual_norm <= cfg.tol {
        SolveStatus::Converged
    } else {
        SolveStatus::BestEffort
    };
    Ok((
        eval.cells,
        SolveReport {
            status,
            residual_norm,
            iterations,
            starts_used,
            on_zero_set,
            blocks,
            determinacy: constraints.determinacy(),
            warnings,
        },
    ))
}

/// Searches for `q` affine functions whose partition of `body` zeroes every
/// residual block.
///
/// Start 0 uses evenly spaced unit slopes; every other start draws random
/// unit slopes from its own stream of `cfg.seed`. Each start balances the
/// offsets on the first measure constraint and runs Levenberg–Marquardt in
/// gauge coordinates. Non-convergence is reported
/// through the status, never as an error.
pub fn solve_equipartition(
    body: &ConvexPolygon,
    constraints: &ConstraintSet,
    q: usize,
    cfg: &SolverConfig,
) -> Result<Solution> {
    cfg.validate()?;
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    if body.is_empty() {
        return Err(Error::InvalidPolygon("empty body".into()));
    }
    let mut warnings = Vec::new();
    if constraints.determinacy() == Determinacy::Overdetermined {
        warnings.push(format!(
            "{} constraints exceed the 2 available per cell; least-squares solve",
            constraints.len()
        ));
    }
    if q == 1 {
        let family = FunctionFamily::new(vec![AffineFunction2::new(0.0, 0.0, 0.0)])?;
        let (cells, report) = report_for(body, &family, constraints, cfg, 0, 0, warnings)?;
        return Ok(Solution {
            family,
            cells,
            report,
        });
    }
    if !is_prime_power(q) {
        warnings.push(format!(
            "q = {q} is not a prime power; direct solving is experimental, prefer iterated factors"
        ));
    }

    let chart = Chart::new(body, q);
    let (k, chosen, starts_used) = multistart(cfg.multistart, |k| {
        run_start(body, constraints, q, cfg, &chart, k)
    });
    log::debug!("start {k} chosen after {starts_used} starts");
    let family = chart
        .family(&chosen.y)
        .gauge_normalized()
        .unwrap_or_else(|| chart.family(&chosen.y));
    let (cells, report) = report_for(
        body,
        &family,
        constraints,
        cfg,
        chosen.iterations,
        starts_used,
        warnings,
    )?;
    Ok(Solution {
        family,
        cells,
        report,
    })
}

/// A line `normal . x = offset` with unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamSandwichCut {
    pub normal: Point2,
    pub offset: f64,
    /// `masses[i] = [mass of measure i on the side normal . x >= offset, rest]`.
    pub masses: [[f64; 2]; 2],
    pub report: SolveReport,
}

/// A line bisecting both measures on `body`.
pub fn ham_sandwich_2d(
    body: &ConvexPolygon,
    m1: &AreaMeasure,
    m2: &AreaMeasure,
    cfg: &SolverConfig,
) -> Result<HamSandwichCut> {
    let constraints = ConstraintSet::new(vec![
        Constraint::Measure(m1.clone()),
        Constraint::Measure(m2.clone()),
    ])?;
    let sol = solve_equipartition(body, &constraints, 2, cfg)?;
    let [u, v] = [sol.family.members()[0], sol.family.members()[1]];
    let a = u.a - v.a;
    let n = a.norm();
    let normal = a * (1.0 / n);
    let offset = -(u.b - v.b) / n;
    let masses = [m1, m2].map(|m| {
        let pos = m.mass_in_cell(&sol.cells.cells[0]);
        let neg = m.mass_in_cell(&sol.cells.cells[1]);
        [pos, neg]
    });
    Ok(HamSandwichCut {
        normal,
        offset,
        masses,
        report: sol.report,
    })
}
