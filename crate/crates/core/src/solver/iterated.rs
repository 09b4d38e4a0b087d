//! Composite numbers of parts by repeated splitting of each cell.

use serde::{Deserialize, Serialize};

use super::{solve_equipartition, SolveReport, SolveStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, FunctionFamily};
use crate::measures::AreaMeasure;
use crate::residuals::{Constraint, ConstraintSet};

#[derive(Clone, Debug)]
pub struct IteratedPartition {
    /// Final cells; the children of one parent are contiguous.
    pub cells: Vec<ConvexPolygon>,
    /// One entry per solved sub-problem, level by level.
    pub nodes: Vec<IteratedNode>,
    pub status: SolveStatus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IteratedNode {
    pub level: usize,
    /// Position of the parent cell among the cells of the previous level.
    pub parent: usize,
    pub seed: u64,
    pub family: FunctionFamily,
    pub report: SolveReport,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the sub-problem at `(level, parent)`; the root keeps `seed`.
fn node_seed(seed: u64, level: usize, parent: usize) -> u64 {
    if level == 0 {
        seed
    } else {
        splitmix(seed ^ splitmix(((level as u64) << 32) | parent as u64))
    }
}

/// Constraints of `constraints` (given on `body`) transferred to `sub`.
fn restrict(
    constraints: &ConstraintSet,
    body: &ConvexPolygon,
    sub: &ConvexPolygon,
) -> Result<ConstraintSet> {
    let mut out = Vec::new();
    for c in constraints.constraints() {
        match c {
            Constraint::Measure(m) => {
                if let Some(r) = m.restricted_to(sub) {
                    out.push(Constraint::Measure(r));
                }
            }
            Constraint::Boundary(sigma) => {
                if let Some(r) = sigma.restricted_to(body, sub) {
                    out.push(Constraint::Boundary(r));
                }
            }
            _ => unreachable!("checked by solve_iterated"),
        }
    }
    if out.is_empty() {
        out.push(Constraint::Measure(AreaMeasure::uniform(sub.clone())?));
    }
    ConstraintSet::new(out)
}

/// Splits `body` into `q_factors[0]` parts, each of those into
/// `q_factors[1]` parts, and so on, restricting and renormalizing the
/// measures to each parent cell. Only measure and boundary constraints
/// compose across levels; any other constraint is rejected.
pub fn solve_iterated(
    body: &ConvexPolygon,
    constraints: &ConstraintSet,
    q_factors: &[usize],
    cfg: &SolverConfig,
) -> Result<IteratedPartition> {
    cfg.validate()?;
    for (index, c) in constraints.constraints().iter().enumerate() {
        if matches!(c, Constraint::Functional(_) | Constraint::Center(_)) {
            return Err(Error::NonComposable {
                index,
                reason: format!(
                    "{} constraints are not preserved by splitting parts separately",
                    c.kind()
                ),
            });
        }
    }
    if q_factors.is_empty() || q_factors.iter().any(|&f| f < 2) {
        return Err(Error::InvalidInput(
            "every factor must be at least 2".into(),
        ));
    }

    let mut level_cells = vec![(body.clone(), constraints.clone())];
    let mut nodes = Vec::new();
    let mut status = SolveStatus::Converged;
    for (level, &factor) in q_factors.iter().enumerate() {
        let mut next = Vec::with_capacity(level_cells.len() * factor);
        for (parent, (cell, set)) in level_cells.iter().enumerate() {
            let seed = node_seed(cfg.seed, level, parent);
            let sub_cfg = SolverConfig {
                seed,
                ..cfg.clone()
            };
            let sol = solve_equipartition(cell, set, factor, &sub_cfg)?;
            if sol.report.status != SolveStatus::Converged {
                status = SolveStatus::BestEffort;
            }
            let last = level + 1 == q_factors.len();
            for child in sol.cells.iter() {
                let child_set = if last || child.is_empty() {
                    set.clone()
                } else {
                    restrict(set, cell, child)?
                };
                next.push((child.clone(), child_set));
            }
            nodes.push(IteratedNode {
                level,
                parent,
                seed,
                family: sol.family,
                report: sol.report,
            });
        }
        level_cells = next;
    }
    Ok(IteratedPartition {
        cells: level_cells.into_iter().map(|(c, _)| c).collect(),
        nodes,
        status,
    })
}
