//! Stacked, relabeling-equivariant residual maps whose common zero is an
//! equipartition.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_partition, CellSet, ConvexPolygon, FunctionFamily, Point2};
use crate::measures::{boundary_mass, AreaMeasure, BoundaryDensity};

/// A real vector with zero coordinate sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZeroSumVector(Vec<f64>);

impl ZeroSumVector {
    /// Subtracts the mean. The mean is formed from differences to the first
    /// entry, so constant input gives exact zeros, and the last entry absorbs
    /// rounding so the left-to-right sum is exactly zero.
    pub fn centered(values: &[f64]) -> Self {
        let q = values.len();
        if q == 0 {
            return ZeroSumVector(Vec::new());
        }
        let base = values[0];
        let shift = values.iter().map(|v| v - base).sum::<f64>() / q as f64;
        let mean = base + shift;
        let mut entries: Vec<f64> = values.iter().map(|v| v - mean).collect();
        let head: f64 = entries[..q - 1].iter().sum();
        entries[q - 1] = -head;
        ZeroSumVector(entries)
    }

    /// Wraps `entries` if they sum to zero within `1e-12`.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let sum: f64 = entries.iter().sum();
        if sum.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "entries sum to {sum:e}, not zero"
            )));
        }
        Ok(ZeroSumVector(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// A continuous function of convex bodies. Every kind evaluates to 0 on an
/// empty cell.
#[derive(Clone)]
pub enum ShapeFunctional {
    Area,
    Perimeter,
    /// Coefficient of `t^i` in `area(K + tB)`, `i` in `0..=2`.
    Steiner(usize),
    Custom {
        name: String,
        f: Arc<dyn Fn(&ConvexPolygon) -> f64 + Send + Sync>,
    },
}

impl ShapeFunctional {
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&ConvexPolygon) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ShapeFunctional::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, cell: &ConvexPolygon) -> f64 {
        if cell.is_empty() {
            return 0.0;
        }
        match self {
            ShapeFunctional::Area => cell.area(),
            ShapeFunctional::Perimeter => cell.perimeter(),
            ShapeFunctional::Steiner(i) => {
                cell.steiner_coefficients().get(*i).copied().unwrap_or(0.0)
            }
            ShapeFunctional::Custom { f, .. } => f(cell),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ShapeFunctional::Area => "area".into(),
            ShapeFunctional::Perimeter => "perimeter".into(),
            ShapeFunctional::Steiner(i) => format!("steiner{i}"),
            ShapeFunctional::Custom { name, .. } => name.clone(),
        }
    }
}

impl fmt::Debug for ShapeFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ShapeFunctional({})", self.name())
    }
}

/// Scalar function applied to cell centroids.
#[derive(Clone)]
pub enum CenterFunction {
    /// `p -> a . p + b`; `a = 0` gives the constant map.
    Linear { a: Point2, b: f64 },
    Custom {
        name: String,
        h: Arc<dyn Fn(Point2) -> f64 + Send + Sync>,
    },
}

impl CenterFunction {
    pub fn x() -> Self {
        CenterFunction::Linear {
            a: Point2::new(1.0, 0.0),
            b: 0.0,
        }
    }

    pub fn y() -> Self {
        CenterFunction::Linear {
            a: Point2::new(0.0, 1.0),
            b: 0.0,
        }
    }

    pub fn eval(&self, p: Point2) -> f64 {
        match self {
            CenterFunction::Linear { a, b } => a.dot(p) + b,
            CenterFunction::Custom { h, .. } => h(p),
        }
    }
}

impl fmt::Debug for CenterFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CenterFunction::Linear { a, b } => write!(f, "Linear({}, {}, {b})", a.x, a.y),
            CenterFunction::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Centroid of each cell composed with a scalar function `h`.
#[derive(Clone, Debug)]
pub struct CenterMap {
    pub h: CenterFunction,
}

impl CenterMap {
    pub fn new(h: CenterFunction) -> Self {
        CenterMap { h }
    }
}

#[derive(Clone, Debug)]
pub enum Constraint {
    Measure(AreaMeasure),
    Functional(ShapeFunctional),
    Boundary(BoundaryDensity),
    Center(CenterMap),
}

impl Constraint {
    pub fn kind(&self) -> &'static str {
        match self {
            Constraint::Measure(_) => "measure",
            Constraint::Functional(_) => "functional",
            Constraint::Boundary(_) => "boundary",
            Constraint::Center(_) => "center",
        }
    }

    pub fn label(&self) -> String {
        match self {
            Constraint::Functional(f) => format!("functional:{}", f.name()),
            other => other.kind().to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Determinacy {
    Underdetermined,
    Exact,
    Overdetermined,
}

/// Residual constraints in block order.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<Constraint>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::InvalidInput(
                "at least one constraint is required".into(),
            ));
        }
        let centers = constraints
            .iter()
            .filter(|c| matches!(c, Constraint::Center(_)))
            .count();
        if centers > 1 {
            return Err(Error::InvalidInput(
                "at most one center map coordinate is supported in the plane".into(),
            ));
        }
        if centers == 1
            && !constraints
                .iter()
                .any(|c| matches!(c, Constraint::Measure(_)))
        {
            return Err(Error::InvalidInput(
                "a center map needs at least one measure constraint".into(),
            ));
        }
        let set = ConstraintSet { constraints };
        if set.determinacy() == Determinacy::Overdetermined {
            log::warn!(
                "{} constraints for 2 degrees of freedom per cell; solving in the least-squares sense",
                set.len()
            );
        }
        Ok(set)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn determinacy(&self) -> Determinacy {
        match self.constraints.len() {
            0 | 1 => Determinacy::Underdetermined,
            2 => Determinacy::Exact,
            _ => Determinacy::Overdetermined,
        }
    }

    /// The first area measure, if any.
    pub fn first_measure(&self) -> Option<&AreaMeasure> {
        self.constraints.iter().find_map(|c| match c {
            Constraint::Measure(m) => Some(m),
            _ => None,
        })
    }
}

/// `mass(V_j)` centered over cells; equals `mass(V_j) - 1/q` for a
/// probability measure supported in the body.
pub fn measure_residual(m: &AreaMeasure, cells: &CellSet) -> ZeroSumVector {
    let masses: Vec<f64> = cells.iter().map(|c| m.mass_in_cell(c)).collect();
    ZeroSumVector::centered(&masses)
}

pub fn functional_residual(phi: &ShapeFunctional, cells: &CellSet) -> ZeroSumVector {
    let values: Vec<f64> = cells.iter().map(|c| phi.eval(c)).collect();
    ZeroSumVector::centered(&values)
}

pub fn boundary_residual(
    sigma: &BoundaryDensity,
    cells: &CellSet,
    body: &ConvexPolygon,
) -> ZeroSumVector {
    let masses: Vec<f64> = cells
        .iter()
        .map(|c| boundary_mass(sigma, c, body))
        .collect();
    ZeroSumVector::centered(&masses)
}

/// Centered `h(centroid(V_j))`. An empty cell takes the mean value of the
/// nonempty ones and the returned flag is set.
pub fn center_residual(cm: &CenterMap, cells: &CellSet) -> (ZeroSumVector, bool) {
    let values: Vec<Option<f64>> = cells
        .iter()
        .map(|c| c.centroid().map(|p| cm.h.eval(p)))
        .collect();
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let empty = present.len() < values.len();
    let fill = if present.is_empty() {
        0.0
    } else {
        present.iter().sum::<f64>() / present.len() as f64
    };
    let filled: Vec<f64> = values.iter().map(|v| v.unwrap_or(fill)).collect();
    (ZeroSumVector::centered(&filled), empty)
}

/// Residual blocks of one configuration, in constraint order.
#[derive(Clone, Debug)]
pub struct ResidualEvaluation {
    pub cells: CellSet,
    pub blocks: Vec<ZeroSumVector>,
    pub any_empty: bool,
}

impl ResidualEvaluation {
    /// Concatenation of all blocks (length `m * q`).
    pub fn flat(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| b.entries().iter().copied())
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, b| m.max(b.norm_inf()))
    }
}

pub fn evaluate(
    body: &ConvexPolygon,
    family: &FunctionFamily,
    constraints: &ConstraintSet,
) -> Result<ResidualEvaluation> {
    let cells = build_partition(body, family)?;
    Ok(evaluate_cells(body, cells, constraints))
}

pub(crate) fn evaluate_cells(
    body: &ConvexPolygon,
    cells: CellSet,
    constraints: &ConstraintSet,
) -> ResidualEvaluation {
    let mut any_empty = cells.any_empty();
    let blocks = constraints
        .constraints()
        .iter()
        .map(|c| {
            let (v, empty) = constraint_block(c, &cells, body);
            any_empty |= empty;
            v
        })
        .collect();
    ResidualEvaluation {
        cells,
        blocks,
        any_empty,
    }
}

/// Residual block of one constraint, and whether an empty cell had to be
/// filled in.
pub(crate) fn constraint_block(
    c: &Constraint,
    cells: &CellSet,
    body: &ConvexPolygon,
) -> (ZeroSumVector, bool) {
    match c {
        Constraint::Measure(m) => (measure_residual(m, cells), false),
        Constraint::Functional(phi) => (functional_residual(phi, cells), false),
        Constraint::Boundary(sigma) => (boundary_residual(sigma, cells, body), false),
        Constraint::Center(cm) => center_residual(cm, cells),
    }
}

/// Flat stacked residual of length `m * q`.
pub fn total_residual(
    body: &ConvexPolygon,
    family: &FunctionFamily,
    constraints: &ConstraintSet,
) -> Result<Vec<f64>> {
    evaluate(body, family, constraints).map(|e| e.flat())
}
