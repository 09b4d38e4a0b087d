//! Input documents. Every file is read as JSON, dispatched on its `type`
//! field where it has one, and deserialized with path tracking so that
//! problems are reported as JSON pointers.

use std::path::{Path, PathBuf};

use equipart::measures::{
    AreaMeasure, BoundaryDensity, DensityGrid, Interpolation, IntervalMeasure,
};
use equipart::poly::Polynomial1D;
use equipart::residuals::{CenterFunction, CenterMap, Constraint, ConstraintSet, ShapeFunctional};
use equipart::{ConvexPolygon, Point2};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::SCHEMA_VERSION;

#[derive(Debug, thiserror::Error)]
#[error("{}: at '{pointer}': {message}", file.display())]
pub struct InputError {
    pub file: PathBuf,
    pub pointer: String,
    pub message: String,
}

impl InputError {
    pub fn new(file: &Path, pointer: impl Into<String>, message: impl ToString) -> Self {
        InputError {
            file: file.to_path_buf(),
            pointer: pointer.into(),
            message: message.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, InputError>;

/// A parsed JSON file.
pub struct Doc {
    pub path: PathBuf,
    pub value: Value,
}

impl Doc {
    pub fn read(path: &Path) -> Result<Doc> {
        let text = std::fs::read_to_string(path).map_err(|e| InputError::new(path, "", e))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| InputError::new(path, "", e))?;
        if !value.is_object() {
            return Err(InputError::new(path, "", "expected a JSON object"));
        }
        match value.get("schema_version") {
            None => {}
            Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
            Some(v) => {
                return Err(InputError::new(
                    path,
                    "/schema_version",
                    format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}"),
                ))
            }
        }
        Ok(Doc {
            path: path.to_path_buf(),
            value,
        })
    }

    fn err(&self, pointer: impl Into<String>, message: impl ToString) -> InputError {
        InputError::new(&self.path, pointer, message)
    }

    /// Deserializes the value at `pointer`.
    fn typed<T: DeserializeOwned>(&self, pointer: &str) -> Result<T> {
        let value = self
            .value
            .pointer(pointer)
            .cloned()
            .ok_or_else(|| self.err(pointer, "missing"))?;
        serde_path_to_error::deserialize(value).map_err(|e| {
            let inner = to_pointer(e.path());
            self.err(format!("{pointer}{inner}"), e.into_inner())
        })
    }

    fn kind(&self, pointer: &str) -> Result<String> {
        let at = format!("{pointer}/type");
        match self.value.pointer(&at) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(self.err(at, "expected a string")),
            None => Err(self.err(pointer, "missing field `type`")),
        }
    }
}

fn to_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    out
}

fn point(p: [f64; 2]) -> Point2 {
    Point2::new(p[0], p[1])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct PolygonDoc {
    schema_version: Option<u32>,
    vertices: Vec<[f64; 2]>,
}

fn polygon_at(doc: &Doc, pointer: &str) -> Result<ConvexPolygon> {
    let raw: Vec<[f64; 2]> = doc.typed(pointer)?;
    ConvexPolygon::new(raw.into_iter().map(point).collect()).map_err(|e| doc.err(pointer, e))
}

pub fn load_polygon(path: &Path) -> Result<ConvexPolygon> {
    let doc = Doc::read(path)?;
    let _: PolygonDoc = doc.typed("")?;
    polygon_at(&doc, "/vertices")
}

pub enum MeasureInput {
    Area(AreaMeasure),
    Boundary(BoundaryDensity),
    Interval(IntervalMeasure),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct GridDoc {
    schema_version: Option<u32>,
    r#type: String,
    origin: [f64; 2],
    spacing: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct UniformDoc {
    schema_version: Option<u32>,
    r#type: String,
    vertices: Option<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct PointsDoc {
    schema_version: Option<u32>,
    r#type: String,
    points: Vec<[f64; 2]>,
    #[serde(default = "default_resolution")]
    resolution: usize,
    bandwidth: Option<f64>,
}

fn default_resolution() -> usize {
    128
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct BoundaryDoc {
    schema_version: Option<u32>,
    r#type: String,
    knots: Option<Vec<f64>>,
    values: Option<Vec<f64>>,
    interpolation: Option<Interpolation>,
    edges: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct IntervalDoc {
    schema_version: Option<u32>,
    r#type: String,
    density: Option<Vec<f64>>,
    breaks: Option<Vec<f64>>,
    pieces: Option<Vec<Vec<f64>>>,
}

/// Reads a measure file. Area and boundary measures need the body they
/// live on; interval measures are on `[0, 1]`.
pub fn load_measure(path: &Path, body: Option<&ConvexPolygon>) -> Result<MeasureInput> {
    let doc = Doc::read(path)?;
    let kind = doc.kind("")?;
    let need_body =
        || body.ok_or_else(|| doc.err("/type", format!("`{kind}` measures need a body")));
    match kind.as_str() {
        "grid" => {
            let g: GridDoc = doc.typed("")?;
            let pointer = if g.values.len() != g.nx * g.ny {
                "/values"
            } else {
                ""
            };
            let grid = DensityGrid::new(point(g.origin), g.spacing, g.nx, g.ny, g.values)
                .map_err(|e| doc.err(pointer, e))?;
            let grid = match body {
                Some(b) => grid.restricted_to(b).map_err(|e| doc.err("", e))?,
                None => return Err(doc.err("/type", "`grid` measures need a body")),
            };
            Ok(MeasureInput::Area(AreaMeasure::Grid(grid)))
        }
        "uniform" => {
            let u: UniformDoc = doc.typed("")?;
            let body = need_body()?;
            let region = match u.vertices {
                Some(_) => {
                    let r = polygon_at(&doc, "/vertices")?;
                    equipart::geometry::intersect(&r, body)
                }
                None => body.clone(),
            };
            AreaMeasure::uniform(region)
                .map(MeasureInput::Area)
                .map_err(|e| doc.err("/vertices", e))
        }
        "points" => {
            let p: PointsDoc = doc.typed("")?;
            let body = need_body()?;
            let pts: Vec<Point2> = p.points.into_iter().map(point).collect();
            if p.resolution == 0 {
                return Err(doc.err("/resolution", "must be at least 1"));
            }
            DensityGrid::from_points(&pts, body, p.resolution, p.bandwidth)
                .map(|g| MeasureInput::Area(AreaMeasure::Grid(g)))
                .map_err(|e| doc.err("/points", e))
        }
        "boundary" => {
            let b: BoundaryDoc = doc.typed("")?;
            let body = need_body()?;
            let density = match (b.knots, b.values, b.edges) {
                (Some(knots), Some(values), None) => BoundaryDensity::new(
                    knots,
                    values,
                    b.interpolation.unwrap_or(Interpolation::Constant),
                )
                .map_err(|e| doc.err("/knots", e))?,
                (None, None, Some(edges)) => {
                    BoundaryDensity::on_edges(body, &edges).map_err(|e| doc.err("/edges", e))?
                }
                (None, None, None) => BoundaryDensity::uniform(body).map_err(|e| doc.err("", e))?,
                _ => {
                    return Err(doc.err(
                        "",
                        "give either `knots` with `values`, or `edges`, or neither",
                    ))
                }
            };
            Ok(MeasureInput::Boundary(density))
        }
        "interval" => {
            let i: IntervalDoc = doc.typed("")?;
            let m = match (i.density, i.breaks, i.pieces) {
                (Some(c), None, None) => IntervalMeasure::from_polynomial(Polynomial1D::new(c))
                    .map_err(|e| doc.err("/density", e))?,
                (None, Some(breaks), Some(pieces)) => IntervalMeasure::new(
                    breaks,
                    pieces.into_iter().map(Polynomial1D::new).collect(),
                )
                .map_err(|e| doc.err("/pieces", e))?,
                (None, None, None) => IntervalMeasure::uniform(),
                _ => {
                    return Err(doc.err(
                        "",
                        "give either `density`, or `breaks` with `pieces`, or neither",
                    ))
                }
            };
            Ok(MeasureInput::Interval(m))
        }
        other => Err(doc.err("/type", format!("unknown measure type `{other}`"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct ConstraintsDoc {
    schema_version: Option<u32>,
    constraints: Vec<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct MeasureRef {
    r#type: String,
    index: usize,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum FunctionalName {
    Area,
    Perimeter,
    Steiner0,
    Steiner1,
    Steiner2,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct FunctionalRef {
    r#type: String,
    name: FunctionalName,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct CenterRef {
    r#type: String,
    #[serde(default = "unit_x")]
    a: [f64; 2],
    #[serde(default)]
    b: f64,
}

fn unit_x() -> [f64; 2] {
    [1.0, 0.0]
}

/// Reads an ordered constraint list. `measure` entries refer to the
/// measure files by position.
pub fn load_constraints(path: &Path, measures: &[MeasureInput]) -> Result<ConstraintSet> {
    let doc = Doc::read(path)?;
    let list: ConstraintsDoc = doc.typed("")?;
    let mut out = Vec::with_capacity(list.constraints.len());
    for i in 0..list.constraints.len() {
        let at = format!("/constraints/{i}");
        let c = match doc.kind(&at)?.as_str() {
            "measure" => {
                let r: MeasureRef = doc.typed(&at)?;
                match measures.get(r.index) {
                    Some(MeasureInput::Area(m)) => Constraint::Measure(m.clone()),
                    Some(MeasureInput::Boundary(b)) => Constraint::Boundary(b.clone()),
                    Some(MeasureInput::Interval(_)) => {
                        return Err(doc.err(
                            format!("{at}/index"),
                            "interval measures only apply to necklaces",
                        ))
                    }
                    None => {
                        return Err(doc.err(
                            format!("{at}/index"),
                            format!("only {} measure files were given", measures.len()),
                        ))
                    }
                }
            }
            "functional" => {
                let f: FunctionalRef = doc.typed(&at)?;
                Constraint::Functional(match f.name {
                    FunctionalName::Area => ShapeFunctional::Area,
                    FunctionalName::Perimeter => ShapeFunctional::Perimeter,
                    FunctionalName::Steiner0 => ShapeFunctional::Steiner(0),
                    FunctionalName::Steiner1 => ShapeFunctional::Steiner(1),
                    FunctionalName::Steiner2 => ShapeFunctional::Steiner(2),
                })
            }
            "center" => {
                let c: CenterRef = doc.typed(&at)?;
                Constraint::Center(CenterMap::new(CenterFunction::Linear {
                    a: point(c.a),
                    b: c.b,
                }))
            }
            other => {
                return Err(doc.err(
                    format!("{at}/type"),
                    format!("unknown constraint type `{other}`"),
                ))
            }
        };
        out.push(c);
    }
    ConstraintSet::new(out).map_err(|e| doc.err("/constraints", e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct PolyFamilyDoc {
    schema_version: Option<u32>,
    polys: Vec<Vec<f64>>,
    interval: [f64; 2],
}

/// Polynomials on an interval, as `(polys, lo, hi)`.
pub fn load_poly_family(path: &Path) -> Result<(Vec<Polynomial1D>, f64, f64)> {
    let doc = Doc::read(path)?;
    let f: PolyFamilyDoc = doc.typed("")?;
    if f.polys.is_empty() {
        return Err(doc.err("/polys", "need at least one polynomial"));
    }
    if let Some(i) = f.polys.iter().position(|p| p.is_empty()) {
        return Err(doc.err(format!("/polys/{i}"), "need at least one coefficient"));
    }
    let [lo, hi] = f.interval;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(doc.err("/interval", "need a finite interval with lo < hi"));
    }
    Ok((f.polys.into_iter().map(Polynomial1D::new).collect(), lo, hi))
}
