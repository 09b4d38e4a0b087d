//! Planar convex geometry: polygons, affine function families and the
//! generalized Voronoi partition they induce on a convex body.
//!
//! A family `u_1, ..., u_q` of affine functions partitions a convex polygon
//! `C` into the cells `V_j = { x in C : u_j(x) >= u_l(x) for all l }`. Each
//! cell is `C` clipped by the `q - 1` halfplanes `u_j - u_l >= 0`, so every
//! cell is convex and the cells tile `C` up to their shared edges.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convexity slack on normalized cross products of consecutive edges.
pub const EPS_GEOM: f64 = 1e-9;
/// Minimal separation `|a_i - a_j| + |b_i - b_j|` between family members.
pub const EPS_SEP: f64 = 1e-8;
/// Cells with less than this fraction of the body's area are reported empty.
pub const SLIVER_FRACTION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// A convex polygon with counterclockwise vertices, or the empty polygon.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub const EMPTY: ConvexPolygon = ConvexPolygon {
        vertices: Vec::new(),
    };

    /// Validates and orients a vertex list. Clockwise input is reversed.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon(format!("vertex {i} is not finite")));
        }
        let mut poly = ConvexPolygon { vertices };
        let signed = poly.signed_area();
        if signed == 0.0 {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        if signed < 0.0 {
            poly.vertices.reverse();
        }
        if let Some(i) = poly.convexity_violation(EPS_GEOM) {
            return Err(Error::InvalidPolygon(format!("not convex at vertex {i}")));
        }
        Ok(poly)
    }

    pub(crate) fn from_raw(vertices: Vec<Point2>) -> Self {
        ConvexPolygon { vertices }
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        ConvexPolygon::from_raw(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0)
    }

    /// Regular `k`-gon inscribed in the circle of given center and radius,
    /// with vertex 0 at angle `phase`.
    pub fn regular(k: usize, center: Point2, radius: f64, phase: f64) -> Self {
        assert!(k >= 3, "regular polygon needs k >= 3");
        let vertices = (0..k)
            .map(|i| {
                let t = phase + 2.0 * PI * i as f64 / k as f64;
                Point2::new(center.x + radius * t.cos(), center.y + radius * t.sin())
            })
            .collect();
        ConvexPolygon::from_raw(vertices)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// Edges as `(start, end)` pairs in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        // Shoelace relative to vertex 0 to limit cancellation.
        let o = self.vertices[0];
        let mut twice = 0.0;
        for i in 1..n - 1 {
            twice += (self.vertices[i] - o).cross(self.vertices[i + 1] - o);
        }
        0.5 * twice
    }

    pub fn area(&self) -> f64 {
        self.signed_area().max(0.0)
    }

    pub fn perimeter(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.edges().map(|(p, q)| (q - p).norm()).sum()
    }

    /// Area centroid; `None` for the empty polygon.
    pub fn centroid(&self) -> Option<Point2> {
        let n = self.vertices.len();
        if n < 3 {
            return None;
        }
        let o = self.vertices[0];
        let (mut cx, mut cy, mut twice) = (0.0, 0.0, 0.0);
        for i in 1..n - 1 {
            let p = self.vertices[i] - o;
            let q = self.vertices[i + 1] - o;
            let w = p.cross(q);
            twice += w;
            cx += w * (p.x + q.x);
            cy += w * (p.y + q.y);
        }
        if twice <= 0.0 {
            return None;
        }
        Some(Point2::new(
            o.x + cx / (3.0 * twice),
            o.y + cy / (3.0 * twice),
        ))
    }

    /// Coefficients `(A, P, pi)` of the Steiner polynomial
    /// `area(K + tB) = A + P t + pi t^2`; all zero for the empty polygon.
    pub fn steiner_coefficients(&self) -> [f64; 3] {
        if self.is_empty() {
            return [0.0; 3];
        }
        [self.area(), self.perimeter(), PI]
    }

    pub fn bounding_box(&self) -> Option<(Point2, Point2)> {
        let first = *self.vertices.first()?;
        let (mut lo, mut hi) = (first, first);
        for p in &self.vertices[1..] {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        Some((lo, hi))
    }

    fn scale(&self) -> f64 {
        match self.bounding_box() {
            Some((lo, hi)) => (hi - lo).norm().max(f64::MIN_POSITIVE),
            None => 0.0,
        }
    }

    /// Index of the first vertex whose turn is clockwise beyond `eps`
    /// (normalized by the adjacent edge lengths).
    pub fn convexity_violation(&self, eps: f64) -> Option<usize> {
        let n = self.vertices.len();
        (0..n).find(|&i| {
            let prev = self.vertices[(i + n - 1) % n];
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let e0 = cur - prev;
            let e1 = next - cur;
            let denom = e0.norm() * e1.norm();
            denom > 0.0 && e0.cross(e1) / denom < -eps
        })
    }

    pub fn contains(&self, p: Point2, eps: f64) -> bool {
        !self.is_empty()
            && self.edges().all(|(a, b)| {
                let e = b - a;
                e.cross(p - a) >= -eps * e.norm()
            })
    }

    /// Same polygon up to the choice of starting vertex.
    pub fn approx_eq(&self, other: &ConvexPolygon, tol: f64) -> bool {
        if self.len() != other.len() {
            return false;
        }
        if self.is_empty() {
            return true;
        }
        let n = self.len();
        let close = |p: Point2, q: Point2| (p.x - q.x).abs() <= tol && (p.y - q.y).abs() <= tol;
        (0..n).any(|shift| (0..n).all(|i| close(self.vertices[i], other.vertices[(i + shift) % n])))
    }

    pub fn translated(&self, by: Point2) -> ConvexPolygon {
        ConvexPolygon::from_raw(self.vertices.iter().map(|&p| p + by).collect())
    }
}

/// Clips `poly` to the halfplane `{x : a.x + b >= 0}`.
pub fn halfplane_clip(poly: &ConvexPolygon, a: Point2, b: f64) -> ConvexPolygon {
    let n = poly.len();
    if n == 0 {
        return ConvexPolygon::EMPTY;
    }
    let dist: Vec<f64> = poly.vertices.iter().map(|&p| a.dot(p) + b).collect();
    if dist.iter().all(|&d| d >= 0.0) {
        return poly.clone();
    }
    if dist.iter().all(|&d| d <= 0.0) {
        return ConvexPolygon::EMPTY;
    }
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (p, dp) = (poly.vertices[i], dist[i]);
        let (q, dq) = (poly.vertices[j], dist[j]);
        if dp >= 0.0 {
            out.push(p);
        }
        if (dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    finish_clip(out, poly.scale())
}

fn finish_clip(mut pts: Vec<Point2>, scale: f64) -> ConvexPolygon {
    let tol = 1e-14 * scale;
    pts.dedup_by(|q, p| (q.x - p.x).abs() <= tol && (q.y - p.y).abs() <= tol);
    while pts.len() > 1 {
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        if (first.x - last.x).abs() <= tol && (first.y - last.y).abs() <= tol {
            pts.pop();
        } else {
            break;
        }
    }
    let poly = ConvexPolygon::from_raw(pts);
    if poly.len() < 3 || poly.signed_area() <= 0.0 {
        ConvexPolygon::EMPTY
    } else {
        poly
    }
}

/// Intersection of two convex polygons.
pub fn intersect(subject: &ConvexPolygon, clip: &ConvexPolygon) -> ConvexPolygon {
    let mut out = subject.clone();
    for (p, q) in clip.edges() {
        if out.is_empty() {
            break;
        }
        // Left side of the directed edge p -> q.
        let e = q - p;
        let a = Point2::new(-e.y, e.x);
        out = halfplane_clip(&out, a, -a.dot(p));
    }
    out
}

/// `u(x) = a . x + b`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineFunction2 {
    pub a: Point2,
    pub b: f64,
}

impl AffineFunction2 {
    pub const fn new(ax: f64, ay: f64, b: f64) -> Self {
        Self {
            a: Point2::new(ax, ay),
            b,
        }
    }

    pub fn eval(&self, p: Point2) -> f64 {
        self.a.dot(p) + self.b
    }

    fn separation(&self, other: &AffineFunction2) -> f64 {
        (self.a - other.a).norm() + (self.b - other.b).abs()
    }

    fn total_cmp(&self, other: &AffineFunction2) -> Ordering {
        self.a
            .x
            .total_cmp(&other.a.x)
            .then(self.a.y.total_cmp(&other.a.y))
            .then(self.b.total_cmp(&other.b))
    }
}

/// An ordered family of `q` affine functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionFamily {
    members: Vec<AffineFunction2>,
}

impl FunctionFamily {
    pub fn new(members: Vec<AffineFunction2>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("function family is empty".into()));
        }
        if let Some(i) = members
            .iter()
            .position(|m| !(m.a.is_finite() && m.b.is_finite()))
        {
            return Err(Error::InvalidInput(format!("member {i} is not finite")));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[AffineFunction2] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn check_distinct(&self) -> Result<()> {
        for i in 0..self.members.len() {
            for j in i + 1..self.members.len() {
                if self.members[i].separation(&self.members[j]) <= EPS_SEP {
                    return Err(Error::DegenerateFamily {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(())
    }

    /// Index of the maximizing member at `p`; ties go to the lower index.
    pub fn argmax(&self, p: Point2) -> usize {
        let mut best = 0;
        let mut best_val = self.members[0].eval(p);
        for (i, m) in self.members.iter().enumerate().skip(1) {
            let v = m.eval(p);
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        best
    }

    /// Member `i` of the result is member `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> FunctionFamily {
        FunctionFamily {
            members: perm.iter().map(|&i| self.members[i]).collect(),
        }
    }

    /// Adds the common function `common` to every member and scales by `scale`.
    pub fn gauge_transformed(&self, common: AffineFunction2, scale: f64) -> FunctionFamily {
        FunctionFamily {
            members: self
                .members
                .iter()
                .map(|m| AffineFunction2 {
                    a: (m.a + common.a) * scale,
                    b: (m.b + common.b) * scale,
                })
                .collect(),
        }
    }

    /// The representative with zero-sum gradients and offsets and unit total
    /// squared norm. `None` when all members coincide (or `q = 1`).
    pub fn gauge_normalized(&self) -> Option<FunctionFamily> {
        let q = self.members.len() as f64;
        let mean_a = self.members.iter().fold(Point2::default(), |s, m| s + m.a) * (1.0 / q);
        let mean_b = self.members.iter().map(|m| m.b).sum::<f64>() / q;
        let centered: Vec<_> = self
            .members
            .iter()
            .map(|m| AffineFunction2 {
                a: m.a - mean_a,
                b: m.b - mean_b,
            })
            .collect();
        let norm = centered
            .iter()
            .map(|m| m.a.dot(m.a) + m.b * m.b)
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        Some(FunctionFamily {
            members: centered
                .into_iter()
                .map(|m| AffineFunction2 {
                    a: m.a * (1.0 / norm),
                    b: m.b / norm,
                })
                .collect(),
        })
    }

    /// Largest violation of the gauge conditions (zero sums, unit norm).
    pub fn gauge_defect(&self) -> f64 {
        let sa = self.members.iter().fold(Point2::default(), |s, m| s + m.a);
        let sb: f64 = self.members.iter().map(|m| m.b).sum();
        let norm2: f64 = self.members.iter().map(|m| m.a.dot(m.a) + m.b * m.b).sum();
        sa.x.abs()
            .max(sa.y.abs())
            .max(sb.abs())
            .max((norm2 - 1.0).abs())
    }
}

/// The cells of a generalized Voronoi partition; cell `j` belongs to member `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSet {
    pub cells: Vec<ConvexPolygon>,
}

impl CellSet {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ConvexPolygon> {
        self.cells.iter()
    }

    pub fn any_empty(&self) -> bool {
        self.cells.iter().any(ConvexPolygon::is_empty)
    }
}

/// Cell `j` is `body` clipped by `u_j - u_l >= 0` for every `l != j`.
///
/// The halfplanes of a cell are applied in a canonical order that depends
/// only on the functions, not on their labels, so relabeling the family
/// permutes the output cells bit for bit.
pub fn build_partition(body: &ConvexPolygon, family: &FunctionFamily) -> Result<CellSet> {
    family.check_distinct()?;
    let members = family.members();
    let sliver = SLIVER_FRACTION * body.area();
    let cells = members
        .iter()
        .enumerate()
        .map(|(j, uj)| {
            let mut others: Vec<&AffineFunction2> = members
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != j)
                .map(|(_, ul)| ul)
                .collect();
            others.sort_by(|x, y| x.total_cmp(y));
            let mut cell = body.clone();
            for ul in others {
                if cell.is_empty() {
                    break;
                }
                cell = halfplane_clip(&cell, uj.a - ul.a, uj.b - ul.b);
            }
            if cell.area() < sliver {
                ConvexPolygon::EMPTY
            } else {
                cell
            }
        })
        .collect();
    Ok(CellSet { cells })
}

/// The part of `boundary(C)` inside a cell, as intervals of the arc-length
/// parameter of `C` (starting at vertex 0, counterclockwise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPortion {
    pub arcs: Vec<(f64, f64)>,
    pub length: f64,
}

/// Arc-length parameter of each vertex of `body`, with the perimeter appended.
pub fn arc_length_knots(body: &ConvexPolygon) -> Vec<f64> {
    let mut knots = Vec::with_capacity(body.len() + 1);
    let mut s = 0.0;
    knots.push(0.0);
    for (p, q) in body.edges() {
        s += (q - p).norm();
        knots.push(s);
    }
    knots
}

pub fn boundary_portion(body: &ConvexPolygon, cell: &ConvexPolygon) -> BoundaryPortion {
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    if body.is_empty() || cell.is_empty() {
        return BoundaryPortion { arcs, length: 0.0 };
    }
    let tol = 1e-10 * body.scale();
    let knots = arc_length_knots(body);
    let perimeter = knots[knots.len() - 1];
    let merge_tol = 1e-12 * perimeter;
    let cell_edges: Vec<(Point2, Point2, f64)> = cell
        .edges()
        .map(|(c0, c1)| (c0, c1, (c1 - c0).norm()))
        .filter(|&(_, _, len)| len > 0.0)
        .collect();

    for (i, (p, q)) in body.edges().enumerate() {
        let len = knots[i + 1] - knots[i];
        if len <= 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for &(c0, c1, elen) in &cell_edges {
            let e = c1 - c0;
            let dp = e.cross(p - c0) / elen;
            let dq = e.cross(q - c0) / elen;
            if dp >= -tol && dq >= -tol {
                continue;
            }
            if dp < -tol && dq < -tol {
                hi = -1.0;
                break;
            }
            let t = dp / (dp - dq);
            if dp < dq {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
        }
        if hi <= lo {
            continue;
        }
        let (s0, s1) = (knots[i] + lo * len, knots[i] + hi * len);
        match arcs.last_mut() {
            Some(last) if (s0 - last.1).abs() <= merge_tol => last.1 = s1,
            _ => arcs.push((s0, s1)),
        }
    }
    arcs.retain(|&(s0, s1)| s1 - s0 > merge_tol);
    let length = arcs.iter().map(|&(s0, s1)| s1 - s0).sum();
    BoundaryPortion { arcs, length }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hexagon() -> ConvexPolygon {
        ConvexPolygon::regular(6, Point2::new(0.0, 0.0), 1.0, 0.0)
    }

    #[test]
    fn clip_examples() {
        let sq = ConvexPolygon::unit_square();
        assert_eq!(halfplane_clip(&sq, Point2::new(1.0, 0.0), 0.0), sq);
        let left = halfplane_clip(&sq, Point2::new(-1.0, 0.0), 0.5);
        assert!(left.approx_eq(&ConvexPolygon::rectangle(0.0, 0.0, 0.5, 1.0), 1e-15));
        assert!(halfplane_clip(&sq, Point2::new(1.0, 0.0), -2.0).is_empty());
        // A halfplane touching a single edge has zero-area intersection.
        assert!(halfplane_clip(&sq, Point2::new(-1.0, 0.0), 0.0).is_empty());
    }

    #[test]
    fn area_and_perimeter() {
        let sq = ConvexPolygon::unit_square();
        assert_eq!(sq.area(), 1.0);
        assert_eq!(sq.perimeter(), 4.0);
        let rect = ConvexPolygon::rectangle(0.0, 0.0, 0.5, 1.0);
        assert_eq!(rect.area(), 0.5);
        assert_eq!(rect.perimeter(), 3.0);
        let hex = hexagon();
        assert!((hex.area() - 3.0 * 3f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((hex.perimeter() - 6.0).abs() < 1e-14);
        assert_eq!(ConvexPolygon::EMPTY.area(), 0.0);
        assert_eq!(ConvexPolygon::EMPTY.perimeter(), 0.0);
    }

    #[test]
    fn steiner_conventions() {
        assert_eq!(
            ConvexPolygon::unit_square().steiner_coefficients(),
            [1.0, 4.0, PI]
        );
        assert_eq!(ConvexPolygon::EMPTY.steiner_coefficients(), [0.0; 3]);
    }

    #[test]
    fn polygon_validation() {
        let two = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
        assert!(matches!(
            ConvexPolygon::new(two),
            Err(Error::InvalidPolygon(_))
        ));
        let dart = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 0.3),
            Point2::new(1.0, 2.0),
        ];
        assert!(ConvexPolygon::new(dart).is_err());
        let cw = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ];
        let poly = ConvexPolygon::new(cw).unwrap();
        assert_eq!(poly.area(), 1.0);
    }

    #[test]
    fn partition_examples() {
        let sq = ConvexPolygon::unit_square();
        let one = FunctionFamily::new(vec![AffineFunction2::new(0.3, -0.2, 1.0)]).unwrap();
        assert_eq!(build_partition(&sq, &one).unwrap().cells, vec![sq.clone()]);

        let two = FunctionFamily::new(vec![
            AffineFunction2::new(1.0, 0.0, 0.0),
            AffineFunction2::new(-1.0, 0.0, 1.0),
        ])
        .unwrap();
        let cells = build_partition(&sq, &two).unwrap();
        assert!(cells.cells[0].approx_eq(&ConvexPolygon::rectangle(0.5, 0.0, 1.0, 1.0), 1e-15));
        assert!(cells.cells[1].approx_eq(&ConvexPolygon::rectangle(0.0, 0.0, 0.5, 1.0), 1e-15));
    }

    #[test]
    fn three_sectors_of_a_disk() {
        // Needs a vertex count divisible by 3 to be 3-fold symmetric.
        let disk = ConvexPolygon::regular(96, Point2::new(0.0, 0.0), 1.0, 0.0);
        let members = [90.0f64, 210.0, 330.0]
            .iter()
            .map(|deg| {
                let t = deg.to_radians();
                AffineFunction2::new(t.cos(), t.sin(), 0.0)
            })
            .collect();
        let cells = build_partition(&disk, &FunctionFamily::new(members).unwrap()).unwrap();
        let areas: Vec<f64> = cells.iter().map(ConvexPolygon::area).collect();
        for a in &areas {
            assert!((a - areas[0]).abs() < 1e-9, "{areas:?}");
        }
        assert!((areas.iter().sum::<f64>() - disk.area()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_family_is_rejected() {
        let fam = FunctionFamily::new(vec![
            AffineFunction2::new(1.0, 0.0, 0.0),
            AffineFunction2::new(1.0, 0.0, 1e-9),
        ])
        .unwrap();
        assert_eq!(
            build_partition(&ConvexPolygon::unit_square(), &fam),
            Err(Error::DegenerateFamily {
                first: 0,
                second: 1
            })
        );
    }

    #[test]
    fn boundary_portion_examples() {
        let sq = ConvexPolygon::unit_square();
        let full = boundary_portion(&sq, &sq);
        assert!((full.length - 4.0).abs() < 1e-15);
        assert_eq!(full.arcs, vec![(0.0, 4.0)]);

        let left = ConvexPolygon::rectangle(0.0, 0.0, 0.5, 1.0);
        let part = boundary_portion(&sq, &left);
        assert!((part.length - 2.0).abs() < 1e-14);
        // Bottom half-edge from vertex 0, then top half-edge plus left edge.
        assert_eq!(part.arcs.len(), 2);
        assert!((part.arcs[0].0 - 0.0).abs() < 1e-15 && (part.arcs[0].1 - 0.5).abs() < 1e-14);
        assert!((part.arcs[1].0 - 2.5).abs() < 1e-14 && (part.arcs[1].1 - 4.0).abs() < 1e-14);
    }

    #[test]
    fn chord_cut_of_hexagon_is_additive() {
        let hex = hexagon();
        let a = Point2::new(0.3, -0.8);
        let left = halfplane_clip(&hex, a, 0.17);
        let right = halfplane_clip(&hex, a * -1.0, -0.17);
        let total = boundary_portion(&hex, &left).length + boundary_portion(&hex, &right).length;
        assert!((total - hex.perimeter()).abs() < 1e-12);
    }

    #[test]
    fn gauge_normalization() {
        let fam = FunctionFamily::new(vec![
            AffineFunction2::new(1.0, 2.0, 3.0),
            AffineFunction2::new(-1.0, 0.5, 0.0),
            AffineFunction2::new(0.2, 0.1, -4.0),
        ])
        .unwrap();
        let g = fam.gauge_normalized().unwrap();
        assert!(g.gauge_defect() < 1e-15);
        let single = FunctionFamily::new(vec![AffineFunction2::new(1.0, 0.0, 0.0)]).unwrap();
        assert!(single.gauge_normalized().is_none());
    }
}
