//! Absolutely continuous probability measures on a planar body, on its
//! boundary, and on the unit interval.

use crate::error::{Error, Result};
use crate::geometry::{
    arc_length_knots, boundary_portion, halfplane_clip, intersect, ConvexPolygon, Point2,
};
use crate::poly::Polynomial1D;

/// Piecewise-constant density on a regular grid of square pixels.
///
/// Row `j` covers `y in [origin.y + j h, origin.y + (j + 1) h]`, column `i`
/// covers `x in [origin.x + i h, origin.x + (i + 1) h]`. Values are densities
/// (mass per unit area). An optional convex support restricts the measure;
/// the total mass inside the support is normalized to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    origin: Point2,
    spacing: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    row_prefix: Vec<f64>,
    support: Option<ConvexPolygon>,
}

impl DensityGrid {
    /// `values` are row-major, row 0 at the bottom.
    pub fn new(
        origin: Point2,
        spacing: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) || !origin.is_finite() {
            return Err(Error::InvalidMeasure(
                "grid spacing must be positive".into(),
            ));
        }
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(Error::InvalidMeasure(format!(
                "grid of {nx}x{ny} needs {} values, got {}",
                nx * ny,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "grid value {i} is negative or not finite"
            )));
        }
        let mut grid = DensityGrid {
            origin,
            spacing,
            nx,
            ny,
            values,
            row_prefix: Vec::new(),
            support: None,
        };
        grid.rebuild_prefix();
        let total = grid.row_prefix_total();
        if total <= 0.0 {
            return Err(Error::InvalidMeasure("grid has zero mass".into()));
        }
        grid.scale_values(1.0 / total);
        Ok(grid)
    }

    /// Samples `density` at pixel centers.
    pub fn from_fn(
        origin: Point2,
        spacing: f64,
        nx: usize,
        ny: usize,
        density: impl Fn(Point2) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(density(Point2::new(
                    origin.x + (i as f64 + 0.5) * spacing,
                    origin.y + (j as f64 + 0.5) * spacing,
                )));
            }
        }
        Self::new(origin, spacing, nx, ny, values)
    }

    /// Axis-aligned Gaussian bump sampled on an `n x n` grid over the unit square.
    pub fn gaussian_blob(center: Point2, sigma: (f64, f64), n: usize) -> Result<Self> {
        Self::from_fn(Point2::new(0.0, 0.0), 1.0 / n as f64, n, n, |p| {
            let dx = (p.x - center.x) / sigma.0;
            let dy = (p.y - center.y) / sigma.1;
            (-0.5 * (dx * dx + dy * dy)).exp()
        })
    }

    /// Gaussian kernel density estimate of a point cloud, gridded over the
    /// bounding box of `body` and restricted to it. The default bandwidth is
    /// `(4 / (3 N))^(1/5)` times the coordinate spread.
    pub fn from_points(
        points: &[Point2],
        body: &ConvexPolygon,
        resolution: usize,
        bandwidth: Option<f64>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("empty point cloud".into()));
        }
        let (lo, hi) = body
            .bounding_box()
            .ok_or_else(|| Error::InvalidMeasure("empty body".into()))?;
        let n = points.len() as f64;
        let mean = points.iter().fold(Point2::default(), |s, &p| s + p) * (1.0 / n);
        let var = points
            .iter()
            .map(|&p| {
                let d = p - mean;
                d.dot(d)
            })
            .sum::<f64>()
            / (2.0 * n);
        let spread = var.sqrt().max(1e-3 * (hi - lo).norm());
        let h = bandwidth.unwrap_or((4.0 / (3.0 * n)).powf(0.2) * spread);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidMeasure("bandwidth must be positive".into()));
        }
        let spacing = (hi.x - lo.x).max(hi.y - lo.y) / resolution.max(1) as f64;
        let nx = (((hi.x - lo.x) / spacing).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / spacing).ceil() as usize).max(1);
        let grid = Self::from_fn(lo, spacing, nx, ny, |c| {
            points
                .iter()
                .map(|&p| {
                    let d = c - p;
                    (-0.5 * d.dot(d) / (h * h)).exp()
                })
                .sum()
        })?;
        grid.restricted_to(body)
    }

    /// The same density restricted to `support` and renormalized there.
    pub fn restricted_to(&self, support: &ConvexPolygon) -> Result<Self> {
        let mut out = self.clone();
        out.support = None;
        let mass = out.mass_in_cell(support);
        if !(mass > 0.0) {
            return Err(Error::InvalidMeasure(
                "density has no mass inside the support".into(),
            ));
        }
        out.scale_values(1.0 / mass);
        out.support = Some(match &self.support {
            Some(s) => intersect(support, s),
            None => support.clone(),
        });
        Ok(out)
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> Option<&ConvexPolygon> {
        self.support.as_ref()
    }

    /// Mass of pixel `(i, j)` (column, row), ignoring the support.
    pub fn pixel_mass(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i] * self.spacing * self.spacing
    }

    pub fn extent(&self) -> ConvexPolygon {
        ConvexPolygon::rectangle(
            self.origin.x,
            self.origin.y,
            self.origin.x + self.nx as f64 * self.spacing,
            self.origin.y + self.ny as f64 * self.spacing,
        )
    }

    fn rebuild_prefix(&mut self) {
        let stride = self.nx + 1;
        self.row_prefix = vec![0.0; stride * self.ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                self.row_prefix[j * stride + i + 1] =
                    self.row_prefix[j * stride + i] + self.values[j * self.nx + i];
            }
        }
    }

    fn row_prefix_total(&self) -> f64 {
        let stride = self.nx + 1;
        (0..self.ny)
            .map(|j| self.row_prefix[j * stride + self.nx])
            .sum::<f64>()
            * self.spacing
            * self.spacing
    }

    fn scale_values(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
        self.rebuild_prefix();
    }

    /// Exact mass of a convex cell: pixels inside the cell contribute fully
    /// (summed by row prefix sums), pixels cut by the cell boundary are
    /// clipped and contribute in proportion to the covered area.
    pub fn mass_in_cell(&self, cell: &ConvexPolygon) -> f64 {
        let clipped;
        let cell = match &self.support {
            Some(s) => {
                clipped = intersect(cell, s);
                &clipped
            }
            None => cell,
        };
        let Some((lo, hi)) = cell.bounding_box() else {
            return 0.0;
        };
        let h = self.spacing;
        let (ox, oy) = (self.origin.x, self.origin.y);
        let clamp = |v: f64, n: usize| -> usize { v.max(0.0).min(n as f64) as usize };
        let j0 = clamp(((lo.y - oy) / h).floor(), self.ny);
        let j1 = clamp(((hi.y - oy) / h).ceil(), self.ny);
        // Inward halfplanes n . x >= c of the cell.
        let halfplanes: Vec<(Point2, f64)> = cell
            .edges()
            .map(|(p, q)| {
                let e = q - p;
                let n = Point2::new(-e.y, e.x);
                (n, n.dot(p))
            })
            .collect();
        let stride = self.nx + 1;
        let mut total = 0.0;
        for j in j0..j1 {
            let prefix = &self.row_prefix[j * stride..(j + 1) * stride];
            if prefix[self.nx] == 0.0 {
                continue;
            }
            let y0 = oy + j as f64 * h;
            let y1 = y0 + h;
            let strip = halfplane_clip(cell, Point2::new(0.0, 1.0), -y0);
            let strip = halfplane_clip(&strip, Point2::new(0.0, -1.0), y1);
            let Some((slo, shi)) = strip.bounding_box() else {
                continue;
            };
            let i0 = clamp(((slo.x - ox) / h).floor(), self.nx);
            let i1 = clamp(((shi.x - ox) / h).ceil(), self.nx);
            if i0 >= i1 {
                continue;
            }
            // x-range where the whole vertical segment [y0, y1] is inside.
            let (mut inner_lo, mut inner_hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for &(n, c) in &halfplanes {
                if n.x > 0.0 {
                    inner_lo = inner_lo.max(((c - n.y * y0) / n.x).max((c - n.y * y1) / n.x));
                } else if n.x < 0.0 {
                    inner_hi = inner_hi.min(((c - n.y * y0) / n.x).min((c - n.y * y1) / n.x));
                } else if n.y * y0 < c || n.y * y1 < c {
                    inner_hi = f64::NEG_INFINITY;
                }
            }
            let (f0, f1) = if inner_lo < inner_hi {
                let f0 = clamp(((inner_lo - ox) / h).ceil(), self.nx).max(i0);
                let f1 = clamp(((inner_hi - ox) / h).floor(), self.nx).min(i1);
                if f0 < f1 {
                    (f0, f1)
                } else {
                    (i1, i1)
                }
            } else {
                (i1, i1)
            };
            let mut row = (prefix[f1] - prefix[f0]) * h * h;
            for i in (i0..f0).chain(f1.max(f0)..i1) {
                let v = self.values[j * self.nx + i];
                if v == 0.0 {
                    continue;
                }
                let x0 = ox + i as f64 * h;
                let piece = halfplane_clip(&strip, Point2::new(1.0, 0.0), -x0);
                let piece = halfplane_clip(&piece, Point2::new(-1.0, 0.0), x0 + h);
                row += v * piece.area();
            }
            total += row;
        }
        total
    }
}

/// Uniform probability measure on a convex region.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformPolygonMeasure {
    region: ConvexPolygon,
    area: f64,
}

impl UniformPolygonMeasure {
    pub fn new(region: ConvexPolygon) -> Result<Self> {
        let area = region.area();
        if !(area > 0.0) {
            return Err(Error::InvalidMeasure("uniform region has zero area".into()));
        }
        Ok(Self { region, area })
    }

    pub fn region(&self) -> &ConvexPolygon {
        &self.region
    }

    pub fn mass_in_cell(&self, cell: &ConvexPolygon) -> f64 {
        (intersect(cell, &self.region).area() / self.area).min(1.0)
    }

    pub fn restricted_to(&self, support: &ConvexPolygon) -> Result<Self> {
        Self::new(intersect(&self.region, support))
    }
}

/// A measure on the body that cells are weighed with.
#[derive(Clone, Debug, PartialEq)]
pub enum AreaMeasure {
    Grid(DensityGrid),
    Uniform(UniformPolygonMeasure),
}

impl AreaMeasure {
    pub fn uniform(region: ConvexPolygon) -> Result<Self> {
        UniformPolygonMeasure::new(region).map(AreaMeasure::Uniform)
    }

    pub fn mass_in_cell(&self, cell: &ConvexPolygon) -> f64 {
        match self {
            AreaMeasure::Grid(g) => g.mass_in_cell(cell),
            AreaMeasure::Uniform(u) => u.mass_in_cell(cell),
        }
    }

    /// Restriction to `support`, renormalized; `None` if no mass remains.
    pub fn restricted_to(&self, support: &ConvexPolygon) -> Option<Self> {
        match self {
            AreaMeasure::Grid(g) => g.restricted_to(support).ok().map(AreaMeasure::Grid),
            AreaMeasure::Uniform(u) => u.restricted_to(support).ok().map(AreaMeasure::Uniform),
        }
    }
}

pub fn mass_in_cell(measure: &AreaMeasure, cell: &ConvexPolygon) -> f64 {
    measure.mass_in_cell(cell)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// One value per piece.
    Constant,
    /// One value per knot, linear in between.
    Linear,
}

/// Density along the boundary of a body, in its arc-length parameter
/// `s in [0, perimeter)` starting at vertex 0 and running counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDensity {
    knots: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
    /// Density at the start and end of each piece.
    ends: Vec<(f64, f64)>,
    /// Integral of the density from 0 to each knot.
    cumulative: Vec<f64>,
}

impl BoundaryDensity {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidMeasure("need at least two knots".into()));
        }
        if knots[0] != 0.0 || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidMeasure(
                "knots must start at 0 and increase strictly".into(),
            ));
        }
        let expected = match interpolation {
            Interpolation::Constant => knots.len() - 1,
            Interpolation::Linear => knots.len(),
        };
        if values.len() != expected {
            return Err(Error::InvalidMeasure(format!(
                "expected {expected} density values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidMeasure(
                "boundary density must be finite and nonnegative".into(),
            ));
        }
        let ends = match interpolation {
            Interpolation::Constant => values.iter().map(|&v| (v, v)).collect(),
            Interpolation::Linear => values.windows(2).map(|w| (w[0], w[1])).collect(),
        };
        Self::from_parts(knots, values, interpolation, ends)
    }

    fn from_parts(
        knots: Vec<f64>,
        values: Vec<f64>,
        interpolation: Interpolation,
        ends: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let mut density = BoundaryDensity {
            knots,
            values,
            interpolation,
            ends,
            cumulative: Vec::new(),
        };
        density.rebuild_cumulative();
        let total = *density.cumulative.last().unwrap();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidMeasure(
                "boundary density has zero mass".into(),
            ));
        }
        for v in &mut density.values {
            *v /= total;
        }
        for (a, b) in &mut density.ends {
            *a /= total;
            *b /= total;
        }
        density.rebuild_cumulative();
        Ok(density)
    }

    /// The part of this density (given on the boundary of `body`) that lies
    /// on the boundary of `sub`, a convex subset of `body`, expressed in the
    /// arc-length parameter of `sub` and renormalized. Edges of `sub` inside
    /// `body` carry no density. `None` if no mass remains.
    pub fn restricted_to(&self, body: &ConvexPolygon, sub: &ConvexPolygon) -> Option<Self> {
        if sub.is_empty() {
            return None;
        }
        let body_knots = arc_length_knots(body);
        let scale = body.perimeter();
        let tol = 1e-9 * scale;
        let mut knots = vec![0.0];
        let mut ends = Vec::new();
        let mut s_sub = 0.0;
        for (p, q) in sub.edges() {
            let len = (q - p).norm();
            if len == 0.0 {
                continue;
            }
            // Body edge containing both endpoints, if any.
            let host = body.edges().enumerate().find(|(_, (a, b))| {
                let e = *b - *a;
                let el = e.norm();
                let on = |x: Point2| {
                    let t = (x - *a).dot(e) / el;
                    ((x - *a).cross(e) / el).abs() <= tol && t >= -tol && t <= el + tol
                };
                on(p) && on(q)
            });
            match host {
                Some((k, (a, b))) => {
                    let el = (b - a).norm();
                    let sp = body_knots[k] + ((p - a).norm()).min(el);
                    let sq = body_knots[k] + ((q - a).norm()).min(el);
                    // Density knots strictly inside the edge piece.
                    let (lo, hi) = (sp.min(sq), sp.max(sq));
                    let mut cuts: Vec<f64> = self
                        .knots
                        .iter()
                        .copied()
                        .filter(|&s| s > lo && s < hi)
                        .collect();
                    if sq < sp {
                        cuts.reverse();
                    }
                    let mut prev = sp;
                    for s in cuts.into_iter().chain(std::iter::once(sq)) {
                        let step = (s - prev).abs();
                        if step > 0.0 {
                            let mid = 0.5 * (prev + s);
                            let (v0, v1) = (self.piece_value(mid, prev), self.piece_value(mid, s));
                            s_sub += step;
                            knots.push(s_sub);
                            ends.push((v0, v1));
                        }
                        prev = s;
                    }
                }
                None => {
                    s_sub += len;
                    knots.push(s_sub);
                    ends.push((0.0, 0.0));
                }
            }
        }
        if ends.is_empty() {
            return None;
        }
        Self::from_parts(knots, Vec::new(), Interpolation::Linear, ends).ok()
    }

    /// Density of the piece containing `inside`, evaluated at `s`.
    fn piece_value(&self, inside: f64, s: f64) -> f64 {
        let k = self.piece_index(inside);
        let (s0, s1) = (self.knots[k], self.knots[k + 1]);
        let (v0, v1) = self.ends[k];
        v0 + (v1 - v0) * (s - s0) / (s1 - s0)
    }

    /// Arc-length measure of the boundary of `body`, normalized.
    pub fn uniform(body: &ConvexPolygon) -> Result<Self> {
        Self::new(
            vec![0.0, body.perimeter()],
            vec![1.0],
            Interpolation::Constant,
        )
    }

    /// Arc-length measure supported on the edges `edges` of `body`.
    pub fn on_edges(body: &ConvexPolygon, edges: &[usize]) -> Result<Self> {
        let knots = arc_length_knots(body);
        let values = (0..body.len())
            .map(|i| if edges.contains(&i) { 1.0 } else { 0.0 })
            .collect();
        Self::new(knots, values, Interpolation::Constant)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Values as given at construction (normalized); empty for restrictions.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn piece_ends(&self) -> &[(f64, f64)] {
        &self.ends
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn length(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    fn rebuild_cumulative(&mut self) {
        let mut acc = 0.0;
        self.cumulative = vec![0.0];
        for k in 0..self.knots.len() - 1 {
            acc += self.piece_integral(k, self.knots[k + 1]);
            self.cumulative.push(acc);
        }
    }

    /// Integral over `[knots[k], s]`, with `s` inside piece `k`.
    fn piece_integral(&self, k: usize, s: f64) -> f64 {
        let (s0, s1) = (self.knots[k], self.knots[k + 1]);
        let t = s - s0;
        let (v0, v1) = self.ends[k];
        v0 * t + 0.5 * (v1 - v0) / (s1 - s0) * t * t
    }

    pub fn density_at(&self, s: f64) -> f64 {
        self.piece_value(s, s)
    }

    fn piece_index(&self, s: f64) -> usize {
        let k = self.knots.partition_point(|&x| x <= s);
        k.clamp(1, self.knots.len() - 1) - 1
    }

    /// Integral of the density over `[0, s]`, clamped to the parameter range.
    pub fn cdf(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.length());
        let k = self.piece_index(s);
        self.cumulative[k] + self.piece_integral(k, s)
    }

    pub fn mass_of_arcs(&self, arcs: &[(f64, f64)]) -> f64 {
        arcs.iter().map(|&(a, b)| self.cdf(b) - self.cdf(a)).sum()
    }
}

/// Mass of `boundary(body) ∩ cell` under `density`.
pub fn boundary_mass(density: &BoundaryDensity, cell: &ConvexPolygon, body: &ConvexPolygon) -> f64 {
    density.mass_of_arcs(&boundary_portion(body, cell).arcs)
}

/// Piecewise-polynomial probability density on `[0, 1]`. Piece `k` covers
/// `[breaks[k], breaks[k + 1]]` and is a polynomial in the global variable.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMeasure {
    breaks: Vec<f64>,
    pieces: Vec<Polynomial1D>,
    antiderivatives: Vec<Polynomial1D>,
    cumulative: Vec<f64>,
}

impl IntervalMeasure {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Polynomial1D>) -> Result<Self> {
        if breaks.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::InvalidMeasure(
                "need one more break than pieces".into(),
            ));
        }
        if breaks[0] != 0.0
            || *breaks.last().unwrap() != 1.0
            || breaks.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::InvalidMeasure(
                "breaks must increase strictly from 0 to 1".into(),
            ));
        }
        // Nonnegativity, checked on a fine sample of each piece.
        for (k, p) in pieces.iter().enumerate() {
            let (a, b) = (breaks[k], breaks[k + 1]);
            let negative = (0..=256)
                .map(|i| a + (b - a) * i as f64 / 256.0)
                .any(|x| p.eval(x) < -1e-12);
            if negative {
                return Err(Error::InvalidMeasure(format!(
                    "density piece {k} is negative"
                )));
            }
        }
        let mut m = IntervalMeasure {
            breaks,
            pieces,
            antiderivatives: Vec::new(),
            cumulative: Vec::new(),
        };
        m.rebuild();
        let total = *m.cumulative.last().unwrap();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidMeasure("density has zero mass".into()));
        }
        m.pieces = m.pieces.iter().map(|p| p.scale(1.0 / total)).collect();
        m.rebuild();
        Ok(m)
    }

    pub fn uniform() -> Self {
        Self::from_polynomial(Polynomial1D::constant(1.0)).expect("uniform density is valid")
    }

    pub fn from_polynomial(density: Polynomial1D) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![density])
    }

    fn rebuild(&mut self) {
        self.antiderivatives = self
            .pieces
            .iter()
            .map(Polynomial1D::antiderivative)
            .collect();
        let mut acc = 0.0;
        self.cumulative = vec![0.0];
        for (k, big) in self.antiderivatives.iter().enumerate() {
            acc += big.eval(self.breaks[k + 1]) - big.eval(self.breaks[k]);
            self.cumulative.push(acc);
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Polynomial1D] {
        &self.pieces
    }

    fn piece_index(&self, x: f64) -> usize {
        let k = self.breaks.partition_point(|&b| b <= x);
        k.clamp(1, self.pieces.len()) - 1
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// `mu([0, x])`, clamped to `[0, 1]` in `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let k = self.piece_index(x);
        let big = &self.antiderivatives[k];
        self.cumulative[k] + big.eval(x) - big.eval(self.breaks[k])
    }

    /// Smallest `x` with `cdf(x) >= level`, by bisection.
    pub fn quantile(&self, level: f64) -> f64 {
        let (mut a, mut b) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.cdf(m) < level {
                a = m;
            } else {
                b = m;
            }
            if b - a <= f64::EPSILON {
                break;
            }
        }
        0.5 * (a + b)
    }

    /// The restriction to `[a, b]` rescaled affinely onto `[0, 1]` and
    /// renormalized; `None` if the restriction has no mass.
    pub fn restricted_rescaled(&self, a: f64, b: f64) -> Option<Self> {
        self.concatenated(&[(a, b)])
    }

    /// The restriction to the disjoint, increasing `segments`, laid end to
    /// end in order and rescaled onto `[0, 1]`, renormalized. `None` if the
    /// segments carry no mass.
    pub fn concatenated(&self, segments: &[(f64, f64)]) -> Option<Self> {
        let total: f64 = segments.iter().map(|(a, b)| b - a).sum();
        if !(total > 0.0) {
            return None;
        }
        let mut breaks = vec![0.0];
        let mut pieces = Vec::new();
        let mut offset = 0.0;
        for &(a, b) in segments {
            // x = alpha + total * t on this segment.
            let alpha = a - offset;
            for (k, p) in self.pieces.iter().enumerate() {
                let (lo, hi) = (self.breaks[k].max(a), self.breaks[k + 1].min(b));
                if hi <= lo {
                    continue;
                }
                let t_hi = ((hi - alpha) / total).min(1.0);
                if t_hi <= *breaks.last().unwrap() {
                    continue;
                }
                let scaled: Vec<f64> = p
                    .shifted(alpha)
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| c * total.powi(i as i32))
                    .collect();
                pieces.push(Polynomial1D::new(scaled));
                breaks.push(t_hi);
            }
            offset += b - a;
        }
        if pieces.is_empty() {
            return None;
        }
        *breaks.last_mut().unwrap() = 1.0;
        Self::new(breaks, pieces).ok()
    }
}

/// `mu(union of intervals)`; intervals are clamped to `[0, 1]` and assumed
/// pairwise disjoint.
pub fn interval_mass(measure: &IntervalMeasure, set: &[(f64, f64)]) -> f64 {
    set.iter()
        .map(|&(a, b)| (measure.cdf(b) - measure.cdf(a)).max(0.0))
        .sum()
}
