use equipart::geometry::halfplane_clip;
use equipart::measures::{
    boundary_mass, interval_mass, mass_in_cell, AreaMeasure, BoundaryDensity, DensityGrid,
    Interpolation, IntervalMeasure,
};
use equipart::poly::Polynomial1D;
use equipart::{build_partition, AffineFunction2, ConvexPolygon, FunctionFamily, Point2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Fraction of `samples` draws from the grid's own discrete distribution
/// (pixel by mass, then uniform inside the pixel) that land in `pred`.
fn grid_monte_carlo(
    grid: &DensityGrid,
    samples: usize,
    seed: u64,
    pred: impl Fn(Point2) -> bool + Sync,
) -> f64 {
    let (nx, ny) = grid.shape();
    let mut cumulative = Vec::with_capacity(nx * ny);
    let mut acc = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            acc += grid.pixel_mass(i, j);
            cumulative.push(acc);
        }
    }
    let (o, h) = (grid.origin(), grid.spacing());
    let chunk = 1_000_000;
    let hits: usize = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = chunk.min(samples - c * chunk);
            (0..n)
                .filter(|_| {
                    let u: f64 = rng.random_range(0.0..acc);
                    let k = cumulative.partition_point(|&x| x <= u).min(nx * ny - 1);
                    let (i, j) = (k % nx, k / nx);
                    let p = Point2::new(
                        o.x + (i as f64 + rng.random::<f64>()) * h,
                        o.y + (j as f64 + rng.random::<f64>()) * h,
                    );
                    pred(p)
                })
                .count()
        })
        .sum();
    hits as f64 / samples as f64
}

#[test]
fn grid_mass_matches_monte_carlo() {
    let grid = DensityGrid::gaussian_blob(Point2::new(0.3, 0.3), (0.1, 0.1), 256).unwrap();
    let cell = ConvexPolygon::rectangle(0.0, 0.0, 0.3, 1.0);
    let exact = grid.mass_in_cell(&cell);
    // More draws than strictly needed keep the oracle's own noise (~5e-5)
    // well inside the tolerance.
    let mc = grid_monte_carlo(&grid, 100_000_000, 11, |p| p.x <= 0.3);
    assert!((exact - mc).abs() < 2e-4, "{exact} vs {mc}");

    let tri = ConvexPolygon::new(vec![
        Point2::new(0.1, 0.05),
        Point2::new(0.9, 0.4),
        Point2::new(0.2, 0.8),
    ])
    .unwrap();
    let exact = grid.mass_in_cell(&tri);
    let mc = grid_monte_carlo(&grid, 100_000_000, 12, |p| tri.contains(p, 0.0));
    assert!((exact - mc).abs() < 2e-4, "{exact} vs {mc}");
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn interval_mass_matches_simpson() {
    let m = IntervalMeasure::from_polynomial(Polynomial1D::new(vec![0.0, 6.0, -6.0])).unwrap();
    let set = [(0.2, 0.4), (0.7, 0.9)];
    let f = |x: f64| 6.0 * x * (1.0 - x);
    let oracle: f64 = set.iter().map(|&(a, b)| simpson(f, a, b, 1_000_000)).sum();
    assert!((interval_mass(&m, &set) - oracle).abs() < 1e-10);

    let uniform = IntervalMeasure::uniform();
    assert!((interval_mass(&uniform, &[(0.0, 0.5)]) - 0.5).abs() < 1e-15);
    let linear = IntervalMeasure::from_polynomial(Polynomial1D::new(vec![0.0, 2.0])).unwrap();
    assert!((interval_mass(&linear, &[(0.0, 0.5f64.sqrt())]) - 0.5).abs() < 1e-15);
}

/// Arc-length positions on the boundary of `body` where the argmax of
/// `family` can change, found from the linear functions along each edge.
fn argmax_switches(body: &ConvexPolygon, family: &FunctionFamily) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = 0.0;
    for (p, q) in body.edges() {
        let len = (q - p).norm();
        for (i, ui) in family.members().iter().enumerate() {
            for uj in &family.members()[i + 1..] {
                let (g0, g1) = (ui.eval(p) - uj.eval(p), ui.eval(q) - uj.eval(q));
                if (g0 < 0.0) != (g1 < 0.0) {
                    out.push(s + len * g0 / (g0 - g1));
                }
            }
        }
        s += len;
    }
    out
}

fn boundary_point(body: &ConvexPolygon, mut s: f64) -> Point2 {
    for (p, q) in body.edges() {
        let len = (q - p).norm();
        if s <= len {
            return p + (q - p) * (s / len);
        }
        s -= len;
    }
    body.vertices()[0]
}

/// Simpson quadrature of the density over `{s : argmax at s == owner}`,
/// split at density knots and argmax switches so every panel is smooth.
fn boundary_oracle(
    body: &ConvexPolygon,
    family: &FunctionFamily,
    owner: usize,
    density: impl Fn(f64) -> f64,
    knots: &[f64],
    panels: usize,
) -> f64 {
    let length = body.perimeter();
    let mut cuts: Vec<f64> = knots.to_vec();
    cuts.extend(argmax_switches(body, family));
    cuts.push(0.0);
    cuts.push(length);
    cuts.retain(|s| (0.0..=length).contains(s));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let per = panels / cuts.len() * 2;
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .filter(|w| family.argmax(boundary_point(body, 0.5 * (w[0] + w[1]))) == owner)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            // Evaluate strictly inside the piece so the density's own jumps
            // at the ends do not leak in.
            let e = (1e-13 * length).min(0.25 * (b - a));
            let inset = |s: f64| density(s.clamp(a + e, b - e));
            simpson(inset, a, b, per.max(2))
        })
        .sum()
}

#[test]
fn boundary_mass_matches_quadrature_on_a_hexagon() {
    let hex = ConvexPolygon::regular(6, Point2::new(0.0, 0.0), 1.0, 0.3);
    let length = hex.perimeter();
    let sigma = BoundaryDensity::new(
        vec![0.0, length / 2.0, length],
        vec![2.0 / length, 0.0],
        Interpolation::Constant,
    )
    .unwrap();
    let density = |s: f64| if s < length / 2.0 { 2.0 / length } else { 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let offset: f64 = rng.random_range(-0.7..0.7);
        let (c, s) = (angle.cos(), angle.sin());
        let family = FunctionFamily::new(vec![
            AffineFunction2::new(c, s, -offset),
            AffineFunction2::new(-c, -s, offset),
        ])
        .unwrap();
        let cells = build_partition(&hex, &family).unwrap();
        for owner in 0..2 {
            let oracle = boundary_oracle(&hex, &family, owner, density, sigma.knots(), 1_000_000);
            let got = boundary_mass(&sigma, &cells.cells[owner], &hex);
            assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
        }
    }
}

#[test]
fn boundary_mass_matches_quadrature_for_linear_densities() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let body = ConvexPolygon::regular(7, Point2::new(0.2, -0.1), 1.3, 0.1);
    let length = body.perimeter();
    for _ in 0..10 {
        let knots: Vec<f64> = (0..=9).map(|k| length * k as f64 / 9.0).collect();
        let values: Vec<f64> = (0..=9).map(|_| rng.random_range(0.0..2.0)).collect();
        let sigma = BoundaryDensity::new(knots.clone(), values, Interpolation::Linear).unwrap();
        let family = FunctionFamily::new(
            (0..3)
                .map(|_| {
                    AffineFunction2::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-0.5..0.5),
                    )
                })
                .collect(),
        )
        .unwrap();
        let cells = build_partition(&body, &family).unwrap();
        let mut total = 0.0;
        for owner in 0..3 {
            let oracle = boundary_oracle(
                &body,
                &family,
                owner,
                |s| sigma.density_at(s),
                &knots,
                1_000_000,
            );
            let got = boundary_mass(&sigma, &cells.cells[owner], &body);
            assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
            total += got;
        }
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn boundary_examples_on_the_square() {
    let sq = ConvexPolygon::unit_square();
    let left = ConvexPolygon::rectangle(0.0, 0.0, 0.5, 1.0);
    let uniform = BoundaryDensity::uniform(&sq).unwrap();
    assert!((boundary_mass(&uniform, &sq, &sq) - 1.0).abs() < 1e-15);
    assert!((boundary_mass(&uniform, &left, &sq) - 0.5).abs() < 1e-15);
}

#[test]
fn restricted_boundary_density_lives_on_the_outer_edges() {
    let sq = ConvexPolygon::unit_square();
    let left = ConvexPolygon::rectangle(0.0, 0.0, 0.5, 1.0);
    let uniform = BoundaryDensity::uniform(&sq).unwrap();
    let r = uniform.restricted_to(&sq, &left).unwrap();
    assert!((r.length() - left.perimeter()).abs() < 1e-15);
    assert!((boundary_mass(&r, &left, &left) - 1.0).abs() < 1e-12);
    // Outer boundary inside the left half: 0.5 + 1 + 0.5.
    let lower = ConvexPolygon::rectangle(0.0, 0.0, 0.5, 0.5);
    assert!((boundary_mass(&r, &lower, &left) - 0.5).abs() < 1e-12);
    let inner_strip = ConvexPolygon::rectangle(0.25, 0.25, 0.5, 0.75);
    assert!(boundary_mass(&r, &inner_strip, &left).abs() < 1e-12);

    // Nothing of a left-edge density reaches the right half.
    let left_edge = BoundaryDensity::on_edges(&sq, &[3]).unwrap();
    let right = ConvexPolygon::rectangle(0.5, 0.0, 1.0, 1.0);
    assert!(left_edge.restricted_to(&sq, &right).is_none());
}

#[test]
fn constructors_normalize() {
    let grid =
        DensityGrid::from_fn(Point2::new(-1.0, 2.0), 0.05, 40, 30, |p| 1.0 + p.x * p.x).unwrap();
    assert!((grid.mass_in_cell(&grid.extent()) - 1.0).abs() < 1e-9);
    let cloud: Vec<Point2> = (0..200)
        .map(|k| Point2::new((k as f64 * 0.37).fract(), (k as f64 * 0.61).fract()))
        .collect();
    let kde = DensityGrid::from_points(&cloud, &ConvexPolygon::unit_square(), 64, None).unwrap();
    assert!((kde.mass_in_cell(&ConvexPolygon::unit_square()) - 1.0).abs() < 1e-9);
    let sigma = BoundaryDensity::new(
        vec![0.0, 1.0, 4.0],
        vec![3.0, 1.0, 0.0],
        Interpolation::Linear,
    )
    .unwrap();
    assert!((sigma.cdf(4.0) - 1.0).abs() < 1e-12);
    let m = IntervalMeasure::new(
        vec![0.0, 0.3, 1.0],
        vec![
            Polynomial1D::new(vec![1.0]),
            Polynomial1D::new(vec![0.0, 5.0]),
        ],
    )
    .unwrap();
    assert!((m.cdf(1.0) - 1.0).abs() < 1e-12);
    let region = ConvexPolygon::regular(5, Point2::new(0.5, 0.5), 0.3, 0.0);
    let u = AreaMeasure::uniform(region.clone()).unwrap();
    assert!((mass_in_cell(&u, &region) - 1.0).abs() < 1e-15);
}

fn small_grid() -> DensityGrid {
    DensityGrid::from_fn(Point2::new(0.0, 0.0), 1.0 / 64.0, 64, 64, |p| {
        (-8.0 * ((p.x - 0.6).powi(2) + (p.y - 0.35).powi(2))).exp() + 0.2 * p.y
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn enlarging_a_cell_never_loses_mass(
        k in 3usize..9,
        r in 0.05..0.8f64,
        cx in 0.0..1.0f64,
        cy in 0.0..1.0f64,
        phase in 0.0..6.3f64,
        cut in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    ) {
        let grid = AreaMeasure::Grid(small_grid());
        let outer = equipart::geometry::intersect(
            &ConvexPolygon::regular(k, Point2::new(cx, cy), r, phase),
            &ConvexPolygon::unit_square(),
        );
        let inner = halfplane_clip(&outer, Point2::new(cut.0, cut.1), cut.2);
        prop_assert!(grid.mass_in_cell(&inner) <= grid.mass_in_cell(&outer) + 1e-15);
    }

    #[test]
    fn masses_of_a_partition_add_up(
        members in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 2..7),
    ) {
        let family = FunctionFamily::new(
            members.into_iter().map(|(x, y, b)| AffineFunction2::new(x, y, b)).collect(),
        ).unwrap();
        let sq = ConvexPolygon::unit_square();
        let cells = build_partition(&sq, &family).unwrap();
        let grid = AreaMeasure::Grid(small_grid());
        let total: f64 = cells.iter().map(|c| grid.mass_in_cell(c)).sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
        let disk = AreaMeasure::uniform(ConvexPolygon::regular(32, Point2::new(0.5, 0.5), 0.5, 0.0)).unwrap();
        let total: f64 = cells.iter().map(|c| disk.mass_in_cell(c)).sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
    }
}
