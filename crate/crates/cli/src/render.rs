//! Static SVG pictures of partitions.

use std::fmt::Write;

use equipart::{ConvexPolygon, Point2};

const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
];

const SIZE: f64 = 512.0;

/// Cells filled from the palette in index order, the body outline on top,
/// and an optional chord drawn as a dashed line.
pub fn partition_svg(
    body: &ConvexPolygon,
    cells: &[ConvexPolygon],
    chord: Option<(Point2, Point2)>,
    timestamp: Option<u64>,
) -> String {
    let (lo, hi) = body.bounding_box().unwrap_or_default();
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
    let scale = SIZE / span;
    // SVG y grows downward.
    let map = |p: Point2| ((p.x - lo.x) * scale, (hi.y - p.y) * scale);
    let path = |poly: &ConvexPolygon| {
        let mut d = String::new();
        for (i, &v) in poly.vertices().iter().enumerate() {
            let (x, y) = map(v);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
        d
    };
    let (w, h) = ((hi.x - lo.x) * scale, (hi.y - lo.y) * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-4 -4 {:.3} {:.3}" width="{:.0}" height="{:.0}">"#,
        w + 8.0,
        h + 8.0,
        w + 8.0,
        h + 8.0
    );
    if let Some(t) = timestamp {
        let _ = writeln!(s, "<!-- rendered at unix time {t} -->");
    }
    for (i, cell) in cells.iter().enumerate().filter(|(_, c)| !c.is_empty()) {
        let _ = writeln!(
            s,
            r##"<path d="{}" fill="{}" stroke="#ffffff" stroke-width="0.8"><title>cell {i}</title></path>"##,
            path(cell),
            PALETTE[i % PALETTE.len()]
        );
    }
    if let Some((a, b)) = chord {
        let ((x1, y1), (x2, y2)) = (map(a), map(b));
        let _ = writeln!(
            s,
            r##"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#222222" stroke-width="1.5" stroke-dasharray="6 3"/>"##
        );
    }
    let _ = writeln!(
        s,
        r##"<path d="{}" fill="none" stroke="#222222" stroke-width="2"/>"##,
        path(body)
    );
    s.push_str("</svg>\n");
    s
}
