//! 2D convex hull (monotone chain) and point/polygon queries used by the
//! support-polygon stability test.

use alloc::vec::Vec;

pub type P2 = (f64, f64);

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull in counter-clockwise order, collinear points dropped.
/// Returns fewer than 3 vertices when the input is degenerate.
pub fn convex_hull(points: &[P2]) -> Vec<P2> {
    let mut pts: Vec<P2> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut hull: Vec<P2> = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Polygon area via the shoelace formula; expects CCW vertices.
pub fn polygon_area(poly: &[P2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a.0 * b.1 - b.0 * a.1;
    }
    0.5 * acc
}

/// Strict interior test for a convex CCW polygon; boundary counts as outside.
pub fn strictly_inside_convex(p: P2, poly: &[P2]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        if cross(a, b, p) <= 0.0 {
            return false;
        }
    }
    true
}

fn point_segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let ab = (b.0 - a.0, b.1 - a.1);
    let ap = (p.0 - a.0, p.1 - a.1);
    let len2 = ab.0 * ab.0 + ab.1 * ab.1;
    let t = if len2 > 0.0 {
        ((ap.0 * ab.0 + ap.1 * ab.1) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = p.0 - (a.0 + ab.0 * t);
    let dy = p.1 - (a.1 + ab.1 * t);
    libm::sqrt(dx * dx + dy * dy)
}

/// Distance from a point to the polygon boundary (unsigned).
pub fn boundary_distance(p: P2, poly: &[P2]) -> f64 {
    let mut best = f64::INFINITY;
    match poly.len() {
        0 => {}
        1 => {
            let dx = p.0 - poly[0].0;
            let dy = p.1 - poly[0].1;
            best = libm::sqrt(dx * dx + dy * dy);
        }
        _ => {
            for i in 0..poly.len() {
                let a = poly[i];
                let b = poly[(i + 1) % poly.len()];
                best = best.min(point_segment_distance(p, a, b));
            }
        }
    }
    best
}
