//! Plane geometry on `f64` polygons: containment, rasterization, clipping.

use crate::raster::GrayMap;

pub type Vertex = (f64, f64);

/// Even-odd containment. Points exactly on an edge may land either side.
pub fn point_in_polygon(p: Vertex, poly: &[Vertex]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[(i + n - 1) % n];
        if (yi > p.1) != (yj > p.1) && p.0 < (xj - xi) * (p.1 - yi) / (yj - yi) + xi {
            inside = !inside;
        }
    }
    inside
}

/// Signed shoelace area; positive for clockwise loops on screen.
pub fn polygon_area(poly: &[Vertex]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].0 * poly[(i + 1) % n].1 - poly[(i + 1) % n].0 * poly[i].1).sum::<f64>() / 2.0
}

/// 255 where the pixel centre lies inside `poly`, 0 elsewhere.
pub fn polygon_mask(width: usize, height: usize, poly: &[Vertex]) -> GrayMap {
    GrayMap::from_fn(width, height, |x, y| if point_in_polygon((x as f64, y as f64), poly) { 255 } else { 0 })
}

/// Rotates by `degrees` about `centre`, then scales about it.
pub fn transform(poly: &[Vertex], centre: Vertex, degrees: f64, scale: f64) -> Vec<Vertex> {
    let (s, c) = degrees.to_radians().sin_cos();
    poly.iter()
        .map(|&(x, y)| {
            let (dx, dy) = (x - centre.0, y - centre.1);
            (centre.0 + scale * (c * dx - s * dy), centre.1 + scale * (s * dx + c * dy))
        })
        .collect()
}

/// Intersection of a polygon with a convex clip polygon (Sutherland-Hodgman).
/// Both must share orientation.
pub fn clip_convex(subject: &[Vertex], clip: &[Vertex]) -> Vec<Vertex> {
    let orientation = polygon_area(clip).signum();
    let mut out = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % m]);
        let side = |p: Vertex| orientation * ((b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0));
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (cur, prev) = (input[j], input[(j + input.len() - 1) % input.len()]);
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(crossing(prev, cur, sp, sc));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(crossing(prev, cur, sp, sc));
            }
        }
    }
    out
}

fn crossing(p: Vertex, q: Vertex, sp: f64, sq: f64) -> Vertex {
    let t = sp / (sp - sq);
    (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
}

/// Intersection over union of two convex polygons.
pub fn convex_iou(a: &[Vertex], b: &[Vertex]) -> f64 {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    if polygon_area(&a) < 0.0 {
        a.reverse();
    }
    if polygon_area(&b) < 0.0 {
        b.reverse();
    }
    let inter = polygon_area(&clip_convex(&a, &b)).abs();
    let union = polygon_area(&a) + polygon_area(&b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Shortest distance between two convex polygons, 0 when they touch or
/// overlap.
pub fn convex_gap(a: &[Vertex], b: &[Vertex]) -> f64 {
    if a.iter().any(|&p| point_in_polygon(p, b)) || b.iter().any(|&p| point_in_polygon(p, a)) || convex_iou(a, b) > 0.0 {
        return 0.0;
    }
    let edge_min = |pts: &[Vertex], poly: &[Vertex]| {
        pts.iter()
            .flat_map(|&p| (0..poly.len()).map(move |i| segment_distance(p, poly[i], poly[(i + 1) % poly.len()])))
            .fold(f64::INFINITY, f64::min)
    };
    edge_min(a, b).min(edge_min(b, a))
}

fn segment_distance(p: Vertex, a: Vertex, b: Vertex) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}
