//! Border following on binary maps, contour filtering and triangle fitting.
//!
//! Tracing follows Suzuki & Abe's border-following scheme: foreground is
//! 8-connected, background (and so every hole) 4-connected. Each
//! foreground component yields one outer border; each hole inside it yields
//! one hole border. Points are the centres of the border pixels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GrayMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContourKind {
    Outer,
    Hole,
}

/// A traced border.
///
/// Orientation: outer borders have positive shoelace area in image
/// coordinates (x right, y down), holes negative. `area` is the absolute
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub points: Vec<Point>,
    pub kind: ContourKind,
    pub area: f64,
    pub perimeter: f64,
}

impl Contour {
    /// Builds a contour from a closed loop, measuring area and perimeter and
    /// fixing the orientation for `kind`.
    pub fn from_points(mut points: Vec<Point>, kind: ContourKind) -> Self {
        let signed = signed_area(&points);
        let wants_positive = kind == ContourKind::Outer;
        if (signed < 0.0 && wants_positive) || (signed > 0.0 && !wants_positive) {
            points.reverse();
        }
        let perimeter = closed_length(&points);
        Self { points, kind, area: signed.abs(), perimeter }
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    /// Inclusive bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(i32::MAX, i32::MAX);
        let mut hi = Point::new(i32::MIN, i32::MIN);
        for p in &self.points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }
}

/// Shoelace area of a closed polygon (positive when the loop turns
/// clockwise on screen).
pub fn signed_area(points: &[Point]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let twice: i64 = points
        .iter()
        .zip(points.iter().cycle().skip(1))
        .map(|(a, b)| i64::from(a.x) * i64::from(b.y) - i64::from(b.x) * i64::from(a.y))
        .sum();
    twice as f64 / 2.0
}

fn closed_length(points: &[Point]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    points
        .iter()
        .zip(points.iter().cycle().skip(1))
        .map(|(a, b)| (f64::from(b.x - a.x)).hypot(f64::from(b.y - a.y)))
        .sum()
}

/// Neighbour offsets `(drow, dcol)` in clockwise screen order starting east.
const CLOCKWISE: [(isize, isize); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

fn direction_of(dr: isize, dc: isize) -> usize {
    CLOCKWISE.iter().position(|&d| d == (dr, dc)).expect("neighbour offset")
}

/// Traces every outer and hole border of a 0/255 map.
pub fn find_contours(binary: &GrayMap) -> Result<Vec<Contour>> {
    let (w, h) = (binary.width(), binary.height());
    let pw = w + 2;
    // Labels over a one-pixel zero frame: 0 background, 1 unvisited
    // foreground, +/-n visited on border n.
    let mut f = vec![0i32; pw * (h + 2)];
    for y in 0..h {
        for x in 0..w {
            match binary.get(x, y) {
                0 => {}
                255 => f[(y + 1) * pw + x + 1] = 1,
                value => return Err(Error::NotBinary { x, y, value }),
            }
        }
    }
    let idx = |r: usize, c: usize| r * pw + c;
    let mut contours = Vec::new();
    let mut nbd = 1i32;

    for i in 1..=h {
        for j in 1..=w {
            let here = f[idx(i, j)];
            if here == 0 {
                continue;
            }
            let start = if here == 1 && f[idx(i, j - 1)] == 0 {
                Some((ContourKind::Outer, (i, j - 1)))
            } else if here >= 1 && f[idx(i, j + 1)] == 0 {
                Some((ContourKind::Hole, (i, j + 1)))
            } else {
                None
            };
            let Some((kind, from)) = start else { continue };
            nbd += 1;
            let points = follow_border(&mut f, pw, (i, j), from, nbd);
            contours.push(Contour::from_points(points, kind));
        }
    }
    Ok(contours)
}

fn follow_border(f: &mut [i32], pw: usize, start: (usize, usize), from: (usize, usize), nbd: i32) -> Vec<Point> {
    let at = |p: (usize, usize)| p.0 * pw + p.1;
    let step = |p: (usize, usize), d: usize| {
        let (dr, dc) = CLOCKWISE[d];
        ((p.0 as isize + dr) as usize, (p.1 as isize + dc) as usize)
    };
    let to_point = |p: (usize, usize)| Point::new(p.1 as i32 - 1, p.0 as i32 - 1);

    // Clockwise search around the start for the first foreground neighbour.
    let d0 = direction_of(from.0 as isize - start.0 as isize, from.1 as isize - start.1 as isize);
    let first = (0..8).map(|k| (d0 + k) % 8).find(|&d| f[at(step(start, d))] != 0);
    let Some(d1) = first else {
        f[at(start)] = -nbd;
        return vec![to_point(start)];
    };
    let p1 = step(start, d1);

    let mut points = Vec::new();
    let (mut prev, mut cur) = (p1, start);
    loop {
        points.push(to_point(cur));
        // Counter-clockwise search from the neighbour after `prev`.
        let dp = direction_of(prev.0 as isize - cur.0 as isize, prev.1 as isize - cur.1 as isize);
        let mut east_was_zero = false;
        let mut next = cur;
        for k in 1..=8 {
            let d = (dp + 8 - k) % 8;
            let q = step(cur, d);
            if f[at(q)] != 0 {
                next = q;
                break;
            }
            if d == 0 {
                east_was_zero = true;
            }
        }
        if east_was_zero {
            f[at(cur)] = -nbd;
        } else if f[at(cur)] == 1 {
            f[at(cur)] = nbd;
        }
        if next == start && cur == p1 {
            break;
        }
        prev = cur;
        cur = next;
    }
    points
}

/// Drops holes, then outer borders below either threshold. Order is kept.
pub fn filter_contours(contours: &[Contour], min_area: f64, min_perimeter: f64) -> Vec<Contour> {
    contours
        .iter()
        .filter(|c| c.kind == ContourKind::Outer && c.area >= min_area && c.perimeter >= min_perimeter)
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangle {
    pub vertices: [Point; 3],
}

impl Triangle {
    /// `None` when the points are collinear.
    pub fn new(a: Point, b: Point, c: Point) -> Option<Self> {
        let t = Self { vertices: [a, b, c] };
        (t.twice_signed_area() != 0).then_some(t)
    }

    fn twice_signed_area(&self) -> i64 {
        let [a, b, c] = self.vertices;
        i64::from(b.x - a.x) * i64::from(c.y - a.y) - i64::from(c.x - a.x) * i64::from(b.y - a.y)
    }

    pub fn signed_area(&self) -> f64 {
        self.twice_signed_area() as f64 / 2.0
    }

    pub fn centroid(&self) -> (f64, f64) {
        let [a, b, c] = self.vertices;
        (f64::from(a.x + b.x + c.x) / 3.0, f64::from(a.y + b.y + c.y) / 3.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleRejection {
    TooFewPoints,
    TooFewVertices,
    Collinear,
    RetriesExhausted,
}

impl std::fmt::Display for TriangleRejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TooFewPoints => "contour has fewer than 3 points",
            Self::TooFewVertices => "simplified to fewer than 3 vertices",
            Self::Collinear => "simplified vertices are collinear",
            Self::RetriesExhausted => "still more than 3 vertices after tolerance escalation",
        })
    }
}

pub const MAX_EPSILON_DOUBLINGS: usize = 8;

/// Fits a triangle by closed-loop Ramer-Douglas-Peucker simplification.
///
/// The tolerance starts at `epsilon_frac * perimeter` and doubles while more
/// than three vertices survive, at most [`MAX_EPSILON_DOUBLINGS`] times.
pub fn approx_triangle(contour: &Contour, epsilon_frac: f64) -> Result<Triangle, TriangleRejection> {
    if contour.points.len() < 3 {
        return Err(TriangleRejection::TooFewPoints);
    }
    let mut epsilon = epsilon_frac * contour.perimeter;
    for _ in 0..=MAX_EPSILON_DOUBLINGS {
        let simplified = simplify_closed(&contour.points, epsilon);
        match simplified.len() {
            0..=2 => return Err(TriangleRejection::TooFewVertices),
            3 => {
                return Triangle::new(simplified[0], simplified[1], simplified[2]).ok_or(TriangleRejection::Collinear)
            }
            _ => epsilon *= 2.0,
        }
    }
    Err(TriangleRejection::RetriesExhausted)
}

/// Moves each vertex to the intersection of total-least-squares lines fitted
/// to the middle half of its two adjacent sides. Corners that the
/// segmentation rounded off are recovered this way; the input is returned
/// unchanged when a vertex is not on the contour or two sides are parallel.
pub fn refine_triangle(contour: &Contour, triangle: &Triangle) -> Triangle {
    let pts = &contour.points;
    let n = pts.len();
    let Some(idx) = triangle.vertices.iter().map(|v| pts.iter().position(|p| p == v)).collect::<Option<Vec<usize>>>()
    else {
        return *triangle;
    };
    let mut order = idx.clone();
    order.sort_unstable();
    let mut lines = Vec::with_capacity(3);
    for k in 0..3 {
        let (a, b) = (order[k], order[(k + 1) % 3]);
        let len = (b + n - a) % n;
        if len < 8 {
            return *triangle;
        }
        let side: Vec<(f64, f64)> =
            (len / 4..=len - len / 4).map(|i| pts[(a + i) % n]).map(|p| (f64::from(p.x), f64::from(p.y))).collect();
        lines.push(fit_line(&side));
    }
    // Side k runs from order[k] to order[k+1], so vertex order[k] joins
    // sides k-1 and k.
    let mut refined = [Point::new(0, 0); 3];
    for k in 0..3 {
        let Some((x, y)) = intersect(lines[(k + 2) % 3], lines[k]) else { return *triangle };
        let v = pts[order[k]];
        if (x - f64::from(v.x)).hypot(y - f64::from(v.y)) > contour.perimeter / 6.0 {
            return *triangle;
        }
        refined[k] = Point::new(x.round() as i32, y.round() as i32);
    }
    Triangle::new(refined[0], refined[1], refined[2]).unwrap_or(*triangle)
}

/// Line through the centroid along the principal axis: `(point, direction)`.
fn fit_line(pts: &[(f64, f64)]) -> ((f64, f64), (f64, f64)) {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x / n, sy + y / n));
    let (sxx, sxy, syy) = pts.iter().fold((0.0, 0.0, 0.0), |(a, b, c), &(x, y)| {
        let (dx, dy) = (x - mx, y - my);
        (a + dx * dx, b + dx * dy, c + dy * dy)
    });
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    ((mx, my), (theta.cos(), theta.sin()))
}

fn intersect(l1: ((f64, f64), (f64, f64)), l2: ((f64, f64), (f64, f64))) -> Option<(f64, f64)> {
    let ((p, d), (q, e)) = (l1, l2);
    let cross = d.0 * e.1 - d.1 * e.0;
    if cross.abs() < 1e-6 {
        return None;
    }
    let t = ((q.0 - p.0) * e.1 - (q.1 - p.1) * e.0) / cross;
    Some((p.0 + t * d.0, p.1 + t * d.1))
}

/// Closed-polygon RDP: split the loop at two mutually distant points and
/// simplify both chains.
pub fn simplify_closed(points: &[Point], epsilon: f64) -> Vec<Point> {
    let mut ring: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points {
        if ring.last() != Some(&p) {
            ring.push(p);
        }
    }
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    if ring.len() < 3 {
        return ring;
    }
    let dist2 = |a: Point, b: Point| {
        let (dx, dy) = (i64::from(a.x - b.x), i64::from(a.y - b.y));
        dx * dx + dy * dy
    };
    let farthest_from = |p: Point| {
        (0..ring.len()).fold(0, |best, i| if dist2(ring[i], p) > dist2(ring[best], p) { i } else { best })
    };
    let a = farthest_from(ring[0]);
    let b = farthest_from(ring[a]);
    let (a, b) = (a.min(b), a.max(b));
    if a == b {
        return vec![ring[a]];
    }
    let first: Vec<Point> = ring[a..=b].to_vec();
    let second: Vec<Point> = ring[b..].iter().chain(&ring[..=a]).copied().collect();
    let mut out = simplify_open(&first, epsilon);
    out.pop();
    let mut tail = simplify_open(&second, epsilon);
    tail.pop();
    out.extend(tail);
    out
}

/// Open-chain RDP keeping both endpoints.
pub fn simplify_open(points: &[Point], epsilon: f64) -> Vec<Point> {
    if points.len() < 3 {
        return points.to_vec();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    let mut stack = vec![(0usize, points.len() - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (mut best, mut best_d) = (lo, -1.0);
        for i in lo + 1..hi {
            let d = segment_distance(points[i], points[lo], points[hi]);
            if d > best_d {
                best = i;
                best_d = d;
            }
        }
        if best_d > epsilon {
            keep[best] = true;
            stack.push((lo, best));
            stack.push((best, hi));
        }
    }
    points.iter().zip(keep).filter_map(|(&p, k)| k.then_some(p)).collect()
}

/// Distance from `p` to segment `ab`.
fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (px, py) = (f64::from(p.x), f64::from(p.y));
    let (ax, ay) = (f64::from(a.x), f64::from(a.y));
    let (bx, by) = (f64::from(b.x), f64::from(b.y));
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return (px - ax).hypot(py - ay);
    }
    let t = (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0);
    (px - ax - t * dx).hypot(py - ay - t * dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GrayMap;
    use proptest::prelude::*;

    fn filled(w: usize, h: usize, inside: impl Fn(usize, usize) -> bool) -> GrayMap {
        GrayMap::from_fn(w, h, |x, y| if inside(x, y) { 255 } else { 0 })
    }

    /// Even-odd test on pixel centres against a float polygon.
    fn in_polygon(px: f64, py: f64, poly: &[(f64, f64)]) -> bool {
        let mut inside = false;
        let n = poly.len();
        for i in 0..n {
            let (xi, yi) = poly[i];
            let (xj, yj) = poly[(i + n - 1) % n];
            if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
                inside = !inside;
            }
        }
        inside
    }

    #[test]
    fn empty_map_has_no_contours() {
        assert!(find_contours(&GrayMap::new(8, 8, 0)).unwrap().is_empty());
    }

    #[test]
    fn non_binary_rejected() {
        let mut m = GrayMap::new(3, 3, 0);
        m.put(1, 2, 7);
        assert!(matches!(find_contours(&m), Err(Error::NotBinary { x: 1, y: 2, value: 7 })));
    }

    #[test]
    fn filled_square() {
        let m = filled(20, 20, |x, y| (5..15).contains(&x) && (5..15).contains(&y));
        let cs = find_contours(&m).unwrap();
        assert_eq!(cs.len(), 1);
        let c = &cs[0];
        assert_eq!(c.kind, ContourKind::Outer);
        assert_eq!(c.area, 81.0);
        assert_eq!(c.perimeter, 36.0);
        assert_eq!(c.points.len(), 36);
        assert!(c.signed_area() > 0.0);
    }

    #[test]
    fn square_with_hole() {
        let m = filled(30, 30, |x, y| {
            let outer = (5..25).contains(&x) && (5..25).contains(&y);
            let hole = (12..18).contains(&x) && (12..18).contains(&y);
            outer && !hole
        });
        let cs = find_contours(&m).unwrap();
        assert_eq!(cs.iter().filter(|c| c.kind == ContourKind::Outer).count(), 1);
        let holes: Vec<_> = cs.iter().filter(|c| c.kind == ContourKind::Hole).collect();
        assert_eq!(holes.len(), 1);
        // Hole border runs through the 8x8 ring around the gap, cutting its
        // four corners diagonally.
        assert_eq!(holes[0].area, 47.0);
        assert!(holes[0].signed_area() < 0.0);
    }

    #[test]
    fn single_pixel_and_diagonal_line() {
        let mut m = GrayMap::new(9, 9, 0);
        m.put(4, 4, 255);
        let cs = find_contours(&m).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].points, vec![Point::new(4, 4)]);
        assert_eq!((cs[0].area, cs[0].perimeter), (0.0, 0.0));

        let diag = filled(9, 9, |x, y| x == y);
        let cs = find_contours(&diag).unwrap();
        assert_eq!(cs.len(), 1, "8-connected diagonal is one component");
        assert_eq!(cs[0].area, 0.0);
    }

    #[test]
    fn one_outer_per_component() {
        // Three blobs, one of them sitting inside another's hole.
        let m = filled(40, 40, |x, y| {
            let ring = (2..20).contains(&x) && (2..20).contains(&y) && !((6..16).contains(&x) && (6..16).contains(&y));
            let island = (9..13).contains(&x) && (9..13).contains(&y);
            let far = (25..35).contains(&x) && (25..38).contains(&y);
            ring || island || far
        });
        let cs = find_contours(&m).unwrap();
        assert_eq!(cs.iter().filter(|c| c.kind == ContourKind::Outer).count(), 3);
        assert_eq!(cs.iter().filter(|c| c.kind == ContourKind::Hole).count(), 1);
    }

    #[test]
    fn four_connected_background_splits_holes() {
        // Two hole pixels touching only diagonally are separate holes.
        let m = filled(8, 8, |x, y| {
            let block = (1..7).contains(&x) && (1..7).contains(&y);
            block && !((x, y) == (3, 3) || (x, y) == (4, 4))
        });
        let cs = find_contours(&m).unwrap();
        assert_eq!(cs.iter().filter(|c| c.kind == ContourKind::Hole).count(), 2);
    }

    fn outer(area: f64) -> Contour {
        Contour { points: vec![Point::new(0, 0); 3], kind: ContourKind::Outer, area, perimeter: 4.0 * area.sqrt() }
    }

    #[test]
    fn filtering() {
        let hole = Contour { kind: ContourKind::Hole, ..outer(50.0) };
        assert!(filter_contours(&[hole.clone(), hole.clone()], 0.0, 0.0).is_empty());
        assert!(filter_contours(&[outer(81.0)], 100.0, 0.0).is_empty());
        let mixed = [outer(20.0), outer(200.0), hole, outer(2000.0)];
        let kept = filter_contours(&mixed, 100.0, 0.0);
        assert_eq!(kept.iter().map(|c| c.area).collect::<Vec<_>>(), vec![200.0, 2000.0]);
        assert_eq!(filter_contours(&kept, 100.0, 0.0), kept);
        assert!(filter_contours(&[outer(400.0)], 0.0, 81.0).is_empty());
    }

    #[test]
    fn rasterized_triangle_is_recovered() {
        let corners = [(10.0, 10.0), (90.0, 15.0), (40.0, 80.0)];
        let m = filled(100, 100, |x, y| in_polygon(x as f64, y as f64, &corners));
        let cs = filter_contours(&find_contours(&m).unwrap(), 10.0, 0.0);
        assert_eq!(cs.len(), 1);
        let t = approx_triangle(&cs[0], 0.02).unwrap();
        for (cx, cy) in corners {
            let nearest = t
                .vertices
                .iter()
                .map(|v| (f64::from(v.x) - cx).hypot(f64::from(v.y) - cy))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= 2.0, "corner ({cx},{cy}) off by {nearest}");
        }
        assert!(t.signed_area() != 0.0);
    }

    #[test]
    fn refinement_restores_cut_corners() {
        let corners = [(20.0, 20.0), (180.0, 35.0), (70.0, 150.0)];
        let near_corner = |x: f64, y: f64| corners.iter().any(|&(cx, cy)| (x - cx).hypot(y - cy) < 14.0);
        let m = filled(200, 170, |x, y| {
            let (x, y) = (x as f64, y as f64);
            in_polygon(x, y, &corners) && !near_corner(x, y)
        });
        let c = &find_contours(&m).unwrap()[0];
        let rough = approx_triangle(c, 0.02).unwrap();
        let worst = |t: &Triangle| {
            corners
                .iter()
                .map(|&(cx, cy)| {
                    t.vertices.iter().map(|v| (f64::from(v.x) - cx).hypot(f64::from(v.y) - cy)).fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        assert!(worst(&rough) > 8.0);
        let fine = refine_triangle(c, &rough);
        assert!(worst(&fine) <= 2.0, "{fine:?}");
        // A vertex that is not on the contour leaves the input alone.
        let foreign = Triangle::new(Point::new(0, 0), Point::new(5, 0), Point::new(0, 5)).unwrap();
        assert_eq!(refine_triangle(c, &foreign), foreign);
    }

    #[test]
    fn circle_terminates() {
        let m = filled(120, 120, |x, y| ((x as f64 - 60.0).powi(2) + (y as f64 - 60.0).powi(2)) < 50.0 * 50.0);
        let c = &find_contours(&m).unwrap()[0];
        match approx_triangle(c, 0.02) {
            Ok(t) => assert!(t.signed_area().abs() > 0.0),
            Err(r) => assert!(matches!(r, TriangleRejection::RetriesExhausted | TriangleRejection::TooFewVertices)),
        }
    }

    #[test]
    fn straight_line_rejected() {
        let m = filled(30, 5, |x, y| y == 2 && (3..27).contains(&x));
        let c = &find_contours(&m).unwrap()[0];
        assert!(approx_triangle(c, 0.02).is_err());
        let tiny = Contour::from_points(vec![Point::new(0, 0), Point::new(1, 0)], ContourKind::Outer);
        assert_eq!(approx_triangle(&tiny, 0.02), Err(TriangleRejection::TooFewPoints));
    }

    #[test]
    fn collinear_triangle_is_none() {
        assert!(Triangle::new(Point::new(0, 0), Point::new(2, 2), Point::new(5, 5)).is_none());
        let t = Triangle::new(Point::new(0, 0), Point::new(3, 0), Point::new(0, 3)).unwrap();
        assert_eq!(t.centroid(), (1.0, 1.0));
    }

    /// Independent polygon area: trapezoid decomposition.
    fn trapezoid_area(points: &[Point]) -> f64 {
        let n = points.len();
        (0..n)
            .map(|i| {
                let (a, b) = (points[i], points[(i + 1) % n]);
                f64::from(b.x - a.x) * f64::from(b.y + a.y) / 2.0
            })
            .sum::<f64>()
            .abs()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn traced_areas_are_consistent(seed in any::<u64>(), dx in 0usize..6, dy in 0usize..6) {
            // Random convex-ish blob: union of a few discs.
            let mut s = seed | 1;
            let mut next = |m: u64| { s ^= s << 13; s ^= s >> 7; s ^= s << 17; (s % m) as f64 };
            let discs: Vec<(f64, f64, f64)> = (0..3).map(|_| (12.0 + next(16), 12.0 + next(16), 3.0 + next(6))).collect();
            let inside = |x: usize, y: usize| discs.iter().any(|&(cx, cy, r)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r);
            let m = filled(48, 48, |x, y| inside(x, y));
            let shifted = filled(48, 48, |x, y| x >= dx && y >= dy && inside(x - dx, y - dy));
            let a = find_contours(&m).unwrap();
            let b = find_contours(&shifted).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (ca, cb) in a.iter().zip(&b) {
                prop_assert!((ca.area - trapezoid_area(&ca.points)).abs() < 1e-9);
                let moved: Vec<Point> = ca.points.iter().map(|p| Point::new(p.x + dx as i32, p.y + dy as i32)).collect();
                prop_assert_eq!(&moved, &cb.points);
                if ca.kind == ContourKind::Outer && a.len() == 1 {
                    // Pixel count of the component vs. the centre-line area: the
                    // difference is bounded by the boundary band.
                    let count = m.as_raw().iter().filter(|&&v| v == 255).count() as f64;
                    prop_assert!(count >= ca.area - 1e-9);
                    prop_assert!(count - ca.area <= ca.perimeter + 1.0);
                }
            }
        }
    }
}
