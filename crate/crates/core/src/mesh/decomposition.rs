//! Sub-domain decompositions of the screen and their interface skeleton.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{point_in_triangle, signed_area, Point};

/// Relative tolerance for geometric incidence tests (scaled by the relevant length).
pub const GEOMETRIC_TOLERANCE: f64 = 1e-10;

/// A straight interface segment shared by sub-domains `i < j`.
///
/// The segment runs from the lexicographically smaller endpoint `a` to the larger `b`.
/// Jumps are `[v] = v_j - v_i`; the tangent is oriented so that sub-domain `j` lies on its
/// left, which makes the Nitsche coupling consistent with integration by parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    pub a: Point,
    pub b: Point,
    pub i: usize,
    pub j: usize,
    pub tangent: Point,
}

impl Interface {
    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    /// Arclength coordinate of `p` measured from `a`, and its distance from the line.
    pub fn project(&self, p: Point) -> (f64, f64) {
        let d = self.b - self.a;
        let len = d.norm();
        let u = (1.0 / len) * d;
        let r = p - self.a;
        (r.dot(u), u.cross(r).abs())
    }

    /// Whether `p` lies on the closed segment within the geometric tolerance.
    pub fn contains(&self, p: Point) -> bool {
        let len = self.length();
        let tol = GEOMETRIC_TOLERANCE * len;
        let (s, off) = self.project(p);
        off <= tol && s >= -tol && s <= len + tol
    }
}

/// A polygonal decomposition of the screen into sub-domains.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Counterclockwise vertex loops.
    pub subdomains: Vec<Vec<Point>>,
    pub interfaces: Vec<Interface>,
    /// Portions of sub-domain edges not covered by interfaces: `(a, b, subdomain)`.
    pub exterior: Vec<(Point, Point, usize)>,
}

/// Named decompositions available from the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum DecompositionSpec {
    /// `(-1/2, 1/2)^2` split into four squares by the coordinate axes.
    FourSquare,
    /// `(-1/2, 1/2)^2` as a single sub-domain.
    Single,
    /// Explicit polygons.
    Polygons(Vec<Vec<Point>>),
}

impl Decomposition {
    pub fn num_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    pub fn num_interfaces(&self) -> usize {
        self.interfaces.len()
    }

    /// Total length of the skeleton.
    pub fn skeleton_length(&self) -> f64 {
        self.interfaces.iter().map(Interface::length).sum()
    }

    pub fn area(&self) -> f64 {
        self.subdomains.iter().map(|p| polygon_area(p)).sum()
    }

    /// Whether `p` lies on the exterior boundary of the screen.
    pub fn on_exterior_boundary(&self, p: Point) -> bool {
        self.exterior.iter().any(|&(a, b, _)| {
            let len = a.distance(b);
            let tol = GEOMETRIC_TOLERANCE * len;
            let d = b - a;
            let u = (1.0 / len) * d;
            let r = p - a;
            let s = r.dot(u);
            u.cross(r).abs() <= tol && s >= -tol && s <= len + tol
        })
    }

    /// Axis-aligned bounding box of sub-domain `k` when it is a rectangle.
    pub fn rectangle(&self, k: usize) -> Option<(Point, Point)> {
        let poly = &self.subdomains[k];
        if poly.len() != 4 {
            return None;
        }
        let lo = Point::new(
            poly.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
            poly.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
        );
        let hi = Point::new(
            poly.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max),
            poly.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max),
        );
        let corners = [lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)];
        corners.iter().all(|c| poly.contains(c)).then_some((lo, hi))
    }
}

pub fn polygon_area(p: &[Point]) -> f64 {
    let n = p.len();
    0.5 * (0..n).map(|k| p[k].cross(p[(k + 1) % n])).sum::<f64>()
}

fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
    vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
}

impl DecompositionSpec {
    pub fn polygons(&self) -> Vec<Vec<Point>> {
        match self {
            DecompositionSpec::FourSquare => vec![
                square(-0.5, -0.5, 0.0, 0.0),
                square(0.0, -0.5, 0.5, 0.0),
                square(-0.5, 0.0, 0.0, 0.5),
                square(0.0, 0.0, 0.5, 0.5),
            ],
            DecompositionSpec::Single => vec![square(-0.5, -0.5, 0.5, 0.5)],
            DecompositionSpec::Polygons(p) => p.clone(),
        }
    }

    /// Parse a polygon file: one sub-domain per line as `x0 y0 x1 y1 ...`; `#` starts a comment.
    pub fn parse_polygons(text: &str) -> Result<Self> {
        let mut polys = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            let nums = nums.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if nums.len() < 6 || nums.len() % 2 != 0 {
                return Err(Error::Parse(format!("line {}: expected an even number (>= 6) of coordinates", lineno + 1)));
            }
            polys.push(nums.chunks(2).map(|c| Point::new(c[0], c[1])).collect());
        }
        Ok(DecompositionSpec::Polygons(polys))
    }
}

/// Validate polygons and derive the interface skeleton and exterior boundary.
pub fn build_decomposition(spec: &DecompositionSpec) -> Result<Decomposition> {
    let mut subdomains = spec.polygons();
    if subdomains.is_empty() {
        return Err(Error::Decomposition("no sub-domains".into()));
    }
    for (k, poly) in subdomains.iter_mut().enumerate() {
        if poly.len() < 3 {
            return Err(Error::Decomposition(format!("sub-domain {k} has fewer than 3 vertices")));
        }
        let area = polygon_area(poly);
        if area == 0.0 || !area.is_finite() {
            return Err(Error::Decomposition(format!("sub-domain {k} is degenerate")));
        }
        if area < 0.0 {
            poly.reverse();
        }
        if !is_simple(poly) {
            return Err(Error::Decomposition(format!("sub-domain {k} is not a simple polygon")));
        }
    }
    check_disjoint(&subdomains)?;

    let scale = subdomains
        .iter()
        .flatten()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = GEOMETRIC_TOLERANCE * scale;

    let mut interfaces = Vec::new();
    for i in 0..subdomains.len() {
        for j in i + 1..subdomains.len() {
            for (ea, eb) in edges(&subdomains[i]) {
                for (fa, fb) in edges(&subdomains[j]) {
                    if let Some((a, b)) = collinear_overlap(ea, eb, fa, fb, tol) {
                        let full_i = same_segment((a, b), (ea, eb), tol);
                        let full_j = same_segment((a, b), (fa, fb), tol);
                        if !full_i && !full_j {
                            return Err(Error::Decomposition(format!(
                                "interface between sub-domains {i} and {j} is not an entire edge of either"
                            )));
                        }
                        let (a, b) = if a.lex_cmp(&b) == Ordering::Greater { (b, a) } else { (a, b) };
                        // sub-domain j must lie to the left of the tangent; edge (fa, fb) of the
                        // counterclockwise loop of j has j on its left
                        let dir = (1.0 / a.distance(b)) * (b - a);
                        let fdir = fb - fa;
                        let tangent = if fdir.dot(dir) > 0.0 { dir } else { -dir };
                        interfaces.push(Interface { a, b, i, j, tangent });
                    }
                }
            }
        }
    }

    // exterior boundary: edge portions not covered by interfaces of the owning sub-domain
    let mut exterior = Vec::new();
    for (k, poly) in subdomains.iter().enumerate() {
        for (ea, eb) in edges(poly) {
            let len = ea.distance(eb);
            let u = (1.0 / len) * (eb - ea);
            let mut covered: Vec<(f64, f64)> = interfaces
                .iter()
                .filter(|f| f.i == k || f.j == k)
                .filter_map(|f| {
                    let (sa, oa) = project(ea, u, f.a);
                    let (sb, ob) = project(ea, u, f.b);
                    (oa <= tol && ob <= tol).then(|| (sa.min(sb).max(0.0), sa.max(sb).min(len)))
                })
                .filter(|(lo, hi)| hi - lo > tol)
                .collect();
            covered.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut cursor = 0.0;
            for (lo, hi) in covered {
                if lo > cursor + tol {
                    exterior.push((ea + cursor * u, ea + lo * u, k));
                }
                cursor = cursor.max(hi);
            }
            if len > cursor + tol {
                exterior.push((ea + cursor * u, eb, k));
            }
        }
    }

    let decomposition = Decomposition { subdomains, interfaces, exterior };
    check_connected_without_holes(&decomposition, tol)?;
    Ok(decomposition)
}

fn project(origin: Point, u: Point, p: Point) -> (f64, f64) {
    let r = p - origin;
    (r.dot(u), u.cross(r).abs())
}

fn edges(poly: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    (0..poly.len()).map(move |k| (poly[k], poly[(k + 1) % poly.len()]))
}

fn same_segment(s: (Point, Point), t: (Point, Point), tol: f64) -> bool {
    let close = |p: Point, q: Point| p.distance(q) <= tol;
    (close(s.0, t.0) && close(s.1, t.1)) || (close(s.0, t.1) && close(s.1, t.0))
}

/// Overlap of two segments of positive length when they are collinear.
fn collinear_overlap(a: Point, b: Point, c: Point, d: Point, tol: f64) -> Option<(Point, Point)> {
    let len = a.distance(b);
    let u = (1.0 / len) * (b - a);
    let (sc, oc) = project(a, u, c);
    let (sd, od) = project(a, u, d);
    if oc > tol || od > tol {
        return None;
    }
    let lo = sc.min(sd).max(0.0);
    let hi = sc.max(sd).min(len);
    (hi - lo > tol).then(|| (a + lo * u, a + hi * u))
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in i + 1..n {
            if (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            if segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Strict interior containment by ray casting, with boundary points excluded.
fn strictly_inside(p: Point, poly: &[Point], tol: f64) -> bool {
    for (a, b) in edges(poly) {
        let len = a.distance(b);
        let u = (1.0 / len) * (b - a);
        let (s, off) = project(a, u, p);
        if off <= tol && s >= -tol && s <= len + tol {
            return false;
        }
    }
    let mut inside = false;
    for (a, b) in edges(poly) {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn check_disjoint(polys: &[Vec<Point>]) -> Result<()> {
    let scale = polys.iter().flatten().map(|p| p.x.abs().max(p.y.abs())).fold(0.0, f64::max);
    let tol = GEOMETRIC_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            let (p, q) = (&polys[i], &polys[j]);
            let crossing = edges(p).any(|(a, b)| edges(q).any(|(c, d)| segments_cross(a, b, c, d)));
            let nested = p.iter().any(|v| strictly_inside(*v, q, tol))
                || q.iter().any(|v| strictly_inside(*v, p, tol))
                || strictly_inside(centroid(p), q, tol)
                || strictly_inside(centroid(q), p, tol);
            let identical = p.len() == q.len() && p.iter().all(|v| q.iter().any(|w| v.distance(*w) <= tol));
            if crossing || nested || identical {
                return Err(Error::Decomposition(format!("sub-domains {i} and {j} overlap")));
            }
        }
    }
    Ok(())
}

fn centroid(poly: &[Point]) -> Point {
    // centroid of the first fan triangle lies in the interior for convex and most simple loops
    let n = poly.len();
    let mut best = None;
    for k in 1..n - 1 {
        let t = [poly[0], poly[k], poly[k + 1]];
        if signed_area(t[0], t[1], t[2]) > 0.0 {
            let c = crate::geometry::centroid(&t);
            if poly.len() == 3 || point_in_triangle(c, &t) {
                best = Some(c);
                break;
            }
        }
    }
    best.unwrap_or(poly[0])
}

/// Sub-domains must form one connected piece whose exterior boundary is a single loop.
fn check_connected_without_holes(d: &Decomposition, tol: f64) -> Result<()> {
    let k = d.subdomains.len();
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(p) = stack.pop() {
        for f in &d.interfaces {
            for (u, v) in [(f.i, f.j), (f.j, f.i)] {
                if u == p && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Decomposition("sub-domains are not connected through interfaces (gap)".into()));
    }
    // walk the exterior segments; a single closed loop means no holes
    let segs = &d.exterior;
    if segs.is_empty() {
        return Err(Error::Decomposition("no exterior boundary".into()));
    }
    let mut used = vec![false; segs.len()];
    let start = segs[0].0;
    let mut cur = segs[0].1;
    used[0] = true;
    let mut count = 1;
    while cur.distance(start) > tol {
        match (0..segs.len()).find(|&s| !used[s] && segs[s].0.distance(cur) <= tol) {
            Some(s) => {
                used[s] = true;
                cur = segs[s].1;
                count += 1;
            }
            None => return Err(Error::Decomposition("exterior boundary is not a closed loop".into())),
        }
    }
    if count != segs.len() {
        return Err(Error::Decomposition("screen has a hole or a gap between sub-domains".into()));
    }
    Ok(())
}
