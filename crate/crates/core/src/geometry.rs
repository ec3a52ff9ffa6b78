//! Small planar geometry helpers shared by the mesh and quadrature code.

use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) in the plane of the screen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Counterclockwise rotation by a right angle.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Lexicographic comparison on (x, y).
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        Point::new(self * p.x, self * p.y)
    }
}

/// Signed area of the triangle `(a, b, c)`; positive when counterclockwise.
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Longest edge length of a triangle.
pub fn diameter(t: &[Point; 3]) -> f64 {
    let a = t[0].distance(t[1]);
    let b = t[1].distance(t[2]);
    let c = t[2].distance(t[0]);
    a.max(b).max(c)
}

pub fn centroid(t: &[Point; 3]) -> Point {
    Point::new(
        (t[0].x + t[1].x + t[2].x) / 3.0,
        (t[0].y + t[1].y + t[2].y) / 3.0,
    )
}

/// Smallest interior angle in radians.
pub fn min_angle(t: &[Point; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..3 {
        let p = t[k];
        let u = t[(k + 1) % 3] - p;
        let v = t[(k + 2) % 3] - p;
        let ang = u.cross(v).abs().atan2(u.dot(v));
        best = best.min(ang);
    }
    best
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let s = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + s * ab)
}

/// Whether `p` lies in the closed triangle (either orientation).
pub fn point_in_triangle(p: Point, t: &[Point; 3]) -> bool {
    let d0 = (t[1] - t[0]).cross(p - t[0]);
    let d1 = (t[2] - t[1]).cross(p - t[1]);
    let d2 = (t[0] - t[2]).cross(p - t[2]);
    let neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
    let pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
    !(neg && pos)
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Euclidean distance between two closed triangles; zero when they touch or overlap.
pub fn triangle_distance(s: &[Point; 3], t: &[Point; 3]) -> f64 {
    for k in 0..3 {
        if point_in_triangle(s[k], t) || point_in_triangle(t[k], s) {
            return 0.0;
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect(s[i], s[(i + 1) % 3], t[j], t[(j + 1) % 3]) {
                return 0.0;
            }
        }
    }
    let mut best = f64::INFINITY;
    for i in 0..3 {
        for j in 0..3 {
            best = best.min(point_segment_distance(s[i], t[j], t[(j + 1) % 3]));
            best = best.min(point_segment_distance(t[i], s[j], s[(j + 1) % 3]));
        }
    }
    best
}

/// Distance between a closed segment and a closed triangle.
pub fn segment_triangle_distance(a: Point, b: Point, t: &[Point; 3]) -> f64 {
    if point_in_triangle(a, t) || point_in_triangle(b, t) {
        return 0.0;
    }
    for j in 0..3 {
        if segments_intersect(a, b, t[j], t[(j + 1) % 3]) {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for j in 0..3 {
        let (c, d) = (t[j], t[(j + 1) % 3]);
        best = best
            .min(point_segment_distance(a, c, d))
            .min(point_segment_distance(b, c, d))
            .min(point_segment_distance(c, a, b));
    }
    best
}
