//! Closed-form potential of a uniform density on a flat triangle, evaluated in its plane.
//!
//! For `x` in the plane, `int_T |x - y|^{-1} dy` splits into the signed triangles spanned by
//! `x` and each edge. With `d` the signed distance from `x` to the edge line (positive on
//! the interior side) and `s_a, s_b` the edge endpoints measured from the foot of the
//! perpendicular, the edge contributes `d (asinh(s_b/|d|) - asinh(s_a/|d|))`. The
//! out-of-plane arctangent terms vanish identically for in-plane evaluation points.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{signed_area, Point};

pub const INV_FOUR_PI: f64 = 1.0 / (4.0 * PI);

/// `(1/4pi) int_T |x - y|^{-1} dS_y` for a non-degenerate triangle and any in-plane `x`.
pub fn newton_potential_triangle(t: &[Point; 3], x: Point) -> Result<f64> {
    let area = signed_area(t[0], t[1], t[2]);
    let scale = (t[1] - t[0]).norm_squared().max((t[2] - t[0]).norm_squared());
    if area.abs() <= 1e-14 * scale || !area.is_finite() {
        return Err(Error::DegenerateTriangle { area });
    }
    Ok(INV_FOUR_PI * potential_integral(t, x))
}

/// `int_T |x - y|^{-1} dy` without the `1/4pi` factor. Orientation-agnostic.
#[inline]
pub fn potential_integral(t: &[Point; 3], x: Point) -> f64 {
    let ccw = signed_area(t[0], t[1], t[2]) > 0.0;
    let mut sum = 0.0;
    for k in 0..3 {
        let (a, b) = if ccw { (t[k], t[(k + 1) % 3]) } else { (t[(k + 1) % 3], t[k]) };
        sum += edge_term(a, b, x);
    }
    sum
}

/// Contribution of the directed edge `a -> b` (interior on the left).
#[inline]
fn edge_term(a: Point, b: Point, x: Point) -> f64 {
    let e = b - a;
    let len = e.norm();
    let dir = (1.0 / len) * e;
    // signed distance along the inward (left) normal
    let d = dir.cross(x - a);
    if d == 0.0 {
        return 0.0;
    }
    let sa = (a - x).dot(dir);
    let sb = sa + len;
    d * asinh_difference(sa, sb, d.abs())
}

/// `asinh(sb/h) - asinh(sa/h)` for `sa <= sb`, `h > 0`, without cancellation.
#[inline]
pub(crate) fn asinh_difference(sa: f64, sb: f64, h: f64) -> f64 {
    let ra = (sa * sa + h * h).sqrt();
    let rb = (sb * sb + h * h).sqrt();
    // same-sign branches are written as ln_1p of the relative increment so that
    // distant edges keep full relative accuracy
    let len = sb - sa;
    if sa >= 0.0 {
        (len * (1.0 + (sa + sb) / (ra + rb)) / (sa + ra)).ln_1p()
    } else if sb <= 0.0 {
        (len * (1.0 - (sa + sb) / (ra + rb)) / (rb - sb)).ln_1p()
    } else {
        ((sb + rb) * (ra - sa) / (h * h)).ln()
    }
}
