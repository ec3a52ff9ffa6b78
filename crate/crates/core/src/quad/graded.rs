//! One-dimensional Gauss–Legendre integration with geometric grading toward a point.

use super::rules::segment_rule;

/// Grading parameters: panels are accepted once `len <= admissibility * dist(z, panel)`,
/// otherwise they are split with ratio `ratio` toward the singular point `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub points: usize,
    pub ratio: f64,
    pub admissibility: f64,
    pub max_depth: usize,
}

impl Grading {
    pub const fn new(points: usize) -> Self {
        Self { points, ratio: 0.25, admissibility: 1.0, max_depth: 48 }
    }

    /// Same grading with a different number of Gauss points per panel.
    pub fn with_points(self, points: usize) -> Self {
        Self { points, ..self }
    }
}

/// `int_a^b f` with panels refined geometrically toward `z` (which may lie outside `[a, b]`).
pub fn integrate_graded<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, z: f64, g: &Grading) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = segment_rule(g.points);
    let mut total = 0.0;
    // explicit stack keeps the panel order deterministic
    let mut stack = vec![(a, b, 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let len = hi - lo;
        let dist = if z < lo {
            lo - z
        } else if z > hi {
            z - hi
        } else {
            0.0
        };
        if len <= g.admissibility * dist || depth >= g.max_depth || len <= f64::EPSILON * (b - a) {
            total += gauss(f, lo, hi, rule.nodes.iter().map(|n| n[0]).zip(rule.weights.iter().copied()));
            continue;
        }
        if z > lo && z < hi {
            stack.push((z, hi, depth + 1));
            stack.push((lo, z, depth + 1));
        } else if z <= lo {
            let m = lo + g.ratio * len;
            stack.push((m, hi, depth + 1));
            stack.push((lo, m, depth + 1));
        } else {
            let m = hi - g.ratio * len;
            stack.push((m, hi, depth + 1));
            stack.push((lo, m, depth + 1));
        }
    }
    total
}

#[inline]
fn gauss<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, rule: impl Iterator<Item = (f64, f64)>) -> f64 {
    let h = b - a;
    let mut s = 0.0;
    for (x, w) in rule {
        s += w * f(a + h * x);
    }
    s * h
}
