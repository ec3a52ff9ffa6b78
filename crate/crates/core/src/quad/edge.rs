//! Integrals of the triangle potential along straight segments, `int_e V_T(x) p(x) ds`.

use std::collections::HashMap;
use std::sync::Mutex;

use super::graded::{integrate_graded, Grading};
use super::newton::{potential_integral, INV_FOUR_PI};
use super::pair::{QuadConfig, TriangleMoments};
use super::rules::segment_rule;
use crate::error::{Error, Result};
use crate::geometry::{diameter, segment_triangle_distance, Point};

/// `[int_e V_T (1 - tau) ds, int_e V_T tau ds]` where `tau` runs from `p0` to `p1`.
///
/// An affine weight with endpoint values `(w0, w1)` integrates to `w0 * I[0] + w1 * I[1]`.
pub fn edge_potential_moments(p0: Point, p1: Point, t: &[Point; 3], cfg: &QuadConfig) -> Result<[f64; 2]> {
    let len = p0.distance(p1);
    let h = len.max(diameter(t));
    let sep = segment_triangle_distance(p0, p1, t) / h;
    if cfg.edge_moment_ratio.is_some_and(|r| sep >= r) {
        return Ok(scale(len, moment_moments(p0, p1, t)));
    }
    if sep >= 2.0 * cfg.near_ratio {
        return Ok(scale(len, gauss_moments(p0, p1, t, cfg.edge_far_points)));
    }
    let coarse = graded_moments(p0, p1, t, &cfg.grading);
    let fine = graded_moments(p0, p1, t, &cfg.grading.with_points(cfg.grading.points + 4));
    let mag = fine[0].abs() + fine[1].abs();
    let err = (coarse[0] - fine[0]).abs() + (coarse[1] - fine[1]).abs();
    if err > cfg.edge_tolerance * mag {
        return Err(Error::QuadratureTolerance { tolerance: cfg.edge_tolerance, estimate: err / mag });
    }
    Ok(scale(len, fine))
}

/// `int_e V_T(x) p(x) ds` for `p` affine with values `w0` at `p0` and `w1` at `p1`.
pub fn edge_potential_integral(p0: Point, p1: Point, t: &[Point; 3], w0: f64, w1: f64, cfg: &QuadConfig) -> Result<f64> {
    let m = edge_potential_moments(p0, p1, t, cfg)?;
    Ok(w0 * m[0] + w1 * m[1])
}

fn scale(len: f64, m: [f64; 2]) -> [f64; 2] {
    [INV_FOUR_PI * len * m[0], INV_FOUR_PI * len * m[1]]
}

/// Moments in the unit parameter (without the segment length and `1/4pi`).
fn gauss_moments(p0: Point, p1: Point, t: &[Point; 3], n: usize) -> [f64; 2] {
    let rule = segment_rule(n);
    let mut m = [0.0; 2];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let tau = x[0];
        let v = w * potential_integral(t, p0 + tau * (p1 - p0));
        m[0] += (1.0 - tau) * v;
        m[1] += tau * v;
    }
    m
}

/// Three-point Gauss along the segment against the moment expansion of `t`.
fn moment_moments(p0: Point, p1: Point, t: &[Point; 3]) -> [f64; 2] {
    let tm = TriangleMoments::new(t);
    let rule = segment_rule(3);
    let mut m = [0.0; 2];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let tau = x[0];
        let v = w * tm.potential(p0 + tau * (p1 - p0));
        m[0] += (1.0 - tau) * v;
        m[1] += tau * v;
    }
    m
}

/// Graded integration with breakpoints where the segment meets the edge lines of `t`
/// and where it passes closest to a vertex.
fn graded_moments(p0: Point, p1: Point, t: &[Point; 3], grading: &Grading) -> [f64; 2] {
    let d = p1 - p0;
    let len2 = d.norm_squared();
    let mut pts = vec![0.0, 1.0];
    for k in 0..3 {
        let (a, b) = (t[k], t[(k + 1) % 3]);
        let n = (b - a).perp();
        let f0 = (p0 - a).dot(n);
        let f1 = (p1 - a).dot(n);
        if f0 != f1 {
            let tau = f0 / (f0 - f1);
            if tau > 0.0 && tau < 1.0 {
                pts.push(tau);
            }
        }
        let tau = (t[k] - p0).dot(d) / len2;
        if tau > 0.0 && tau < 1.0 {
            pts.push(tau);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    let mut m = [0.0; 2];
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        for (a, b, z) in [(lo, mid, lo), (mid, hi, hi)] {
            let mut f0 = |tau: f64| (1.0 - tau) * potential_integral(t, p0 + tau * d);
            let mut f1 = |tau: f64| tau * potential_integral(t, p0 + tau * d);
            m[0] += integrate_graded(&mut f0, a, b, z, grading);
            m[1] += integrate_graded(&mut f1, a, b, z, grading);
        }
    }
    m
}

type EdgeKey = [u64; 10];

/// Memoizes near-field edge moments by normalized geometry (see [`super::pair::PairCache`]).
#[derive(Default)]
pub struct EdgeCache {
    map: Mutex<HashMap<EdgeKey, [f64; 2]>>,
}

impl EdgeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cached [`edge_potential_moments`]; far-field values are computed directly.
    pub fn moments(&self, p0: Point, p1: Point, t: &[Point; 3], cfg: &QuadConfig) -> Result<[f64; 2]> {
        let len = p0.distance(p1);
        let h = len.max(diameter(t));
        if segment_triangle_distance(p0, p1, t) / h >= 2.0 * cfg.near_ratio {
            return edge_potential_moments(p0, p1, t, cfg);
        }
        let mut tri = *t;
        tri.sort_by(|a, b| a.lex_cmp(b));
        let origin = tri[0];
        let s = 2f64.powi(diameter(&tri).log2().floor() as i32);
        let inv = 1.0 / s;
        let f = |p: Point| inv * (p - origin);
        let (q0, q1, nt) = (f(p0), f(p1), tri.map(f));
        let mut key = [0u64; 10];
        for (k, p) in [q0, q1].iter().chain(nt.iter()).enumerate() {
            key[2 * k] = p.x.to_bits();
            key[2 * k + 1] = p.y.to_bits();
        }
        if let Some(m) = self.map.lock().unwrap().get(&key) {
            return Ok([m[0] * s * s, m[1] * s * s]);
        }
        let m = edge_potential_moments(q0, q1, &nt, cfg)?;
        self.map.lock().unwrap().insert(key, m);
        Ok([m[0] * s * s, m[1] * s * s])
    }
}
