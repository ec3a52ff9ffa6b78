//! Interaction integrals `G(T, T') = (1/4pi) int_T int_T' |x - y|^{-1}` between two triangles.
//!
//! Well-separated pairs use an outer Gauss rule (with the analytic inner potential, or a
//! plain tensor rule for very distant pairs). Touching and nearby pairs are integrated edge by
//! edge in coordinates aligned with each edge of the inner triangle: the slice integral along
//! the edge direction has a closed form, leaving a one-dimensional integral in the normal
//! distance that is graded toward the edge line.

use std::collections::HashMap;
use std::sync::Mutex;

use super::graded::{integrate_graded, Grading};
use super::newton::{potential_integral, INV_FOUR_PI};
use super::rules::{quadrature_rule, RuleKind};
use crate::error::{Error, Result};
use crate::geometry::{diameter, signed_area, triangle_distance, Point};

/// Proximity class of a triangle pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    Identical,
    EdgeAdjacent,
    VertexAdjacent,
    DisjointNear,
    DisjointFar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairClass {
    pub kind: PairKind,
    /// `dist(T, T') / max(h_T, h_T')`.
    pub separation: f64,
}

/// Rule used for a separated pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarRule {
    /// Triangle rule of the given degree on the outer triangle, analytic inner potential.
    OuterAnalytic(usize),
    /// Triangle rule of the given degree on both triangles.
    Tensor(usize),
    /// Centroid interaction with the second-moment correction of both triangles.
    Moment,
}

/// Quadrature settings for pair and edge integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadConfig {
    /// Pairs with separation below this ratio count as near.
    pub near_ratio: f64,
    /// `(minimum separation, rule)` bands for separated pairs, sorted by decreasing separation.
    pub far_bands: Vec<(f64, FarRule)>,
    /// Grading used by the semi-analytic near-field integrals.
    pub grading: Grading,
    /// Gauss points per segment for well-separated edge integrals.
    pub edge_far_points: usize,
    /// Relative self-consistency required of graded edge integrals.
    pub edge_tolerance: f64,
    /// Separation beyond which edge integrals use the moment expansion of the triangle.
    pub edge_moment_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadProfile {
    Fast,
    Accurate,
}

impl QuadConfig {
    pub fn accurate() -> Self {
        Self {
            near_ratio: 1.0,
            far_bands: vec![
                (8.0, FarRule::Tensor(7)),
                (4.0, FarRule::OuterAnalytic(7)),
                (1.0, FarRule::OuterAnalytic(10)),
            ],
            grading: Grading::new(10),
            edge_far_points: 8,
            edge_tolerance: 1e-8,
            edge_moment_ratio: None,
        }
    }

    pub fn fast() -> Self {
        Self {
            near_ratio: 1.0,
            far_bands: vec![
                (8.0, FarRule::Moment),
                (3.0, FarRule::Tensor(4)),
                (1.0, FarRule::OuterAnalytic(5)),
            ],
            grading: Grading::new(8),
            edge_far_points: 5,
            edge_tolerance: 1e-8,
            edge_moment_ratio: Some(8.0),
        }
    }

    pub fn from_profile(p: QuadProfile) -> Self {
        match p {
            QuadProfile::Fast => Self::fast(),
            QuadProfile::Accurate => Self::accurate(),
        }
    }

    /// Rule for a separated pair, or `None` when the near-field integrator is required.
    pub fn far_rule(&self, separation: f64) -> Option<FarRule> {
        if separation < self.near_ratio {
            return None;
        }
        self.far_bands.iter().find(|(min, _)| separation >= *min).map(|(_, r)| *r)
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self::accurate()
    }
}

pub fn classify_pair(t: &[Point; 3], s: &[Point; 3], near_ratio: f64) -> PairClass {
    let shared = t.iter().filter(|p| s.contains(p)).count();
    let kind = match shared {
        3 => PairKind::Identical,
        2 => PairKind::EdgeAdjacent,
        1 => PairKind::VertexAdjacent,
        _ => PairKind::DisjointFar,
    };
    let h = diameter(t).max(diameter(s));
    let separation = if shared > 0 { 0.0 } else { triangle_distance(t, s) / h };
    let kind = if kind == PairKind::DisjointFar && separation < near_ratio {
        PairKind::DisjointNear
    } else {
        kind
    };
    PairClass { kind, separation }
}

fn check_triangle(t: &[Point; 3]) -> Result<()> {
    let area = signed_area(t[0], t[1], t[2]);
    let scale = (t[1] - t[0]).norm_squared().max((t[2] - t[0]).norm_squared());
    if !(area.abs() > 1e-14 * scale) {
        return Err(Error::DegenerateTriangle { area });
    }
    Ok(())
}

/// Vertices sorted lexicographically; used for canonical ordering and cache keys.
fn sorted(t: &[Point; 3]) -> [Point; 3] {
    let mut v = *t;
    v.sort_by(|a, b| a.lex_cmp(b));
    v
}

fn tri_cmp(a: &[Point; 3], b: &[Point; 3]) -> std::cmp::Ordering {
    for k in 0..3 {
        let c = a[k].lex_cmp(&b[k]);
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    std::cmp::Ordering::Equal
}

/// `(1/4pi) int_T int_T' |x - y|^{-1} dS_y dS_x`. Symmetric in its arguments.
pub fn pair_potential(t: &[Point; 3], s: &[Point; 3], cfg: &QuadConfig) -> Result<f64> {
    check_triangle(t)?;
    check_triangle(s)?;
    let (a, b) = (sorted(t), sorted(s));
    let (inner, outer) = if tri_cmp(&a, &b) == std::cmp::Ordering::Greater { (b, a) } else { (a, b) };
    let class = classify_pair(&inner, &outer, cfg.near_ratio);
    Ok(pair_sorted(&inner, &outer, class, cfg))
}

fn pair_sorted(inner: &[Point; 3], outer: &[Point; 3], class: PairClass, cfg: &QuadConfig) -> f64 {
    match cfg.far_rule(class.separation).filter(|_| matches!(class.kind, PairKind::DisjointFar)) {
        Some(FarRule::OuterAnalytic(deg)) => INV_FOUR_PI * outer_analytic(inner, outer, deg),
        Some(FarRule::Tensor(deg)) => INV_FOUR_PI * tensor(inner, outer, deg),
        Some(FarRule::Moment) => INV_FOUR_PI * TriangleMoments::new(inner).interaction(&TriangleMoments::new(outer)),
        None => INV_FOUR_PI * semi_analytic(inner, outer, &cfg.grading),
    }
}

/// `int_outer int_inner |x - y|^{-1}` with the outer integral by a triangle rule.
pub fn outer_analytic(inner: &[Point; 3], outer: &[Point; 3], degree: usize) -> f64 {
    let rule = quadrature_rule(RuleKind::Triangle, degree).expect("supported degree");
    rule.map_triangle(outer).map(|(x, w)| w * potential_integral(inner, x)).sum()
}

/// Point-to-point tensor rule on both triangles.
pub fn tensor(t: &[Point; 3], s: &[Point; 3], degree: usize) -> f64 {
    let rule = quadrature_rule(RuleKind::Triangle, degree).expect("supported degree");
    let mut ys = [(Point::default(), 0.0); 64];
    let n = rule.len();
    assert!(n <= ys.len(), "tensor rule too large");
    for (slot, y) in ys.iter_mut().zip(rule.map_triangle(s)) {
        *slot = y;
    }
    rule.map_triangle(t)
        .map(|(x, wx)| {
            let inner: f64 = ys[..n].iter().map(|&(y, wy)| wy / (x - y).norm()).sum();
            wx * inner
        })
        .sum()
}

/// Area, centroid and second central moments of a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleMoments {
    pub area: f64,
    pub centroid: Point,
    /// `int_T (x - c)(x - c)^T / |T|` as `(xx, xy, yy)`.
    pub second: [f64; 3],
}

impl TriangleMoments {
    pub fn new(t: &[Point; 3]) -> Self {
        let c = crate::geometry::centroid(t);
        let mut s = [0.0; 3];
        for p in t {
            let q = *p - c;
            s[0] += q.x * q.x;
            s[1] += q.x * q.y;
            s[2] += q.y * q.y;
        }
        Self { area: signed_area(t[0], t[1], t[2]).abs(), centroid: c, second: s.map(|v| v / 12.0) }
    }

    /// `int_T |x - y|^{-1} dy` from the expansion about the centroid.
    #[inline]
    pub fn potential(&self, x: Point) -> f64 {
        let r = x - self.centroid;
        let r2 = r.norm_squared();
        let inv = 1.0 / r2.sqrt();
        let s = self.second;
        let rsr = r.x * r.x * s[0] + 2.0 * r.x * r.y * s[1] + r.y * r.y * s[2];
        let inv2 = inv * inv;
        self.area * inv * (1.0 + 0.5 * (3.0 * rsr * inv2 - (s[0] + s[2])) * inv2)
    }

    /// `int_T int_T' |x - y|^{-1}` from the expansion about the centroids, accurate to third
    /// order in `size / distance`.
    #[inline]
    pub fn interaction(&self, other: &TriangleMoments) -> f64 {
        let r = self.centroid - other.centroid;
        let r2 = r.norm_squared();
        let inv = 1.0 / r2.sqrt();
        let s = [self.second[0] + other.second[0], self.second[1] + other.second[1], self.second[2] + other.second[2]];
        let rsr = r.x * r.x * s[0] + 2.0 * r.x * r.y * s[1] + r.y * r.y * s[2];
        let tr = s[0] + s[2];
        let inv2 = inv * inv;
        self.area * other.area * inv * (1.0 + 0.5 * (3.0 * rsr * inv2 - tr) * inv2)
    }
}

/// `int_outer int_inner |x - y|^{-1}` for arbitrary relative position, including overlap.
pub fn semi_analytic(inner: &[Point; 3], outer: &[Point; 3], grading: &Grading) -> f64 {
    let ccw = signed_area(inner[0], inner[1], inner[2]) > 0.0;
    let mut total = 0.0;
    for k in 0..3 {
        let (a, b) = if ccw {
            (inner[k], inner[(k + 1) % 3])
        } else {
            (inner[(k + 1) % 3], inner[k])
        };
        total += edge_slab(a, b, outer, grading);
    }
    total
}

/// Contribution of the inner edge `a -> b` (interior on the left) integrated over `outer`.
fn edge_slab(a: Point, b: Point, outer: &[Point; 3], grading: &Grading) -> f64 {
    let e = b - a;
    let len = e.norm();
    let dir = (1.0 / len) * e;
    // (sigma, delta): arclength along the edge and signed distance toward the interior
    let coords: [(f64, f64); 3] = outer.map(|p| {
        let r = p - a;
        (r.dot(dir), dir.cross(r))
    });
    let mut levels = [coords[0].1, coords[1].1, coords[2].1];
    levels.sort_by(f64::total_cmp);
    let mut breaks: Vec<f64> = levels.to_vec();
    if levels[0] < 0.0 && levels[2] > 0.0 {
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
    }
    let mut slice = |delta: f64| -> f64 {
        if delta == 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..3 {
            let (s0, d0) = coords[k];
            let (s1, d1) = coords[(k + 1) % 3];
            if d0 == d1 {
                if d0 == delta {
                    lo = lo.min(s0).min(s1);
                    hi = hi.max(s0).max(s1);
                }
                continue;
            }
            let (dmin, dmax) = if d0 < d1 { (d0, d1) } else { (d1, d0) };
            if delta < dmin || delta > dmax {
                continue;
            }
            let s = s0 + (delta - d0) / (d1 - d0) * (s1 - s0);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        if hi <= lo {
            return 0.0;
        }
        delta * slice_integral(lo, hi, len, delta.abs())
    };
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi > lo {
            total += integrate_graded(&mut slice, lo, hi, 0.0, grading);
        }
    }
    total
}

/// `int_lo^hi [asinh((len - s)/h) + asinh(s/h)] ds` for `h > 0`.
#[inline]
fn slice_integral(lo: f64, hi: f64, len: f64, h: f64) -> f64 {
    // Phi(w) = w asinh(w/h) - sqrt(w^2 + h^2) = |w| (ln(|w| + r) - ln h) - r
    let ws = [hi, lo, len - lo, len - hi];
    let signs = [1.0, -1.0, 1.0, -1.0];
    let mut smooth = 0.0;
    let mut log_coeff = 0.0;
    for (w, c) in ws.iter().zip(signs) {
        let aw = w.abs();
        let r = (aw * aw + h * h).sqrt();
        smooth += c * (aw * (aw + r).ln() - r);
        log_coeff += c * aw;
    }
    smooth - log_coeff * h.ln()
}

type PairKey = [u64; 12];

/// Memoizes near-field pair integrals by their translation- and scale-normalized geometry.
///
/// Keys use vertex coordinates relative to the inner triangle's first sorted vertex, scaled by
/// a power of two, so cached values are exactly reusable across congruent translated pairs.
#[derive(Default)]
pub struct PairCache {
    map: Mutex<HashMap<PairKey, f64>>,
}

impl PairCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Pair integrator combining the rule selection of [`QuadConfig`] with a near-field cache.
pub struct PairIntegrator<'a> {
    pub cfg: &'a QuadConfig,
    pub cache: &'a PairCache,
}

impl<'a> PairIntegrator<'a> {
    pub fn new(cfg: &'a QuadConfig, cache: &'a PairCache) -> Self {
        Self { cfg, cache }
    }

    /// Same value as [`pair_potential`], memoized for near-field pairs.
    pub fn pair(&self, t: &[Point; 3], s: &[Point; 3]) -> f64 {
        let (a, b) = (sorted(t), sorted(s));
        let (inner, outer) = if tri_cmp(&a, &b) == std::cmp::Ordering::Greater { (b, a) } else { (a, b) };
        let class = classify_pair(&inner, &outer, self.cfg.near_ratio);
        if matches!(class.kind, PairKind::DisjointFar) && self.cfg.far_rule(class.separation).is_some() {
            return pair_sorted(&inner, &outer, class, self.cfg);
        }
        let (scale, ni, no) = normalize(&inner, &outer);
        let mut key = [0u64; 12];
        for (k, p) in ni.iter().chain(no.iter()).enumerate() {
            key[2 * k] = p.x.to_bits();
            key[2 * k + 1] = p.y.to_bits();
        }
        if let Some(v) = self.cache.map.lock().unwrap().get(&key) {
            return v * scale * scale * scale;
        }
        let v = INV_FOUR_PI * semi_analytic(&ni, &no, &self.cfg.grading);
        self.cache.map.lock().unwrap().insert(key, v);
        v * scale * scale * scale
    }
}

/// Translate so the inner triangle's first vertex is the origin and rescale by a power of two.
fn normalize(inner: &[Point; 3], outer: &[Point; 3]) -> (f64, [Point; 3], [Point; 3]) {
    let origin = inner[0];
    let h = diameter(inner);
    let scale = 2f64.powi(h.log2().floor() as i32);
    let inv = 1.0 / scale;
    let f = |p: &Point| inv * (*p - origin);
    (scale, inner.map(|p| f(&p)), outer.map(|p| f(&p)))
}
