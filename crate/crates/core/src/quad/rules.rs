//! Gauss rules on the unit interval and the reference triangle.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::Point;

pub const MAX_SEGMENT_DEGREE: usize = 21;
pub const MAX_TRIANGLE_DEGREE: usize = 10;

/// Reference-element kind of a [`QuadratureRule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// Unit interval `[0, 1]`, nodes given as the arclength parameter.
    Segment,
    /// Triangle `(0,0), (1,0), (0,1)`, nodes given in barycentric coordinates.
    Triangle,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
    /// Segment rules use only the first coordinate.
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference measure: 1 for segments, 1/2 for triangles.
    pub fn reference_measure(&self) -> f64 {
        match self.kind {
            RuleKind::Segment => 1.0,
            RuleKind::Triangle => 0.5,
        }
    }

    /// Nodes and weights mapped onto a physical triangle; weights sum to its area.
    pub fn map_triangle(&self, t: &[Point; 3]) -> impl Iterator<Item = (Point, f64)> + '_ {
        debug_assert_eq!(self.kind, RuleKind::Triangle);
        let [a, b, c] = *t;
        let jac = (b - a).cross(c - a).abs();
        self.nodes.iter().zip(&self.weights).map(move |(l, &w)| {
            let p = Point::new(
                l[0] * a.x + l[1] * b.x + l[2] * c.x,
                l[0] * a.y + l[1] * b.y + l[2] * c.y,
            );
            (p, w * jac)
        })
    }
}

/// Look up a rule integrating polynomials of `degree` exactly.
pub fn quadrature_rule(kind: RuleKind, degree: usize) -> Result<&'static QuadratureRule> {
    match kind {
        RuleKind::Segment => {
            if degree > MAX_SEGMENT_DEGREE {
                return Err(Error::UnsupportedOrder { kind: "segment", order: degree });
            }
            Ok(segment_rule((degree + 1).div_ceil(2).max(1)))
        }
        RuleKind::Triangle => {
            if degree > MAX_TRIANGLE_DEGREE {
                return Err(Error::UnsupportedOrder { kind: "triangle", order: degree });
            }
            static TABLE: OnceLock<Vec<QuadratureRule>> = OnceLock::new();
            let table = TABLE.get_or_init(|| (0..=MAX_TRIANGLE_DEGREE).map(build_triangle_rule).collect());
            Ok(&table[degree])
        }
    }
}

/// `n`-point Gauss–Legendre rule on `[0, 1]` (exact up to degree `2n - 1`).
pub fn segment_rule(n: usize) -> &'static QuadratureRule {
    const MAX_POINTS: usize = 64;
    assert!((1..=MAX_POINTS).contains(&n), "Gauss-Legendre point count {n} out of range");
    static TABLE: OnceLock<Vec<QuadratureRule>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (1..=MAX_POINTS)
            .map(|n| {
                let (x, w) = gauss_legendre(n);
                QuadratureRule {
                    kind: RuleKind::Segment,
                    degree: 2 * n - 1,
                    nodes: x.iter().map(|&t| [t, 0.0, 0.0]).collect(),
                    weights: w,
                }
            })
            .collect()
    });
    &table[n - 1]
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[n - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

fn build_triangle_rule(degree: usize) -> QuadratureRule {
    let (nodes, weights) = match degree {
        0 | 1 => (vec![[1.0 / 3.0; 3]], vec![0.5]),
        2 => {
            let a = 1.0 / 6.0;
            let b = 2.0 / 3.0;
            (vec![[b, a, a], [a, b, a], [a, a, b]], vec![1.0 / 6.0; 3])
        }
        3 | 4 => {
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for (a, w) in [
                (0.445_948_490_915_964_9, 0.223_381_589_678_011_5),
                (0.091_576_213_509_770_7, 0.109_951_743_655_321_9),
            ] {
                push_orbit(&mut nodes, &mut weights, a, 0.5 * w);
            }
            (nodes, weights)
        }
        5 => {
            let s15 = 15f64.sqrt();
            let mut nodes = vec![[1.0 / 3.0; 3]];
            let mut weights = vec![0.5 * 9.0 / 40.0];
            push_orbit(&mut nodes, &mut weights, (6.0 - s15) / 21.0, 0.5 * (155.0 - s15) / 1200.0);
            push_orbit(&mut nodes, &mut weights, (6.0 + s15) / 21.0, 0.5 * (155.0 + s15) / 1200.0);
            (nodes, weights)
        }
        _ => collapsed_rule(degree),
    };
    QuadratureRule { kind: RuleKind::Triangle, degree, nodes, weights }
}

/// Orbit `(a, a, 1 - 2a)` and its permutations.
fn push_orbit(nodes: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, a: f64, w: f64) {
    let b = 1.0 - 2.0 * a;
    nodes.extend([[b, a, a], [a, b, a], [a, a, b]]);
    weights.extend([w; 3]);
}

/// Conical product rule: Gauss–Legendre in both directions of the collapsed square.
fn collapsed_rule(degree: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let n = (degree + 2).div_ceil(2);
    let g = segment_rule(n);
    let mut nodes = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (u, wu) in g.nodes.iter().zip(&g.weights) {
        for (v, wv) in g.nodes.iter().zip(&g.weights) {
            let x = u[0];
            let y = (1.0 - x) * v[0];
            nodes.push([1.0 - x - y, x, y]);
            weights.push(wu * wv * (1.0 - x));
        }
    }
    (nodes, weights)
}
