//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nitsche_bem::geometry::{diameter, signed_area, triangle_distance};
use nitsche_bem::quad::{newton_potential_triangle, quadrature_rule, segment_rule, RuleKind, INV_FOUR_PI};
use nitsche_bem::Point;

pub fn tri(c: [(f64, f64); 3]) -> [Point; 3] {
    c.map(|(x, y)| Point::new(x, y))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Red refinement into four similar children.
pub fn red_children(t: &[Point; 3]) -> [[Point; 3]; 4] {
    let m01 = t[0].midpoint(t[1]);
    let m12 = t[1].midpoint(t[2]);
    let m20 = t[2].midpoint(t[0]);
    [[t[0], m01, m20], [m01, t[1], m12], [m20, m12, t[2]], [m12, m20, m01]]
}

fn point_triangle_distance(x: Point, t: &[Point; 3]) -> f64 {
    let inside = {
        let s = signed_area(t[0], t[1], t[2]).signum();
        (0..3).all(|k| s * signed_area(t[k], t[(k + 1) % 3], x) >= 0.0)
    };
    if inside {
        return 0.0;
    }
    (0..3)
        .map(|k| nitsche_bem::geometry::point_segment_distance(x, t[k], t[(k + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

fn rule_on(t: &[Point; 3], degree: usize) -> Vec<(Point, f64)> {
    quadrature_rule(RuleKind::Triangle, degree).unwrap().map_triangle(t).collect()
}

/// `(1/4pi) int_T |x - y|^{-1} dy` by 4-way subdivision graded toward `x`.
///
/// Cells closer to `x` than `eta` diameters are split; cells containing `x` are split down to
/// `max_depth` and then dropped (their contribution is `O(h)`).
pub fn newton_oracle(t: &[Point; 3], x: Point) -> f64 {
    let eta = 6.0;
    let max_depth = 44;
    let mut total = 0.0;
    let mut stack = vec![(*t, 0usize)];
    while let Some((c, depth)) = stack.pop() {
        let h = diameter(&c);
        let d = point_triangle_distance(x, &c);
        if d >= eta * h {
            total += rule_on(&c, 10).iter().map(|&(y, w)| w / (x - y).norm()).sum::<f64>();
        } else if depth < max_depth {
            for ch in red_children(&c) {
                stack.push((ch, depth + 1));
            }
        } else if d > 0.0 {
            total += rule_on(&c, 10).iter().map(|&(y, w)| w / (x - y).norm()).sum::<f64>();
        }
    }
    INV_FOUR_PI * total
}

/// `(1/4pi) int_T int_S |x - y|^{-1}` for disjoint triangles by recursive subdivision until the
/// separation ratio reaches `ratio`, then a degree-10 tensor rule.
pub fn disjoint_pair_oracle(t: &[Point; 3], s: &[Point; 3], ratio: f64) -> f64 {
    let mut total = 0.0;
    let mut stack = vec![(*t, *s)];
    while let Some((a, b)) = stack.pop() {
        let (ha, hb) = (diameter(&a), diameter(&b));
        let sep = triangle_distance(&a, &b) / ha.max(hb);
        assert!(sep > 0.0, "oracle requires disjoint triangles");
        if sep >= ratio {
            let ys = rule_on(&b, 10);
            total += rule_on(&a, 10)
                .iter()
                .map(|&(x, wx)| wx * ys.iter().map(|&(y, wy)| wy / (x - y).norm()).sum::<f64>())
                .sum::<f64>();
        } else if ha >= hb {
            for ch in red_children(&a) {
                stack.push((ch, b));
            }
        } else {
            for ch in red_children(&b) {
                stack.push((a, ch));
            }
        }
    }
    INV_FOUR_PI * total
}

/// Outer subdivision oracle: uniform 4-way subdivision of `outer` to `depth`, a degree-7 rule per
/// cell and the closed-form inner potential.
pub fn outer_subdivision(inner: &[Point; 3], outer: &[Point; 3], depth: usize) -> f64 {
    let mut cells = vec![*outer];
    for _ in 0..depth {
        cells = cells.iter().flat_map(red_children).collect();
    }
    cells
        .iter()
        .flat_map(|c| rule_on(c, 7))
        .map(|(x, w)| w * newton_potential_triangle(inner, x).unwrap())
        .sum()
}

/// Richardson extrapolation of [`outer_subdivision`] over depths 3..=6 with the error model
/// `a h^2 ln h + b h^2 + c h^3` (cell size `h = 2^-d`).
pub fn richardson_pair_oracle(inner: &[Point; 3], outer: &[Point; 3]) -> f64 {
    let depths = [3usize, 4, 5, 6];
    let vals: Vec<f64> = depths.iter().map(|&d| outer_subdivision(inner, outer, d)).collect();
    // solve [1, h^2 ln h, h^2, h^3] c = v for the constant term
    let mut m = [[0.0f64; 5]; 4];
    for (row, (&d, &v)) in depths.iter().zip(&vals).enumerate() {
        let h = 0.5f64.powi(d as i32);
        m[row] = [1.0, h * h * h.ln(), h * h, h * h * h, v];
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        for r in 0..4 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..5 {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    m[0][4] / m[0][0]
}

/// `int_{polygon} |y - x|^{-1} dy` over a convex polygon containing `x`, from its radial function.
fn radial_integral(poly: &[Point], x: Point) -> f64 {
    let n = poly.len();
    let mut total = 0.0;
    for k in 0..n {
        let (p, q) = (poly[k] - x, poly[(k + 1) % n] - x);
        let len = p.distance(q);
        let u = (1.0 / len) * (q - p);
        let foot = u.cross(p).abs();
        let (sp, sq) = (p.dot(u), q.dot(u));
        total += foot * ((sq / foot).asinh() - (sp / foot).asinh());
    }
    total
}

/// Self interaction of any triangle: `(1/4pi) (|T| / 3) int_{T - T} |y|^{-1} dy`, since
/// `T ∩ (T + d)` is a copy of `T` shrunk by the gauge of `d` in the hexagon `T - T`.
pub fn self_pair_closed_form(t: &[Point; 3]) -> f64 {
    let area = signed_area(t[0], t[1], t[2]).abs();
    let mut hex: Vec<Point> = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                hex.push(t[i] - t[j]);
            }
        }
    }
    hex.sort_by(|a, b| a.y.atan2(a.x).total_cmp(&b.y.atan2(b.x)));
    INV_FOUR_PI * area / 3.0 * radial_integral(&hex, Point::new(0.0, 0.0))
}

/// `int_Q int_Q |x - y|^{-1}` for the unit square.
pub fn unit_square_self() -> f64 {
    let l = 2f64.sqrt().ln_1p();
    4.0 * l - 4.0 / 3.0 * (2f64.sqrt() - 1.0)
}

/// Unit right isosceles triangle `(0,0), (1,0), (0,1)` without the `1/4pi` factor.
pub fn right_self() -> f64 {
    (2.0 + 2f64.sqrt()) / 3.0 * 2f64.sqrt().ln_1p()
}

/// The two halves of the unit square (shared hypotenuse), without the `1/4pi` factor.
pub fn right_hypotenuse_pair() -> f64 {
    0.5 * (unit_square_self() - 2.0 * right_self())
}

/// Two unit right triangles sharing a leg and forming a larger right triangle.
pub fn right_leg_pair() -> f64 {
    (2f64.sqrt() - 1.0) * right_self()
}

/// `int_0^1 f` with dyadic grading toward both endpoints and `n` Gauss points per panel.
pub fn dyadic_graded(f: &dyn Fn(f64) -> f64, levels: usize, n: usize) -> f64 {
    let rule = segment_rule(n);
    let gauss = |a: f64, b: f64| -> f64 {
        rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * f(a + (b - a) * x[0])).sum::<f64>() * (b - a)
    };
    let mut total = gauss(0.25, 0.75);
    let mut h = 0.25;
    for _ in 0..levels {
        total += gauss(h / 2.0, h) + gauss(1.0 - h, 1.0 - h / 2.0);
        h /= 2.0;
    }
    total
}
