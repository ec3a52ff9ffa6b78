//! Merged partition of the interface segments into pieces on which both traces are affine.

use std::collections::HashMap;

use super::decomposition::{Decomposition, GEOMETRIC_TOLERANCE};
use super::Mesh;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Trace of one side on a sub-segment: the element edge `(v_start, v_end)` that contains it,
/// with the arclength positions of its endpoints on the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideTrace {
    pub element: usize,
    /// Local edge index `k`: the edge opposite vertex `k`.
    pub local_edge: usize,
    pub v_start: usize,
    pub v_end: usize,
    pub s_start: f64,
    pub s_end: f64,
}

impl SideTrace {
    /// Barycentric weights of `(v_start, v_end)` at arclength `s`.
    pub fn weights(&self, s: f64) -> (f64, f64) {
        let t = (s - self.s_start) / (self.s_end - self.s_start);
        (1.0 - t, t)
    }
}

/// A piece of an interface between consecutive merged breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubSegment {
    pub interface: usize,
    pub s0: f64,
    pub s1: f64,
    pub a: Point,
    pub b: Point,
    /// Trace from sub-domain `i` (the lower index) and from sub-domain `j`.
    pub side_i: SideTrace,
    pub side_j: SideTrace,
    /// Unit tangent with sub-domain `j` on its left.
    pub tangent: Point,
}

impl SubSegment {
    pub fn length(&self) -> f64 {
        self.s1 - self.s0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonPartition {
    pub segments: Vec<SubSegment>,
    /// Sorted merged breakpoints per interface, in arclength from its endpoint `a`.
    pub breakpoints: Vec<Vec<f64>>,
}

impl SkeletonPartition {
    pub fn count_on(&self, interface: usize) -> usize {
        self.segments.iter().filter(|s| s.interface == interface).count()
    }
}

/// One side's edges along interface `f`, sorted, as `(s_lo, s_hi, trace)`.
fn side_edges(
    m: &Mesh,
    boundary: &[(usize, usize)],
    d: &Decomposition,
    f: usize,
    side: usize,
) -> Result<Vec<SideTrace>> {
    let iface = &d.interfaces[f];
    let len = iface.length();
    let tol = GEOMETRIC_TOLERANCE * len;
    let mut edges = Vec::new();
    for &(e, k) in boundary {
        if m.element_subdomain[e] != side {
            continue;
        }
        let t = m.elements[e];
        let (p, q) = (t[(k + 1) % 3], t[(k + 2) % 3]);
        let (sp, op) = iface.project(m.vertices[p]);
        let (sq, oq) = iface.project(m.vertices[q]);
        let on_line = |s: f64, o: f64| o <= tol && s >= -tol && s <= len + tol;
        match (on_line(sp, op), on_line(sq, oq)) {
            (true, true) => {
                let (v_start, v_end, s_start, s_end) = if sp < sq { (p, q, sp, sq) } else { (q, p, sq, sp) };
                edges.push(SideTrace { element: e, local_edge: k, v_start, v_end, s_start, s_end });
            }
            (true, false) | (false, true) => {
                // an edge leaving the segment is fine unless it nearly runs along it
                let (o, s) = if on_line(sp, op) { (oq, sq) } else { (op, sp) };
                if o <= 1e3 * tol && s > -tol && s < len + tol {
                    return Err(Error::SkeletonMismatch { interface: f, offset: o, tolerance: tol });
                }
            }
            _ => {}
        }
    }
    edges.sort_by(|a, b| a.s_start.total_cmp(&b.s_start));
    let mut cursor = 0.0;
    for e in &edges {
        if (e.s_start - cursor).abs() > tol {
            return Err(Error::SkeletonMismatch { interface: f, offset: (e.s_start - cursor).abs(), tolerance: tol });
        }
        cursor = e.s_end;
    }
    if (cursor - len).abs() > tol {
        return Err(Error::SkeletonMismatch { interface: f, offset: (cursor - len).abs(), tolerance: tol });
    }
    Ok(edges)
}

/// Merge the breakpoints of both sides on every interface.
pub fn build_skeleton_partition(m: &Mesh, d: &Decomposition) -> Result<SkeletonPartition> {
    // boundary edges of each sub-domain mesh: edges used by exactly one element
    let mut count: HashMap<(usize, usize), (usize, usize, usize)> = HashMap::new();
    for (e, t) in m.elements.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
            count.entry((a.min(b), a.max(b))).or_insert((e, k, 0)).2 += 1;
        }
    }
    let mut boundary: Vec<(usize, usize)> = count.values().filter(|c| c.2 == 1).map(|c| (c.0, c.1)).collect();
    boundary.sort_unstable();

    let mut segments = Vec::new();
    let mut breakpoints = Vec::new();
    for (f, iface) in d.interfaces.iter().enumerate() {
        let left = side_edges(m, &boundary, d, f, iface.i)?;
        let right = side_edges(m, &boundary, d, f, iface.j)?;
        let tol = GEOMETRIC_TOLERANCE * iface.length();
        let mut bp: Vec<f64> = left.iter().chain(&right).flat_map(|e| [e.s_start, e.s_end]).collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup_by(|a, b| (*a - *b).abs() <= tol);
        let dir = (1.0 / iface.length()) * (iface.b - iface.a);
        let (mut li, mut ri) = (0, 0);
        for w in bp.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            while left[li].s_end <= s0 + tol {
                li += 1;
            }
            while right[ri].s_end <= s0 + tol {
                ri += 1;
            }
            segments.push(SubSegment {
                interface: f,
                s0,
                s1,
                a: iface.a + s0 * dir,
                b: iface.a + s1 * dir,
                side_i: left[li],
                side_j: right[ri],
                tangent: iface.tangent,
            });
        }
        breakpoints.push(bp);
    }
    Ok(SkeletonPartition { segments, breakpoints })
}

#[cfg(test)]
mod tests {
    use super::super::{build_decomposition, DecompositionSpec};
    use super::*;

    #[test]
    fn matching_meshes() {
        let d = build_decomposition(&DecompositionSpec::FourSquare).unwrap();
        let m = Mesh::generate(&d, 2).unwrap();
        let p = build_skeleton_partition(&m, &d).unwrap();
        for f in 0..4 {
            assert_eq!(p.count_on(f), 2);
            let total: f64 = p.segments.iter().filter(|s| s.interface == f).map(SubSegment::length).sum();
            assert!((total - 0.5).abs() <= 1e-12 * 0.5);
        }
        for s in &p.segments {
            assert_eq!(m.element_subdomain[s.side_i.element], d.interfaces[s.interface].i);
            assert_eq!(m.element_subdomain[s.side_j.element], d.interfaces[s.interface].j);
        }
    }

    #[test]
    fn uniform_refinement_doubles_subsegments() {
        let d = build_decomposition(&DecompositionSpec::FourSquare).unwrap();
        let m = Mesh::generate(&d, 3).unwrap();
        let m = m.refine_adaptive(&[0, 1, 2, 40]).unwrap();
        let p = build_skeleton_partition(&m, &d).unwrap();
        let q = build_skeleton_partition(&m.refine_uniform(), &d).unwrap();
        for f in 0..4 {
            assert_eq!(q.count_on(f), 2 * p.count_on(f));
        }
    }

    #[test]
    fn non_matching_two_and_three() {
        let spec = DecompositionSpec::Polygons(vec![
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)],
            vec![Point::new(1.0, 0.0), Point::new(2.0, 0.0), Point::new(2.0, 1.0), Point::new(1.0, 1.0)],
        ]);
        let d = build_decomposition(&spec).unwrap();
        let m2 = Mesh::generate(&d, 2).unwrap();
        let m3 = Mesh::generate(&d, 3).unwrap();
        // left side from the n0 = 2 mesh, right side from the n0 = 3 mesh
        let mut m = m2.clone();
        let offset = m.vertices.len();
        for (v, &s) in m3.vertex_subdomain.iter().enumerate() {
            if s == 1 {
                m.vertices.push(m3.vertices[v]);
                m.vertex_subdomain.push(1);
            } else {
                m.vertices.push(Point::new(f64::NAN, f64::NAN));
                m.vertex_subdomain.push(0);
            }
        }
        let keep: Vec<usize> = (0..m.elements.len()).filter(|&e| m.element_subdomain[e] == 0).collect();
        m.elements = keep.iter().map(|&e| m.elements[e]).collect();
        m.element_subdomain = vec![0; m.elements.len()];
        for (t, &s) in m3.elements.iter().zip(&m3.element_subdomain) {
            if s == 1 {
                m.elements.push(t.map(|v| v + offset));
                m.element_subdomain.push(1);
            }
        }
        let p = build_skeleton_partition(&m, &d).unwrap();
        assert_eq!(p.segments.len(), 4);
        let expected = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0];
        for (a, b) in p.breakpoints[0].iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbed_vertex_is_reported() {
        let d = build_decomposition(&DecompositionSpec::FourSquare).unwrap();
        let mut m = Mesh::generate(&d, 2).unwrap();
        let v = (0..m.num_vertices())
            .find(|&v| m.vertex_subdomain[v] == 0 && m.vertices[v] == Point::new(0.0, -0.25))
            .unwrap();
        m.vertices[v].x += 1e-9;
        assert!(matches!(build_skeleton_partition(&m, &d), Err(Error::SkeletonMismatch { .. })));
    }
}
