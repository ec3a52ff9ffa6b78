//! Per-sub-domain triangulations, red and newest-vertex refinement, and the skeleton partition.
//!
//! Vertices on interfaces are duplicated per sub-domain so that the meshes of neighbouring
//! sub-domains are independent and need not match along the skeleton.

mod decomposition;
mod export;
mod skeleton;

use std::collections::HashMap;

pub use decomposition::{
    build_decomposition, polygon_area, Decomposition, DecompositionSpec, Interface, GEOMETRIC_TOLERANCE,
};
pub use export::{export_mesh, write_mesh};
pub use skeleton::{build_skeleton_partition, SideTrace, SkeletonPartition, SubSegment};

use crate::error::{Error, Result};
use crate::geometry::{diameter, min_angle, signed_area, Point};

/// Where a vertex of a refined mesh comes from in its parent mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOrigin {
    Copy(usize),
    Midpoint(usize, usize),
}

/// Links a refined mesh to the mesh it was refined from.
#[derive(Debug, Clone, PartialEq)]
pub struct Genealogy {
    pub vertex_origin: Vec<VertexOrigin>,
    /// Parent element of each element.
    pub element_parent: Vec<usize>,
}

/// Triangulation of all sub-domains.
///
/// Elements are counterclockwise `[v0, v1, v2]`; the refinement edge for newest-vertex
/// bisection is `v1 v2`, opposite the newest vertex `v0`.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub vertex_subdomain: Vec<usize>,
    pub elements: Vec<[usize; 3]>,
    pub element_subdomain: Vec<usize>,
    pub num_subdomains: usize,
    pub genealogy: Option<Genealogy>,
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn triangle(&self, e: usize) -> [Point; 3] {
        self.elements[e].map(|v| self.vertices[v])
    }

    pub fn area(&self, e: usize) -> f64 {
        let [a, b, c] = self.triangle(e);
        signed_area(a, b, c)
    }

    /// Longest edge of element `e`.
    pub fn h(&self, e: usize) -> f64 {
        diameter(&self.triangle(e))
    }

    /// `h_i` per sub-domain.
    pub fn subdomain_h(&self) -> Vec<f64> {
        let mut h = vec![0.0f64; self.num_subdomains];
        for e in 0..self.num_elements() {
            let s = self.element_subdomain[e];
            h[s] = h[s].max(self.h(e));
        }
        h
    }

    pub fn h_max(&self) -> f64 {
        self.subdomain_h().into_iter().fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        self.subdomain_h().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn min_angle(&self) -> f64 {
        (0..self.num_elements()).map(|e| min_angle(&self.triangle(e))).fold(f64::INFINITY, f64::min)
    }

    /// Stable identifier of the mesh contents (FNV-1a over coordinates and connectivity).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for p in &self.vertices {
            eat(p.x.to_bits());
            eat(p.y.to_bits());
        }
        for (t, s) in self.elements.iter().zip(&self.element_subdomain) {
            for v in t {
                eat(*v as u64);
            }
            eat(*s as u64);
        }
        h
    }

    /// Structured criss-cross mesh: every sub-domain (an axis-aligned rectangle) is cut into
    /// `n0 x n0` cells, each split along the diagonal that points toward the sub-domain centre.
    pub fn generate(d: &Decomposition, n0: usize) -> Result<Mesh> {
        if n0 == 0 {
            return Err(Error::InvalidParameter("n0 must be at least 1".into()));
        }
        let mut mesh = Mesh {
            vertices: Vec::new(),
            vertex_subdomain: Vec::new(),
            elements: Vec::new(),
            element_subdomain: Vec::new(),
            num_subdomains: d.num_subdomains(),
            genealogy: None,
        };
        for k in 0..d.num_subdomains() {
            let (lo, hi) = d.rectangle(k).ok_or_else(|| {
                Error::Mesh(format!("sub-domain {k} is not an axis-aligned rectangle; the structured generator needs one"))
            })?;
            let base = mesh.vertices.len();
            let n = n0;
            let (dx, dy) = ((hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64);
            for r in 0..=n {
                for c in 0..=n {
                    let x = if c == n { hi.x } else { lo.x + c as f64 * dx };
                    let y = if r == n { hi.y } else { lo.y + r as f64 * dy };
                    mesh.vertices.push(Point::new(x, y));
                    mesh.vertex_subdomain.push(k);
                }
            }
            let id = |r: usize, c: usize| base + r * (n + 1) + c;
            // twice the cell index offset from the centre keeps the test exact for odd n
            let centre = n as i64;
            for r in 0..n {
                for c in 0..n {
                    let (sw, se, ne, nw) = (id(r, c), id(r, c + 1), id(r + 1, c + 1), id(r + 1, c));
                    let ox = 2 * c as i64 + 1 - centre;
                    let oy = 2 * r as i64 + 1 - centre;
                    // right angle first, so the hypotenuse (the diagonal) is the refinement edge
                    let tris = if ox * oy >= 0 {
                        [[se, ne, sw], [nw, sw, ne]]
                    } else {
                        [[sw, se, nw], [ne, nw, se]]
                    };
                    for t in tris {
                        mesh.elements.push(t);
                        mesh.element_subdomain.push(k);
                    }
                }
            }
        }
        Ok(mesh)
    }

    /// Red refinement: every element is replaced by four similar children.
    pub fn refine_uniform(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut vertex_subdomain = self.vertex_subdomain.clone();
        let mut origin: Vec<VertexOrigin> = (0..self.num_vertices()).map(VertexOrigin::Copy).collect();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut elements = Vec::with_capacity(4 * self.num_elements());
        let mut element_subdomain = Vec::with_capacity(4 * self.num_elements());
        let mut element_parent = Vec::with_capacity(4 * self.num_elements());
        for (e, &[v0, v1, v2]) in self.elements.iter().enumerate() {
            let mut mid = |a: usize, b: usize| {
                *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    vertices.push(self.vertices[a].midpoint(self.vertices[b]));
                    vertex_subdomain.push(self.vertex_subdomain[a]);
                    origin.push(VertexOrigin::Midpoint(a.min(b), a.max(b)));
                    vertices.len() - 1
                })
            };
            let m12 = mid(v1, v2);
            let m20 = mid(v2, v0);
            let m01 = mid(v0, v1);
            // the corner children are homothetic images of the parent, the centre child its point
            // reflection; vertex order follows the maps so refinement edges stay parallel
            for child in [[v0, m01, m20], [m01, v1, m12], [m20, m12, v2], [m12, m20, m01]] {
                elements.push(child);
                element_subdomain.push(self.element_subdomain[e]);
                element_parent.push(e);
            }
        }
        Mesh {
            vertices,
            vertex_subdomain,
            elements,
            element_subdomain,
            num_subdomains: self.num_subdomains,
            genealogy: Some(Genealogy { vertex_origin: origin, element_parent }),
        }
    }

    /// Newest-vertex bisection of the marked elements with closure to a conforming mesh.
    ///
    /// Returns `Error::NothingToMark` for an empty marked set.
    pub fn refine_adaptive(&self, marked: &[usize]) -> Result<Mesh> {
        if marked.is_empty() {
            return Err(Error::NothingToMark);
        }
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let mut edge_elements: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (e, t) in self.elements.iter().enumerate() {
            for k in 0..3 {
                edge_elements.entry(key(t[k], t[(k + 1) % 3])).or_default().push(e);
            }
        }
        let mut split: HashMap<(usize, usize), Option<usize>> = HashMap::new();
        let mut queue = Vec::new();
        for &e in marked {
            if e >= self.num_elements() {
                return Err(Error::InvalidParameter(format!("marked element {e} does not exist")));
            }
            queue.push(e);
        }
        // closure: an element with a marked edge must also have its refinement edge marked
        while let Some(e) = queue.pop() {
            let [_, v1, v2] = self.elements[e];
            let r = key(v1, v2);
            if split.contains_key(&r) {
                continue;
            }
            split.insert(r, None);
            for &n in &edge_elements[&r] {
                if n != e {
                    queue.push(n);
                }
            }
        }

        let mut vertices = self.vertices.clone();
        let mut vertex_subdomain = self.vertex_subdomain.clone();
        let mut origin: Vec<VertexOrigin> = (0..self.num_vertices()).map(VertexOrigin::Copy).collect();
        let mut elements = Vec::new();
        let mut element_subdomain = Vec::new();
        let mut element_parent = Vec::new();
        for (e, &t) in self.elements.iter().enumerate() {
            let mut stack = vec![t];
            while let Some(t) = stack.pop() {
                let [v0, v1, v2] = t;
                match split.get_mut(&key(v1, v2)) {
                    Some(slot) => {
                        let m = *slot.get_or_insert_with(|| {
                            vertices.push(vertices[v1].midpoint(vertices[v2]));
                            vertex_subdomain.push(vertex_subdomain[v1]);
                            origin.push(VertexOrigin::Midpoint(v1.min(v2), v1.max(v2)));
                            vertices.len() - 1
                        });
                        // pushed in reverse so the first child is emitted first
                        stack.push([m, v2, v0]);
                        stack.push([m, v0, v1]);
                    }
                    None => {
                        elements.push(t);
                        element_subdomain.push(self.element_subdomain[e]);
                        element_parent.push(e);
                    }
                }
            }
        }
        Ok(Mesh {
            vertices,
            vertex_subdomain,
            elements,
            element_subdomain,
            num_subdomains: self.num_subdomains,
            genealogy: Some(Genealogy { vertex_origin: origin, element_parent }),
        })
    }

    /// Verify positivity of areas and the absence of hanging nodes in every sub-domain mesh.
    pub fn check_conforming(&self) -> Result<()> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, t) in self.elements.iter().enumerate() {
            if !(self.area(e) > 0.0) {
                return Err(Error::Mesh(format!("element {e} is not counterclockwise")));
            }
            if t.iter().any(|&v| self.vertex_subdomain[v] != self.element_subdomain[e]) {
                return Err(Error::Mesh(format!("element {e} uses a vertex of another sub-domain")));
            }
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        if let Some((edge, _)) = edge_count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::Mesh(format!("edge {edge:?} shared by more than two elements")));
        }
        // a hanging node lies in the interior of some edge of its own sub-domain
        let mut by_subdomain: Vec<Vec<usize>> = vec![Vec::new(); self.num_subdomains];
        for (v, &s) in self.vertex_subdomain.iter().enumerate() {
            by_subdomain[s].push(v);
        }
        for &(a, b) in edge_count.keys() {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let len = pa.distance(pb);
            let dir = (1.0 / len) * (pb - pa);
            for &v in &by_subdomain[self.vertex_subdomain[a]] {
                if v == a || v == b {
                    continue;
                }
                let r = self.vertices[v] - pa;
                let s = r.dot(dir);
                if dir.cross(r).abs() <= GEOMETRIC_TOLERANCE * len && s > 0.0 && s < len {
                    return Err(Error::Mesh(format!("hanging node {v} on edge ({a}, {b})")));
                }
            }
        }
        Ok(())
    }
}
