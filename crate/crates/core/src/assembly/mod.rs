//! Galerkin matrices of the Nitsche bilinear form
//! `a(u, v) = <V curl u, curl v> + <Tu, [v]> - <[u], Tv> + nu <[u], [v]>`
//! over the piecewise-linear spaces of the sub-domains, and the load vector.

mod nitsche;
mod vcurl;

use std::io::Write;
use std::path::Path;

use faer::Mat;

pub use nitsche::{assemble_jump_mass, assemble_nitsche_block, InterfaceBlock};
pub use vcurl::assemble_vcurl_block;

use crate::error::{Error, Result};
use crate::geometry::{signed_area, Point};
use crate::mesh::{build_skeleton_partition, Decomposition, Mesh, SkeletonPartition};
use crate::quad::{quadrature_rule, QuadConfig, RuleKind};

/// Degree-of-freedom numbering: one dof per vertex, except vertices on the exterior boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    dof_of_vertex: Vec<Option<usize>>,
    vertex_of_dof: Vec<usize>,
}

impl DofMap {
    pub fn new(m: &Mesh, d: &Decomposition) -> Self {
        let mut dof_of_vertex = vec![None; m.num_vertices()];
        let mut used = vec![false; m.num_vertices()];
        for t in &m.elements {
            for &v in t {
                used[v] = true;
            }
        }
        let mut vertex_of_dof = Vec::new();
        for v in 0..m.num_vertices() {
            if used[v] && !d.on_exterior_boundary(m.vertices[v]) {
                dof_of_vertex[v] = Some(vertex_of_dof.len());
                vertex_of_dof.push(v);
            }
        }
        Self { dof_of_vertex, vertex_of_dof }
    }

    pub fn len(&self) -> usize {
        self.vertex_of_dof.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_of_dof.is_empty()
    }

    pub fn dof(&self, vertex: usize) -> Option<usize> {
        self.dof_of_vertex[vertex]
    }

    pub fn vertex(&self, dof: usize) -> usize {
        self.vertex_of_dof[dof]
    }

    pub fn element_dofs(&self, m: &Mesh, e: usize) -> [Option<usize>; 3] {
        m.elements[e].map(|v| self.dof_of_vertex[v])
    }
}

/// A mesh with its dof numbering and skeleton partition.
#[derive(Debug, Clone)]
pub struct FunctionSpace {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub skeleton: SkeletonPartition,
}

impl FunctionSpace {
    pub fn new(mesh: Mesh, d: &Decomposition) -> Result<Self> {
        let dofs = DofMap::new(&mesh, d);
        let skeleton = build_skeleton_partition(&mesh, d)?;
        Ok(Self { mesh, dofs, skeleton })
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn function(&self, coeffs: Vec<f64>) -> Result<DiscreteFunction<'_>> {
        if coeffs.len() != self.dim() {
            return Err(Error::Dimension(format!("expected {} coefficients, got {}", self.dim(), coeffs.len())));
        }
        Ok(DiscreteFunction { space: self, coeffs })
    }
}

/// A coefficient vector interpreted in a [`FunctionSpace`].
#[derive(Debug, Clone)]
pub struct DiscreteFunction<'a> {
    pub space: &'a FunctionSpace,
    pub coeffs: Vec<f64>,
}

impl DiscreteFunction<'_> {
    pub fn vertex_value(&self, v: usize) -> f64 {
        self.space.dofs.dof(v).map_or(0.0, |k| self.coeffs[k])
    }

    /// Constant surface curl on element `e`.
    pub fn curl(&self, e: usize) -> Point {
        let m = &self.space.mesh;
        let mut c = Point::default();
        for (k, v) in m.elements[e].iter().enumerate() {
            c = c + self.vertex_value(*v) * element_curl(m, e, k);
        }
        c
    }

    /// `int_Gamma f u` for constant `f`.
    pub fn mean_integral(&self, f: f64) -> f64 {
        let m = &self.space.mesh;
        (0..m.num_elements())
            .map(|e| m.area(e) * m.elements[e].iter().map(|&v| self.vertex_value(v)).sum::<f64>() / 3.0)
            .sum::<f64>()
            * f
    }

    /// `||[u]||^2` over the skeleton.
    pub fn jump_norm_squared(&self) -> f64 {
        jump_norm_squared(self.space, &self.coeffs)
    }
}

/// `||[u]||^2_{L2(gamma)}` for a coefficient vector of `space`.
pub fn jump_norm_squared(space: &FunctionSpace, coeffs: &[f64]) -> f64 {
    let val = |v: usize| space.dofs.dof(v).map_or(0.0, |k| coeffs[k]);
    let mut total = 0.0;
    for s in &space.skeleton.segments {
        let jump_at = |pos: f64| {
            let (a0, a1) = s.side_j.weights(pos);
            let (b0, b1) = s.side_i.weights(pos);
            a0 * val(s.side_j.v_start) + a1 * val(s.side_j.v_end) - b0 * val(s.side_i.v_start) - b1 * val(s.side_i.v_end)
        };
        let (j0, j1) = (jump_at(s.s0), jump_at(s.s1));
        total += s.length() * (j0 * j0 + j0 * j1 + j1 * j1) / 3.0;
    }
    total
}

/// Surface curl `(d2 phi, -d1 phi)` of the nodal basis function `k` on element `e`.
pub fn element_curl(m: &Mesh, e: usize, k: usize) -> Point {
    let t = m.triangle(e);
    let twice_area = 2.0 * signed_area(t[0], t[1], t[2]);
    (1.0 / twice_area) * (t[(k + 2) % 3] - t[(k + 1) % 3])
}

/// Source density `f` of the screen problem.
#[derive(Debug, Clone, Copy)]
pub enum SourceTerm {
    Constant(f64),
    Function(fn(Point) -> f64),
}

/// `b[v] = int_Gamma f phi_v`.
pub fn assemble_rhs(f: &SourceTerm, m: &Mesh, dofs: &DofMap) -> Vec<f64> {
    let mut b = vec![0.0; dofs.len()];
    let rule = quadrature_rule(RuleKind::Triangle, 4).expect("degree 4 rule");
    for e in 0..m.num_elements() {
        let ed = dofs.element_dofs(m, e);
        let t = m.triangle(e);
        match f {
            SourceTerm::Constant(c) => {
                let share = c * m.area(e) / 3.0;
                for d in ed.into_iter().flatten() {
                    b[d] += share;
                }
            }
            SourceTerm::Function(func) => {
                let jac = 2.0 * m.area(e);
                for (l, w) in rule.nodes.iter().zip(&rule.weights) {
                    let x = Point::new(
                        l[0] * t[0].x + l[1] * t[1].x + l[2] * t[2].x,
                        l[0] * t[0].y + l[1] * t[1].y + l[2] * t[2].y,
                    );
                    let fx = func(x) * w * jac;
                    for (k, d) in ed.iter().enumerate() {
                        if let Some(d) = d {
                            b[*d] += fx * l[k];
                        }
                    }
                }
            }
        }
    }
    b
}

/// The separately assembled parts of the Galerkin system; `nu` enters only on combination.
pub struct SystemBlocks {
    /// Symmetric `<V curl phi_b, curl phi_a>`.
    pub a_v: Mat<f64>,
    /// Nitsche coupling rows and jump mass restricted to dofs with a trace on the skeleton.
    pub interface: InterfaceBlock,
    pub rhs: Vec<f64>,
}

impl SystemBlocks {
    pub fn dim(&self) -> usize {
        self.a_v.nrows()
    }

    /// Dense `B` with `B[v, u] = <Tu, [v]>`.
    pub fn b_dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut b = Mat::zeros(n, n);
        for (r, &row) in self.interface.dofs.iter().enumerate() {
            for c in 0..n {
                b[(row, c)] = self.interface.b[(r, c)];
            }
        }
        b
    }

    /// Dense jump mass matrix.
    pub fn m_gamma_dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        let ids = &self.interface.dofs;
        for (r, &row) in ids.iter().enumerate() {
            for (c, &col) in ids.iter().enumerate() {
                m[(row, col)] = self.interface.m_gamma[(r, c)];
            }
        }
        m
    }

    /// `A = A_V + B - B^T + nu M_gamma`, leaving the blocks untouched.
    pub fn combine(&self, nu: f64) -> Result<Mat<f64>> {
        let mut a = self.a_v.clone();
        self.interface.add_to(&mut a, nu, true)?;
        Ok(a)
    }

    /// Combine in place, consuming the blocks; returns `(A, b, interface block)`.
    pub fn into_system(self, nu: f64) -> Result<(Mat<f64>, Vec<f64>, InterfaceBlock)> {
        let mut a = self.a_v;
        self.interface.add_to(&mut a, nu, true)?;
        Ok((a, self.rhs, self.interface))
    }
}

/// Assemble all blocks of the system on `space`.
pub fn assemble_blocks(space: &FunctionSpace, f: &SourceTerm, cfg: &QuadConfig) -> Result<SystemBlocks> {
    let a_v = assemble_vcurl_block(&space.mesh, &space.dofs, cfg)?;
    let interface = InterfaceBlock::assemble(space, cfg)?;
    let rhs = assemble_rhs(f, &space.mesh, &space.dofs);
    Ok(SystemBlocks { a_v, interface, rhs })
}

/// Write `A` and `b` as little-endian binary: `N` (u64), `nu` (f64), mesh id (u64), then `A`
/// row by row and `b`.
pub fn dump_system(path: &Path, a: &Mat<f64>, b: &[f64], nu: f64, mesh_id: u64) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Dimension("system dump needs a square matrix and matching vector".into()));
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&nu.to_le_bytes())?;
    w.write_all(&mesh_id.to_le_bytes())?;
    for i in 0..n {
        for j in 0..n {
            w.write_all(&a[(i, j)].to_le_bytes())?;
        }
    }
    for v in b {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}
