//! Galerkin solutions on a mesh and on its red refinement.
//!
//! Only the fine system is assembled. The coarse system is its Galerkin restriction
//! `A_h = P^T A_{h/2} P`, `b_h = P^T b_{h/2}`, which is the same bilinear form on the nested
//! coarse space, so the projection property holds up to the linear solver's accuracy.

mod dense;
mod prolong;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use faer::Mat;
use rayon::prelude::*;

pub use dense::{matrix_norms, mat_vec, solve_dense, solve_factored, DenseSolution, LuFactors, PackedSymmetric, RESIDUAL_TARGET};
pub use prolong::{prolong, Prolongation};

use crate::assembly::{assemble_blocks, DiscreteFunction, FunctionSpace, SourceTerm};
use crate::error::{Error, Result};
use crate::mesh::{Decomposition, Mesh};
use crate::quad::QuadConfig;

/// Default cap on the memory held by the fine system.
pub const DEFAULT_MEMORY_LIMIT: usize = 4_000_000_000;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub nu: f64,
    pub quad: QuadConfig,
    pub source: SourceTerm,
    pub memory_limit: usize,
}

impl SolveOptions {
    pub fn new(nu: f64, quad: QuadConfig) -> Self {
        Self { nu, quad, source: SourceTerm::Constant(1.0), memory_limit: DEFAULT_MEMORY_LIMIT }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveDiagnostics {
    pub residual_coarse: f64,
    pub residual_fine: f64,
    pub rcond_coarse: f64,
    pub rcond_fine: f64,
    /// `max_w |a(u_{h/2} - P u_h, P w)|` over coarse basis functions `w`.
    pub orthogonality: f64,
    /// `||A_{h/2}||_inf ||u_{h/2}||_inf`, the scale of `orthogonality`.
    pub orthogonality_scale: f64,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

impl SolveDiagnostics {
    pub fn relative_orthogonality(&self) -> f64 {
        if self.orthogonality_scale > 0.0 {
            self.orthogonality / self.orthogonality_scale
        } else {
            self.orthogonality
        }
    }
}

/// Coarse and fine Galerkin solutions.
#[derive(Debug, Clone)]
pub struct SolvePair {
    pub coarse: FunctionSpace,
    pub fine: FunctionSpace,
    pub u_coarse: Vec<f64>,
    pub u_fine: Vec<f64>,
    /// `P u_h` in the fine space.
    pub u_prolonged: Vec<f64>,
    /// `<f, u_h>`.
    pub energy_coarse: f64,
    /// `<f, u_{h/2}>`.
    pub energy_fine: f64,
    pub nu: f64,
    pub diagnostics: SolveDiagnostics,
}

impl SolvePair {
    pub fn coarse_function(&self) -> DiscreteFunction<'_> {
        DiscreteFunction { space: &self.coarse, coeffs: self.u_coarse.clone() }
    }

    pub fn fine_function(&self) -> DiscreteFunction<'_> {
        DiscreteFunction { space: &self.fine, coeffs: self.u_fine.clone() }
    }
}

/// Bytes held at once by [`solve_pair`] for `n_fine` fine and `n_coarse` coarse dofs.
pub fn pair_memory(n_fine: usize, n_coarse: usize) -> usize {
    8 * n_fine * n_fine + PackedSymmetric::bytes(n_fine) + 8 * n_coarse * n_coarse
}

/// `A_c = P^T A P`, column by column.
fn restrict(a: &Mat<f64>, p: &Prolongation) -> Mat<f64> {
    let nc = p.coarse_dim();
    let nf = p.fine_dim();
    let cols: Vec<Vec<f64>> = (0..nc)
        .into_par_iter()
        .map_init(
            || vec![0.0; nf],
            |y, b| {
                y.fill(0.0);
                for &(f, w) in p.column(b) {
                    let col = a.col(f).try_as_col_major().expect("contiguous column").as_slice();
                    for (yi, ai) in y.iter_mut().zip(col) {
                        *yi += w * ai;
                    }
                }
                p.apply_transpose(y)
            },
        )
        .collect();
    Mat::from_fn(nc, nc, |i, j| cols[j][i])
}

/// Solve on `coarse` and on its red refinement.
pub fn solve_pair(coarse: &Mesh, d: &Decomposition, opts: &SolveOptions) -> Result<SolvePair> {
    if !(opts.nu > 0.0) {
        return Err(Error::InvalidParameter(format!("penalty nu must be positive, got {}", opts.nu)));
    }
    let start = Instant::now();
    let coarse = FunctionSpace::new(coarse.clone(), d)?;
    let fine = FunctionSpace::new(coarse.mesh.refine_uniform(), d)?;
    let (nc, nf) = (coarse.dim(), fine.dim());
    let bytes = pair_memory(nf, nc);
    if bytes > opts.memory_limit {
        return Err(Error::TooLarge { n: nf, bytes, limit: opts.memory_limit });
    }
    let p = Prolongation::new(&coarse, &fine)?;

    let blocks = assemble_blocks(&fine, &opts.source, &opts.quad)?;
    let a_v = PackedSymmetric::from_upper(&blocks.a_v);
    let (a, b_fine, iface) = blocks.into_system(opts.nu)?;
    let apply_fine = |x: &[f64]| {
        let mut y = a_v.mul(x);
        iface.apply_add(x, opts.nu, &mut y);
        y
    };
    let a_coarse = restrict(&a, &p);
    let b_coarse = p.apply_transpose(&b_fine);
    let (_, norm_inf) = matrix_norms(&a);
    let assembly_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let sc = solve_dense(&a_coarse, &b_coarse)?;
    let lu = LuFactors::factor(a)?;
    let sf = solve_factored(&lu, &b_fine, apply_fine);
    drop(lu);

    // a(u_{h/2} - P u_h, P w) = (P^T A u_{h/2} - A_h u_h)_w
    let lhs = p.apply_transpose(&apply_fine(&sf.x));
    let rhs = mat_vec(&a_coarse, &sc.x);
    let orthogonality = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let u_max = sf.x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let solve_seconds = start.elapsed().as_secs_f64();

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    Ok(SolvePair {
        energy_coarse: dot(&b_coarse, &sc.x),
        energy_fine: dot(&b_fine, &sf.x),
        u_prolonged: p.apply(&sc.x),
        u_coarse: sc.x,
        u_fine: sf.x,
        nu: opts.nu,
        diagnostics: SolveDiagnostics {
            residual_coarse: sc.residual,
            residual_fine: sf.residual,
            rcond_coarse: sc.rcond,
            rcond_fine: sf.rcond,
            orthogonality,
            orthogonality_scale: norm_inf * u_max,
            assembly_seconds,
            solve_seconds,
        },
        coarse,
        fine,
    })
}

/// One line per dof: `dof vertex subdomain x y value`.
pub fn write_solution<W: Write>(space: &FunctionSpace, coeffs: &[f64], mut w: W) -> Result<()> {
    if coeffs.len() != space.dim() {
        return Err(Error::Dimension(format!("expected {} coefficients, got {}", space.dim(), coeffs.len())));
    }
    writeln!(w, "# dof vertex subdomain x y value")?;
    for (k, c) in coeffs.iter().enumerate() {
        let v = space.dofs.vertex(k);
        let p = space.mesh.vertices[v];
        writeln!(w, "{k} {v} {} {:.17e} {:.17e} {:.17e}", space.mesh.vertex_subdomain[v], p.x, p.y, c)?;
    }
    Ok(())
}

pub fn export_solution(space: &FunctionSpace, coeffs: &[f64], path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_solution(space, coeffs, file)
}
