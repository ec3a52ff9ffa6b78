//! Skeleton terms: the Nitsche coupling `B[v, u] = <Tu, [v]>` with `Tu = t . V curl u`, and the
//! jump mass matrix `<[u], [v]>`. Both only have rows for dofs whose basis function has a trace
//! on the skeleton, so they are stored over that dof subset.

use faer::Mat;
use rayon::prelude::*;

use super::vcurl::{element_data, ElementData};
use super::{FunctionSpace, DofMap};
use crate::error::{Error, Result};
use crate::mesh::{SkeletonPartition, SubSegment};
use crate::quad::{EdgeCache, QuadConfig};

/// Interface rows of `B` and the jump mass matrix.
#[derive(Debug, Clone)]
pub struct InterfaceBlock {
    /// Dofs with a trace on the skeleton, ascending.
    pub dofs: Vec<usize>,
    /// `dofs.len() x N`.
    pub b: Mat<f64>,
    /// `dofs.len() x dofs.len()`.
    pub m_gamma: Mat<f64>,
}

/// Trace dofs of a sub-segment with jump signs and endpoint weights of `[phi_v]`.
fn jump_traces(s: &SubSegment, dofs: &DofMap) -> Vec<(usize, [f64; 2])> {
    let mut out: Vec<(usize, [f64; 2])> = Vec::with_capacity(4);
    for (side, sign) in [(&s.side_j, 1.0), (&s.side_i, -1.0)] {
        let (a0, a1) = side.weights(s.s0);
        let (b0, b1) = side.weights(s.s1);
        for (v, w) in [(side.v_start, [a0, b0]), (side.v_end, [a1, b1])] {
            if let Some(d) = dofs.dof(v) {
                out.push((d, [sign * w[0], sign * w[1]]));
            }
        }
    }
    out
}

fn interface_dofs(skeleton: &SkeletonPartition, dofs: &DofMap) -> Vec<usize> {
    let mut ids: Vec<usize> = skeleton.segments.iter().flat_map(|s| jump_traces(s, dofs)).map(|(d, _)| d).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

fn row_index(ids: &[usize], dof: usize) -> usize {
    ids.binary_search(&dof).expect("interface dof")
}

pub fn assemble_nitsche_block(space: &FunctionSpace, cfg: &QuadConfig) -> Result<(Vec<usize>, Mat<f64>)> {
    let data = element_data(&space.mesh, &space.dofs)?;
    nitsche_rows(space, &data, cfg)
}

fn nitsche_rows(space: &FunctionSpace, data: &[ElementData], cfg: &QuadConfig) -> Result<(Vec<usize>, Mat<f64>)> {
    let n = space.dim();
    let ids = interface_dofs(&space.skeleton, &space.dofs);
    let mut b = Mat::<f64>::zeros(ids.len(), n);
    let cache = EdgeCache::new();
    for s in &space.skeleton.segments {
        let traces = jump_traces(s, &space.dofs);
        if traces.is_empty() {
            continue;
        }
        // per element: t . c_u times the moments of the potential along the sub-segment
        let moments: Vec<[f64; 2]> = data
            .par_iter()
            .map(|el| {
                if el.dofs.iter().all(Option::is_none) {
                    Ok([0.0; 2])
                } else {
                    cache.moments(s.a, s.b, &el.tri, cfg)
                }
            })
            .collect::<Result<_>>()?;
        for (d, w) in traces {
            let r = row_index(&ids, d);
            for (el, m) in data.iter().zip(&moments) {
                let k = w[0] * m[0] + w[1] * m[1];
                if k == 0.0 {
                    continue;
                }
                for (u, c) in el.dofs.iter().zip(&el.curls) {
                    if let Some(u) = u {
                        b[(r, *u)] += k * s.tangent.dot(*c);
                    }
                }
            }
        }
    }
    Ok((ids, b))
}

/// Jump mass matrix over the interface dofs, by two-point Gauss per sub-segment.
pub fn assemble_jump_mass(skeleton: &SkeletonPartition, dofs: &DofMap) -> (Vec<usize>, Mat<f64>) {
    let ids = interface_dofs(skeleton, dofs);
    let mut m = Mat::<f64>::zeros(ids.len(), ids.len());
    let g = 0.5 / 3f64.sqrt();
    for s in &skeleton.segments {
        let traces = jump_traces(s, dofs);
        let len = s.length();
        for tau in [0.5 - g, 0.5 + g] {
            for &(p, wp) in &traces {
                let fp = (1.0 - tau) * wp[0] + tau * wp[1];
                for &(q, wq) in &traces {
                    let fq = (1.0 - tau) * wq[0] + tau * wq[1];
                    m[(row_index(&ids, p), row_index(&ids, q))] += 0.5 * len * fp * fq;
                }
            }
        }
    }
    // a dof repeated in the traces sums in a different order above and below the diagonal
    for r in 0..ids.len() {
        for c in r + 1..ids.len() {
            let v = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
    (ids, m)
}

impl InterfaceBlock {
    pub fn assemble(space: &FunctionSpace, cfg: &QuadConfig) -> Result<Self> {
        let data = element_data(&space.mesh, &space.dofs)?;
        let (dofs, b) = nitsche_rows(space, &data, cfg)?;
        let (ids, m_gamma) = assemble_jump_mass(&space.skeleton, &space.dofs);
        debug_assert_eq!(ids, dofs);
        Ok(Self { dofs, b, m_gamma })
    }

    /// `A += B - B^T + nu M_gamma` (or only `nu M_gamma` without the skew part).
    pub fn add_to(&self, a: &mut Mat<f64>, nu: f64, skew: bool) -> Result<()> {
        if !(nu >= 0.0) {
            return Err(Error::InvalidParameter(format!("penalty nu must be non-negative, got {nu}")));
        }
        let n = a.nrows();
        if self.b.ncols() != n {
            return Err(Error::Dimension("interface block does not match the system size".into()));
        }
        if skew {
            for (r, &row) in self.dofs.iter().enumerate() {
                for c in 0..n {
                    let v = self.b[(r, c)];
                    a[(row, c)] += v;
                    a[(c, row)] -= v;
                }
            }
        }
        for (r, &row) in self.dofs.iter().enumerate() {
            for (c, &col) in self.dofs.iter().enumerate() {
                a[(row, col)] += nu * self.m_gamma[(r, c)];
            }
        }
        Ok(())
    }

    /// `y += (B - B^T + nu M_gamma) x`.
    pub fn apply_add(&self, x: &[f64], nu: f64, y: &mut [f64]) {
        let n = x.len();
        for (r, &row) in self.dofs.iter().enumerate() {
            let mut bx = 0.0;
            for c in 0..n {
                bx += self.b[(r, c)] * x[c];
            }
            y[row] += bx;
            let xr = x[row];
            for c in 0..n {
                y[c] -= self.b[(r, c)] * xr;
            }
            for (k, &col) in self.dofs.iter().enumerate() {
                y[row] += nu * self.m_gamma[(r, k)] * x[col];
            }
        }
    }
}
