//! `A_V[a, b] = sum_{T, T'} (c_a^T . c_b^T') G(T, T')`, assembled panel by panel.
//!
//! For a panel of elements `T` the rows `W_T = sum_{T' >= T} G(T, T') c^T'` (scattered to the
//! dofs of `T'`) are built in parallel; then `M[:, a] += c_a^T . W_T` in element order, and
//! finally `A_V = M + M^T`. The diagonal pairs carry weight 1/2, so the result is the full
//! double sum, exactly symmetric and independent of the thread count.

use faer::Mat;
use rayon::prelude::*;

use super::{element_curl, DofMap};
use crate::error::{Error, Result};
use crate::geometry::{diameter, Point};
use crate::mesh::Mesh;
use crate::quad::{FarRule, PairCache, PairIntegrator, QuadConfig, TriangleMoments, INV_FOUR_PI};

const PANEL: usize = 64;

pub(crate) struct ElementData {
    pub tri: [Point; 3],
    pub curls: [Point; 3],
    pub dofs: [Option<usize>; 3],
    pub moments: TriangleMoments,
    /// Largest distance from the centroid to a vertex.
    pub radius: f64,
    pub h: f64,
}

pub(crate) fn element_data(m: &Mesh, dofs: &DofMap) -> Result<Vec<ElementData>> {
    (0..m.num_elements())
        .map(|e| {
            let tri = m.triangle(e);
            if !(m.area(e) > 0.0) {
                return Err(Error::DegenerateTriangle { area: m.area(e) });
            }
            let moments = TriangleMoments::new(&tri);
            let radius = tri.iter().map(|p| p.distance(moments.centroid)).fold(0.0, f64::max);
            Ok(ElementData {
                tri,
                curls: [0, 1, 2].map(|k| element_curl(m, e, k)),
                dofs: dofs.element_dofs(m, e),
                moments,
                radius,
                h: diameter(&tri),
            })
        })
        .collect()
}

/// Pair value with a cheap bound that sends well-separated pairs straight to the moment rule.
#[inline]
fn pair_value(a: &ElementData, b: &ElementData, integ: &PairIntegrator, moment_ratio: Option<f64>) -> f64 {
    if let Some(ratio) = moment_ratio {
        let d = a.moments.centroid.distance(b.moments.centroid) - a.radius - b.radius;
        if d >= ratio * a.h.max(b.h) {
            return INV_FOUR_PI * a.moments.interaction(&b.moments);
        }
    }
    integ.pair(&a.tri, &b.tri)
}

pub fn assemble_vcurl_block(m: &Mesh, dofs: &DofMap, cfg: &QuadConfig) -> Result<Mat<f64>> {
    let n = dofs.len();
    let data = element_data(m, dofs)?;
    let cache = PairCache::new();
    let integ = PairIntegrator::new(cfg, &cache);
    // the moment band must be the outermost one for the shortcut to agree with `pair`
    let moment_ratio = match cfg.far_bands.first() {
        Some(&(r, FarRule::Moment)) if r >= cfg.near_ratio => Some(r),
        _ => None,
    };
    let mut acc = Mat::<f64>::zeros(n, n);
    let ne = data.len();
    let mut rows = vec![0.0f64; PANEL * 2 * n];
    for start in (0..ne).step_by(PANEL) {
        let end = (start + PANEL).min(ne);
        rows[..(end - start) * 2 * n].par_chunks_mut(2 * n).enumerate().for_each(|(k, w)| {
            w.fill(0.0);
            let t = start + k;
            let a = &data[t];
            if a.dofs.iter().all(Option::is_none) {
                return;
            }
            let (wx, wy) = w.split_at_mut(n);
            for (s, b) in data.iter().enumerate().skip(t) {
                if b.dofs.iter().all(Option::is_none) {
                    continue;
                }
                let mut g = pair_value(a, b, &integ, moment_ratio);
                if s == t {
                    g *= 0.5;
                }
                for (d, c) in b.dofs.iter().zip(&b.curls) {
                    if let Some(d) = d {
                        wx[*d] += g * c.x;
                        wy[*d] += g * c.y;
                    }
                }
            }
        });
        for t in start..end {
            let w = &rows[(t - start) * 2 * n..(t - start + 1) * 2 * n];
            let (wx, wy) = w.split_at(n);
            let a = &data[t];
            for (d, c) in a.dofs.iter().zip(&a.curls) {
                if let Some(d) = d {
                    let col = acc.col_mut(*d).try_as_col_major_mut().expect("contiguous column").as_slice_mut();
                    col.par_chunks_mut(4096).enumerate().for_each(|(chunk, out)| {
                        let off = chunk * 4096;
                        for (i, o) in out.iter_mut().enumerate() {
                            *o += c.x * wx[off + i] + c.y * wy[off + i];
                        }
                    });
                }
            }
        }
    }
    symmetrize(&mut acc);
    Ok(acc)
}

/// `M <- M + M^T` in place, blockwise.
fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    const B: usize = 64;
    for jb in (0..n).step_by(B) {
        for ib in (0..=jb).step_by(B) {
            for j in jb..(jb + B).min(n) {
                for i in ib..(ib + B).min(n) {
                    if i < j {
                        let s = m[(i, j)] + m[(j, i)];
                        m[(i, j)] = s;
                        m[(j, i)] = s;
                    } else if i == j {
                        m[(i, i)] *= 2.0;
                    }
                }
            }
        }
    }
}
