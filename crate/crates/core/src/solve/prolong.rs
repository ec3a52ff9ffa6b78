//! Embedding of the coarse space into the space of its red refinement.

use crate::assembly::FunctionSpace;
use crate::error::{Error, Result};
use crate::mesh::VertexOrigin;

/// Sparse prolongation matrix `P` (fine x coarse), stored by rows and by columns.
#[derive(Debug, Clone)]
pub struct Prolongation {
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
}

impl Prolongation {
    /// Build `P` from the genealogy of `fine`, which must be the refinement of `coarse`.
    pub fn new(coarse: &FunctionSpace, fine: &FunctionSpace) -> Result<Self> {
        let gen = fine
            .mesh
            .genealogy
            .as_ref()
            .ok_or_else(|| Error::MissingGenealogy("fine mesh carries no vertex origins".into()))?;
        if gen.vertex_origin.len() != fine.mesh.num_vertices() {
            return Err(Error::MissingGenealogy("vertex origins do not match the fine mesh".into()));
        }
        let nc = coarse.mesh.num_vertices();
        let mut rows = Vec::with_capacity(fine.dim());
        let mut cols = vec![Vec::new(); coarse.dim()];
        for d in 0..fine.dim() {
            let parents: &[(usize, f64)] = match gen.vertex_origin[fine.dofs.vertex(d)] {
                VertexOrigin::Copy(c) => &[(c, 1.0)],
                VertexOrigin::Midpoint(a, b) => &[(a, 0.5), (b, 0.5)],
            };
            let mut row = Vec::with_capacity(2);
            for &(v, w) in parents {
                if v >= nc {
                    return Err(Error::MissingGenealogy(format!("parent vertex {v} is not in the coarse mesh")));
                }
                if let Some(c) = coarse.dofs.dof(v) {
                    row.push((c, w));
                    cols[c].push((d, w));
                }
            }
            rows.push(row);
        }
        Ok(Self { rows, cols })
    }

    pub fn fine_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn coarse_dim(&self) -> usize {
        self.cols.len()
    }

    /// Column `c`: fine dofs and weights of the prolonged coarse basis function.
    pub fn column(&self, c: usize) -> &[(usize, f64)] {
        &self.cols[c]
    }

    /// `P u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(c, w)| w * u[c]).sum()).collect()
    }

    /// `P^T y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.cols.iter().map(|c| c.iter().map(|&(f, w)| w * y[f]).sum()).collect()
    }
}

/// Coefficients of the coarse function `u` in the fine space.
pub fn prolong(coarse: &FunctionSpace, fine: &FunctionSpace, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != coarse.dim() {
        return Err(Error::Dimension(format!("expected {} coarse coefficients, got {}", coarse.dim(), u.len())));
    }
    Ok(Prolongation::new(coarse, fine)?.apply(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::jump_norm_squared;
    use crate::mesh::{build_decomposition, DecompositionSpec, Mesh};

    fn pair() -> (FunctionSpace, FunctionSpace) {
        let d = build_decomposition(&DecompositionSpec::FourSquare).unwrap();
        let m = Mesh::generate(&d, 3).unwrap().refine_adaptive(&[0, 5, 17]).unwrap();
        let f = m.refine_uniform();
        (FunctionSpace::new(m, &d).unwrap(), FunctionSpace::new(f, &d).unwrap())
    }

    fn sample(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 29 + 7) % 17) as f64 / 17.0 - 0.4).collect()
    }

    #[test]
    fn ones_stay_ones_inside() {
        let (c, f) = pair();
        let u = prolong(&c, &f, &vec![1.0; c.dim()]).unwrap();
        let gen = f.mesh.genealogy.as_ref().unwrap();
        for (d, &v) in u.iter().enumerate() {
            let parents_free = match gen.vertex_origin[f.dofs.vertex(d)] {
                VertexOrigin::Copy(a) => c.dofs.dof(a).is_some(),
                VertexOrigin::Midpoint(a, b) => c.dofs.dof(a).is_some() && c.dofs.dof(b).is_some(),
            };
            if parents_free {
                assert_eq!(v, 1.0);
            }
        }
    }

    #[test]
    fn same_jump_and_curls() {
        let (c, f) = pair();
        let u = sample(c.dim());
        let pu = prolong(&c, &f, &u).unwrap();
        let (a, b) = (jump_norm_squared(&c, &u), jump_norm_squared(&f, &pu));
        assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{a} {b}");
        let cu = c.function(u).unwrap();
        let fu = f.function(pu).unwrap();
        let parent = &f.mesh.genealogy.as_ref().unwrap().element_parent;
        for e in 0..f.mesh.num_elements() {
            let d = fu.curl(e) - cu.curl(parent[e]);
            assert!(d.norm() <= 1e-11 * (1.0 + cu.curl(parent[e]).norm()));
        }
    }

    #[test]
    fn transpose_is_adjoint() {
        let (c, f) = pair();
        let p = Prolongation::new(&c, &f).unwrap();
        let (u, y) = (sample(c.dim()), sample(f.dim()));
        let lhs: f64 = p.apply(&u).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = p.apply_transpose(&y).iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn missing_genealogy() {
        let (c, _) = pair();
        let mut m = c.mesh.clone();
        m.genealogy = None;
        let d = build_decomposition(&DecompositionSpec::FourSquare).unwrap();
        let s = FunctionSpace::new(m, &d).unwrap();
        assert!(matches!(Prolongation::new(&c, &s), Err(Error::MissingGenealogy(_))));
    }
}
