//! Dense LU with partial pivoting, a Hager-type condition estimate and packed symmetric storage.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::{factor, solve};
use faer::{Mat, MatMut, Par};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Relative residual above which one step of iterative refinement is taken.
pub const RESIDUAL_TARGET: f64 = 1e-10;

/// In-place LU factors `P A = L U`.
pub struct LuFactors {
    lu: Mat<f64>,
    fwd: Vec<usize>,
    inv: Vec<usize>,
    /// `||A||_1` of the factored matrix.
    pub norm1: f64,
}

/// `||A||_1` (largest column sum) and `||A||_inf` (largest row sum).
pub fn matrix_norms(a: &Mat<f64>) -> (f64, f64) {
    let n = a.nrows();
    let mut rows = vec![0.0; n];
    let mut norm1: f64 = 0.0;
    for j in 0..a.ncols() {
        let mut col = 0.0;
        for (i, r) in rows.iter_mut().enumerate() {
            let v = a[(i, j)].abs();
            col += v;
            *r += v;
        }
        norm1 = norm1.max(col);
    }
    (norm1, rows.into_iter().fold(0.0, f64::max))
}

impl LuFactors {
    /// Factor `a` in place. A pivot `|U_kk| <= n eps max|A|` is reported as singular.
    pub fn factor(mut a: Mat<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("matrix is {}x{}, expected square", n, a.ncols())));
        }
        let (norm1, _) = matrix_norms(&a);
        let mut max_abs: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let v = a[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!("non-finite matrix entry at ({i}, {j})")));
                }
                max_abs = max_abs.max(v.abs());
            }
        }
        let mut fwd = vec![0usize; n];
        let mut inv = vec![0usize; n];
        let par = Par::rayon(0);
        let params = Default::default();
        let mut buf = MemBuffer::new(factor::lu_in_place_scratch::<usize, f64>(n, n, par, params));
        factor::lu_in_place(a.as_mut(), &mut fwd, &mut inv, par, MemStack::new(&mut buf), params);
        let threshold = n as f64 * f64::EPSILON * max_abs;
        if let Some(pivot) = (0..n).find(|&k| !(a[(k, k)].abs() > threshold)) {
            return Err(Error::SingularMatrix { pivot });
        }
        Ok(Self { lu: a, fwd, inv, norm1 })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    fn perm(&self) -> faer::perm::PermRef<'_, usize> {
        faer::perm::PermRef::new_checked(&self.fwd, &self.inv, self.dim())
    }

    fn run(&self, rhs: MatMut<'_, f64>, transpose: bool) {
        let n = self.dim();
        let par = Par::rayon(0);
        let k = rhs.ncols();
        let req = if transpose {
            solve::solve_transpose_in_place_scratch::<usize, f64>(n, k, par)
        } else {
            solve::solve_in_place_scratch::<usize, f64>(n, k, par)
        };
        let mut buf = MemBuffer::new(req);
        let stack = MemStack::new(&mut buf);
        let lu = self.lu.as_ref();
        if transpose {
            solve::solve_transpose_in_place(lu, lu, self.perm(), rhs, par, stack);
        } else {
            solve::solve_in_place(lu, lu, self.perm(), rhs, par, stack);
        }
    }

    /// `x <- A^{-1} x`.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        self.run(faer::MatMut::from_column_major_slice_mut(x, n, 1), false);
    }

    /// `x <- A^{-T} x`.
    pub fn solve_transpose_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        self.run(faer::MatMut::from_column_major_slice_mut(x, n, 1), true);
    }

    /// Reciprocal condition number estimate in the 1-norm (Hager's method).
    pub fn rcond(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        let mut last = usize::MAX;
        for _ in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            est = y.iter().map(|v| v.abs()).sum::<f64>();
            let mut z: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            self.solve_transpose_in_place(&mut z);
            let (j, zmax) = z.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last {
                break;
            }
            last = j;
            x.fill(0.0);
            x[j] = 1.0;
        }
        if est == 0.0 || self.norm1 == 0.0 {
            0.0
        } else {
            1.0 / (self.norm1 * est)
        }
    }
}

/// Solution of a dense system with its diagnostics.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub x: Vec<f64>,
    /// `||A x - b|| / ||b||` (zero for `b = 0`).
    pub residual: f64,
    pub rcond: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solve with already computed factors; `apply` evaluates `A x` for the residual.
pub fn solve_factored(lu: &LuFactors, b: &[f64], apply: impl Fn(&[f64]) -> Vec<f64>) -> DenseSolution {
    let mut x = b.to_vec();
    lu.solve_in_place(&mut x);
    let bnorm = norm2(b);
    let residual_of = |x: &[f64]| {
        let ax = apply(x);
        let r: Vec<f64> = ax.iter().zip(b).map(|(a, b)| b - a).collect();
        r
    };
    let mut r = residual_of(&x);
    let mut residual = if bnorm > 0.0 { norm2(&r) / bnorm } else { norm2(&r) };
    if residual > RESIDUAL_TARGET {
        lu.solve_in_place(&mut r);
        let refined: Vec<f64> = x.iter().zip(&r).map(|(a, b)| a + b).collect();
        let r2 = residual_of(&refined);
        let res2 = if bnorm > 0.0 { norm2(&r2) / bnorm } else { norm2(&r2) };
        if res2 < residual {
            x = refined;
            residual = res2;
        }
    }
    DenseSolution { x, residual, rcond: lu.rcond() }
}

/// `y = A x` for a dense matrix.
pub fn mat_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

/// Solve `A x = b` by LU with partial pivoting; `a` is left untouched.
pub fn solve_dense(a: &Mat<f64>, b: &[f64]) -> Result<DenseSolution> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!("matrix has {} rows, right-hand side {}", a.nrows(), b.len())));
    }
    let lu = LuFactors::factor(a.clone())?;
    Ok(solve_factored(&lu, b, |x| mat_vec(a, x)))
}

/// Upper triangle of a symmetric matrix, column by column.
pub struct PackedSymmetric {
    n: usize,
    data: Vec<f64>,
}

/// Columns per block of the packed product; fixed so the summation order does not depend on the
/// thread count.
const PACKED_BLOCK: usize = 512;

impl PackedSymmetric {
    pub fn from_upper(a: &Mat<f64>) -> Self {
        let n = a.nrows();
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for i in 0..=j {
                data.push(a[(i, j)]);
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bytes(n: usize) -> usize {
        8 * n * (n + 1) / 2
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let partial: Vec<Vec<f64>> = (0..n.div_ceil(PACKED_BLOCK))
            .into_par_iter()
            .map(|blk| {
                let mut y = vec![0.0; n];
                for j in blk * PACKED_BLOCK..((blk + 1) * PACKED_BLOCK).min(n) {
                    let col = &self.data[j * (j + 1) / 2..j * (j + 1) / 2 + j + 1];
                    let xj = x[j];
                    let mut dot = 0.0;
                    for (i, &s) in col[..j].iter().enumerate() {
                        dot += s * x[i];
                        y[i] += s * xj;
                    }
                    y[j] += dot + col[j] * xj;
                }
                y
            })
            .collect();
        let mut y = vec![0.0; n];
        for p in partial {
            for (a, b) in y.iter_mut().zip(p) {
                *a += b;
            }
        }
        y
    }
}
