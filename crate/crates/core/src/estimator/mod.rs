//! Two-level error estimator from the difference of the coarse and fine Galerkin solutions.

mod extrapolate;
mod record;

pub use extrapolate::{extrapolate_energy, Extrapolation};
pub use record::{parse_records, write_records, ConvergenceRecord, MeshKind, CSV_HEADER};

use crate::assembly::{assemble_rhs, jump_norm_squared, DiscreteFunction, FunctionSpace, SourceTerm};
use crate::error::{Error, Result};
use crate::solve::SolvePair;

/// Relative tolerance of the check `Theta^2 = Theta_1^2 + 2 nu Theta_2^2`.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Local indicators `theta_T^2` on the coarse mesh, split into curl and jump parts.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    /// `h_T ||curl (u_h - u_{h/2})||^2_{L2(T)}`.
    pub curl_part: Vec<f64>,
    /// `nu ||[u_h - u_{h/2}]||^2_{L2(gamma cap dT)}`.
    pub jump_part: Vec<f64>,
    pub nu: f64,
    /// `||[u_h - u_{h/2}]||^2_{L2(gamma)}`, integrated independently of the local parts.
    pub jump_total: f64,
}

/// `Theta`, `Theta_1` and `Theta_2 = ||[u_h - u_{h/2}]||`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GlobalEstimators {
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl IndicatorField {
    pub fn len(&self) -> usize {
        self.curl_part.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curl_part.is_empty()
    }

    /// `theta_T^2` per coarse element.
    pub fn squared(&self) -> Vec<f64> {
        self.curl_part.iter().zip(&self.jump_part).map(|(a, b)| a + b).collect()
    }
}

/// Indicators of the difference `d = P u_h - u_{h/2}` given in the fine space.
pub fn indicators_from_difference(coarse: &FunctionSpace, fine: &FunctionSpace, d: &[f64], nu: f64) -> Result<IndicatorField> {
    let parent = &fine
        .mesh
        .genealogy
        .as_ref()
        .ok_or_else(|| Error::MissingGenealogy("fine mesh carries no element parents".into()))?
        .element_parent;
    let nc = coarse.mesh.num_elements();
    if parent.len() != fine.mesh.num_elements() || parent.iter().any(|&p| p >= nc) {
        return Err(Error::MissingGenealogy("element parents do not match the coarse mesh".into()));
    }
    let diff = fine.function(d.to_vec())?;
    let mut curl_part = vec![0.0; nc];
    for (e, &p) in parent.iter().enumerate() {
        curl_part[p] += diff.curl(e).norm_squared() * fine.mesh.area(e);
    }
    for (t, c) in curl_part.iter_mut().enumerate() {
        *c *= coarse.mesh.h(t);
    }
    let val = |v: usize| fine.dofs.dof(v).map_or(0.0, |k| d[k]);
    let mut jump_part = vec![0.0; nc];
    for s in &fine.skeleton.segments {
        let jump_at = |pos: f64| {
            let (a0, a1) = s.side_j.weights(pos);
            let (b0, b1) = s.side_i.weights(pos);
            a0 * val(s.side_j.v_start) + a1 * val(s.side_j.v_end) - b0 * val(s.side_i.v_start) - b1 * val(s.side_i.v_end)
        };
        let (j0, j1) = (jump_at(s.s0), jump_at(s.s1));
        let local = nu * s.length() * (j0 * j0 + j0 * j1 + j1 * j1) / 3.0;
        jump_part[parent[s.side_i.element]] += local;
        jump_part[parent[s.side_j.element]] += local;
    }
    Ok(IndicatorField { curl_part, jump_part, nu, jump_total: jump_norm_squared(fine, d) })
}

pub fn compute_indicators(p: &SolvePair) -> Result<IndicatorField> {
    let d: Vec<f64> = p.u_prolonged.iter().zip(&p.u_fine).map(|(a, b)| a - b).collect();
    indicators_from_difference(&p.coarse, &p.fine, &d, p.nu)
}

/// Global estimators, checking that the local jump parts add up to twice the global jump term.
pub fn compute_global_estimators(f: &IndicatorField) -> Result<GlobalEstimators> {
    let theta1_sq: f64 = f.curl_part.iter().sum();
    let total: f64 = f.squared().iter().sum();
    let split = theta1_sq + 2.0 * f.nu * f.jump_total;
    if (total - split).abs() > IDENTITY_TOLERANCE * total.max(split) {
        return Err(Error::EstimatorIdentity { total, split });
    }
    Ok(GlobalEstimators { theta: total.sqrt(), theta1: theta1_sq.sqrt(), theta2: f.jump_total.sqrt() })
}

/// `<f, u_h>`.
pub fn energy_value(u: &DiscreteFunction, f: &SourceTerm) -> f64 {
    match f {
        SourceTerm::Constant(c) => u.mean_integral(*c),
        SourceTerm::Function(_) => {
            let b = assemble_rhs(f, &u.space.mesh, &u.space.dofs);
            b.iter().zip(&u.coeffs).map(|(a, b)| a * b).sum()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalError {
    pub total: f64,
    pub error1: f64,
    pub error2: f64,
}

/// `total^2 = | ||u||^2_ex - <f, u_h> | + nu ||[u_h]||^2`.
pub fn total_error(energy: f64, extrapolated: f64, jump_squared: f64, nu: f64) -> TotalError {
    let e1 = (extrapolated - energy).abs();
    let e2 = nu * jump_squared;
    TotalError { total: (e1 + e2).sqrt(), error1: e1.sqrt(), error2: e2.sqrt() }
}
