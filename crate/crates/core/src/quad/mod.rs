//! Integration kernels for the single layer potential on flat triangles.

mod edge;
mod graded;
mod newton;
mod pair;
mod rules;

pub use edge::{edge_potential_integral, edge_potential_moments, EdgeCache};
pub use graded::{integrate_graded, Grading};
pub use newton::{newton_potential_triangle, potential_integral, INV_FOUR_PI};
pub use pair::{
    classify_pair, outer_analytic, pair_potential, semi_analytic, tensor, FarRule, PairCache, PairClass,
    PairIntegrator, PairKind, QuadConfig, QuadProfile, TriangleMoments,
};
pub use rules::{quadrature_rule, segment_rule, QuadratureRule, RuleKind, MAX_SEGMENT_DEGREE, MAX_TRIANGLE_DEGREE};
