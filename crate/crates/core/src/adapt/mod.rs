//! Study drivers: uniform refinement and the adaptive loop with minimal Dörfler marking.

use std::time::Instant;

use crate::assembly::{jump_norm_squared, SourceTerm};
use crate::error::{Error, Result};
use crate::estimator::{
    compute_global_estimators, compute_indicators, extrapolate_energy, total_error, ConvergenceRecord, Extrapolation,
    MeshKind,
};
use crate::mesh::{build_decomposition, Decomposition, DecompositionSpec, Mesh};
use crate::quad::{QuadConfig, QuadProfile};
use crate::solve::{solve_pair, SolveOptions, DEFAULT_MEMORY_LIMIT};

/// Uniform levels used to obtain a reference energy for an adaptive run when none is given.
pub const REFERENCE_LEVELS: usize = 4;

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub mode: MeshKind,
    pub nu: f64,
    pub delta: f64,
    pub tol: Option<f64>,
    pub max_steps: usize,
    pub n0: usize,
    pub quad_profile: QuadProfile,
    pub source: SourceTerm,
    pub decomposition: DecompositionSpec,
    /// Steps whose coarse mesh is kept as a snapshot.
    pub snapshot_steps: Vec<usize>,
    /// `||u||^2_ex` for the error columns of an adaptive run.
    pub reference_energy: Option<f64>,
    pub memory_limit: usize,
}

impl StudyConfig {
    pub fn default_max_steps(mode: MeshKind) -> usize {
        match mode {
            MeshKind::Uniform => 5,
            MeshKind::Adaptive => 14,
        }
    }

    pub fn new(mode: MeshKind) -> Self {
        Self {
            mode,
            nu: 100.0,
            delta: 0.5,
            tol: None,
            max_steps: Self::default_max_steps(mode),
            n0: 2,
            quad_profile: QuadProfile::Fast,
            source: SourceTerm::Constant(1.0),
            decomposition: DecompositionSpec::FourSquare,
            snapshot_steps: Vec::new(),
            reference_energy: None,
            memory_limit: DEFAULT_MEMORY_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("tol must be positive, got {t}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
        }
        if self.n0 == 0 {
            return Err(Error::InvalidParameter("n0 must be at least 1".into()));
        }
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            nu: self.nu,
            quad: QuadConfig::from_profile(self.quad_profile),
            source: self.source,
            memory_limit: self.memory_limit,
        }
    }
}

/// Minimal set of largest indicators with `sum theta_T^2 >= delta^2 Theta^2`, ties broken by
/// ascending element id. Returned in marking order.
pub fn doerfler_mark(theta_sq: &[f64], delta: f64) -> Result<Vec<usize>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    if theta_sq.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("indicators must be finite and non-negative".into()));
    }
    let mut order: Vec<usize> = (0..theta_sq.len()).collect();
    order.sort_by(|&a, &b| theta_sq[b].total_cmp(&theta_sq[a]).then(a.cmp(&b)));
    // summing in marking order makes the full sum reachable exactly for delta = 1
    let total: f64 = order.iter().map(|&e| theta_sq[e]).sum();
    if total == 0.0 {
        return Err(Error::NothingToMark);
    }
    let threshold = delta * delta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for &e in &order {
        acc += theta_sq[e];
        marked.push(e);
        if acc >= threshold {
            break;
        }
    }
    Ok(marked)
}

/// Where the marked elements of one adaptive step lie.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkingStats {
    pub step: usize,
    pub marked: usize,
    /// Marked elements with a vertex on the exterior boundary.
    pub touching_boundary: usize,
    /// Per interface: fraction of marked elements touching it.
    pub interface_share: Vec<f64>,
    /// Per interface: area of all elements touching it, relative to `|Gamma|`.
    pub interface_area_share: Vec<f64>,
}

impl MarkingStats {
    pub fn boundary_fraction(&self) -> f64 {
        self.touching_boundary as f64 / self.marked as f64
    }

    /// Largest ratio of marked share to area share over the interfaces.
    pub fn max_interface_ratio(&self) -> f64 {
        self.interface_share
            .iter()
            .zip(&self.interface_area_share)
            .map(|(s, a)| if *a > 0.0 { s / a } else { 0.0 })
            .fold(0.0, f64::max)
    }
}

pub fn marking_stats(step: usize, m: &Mesh, d: &Decomposition, marked: &[usize]) -> MarkingStats {
    let touches = |e: usize, f: usize| m.elements[e].iter().any(|&v| d.interfaces[f].contains(m.vertices[v]));
    let nf = d.num_interfaces();
    let mut interface_share = vec![0.0; nf];
    let mut interface_area_share = vec![0.0; nf];
    for f in 0..nf {
        interface_share[f] = marked.iter().filter(|&&e| touches(e, f)).count() as f64 / marked.len() as f64;
        interface_area_share[f] = (0..m.num_elements()).filter(|&e| touches(e, f)).map(|e| m.area(e)).sum::<f64>() / d.area();
    }
    let touching_boundary = marked
        .iter()
        .filter(|&&e| m.elements[e].iter().any(|&v| d.on_exterior_boundary(m.vertices[v])))
        .count();
    MarkingStats { step, marked: marked.len(), touching_boundary, interface_share, interface_area_share }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub assembly: f64,
    pub solve: f64,
    pub estimate: f64,
}

/// History of a study. On failure `error` holds the cause and the records so far are kept.
#[derive(Debug)]
pub struct StudyOutcome {
    pub records: Vec<ConvergenceRecord>,
    pub extrapolation: Option<Extrapolation>,
    pub snapshots: Vec<(usize, Mesh)>,
    pub marking: Vec<MarkingStats>,
    /// Largest relative Galerkin orthogonality defect over all steps.
    pub max_orthogonality: f64,
    pub timings: PhaseTimings,
    pub error: Option<Error>,
}

impl StudyOutcome {
    fn new() -> Self {
        Self {
            records: Vec::new(),
            extrapolation: None,
            snapshots: Vec::new(),
            marking: Vec::new(),
            max_orthogonality: 0.0,
            timings: PhaseTimings::default(),
            error: None,
        }
    }

    pub fn into_result(self) -> Result<Self> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

/// Per-step state needed to fill in the error columns once the reference energy is known.
struct Step {
    record: ConvergenceRecord,
    jump_sq: f64,
    energy_fine: f64,
}

/// Solve, estimate and record one mesh. Returns the step, the indicators and the fine mesh.
fn run_step(
    step: usize,
    kind: MeshKind,
    mesh: &Mesh,
    d: &Decomposition,
    opts: &SolveOptions,
    out: &mut StudyOutcome,
) -> Result<(Step, Vec<f64>, Mesh)> {
    let pair = solve_pair(mesh, d, opts)?;
    out.timings.assembly += pair.diagnostics.assembly_seconds;
    out.timings.solve += pair.diagnostics.solve_seconds;
    out.max_orthogonality = out.max_orthogonality.max(pair.diagnostics.relative_orthogonality());
    let start = Instant::now();
    let field = compute_indicators(&pair)?;
    let g = compute_global_estimators(&field)?;
    let jump_sq = jump_norm_squared(&pair.coarse, &pair.u_coarse);
    out.timings.estimate += start.elapsed().as_secs_f64();
    let record = ConvergenceRecord {
        step,
        kind,
        n: pair.coarse.dim(),
        n_fine: pair.fine.dim(),
        energy: pair.energy_coarse,
        error1: f64::NAN,
        error2: (opts.nu * jump_sq).sqrt(),
        estim1: g.theta1,
        estim2: opts.nu.sqrt() * g.theta2,
        theta: g.theta,
        total_error: f64::NAN,
        nu: opts.nu,
    };
    Ok((Step { record, jump_sq, energy_fine: pair.energy_fine }, field.squared(), pair.fine.mesh))
}

fn fill_errors(steps: &[Step], reference: f64, nu: f64) -> Vec<ConvergenceRecord> {
    steps
        .iter()
        .map(|s| {
            let t = total_error(s.record.energy, reference, s.jump_sq, nu);
            ConvergenceRecord { error1: t.error1, total_error: t.total, ..s.record }
        })
        .collect()
}

/// Uniform refinement study; the energy is extrapolated from the last levels (including the
/// fine solution of the last level) and the error columns are filled in afterwards.
pub fn run_uniform(cfg: &StudyConfig) -> StudyOutcome {
    let mut out = StudyOutcome::new();
    if let Err(e) = cfg.validate() {
        out.error = Some(e);
        return out;
    }
    let d = match build_decomposition(&cfg.decomposition) {
        Ok(d) => d,
        Err(e) => {
            out.error = Some(e);
            return out;
        }
    };
    let opts = cfg.solve_options();
    let mut mesh = match Mesh::generate(&d, cfg.n0) {
        Ok(m) => m,
        Err(e) => {
            out.error = Some(e);
            return out;
        }
    };
    let mut steps = Vec::new();
    for step in 0..cfg.max_steps {
        if cfg.snapshot_steps.contains(&step) {
            out.snapshots.push((step, mesh.clone()));
        }
        match run_step(step, MeshKind::Uniform, &mesh, &d, &opts, &mut out) {
            Ok((s, _, fine)) => {
                steps.push(s);
                mesh = fine;
            }
            Err(e) => {
                out.error = Some(e);
                break;
            }
        }
    }
    let mut history: Vec<(usize, f64)> = steps.iter().map(|s| (s.record.n, s.record.energy)).collect();
    if let Some(last) = steps.last() {
        history.push((last.record.n_fine, last.energy_fine));
    }
    out.extrapolation = extrapolate_energy(&history);
    let reference = out.extrapolation.map(|x| x.energy).or(cfg.reference_energy);
    out.records = match reference {
        Some(r) => fill_errors(&steps, r, cfg.nu),
        None => steps.iter().map(|s| s.record).collect(),
    };
    out
}

/// Adaptive loop. Without a reference energy in `cfg`, one is extrapolated from a short uniform
/// study first.
pub fn run_adaptive(cfg: &StudyConfig) -> StudyOutcome {
    let mut out = StudyOutcome::new();
    if let Err(e) = cfg.validate() {
        out.error = Some(e);
        return out;
    }
    let reference = match cfg.reference_energy {
        Some(r) => r,
        None => {
            let pre = StudyConfig {
                mode: MeshKind::Uniform,
                max_steps: REFERENCE_LEVELS,
                snapshot_steps: Vec::new(),
                ..cfg.clone()
            };
            let pre = run_uniform(&pre);
            match (pre.error, pre.extrapolation) {
                (None, Some(x)) => x.energy,
                (Some(e), _) => {
                    out.error = Some(e);
                    return out;
                }
                (None, None) => {
                    out.error = Some(Error::InvalidParameter("reference energy could not be extrapolated".into()));
                    return out;
                }
            }
        }
    };
    let d = match build_decomposition(&cfg.decomposition) {
        Ok(d) => d,
        Err(e) => {
            out.error = Some(e);
            return out;
        }
    };
    let opts = cfg.solve_options();
    let mut mesh = match Mesh::generate(&d, cfg.n0) {
        Ok(m) => m,
        Err(e) => {
            out.error = Some(e);
            return out;
        }
    };
    let mut steps = Vec::new();
    for step in 0..cfg.max_steps {
        if cfg.snapshot_steps.contains(&step) {
            out.snapshots.push((step, mesh.clone()));
        }
        let (s, theta_sq, _) = match run_step(step, MeshKind::Adaptive, &mesh, &d, &opts, &mut out) {
            Ok(r) => r,
            Err(e) => {
                out.error = Some(e);
                break;
            }
        };
        let theta = s.record.theta;
        steps.push(s);
        if cfg.tol.is_some_and(|t| theta <= t) || step + 1 == cfg.max_steps {
            break;
        }
        let next = doerfler_mark(&theta_sq, cfg.delta).and_then(|marked| {
            out.marking.push(marking_stats(step, &mesh, &d, &marked));
            mesh.refine_adaptive(&marked)
        });
        match next {
            Ok(m) => mesh = m,
            Err(e) => {
                out.error = Some(e);
                break;
            }
        }
    }
    out.records = fill_errors(&steps, reference, cfg.nu);
    out
}

/// Run the study selected by `cfg.mode`.
pub fn run_study(cfg: &StudyConfig) -> StudyOutcome {
    match cfg.mode {
        MeshKind::Uniform => run_uniform(cfg),
        MeshKind::Adaptive => run_adaptive(cfg),
    }
}
