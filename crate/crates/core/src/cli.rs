//! Command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::adapt::{run_study, StudyConfig, StudyOutcome};
use crate::error::{Error, Result};
use crate::estimator::{write_records, ConvergenceRecord, MeshKind};
use crate::mesh::{export_mesh, DecompositionSpec};
use crate::quad::QuadProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Uniform,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Fast,
    Accurate,
}

/// Adaptive Nitsche boundary elements for the Laplace screen problem.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "nitsche-bem", version, allow_negative_numbers = true)]
pub struct Args {
    /// Refinement mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Nitsche penalty parameter.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Dörfler marking parameter in (0, 1].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Stop once the estimator drops to this value.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of levels or adaptive steps.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Cells per sub-domain edge of the initial mesh.
    #[arg(long)]
    pub n0: Option<usize>,
    #[arg(long, value_enum)]
    pub quad_profile: Option<ProfileArg>,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated steps whose meshes are written next to the CSV.
    #[arg(long)]
    pub dump_mesh: Option<String>,
    /// four-square, single or file=<path>.
    #[arg(long)]
    pub decomposition: Option<String>,
    /// File with one `key = value` per line; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extrapolated energy used for the error columns of adaptive runs.
    #[arg(long)]
    pub reference_energy: Option<f64>,
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub study: StudyConfig,
    pub out: PathBuf,
    /// Resolved settings as `key = value` lines, echoed into the summary.
    pub echo: Vec<(String, String)>,
}

const KEYS: [&str; 11] = [
    "mode",
    "nu",
    "delta",
    "tol",
    "max-steps",
    "n0",
    "quad-profile",
    "out",
    "dump-mesh",
    "decomposition",
    "reference-energy",
];

/// Parse a `key = value` file. Underscores in keys are read as dashes; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected 'key = value'", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Parse(format!("config line {}: unknown key '{}'", no + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| Error::Parse(format!("{key}: '{v}': {e}")))
}

pub fn parse_decomposition(v: &str) -> Result<DecompositionSpec> {
    match v {
        "four-square" => Ok(DecompositionSpec::FourSquare),
        "single" => Ok(DecompositionSpec::Single),
        _ => match v.strip_prefix("file=") {
            Some(path) => DecompositionSpec::parse_polygons(&std::fs::read_to_string(path)?),
            None => Err(Error::Parse(format!("decomposition: expected four-square, single or file=<path>, got '{v}'"))),
        },
    }
}

fn parse_steps(v: &str) -> Result<Vec<usize>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num("dump-mesh", s.trim())).collect()
}

/// Merge defaults, the config file and the flags into a checked configuration.
pub fn resolve(args: &Args) -> Result<RunManifest> {
    let mut kv = match &args.config {
        Some(p) => parse_config_file(&std::fs::read_to_string(p)?)?,
        None => BTreeMap::new(),
    };
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.insert(k.to_string(), v);
        }
    };
    set("mode", args.mode.map(|m| if m == ModeArg::Uniform { "uniform" } else { "adaptive" }.to_string()));
    set("nu", args.nu.map(|v| v.to_string()));
    set("delta", args.delta.map(|v| v.to_string()));
    set("tol", args.tol.map(|v| v.to_string()));
    set("max-steps", args.max_steps.map(|v| v.to_string()));
    set("n0", args.n0.map(|v| v.to_string()));
    set("quad-profile", args.quad_profile.map(|p| if p == ProfileArg::Fast { "fast" } else { "accurate" }.to_string()));
    set("out", args.out.as_ref().map(|p| p.display().to_string()));
    set("dump-mesh", args.dump_mesh.clone());
    set("decomposition", args.decomposition.clone());
    set("reference-energy", args.reference_energy.map(|v| v.to_string()));

    let mode: MeshKind = kv.get("mode").map_or(Ok(MeshKind::Uniform), |v| v.parse())?;
    let mut study = StudyConfig::new(mode);
    for (k, v) in &kv {
        match k.as_str() {
            "mode" | "out" => {}
            "nu" => study.nu = parse_num(k, v)?,
            "delta" => study.delta = parse_num(k, v)?,
            "tol" => study.tol = Some(parse_num(k, v)?),
            "max-steps" => study.max_steps = parse_num(k, v)?,
            "n0" => study.n0 = parse_num(k, v)?,
            "quad-profile" => {
                study.quad_profile = match v.as_str() {
                    "fast" => QuadProfile::Fast,
                    "accurate" => QuadProfile::Accurate,
                    _ => return Err(Error::Parse(format!("quad-profile: expected fast or accurate, got '{v}'"))),
                }
            }
            "dump-mesh" => study.snapshot_steps = parse_steps(v)?,
            "decomposition" => study.decomposition = parse_decomposition(v)?,
            "reference-energy" => study.reference_energy = Some(parse_num(k, v)?),
            _ => unreachable!("keys are checked on input"),
        }
    }
    if !(study.delta > 0.0 && study.delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("--delta must lie in (0, 1], got {}", study.delta)));
    }
    if !(study.nu > 0.0) {
        return Err(Error::InvalidParameter(format!("--nu must be positive, got {}", study.nu)));
    }
    study.validate()?;
    let out = PathBuf::from(kv.get("out").map_or("convergence.csv", String::as_str));
    kv.entry("mode".into()).or_insert_with(|| mode.to_string());
    let echo = kv.into_iter().collect();
    Ok(RunManifest { study, out, echo })
}

/// Least-squares slope of `ln y` against `ln N` over the last `k` records.
pub fn loglog_slope(records: &[ConvergenceRecord], k: usize, y: impl Fn(&ConvergenceRecord) -> f64) -> Option<f64> {
    if records.len() < k || k < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = records[records.len() - k..].iter().map(|r| ((r.n as f64).ln(), y(r).ln())).collect();
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Write the CSV; an empty history is an error and creates no file.
pub fn write_csv(records: &[ConvergenceRecord], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_records(records, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or("convergence".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn summary_text(m: &RunManifest, outcome: &StudyOutcome) -> String {
    let mut s = String::new();
    for (k, v) in &m.echo {
        let _ = writeln!(s, "{k} = {v}");
    }
    let _ = writeln!(s, "deterministic = true");
    let _ = writeln!(s, "records = {}", outcome.records.len());
    let fmt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.6}"));
    let _ = writeln!(s, "slope_total_error = {}", fmt(loglog_slope(&outcome.records, 3, |r| r.total_error)));
    let _ = writeln!(s, "slope_theta = {}", fmt(loglog_slope(&outcome.records, 3, |r| r.theta)));
    if let Some(x) = outcome.extrapolation {
        let _ = writeln!(s, "extrapolated_energy = {:.16e}", x.energy);
        let _ = writeln!(s, "extrapolation_rate = {}", fmt(x.beta));
        let _ = writeln!(s, "extrapolation_reliable = {}", x.reliable);
    }
    let _ = writeln!(s, "max_orthogonality = {:.3e}", outcome.max_orthogonality);
    let t = outcome.timings;
    let _ = writeln!(s, "seconds_assembly = {:.3}", t.assembly);
    let _ = writeln!(s, "seconds_solve = {:.3}", t.solve);
    let _ = writeln!(s, "seconds_estimate = {:.3}", t.estimate);
    if let Some(e) = &outcome.error {
        let _ = writeln!(s, "error = {e}");
    }
    s
}

/// Run the study and write the CSV, the summary and the requested mesh snapshots. The CSV of a
/// failed run holds the steps completed before the failure.
pub fn execute(m: &RunManifest) -> Result<StudyOutcome> {
    let outcome = run_study(&m.study);
    if !outcome.records.is_empty() {
        write_csv(&outcome.records, &m.out)?;
    }
    for (step, mesh) in &outcome.snapshots {
        export_mesh(mesh, &sibling(&m.out, &format!("_mesh_step{step}.txt")))?;
    }
    std::fs::write(sibling(&m.out, "_summary.txt"), summary_text(m, &outcome))?;
    outcome.into_result()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Args {
        Args::try_parse_from(std::iter::once("nitsche-bem").chain(list.iter().copied())).unwrap()
    }

    #[test]
    fn defaults() {
        let m = resolve(&args(&[])).unwrap();
        assert_eq!(m.study.mode, MeshKind::Uniform);
        assert_eq!((m.study.nu, m.study.delta, m.study.n0), (100.0, 0.5, 2));
        assert_eq!(m.study.max_steps, 5);
        assert_eq!(m.study.decomposition, DecompositionSpec::FourSquare);
        let m = resolve(&args(&["--mode", "adaptive", "--nu", "10", "--delta", "0.5"])).unwrap();
        assert_eq!((m.study.mode, m.study.nu, m.study.max_steps), (MeshKind::Adaptive, 10.0, 14));
    }

    #[test]
    fn rejections() {
        let e = resolve(&args(&["--delta", "0"])).unwrap_err().to_string();
        assert!(e.contains("delta"), "{e}");
        let e = resolve(&args(&["--nu", "-1"])).unwrap_err().to_string();
        assert!(e.contains("nu"), "{e}");
        assert!(Args::try_parse_from(["nitsche-bem", "--bogus", "1"]).is_err());
        assert!(resolve(&args(&["--decomposition", "hexagon"])).is_err());
    }

    #[test]
    fn config_file_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "# study\nmode = adaptive\nnu = 10\nmax_steps = 3 # short\ndump-mesh = 0,2\n").unwrap();
        let m = resolve(&args(&["--config", cfg.to_str().unwrap(), "--nu", "50"])).unwrap();
        assert_eq!(m.study.mode, MeshKind::Adaptive);
        assert_eq!(m.study.nu, 50.0);
        assert_eq!(m.study.max_steps, 3);
        assert_eq!(m.study.snapshot_steps, vec![0, 2]);
        std::fs::write(&cfg, "colour = red\n").unwrap();
        assert!(resolve(&args(&["--config", cfg.to_str().unwrap()])).is_err());
    }

    #[test]
    fn slope_fit() {
        let recs: Vec<ConvergenceRecord> = [16usize, 64, 256]
            .iter()
            .enumerate()
            .map(|(k, &n)| ConvergenceRecord {
                step: k,
                kind: MeshKind::Uniform,
                n,
                n_fine: 4 * n,
                energy: 0.0,
                error1: 0.0,
                error2: 0.0,
                estim1: 0.0,
                estim2: 0.0,
                theta: 2.0 * (n as f64).powf(-0.25),
                total_error: (n as f64).powf(-0.5),
                nu: 1.0,
            })
            .collect();
        assert!((loglog_slope(&recs, 3, |r| r.theta).unwrap() + 0.25).abs() < 1e-12);
        assert!((loglog_slope(&recs, 3, |r| r.total_error).unwrap() + 0.5).abs() < 1e-12);
        assert!(loglog_slope(&recs[..2], 3, |r| r.theta).is_none());
    }

    #[test]
    fn adaptive_run_with_huge_tol_writes_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run.csv");
        let m = resolve(&args(&[
            "--mode",
            "adaptive",
            "--tol",
            "1e9",
            "--reference-energy",
            "0.45",
            "--dump-mesh",
            "0",
            "--out",
            out.to_str().unwrap(),
        ]))
        .unwrap();
        execute(&m).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(dir.path().join("run_mesh_step0.txt").exists());
        let summary = std::fs::read_to_string(dir.path().join("run_summary.txt")).unwrap();
        assert!(summary.contains("tol = 1000000000"));
    }

    #[test]
    fn empty_history_creates_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("none.csv");
        assert!(write_csv(&[], &out).is_err());
        assert!(!out.exists());
    }
}
