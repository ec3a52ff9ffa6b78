//! Convergence history rows and their CSV form.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "step,kind,N,energy,error1,error2,estim1,estim2,theta,total_error";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Uniform,
    Adaptive,
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshKind::Uniform => "uniform",
            MeshKind::Adaptive => "adaptive",
        })
    }
}

impl FromStr for MeshKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(MeshKind::Uniform),
            "adaptive" => Ok(MeshKind::Adaptive),
            _ => Err(Error::Parse(format!("unknown mesh kind '{s}'"))),
        }
    }
}

/// One step of a study.
///
/// `estim2` is `sqrt(nu) Theta_2`, on the same scale as `error2 = sqrt(nu) ||[u_h]||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub step: usize,
    pub kind: MeshKind,
    pub n: usize,
    pub n_fine: usize,
    pub energy: f64,
    pub error1: f64,
    pub error2: f64,
    pub estim1: f64,
    pub estim2: f64,
    pub theta: f64,
    pub total_error: f64,
    pub nu: f64,
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the header and one line per record; floats carry 17 significant digits.
pub fn write_records<W: Write>(records: &[ConvergenceRecord], mut w: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to write".into()));
    }
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let vals = [r.energy, r.error1, r.error2, r.estim1, r.estim2, r.theta, r.total_error].map(float);
        writeln!(w, "{},{},{},{}", r.step, r.kind, r.n, vals.join(","))?;
    }
    Ok(())
}

/// Parse CSV text written by [`write_records`]; `n_fine` and `nu` are not stored and come back
/// as zero.
pub fn parse_records(text: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(Error::Parse(format!("expected 10 fields in '{line}'")));
            }
            let int = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("'{s}': {e}")));
            let num = |k: usize| f[k].parse::<f64>().map_err(|e| Error::Parse(format!("'{}': {e}", f[k])));
            Ok(ConvergenceRecord {
                step: int(f[0])?,
                kind: f[1].parse()?,
                n: int(f[2])?,
                n_fine: 0,
                energy: num(3)?,
                error1: num(4)?,
                error2: num(5)?,
                estim1: num(6)?,
                estim2: num(7)?,
                theta: num(8)?,
                total_error: num(9)?,
                nu: 0.0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: usize) -> ConvergenceRecord {
        ConvergenceRecord {
            step,
            kind: MeshKind::Adaptive,
            n: 16 * (step + 1),
            n_fine: 0,
            energy: 0.1 + 1.0 / 3.0 * step as f64,
            error1: std::f64::consts::PI * 1e-5,
            error2: 2f64.sqrt(),
            estim1: 1e-300,
            estim2: 0.0,
            theta: 123456789.123456789,
            total_error: f64::MIN_POSITIVE,
            nu: 0.0,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let recs: Vec<_> = (0..4).map(record).collect();
        let mut buf = Vec::new();
        write_records(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "step,kind,N,energy,error1,error2,estim1,estim2,theta,total_error");
        assert_eq!(parse_records(&text).unwrap(), recs);
    }

    #[test]
    fn empty_history_is_an_error() {
        let mut buf = Vec::new();
        assert!(write_records(&[], &mut buf).is_err());
        assert!(buf.is_empty());
    }
}
