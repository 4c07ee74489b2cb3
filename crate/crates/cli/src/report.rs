//! Tidy CSV reports, written atomically.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// Overall outcome of a command, mapped to the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Inconclusive => 2,
            Outcome::Fail => 3,
        }
    }

    /// The weaker of two outcomes (`Fail` beats `Inconclusive` beats `Pass`).
    pub fn and(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Fail, _) | (_, Outcome::Fail) => Outcome::Fail,
            (Outcome::Inconclusive, _) | (_, Outcome::Inconclusive) => Outcome::Inconclusive,
            _ => Outcome::Pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub outcome: Outcome,
}

impl Report {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it over
/// `path`, so readers never observe a partial report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x}")
    }
}

/// Space-separated coordinates.
pub fn vec(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn opt_vec(v: Option<&[f64]>) -> String {
    v.map(vec).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(vec(&[1.0, -2.5]), "1 -2.5");
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn outcome_combination() {
        assert_eq!(Outcome::Pass.and(Outcome::Inconclusive), Outcome::Inconclusive);
        assert_eq!(Outcome::Inconclusive.and(Outcome::Fail), Outcome::Fail);
        assert_eq!(Outcome::Pass.and(Outcome::Pass), Outcome::Pass);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"a\n").unwrap();
        write_atomic(&p, b"b\n").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
