//! File formats: design CSV, per-replicate CSV, JSON documents, atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{invalid, DesignError, Result};
use crate::loss::RepValue;
use crate::model::Design;

/// Version stamped into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// Shortest decimal that parses back to the same f64. Exponent notation only for
/// very small or very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if (a > 0.0 && a < 1e-5) || a >= 1e16 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Write to a temporary file in the target directory, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| DesignError::Io(e.error))?;
    Ok(())
}

/// `prefix` + `.ext`, keeping any directories in the prefix.
pub fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn design_csv(design: &Design) -> Result<String> {
    let k = design.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record((1..=k).map(|j| format!("x{j}")))?;
    for p in &design.points {
        w.write_record(p.iter().map(|v| fmt_f64(*v)))?;
    }
    finish(w)
}

pub fn read_design_csv(path: &Path, seed: u64, strategy: &str) -> Result<Design> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let k = header.len();
    for (j, h) in header.iter().enumerate() {
        if h.trim() != format!("x{}", j + 1) {
            return Err(invalid(format!("design header must be x1,...,xk; column {} is {h:?}", j + 1)));
        }
    }
    let mut pts = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let p = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("row {}: {s:?} is not a number", row + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if p.len() != k {
            return Err(DesignError::DimensionMismatch { expected: k, got: p.len() });
        }
        pts.push(p);
    }
    if pts.is_empty() {
        return Err(invalid("design file has no points"));
    }
    Ok(Design::new(pts, seed, strategy))
}

pub fn reps_csv(values: &[RepValue]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rep", "j_nu", "variance_term", "gamma"])?;
    for v in values {
        w.write_record([v.rep.to_string(), fmt_f64(v.j_nu), fmt_f64(v.variance_term), fmt_f64(v.gamma)])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| DesignError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(-2.0), "-2");
        assert_eq!(fmt_f64(3e-7), "3e-7");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(1e20), "1e20");
    }

    proptest! {
        #[test]
        fn formatting_reparses_exactly(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn atomic_design_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let d = Design::new(vec![vec![0.1, -1.0 / 3.0], vec![2e-9, 0.7]], 0, "test");
        write_atomic(&path, design_csv(&d).unwrap().as_bytes()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x1,x2\n"));
        let back = read_design_csv(&path, 0, "test").unwrap();
        assert_eq!(back.points, d.points);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_design_csv(&path, 0, "t"), Err(DesignError::InvalidParameter(_))));
    }
}
