//! Bit-stable artifacts: CSV spectra, JSON reports, and a transactional
//! output session that removes partial files on failure.
//!
//! Floats are emitted in shortest round-trip form ({:?}), so re-reading a
//! file reproduces every value exactly and identical runs produce
//! byte-identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use double_fano::params::{FieldParams, SystemParams};
use double_fano::response::Method;
use double_fano::susceptibility::{DetuningGrid, GridError, Spectrum, SusceptibilityPoint};

pub const SPECTRUM_HEADER: &str = "omega_over_gamma,re_chi,im_chi";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("I/O failure on `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("CSV parse error at line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("JSON serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn io_err(path: &Path, e: std::io::Error) -> OutputError {
    OutputError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Renders a spectrum as CSV: header, one row per grid point in grid
/// order, detunings in Gamma units, newline-terminated.
pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::with_capacity(48 * (s.points.len() + 1));
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for (x, pt) in s.grid.omega_over_gamma.iter().zip(&s.points) {
        out.push_str(&format!("{:?},{:?},{:?}\n", x, pt.chi.re, pt.chi.im));
    }
    out
}

/// Parses spectrum CSV rows back into (omega_over_gamma, re, im) triples;
/// exact inverse of `spectrum_csv`.
pub fn parse_spectrum_csv(text: &str) -> Result<Vec<(f64, f64, f64)>, OutputError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == SPECTRUM_HEADER => {}
        Some((_, header)) => {
            return Err(OutputError::Csv {
                line: 1,
                message: format!("expected header `{SPECTRUM_HEADER}`, got `{header}`"),
            })
        }
        None => {
            return Err(OutputError::Csv {
                line: 1,
                message: String::from("empty document"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let mut fields = line.split(',');
        let mut next = |what: &str| -> Result<f64, OutputError> {
            let field = fields.next().ok_or_else(|| OutputError::Csv {
                line: i + 1,
                message: format!("missing {what}"),
            })?;
            field.parse::<f64>().map_err(|e| OutputError::Csv {
                line: i + 1,
                message: format!("bad {what} `{field}`: {e}"),
            })
        };
        let row = (next("omega_over_gamma")?, next("re_chi")?, next("im_chi")?);
        if let Some(extra) = fields.next() {
            return Err(OutputError::Csv {
                line: i + 1,
                message: format!("unexpected trailing field `{extra}`"),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Rebuilds an analyzable spectrum from parsed CSV rows. The CSV stores no
/// parameter metadata, so the caller supplies the records to attach.
pub fn spectrum_from_rows(
    gamma: f64,
    rows: &[(f64, f64, f64)],
    system: SystemParams,
    field: FieldParams,
) -> Result<Spectrum, OutputError> {
    let grid = DetuningGrid::new(gamma, rows.iter().map(|r| r.0).collect(), 0.0)?;
    let points = rows
        .iter()
        .zip(&grid.omega_values)
        .map(|(&(_, re, im), &omega)| SusceptibilityPoint {
            omega,
            chi: Complex64::new(re, im),
            method: Method::Analytic,
        })
        .collect();
    Ok(Spectrum {
        system,
        field,
        grid,
        points,
    })
}

/// Pretty JSON with a trailing newline; floats survive a round trip
/// exactly.
pub fn json_string<T: Serialize>(value: &T) -> Result<String, OutputError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Collects files written during one run; unless `commit` is called, every
/// file the session created is removed again on drop, so failed runs leave
/// no partial outputs behind.
pub struct OutputSession {
    dir: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputSession {
    pub fn new(dir: &Path) -> Result<Self, OutputError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(OutputSession {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, OutputError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputSession {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.written {
                let _ = fs::remove_file(path);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use double_fano::susceptibility::chi_at;

    fn two_point_spectrum() -> Spectrum {
        let system = SystemParams::default();
        let field = FieldParams::default();
        let grid = DetuningGrid::new(1e-9, vec![-0.7, 1.3], 0.0).unwrap();
        let points = grid
            .omega_values
            .iter()
            .map(|&w| chi_at(w, &system, &field).unwrap())
            .collect();
        Spectrum {
            system,
            field,
            grid,
            points,
        }
    }

    #[test]
    fn two_point_spectrum_is_three_lines() {
        let csv = spectrum_csv(&two_point_spectrum());
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("omega_over_gamma,re_chi,im_chi\n"));
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = two_point_spectrum();
        let rows = parse_spectrum_csv(&spectrum_csv(&s)).unwrap();
        assert_eq!(rows.len(), s.points.len());
        for ((x, re, im), (over, pt)) in rows
            .iter()
            .zip(s.grid.omega_over_gamma.iter().zip(&s.points))
        {
            assert_eq!(x.to_bits(), over.to_bits());
            assert_eq!(re.to_bits(), pt.chi.re.to_bits());
            assert_eq!(im.to_bits(), pt.chi.im.to_bits());
        }
        // And the rebuilt spectrum serializes to identical bytes.
        let rebuilt = spectrum_from_rows(1e-9, &rows, s.system, s.field).unwrap();
        assert_eq!(spectrum_csv(&rebuilt), spectrum_csv(&s));
    }

    #[test]
    fn header_is_checked() {
        let err = parse_spectrum_csv("omega,re,im\n1,2,3\n").unwrap_err();
        assert!(err.to_string().contains("expected header"));
    }

    #[test]
    fn session_removes_files_without_commit() {
        let dir = tempfile::tempdir().unwrap();
        let kept = {
            let mut session = OutputSession::new(dir.path()).unwrap();
            let kept = session.write("kept.txt", "x\n").unwrap();
            session.commit();
            kept
        };
        assert!(kept.exists());

        let removed = {
            let mut session = OutputSession::new(dir.path()).unwrap();
            session.write("removed.txt", "x\n").unwrap()
        };
        assert!(!removed.exists());
    }
}
