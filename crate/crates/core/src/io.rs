//! CSV emission and ingestion for every file format the tool produces.
//!
//! All floats are printed with 17 significant digits (`{:.16e}`), enough for
//! an `f64` to round-trip exactly, so determinism can be checked byte-wise.
//! Each writer has a matching reader and every format is documented here:
//!
//! * field snapshot: header `x,re,im`, one row per node in node order;
//! * diagnostics: header `t,mass,momentum,kinetic,potential,energy,lagrangian`,
//!   one row per recorded time;
//! * smoothing ensemble: header
//!   `member_id,family,A,w,k0,x0,lhs,grad_norm_sq,ratio,poincare_lhs,poincare_rhs`,
//!   one row per member in member order (shape columns are `NaN` where a
//!   family has no such parameter);
//! * variational: header `t,xcm,eq32_lhs,eq32_rhs`, one row per interior
//!   record (the second time difference is undefined at the endpoints).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::analysis::{MemberRecord, VariationalReport};
use crate::conservation::ConservedQuantities;
use crate::error::{Error, Result};
use crate::field::ComplexField1D;
use crate::grid::Grid1D;

/// 17 significant digits: exact `f64` round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const FIELD_HEADER: &str = "x,re,im";
pub const DIAGNOSTICS_HEADER: &str = "t,mass,momentum,kinetic,potential,energy,lagrangian";
pub const ENSEMBLE_HEADER: &str =
    "member_id,family,A,w,k0,x0,lhs,grad_norm_sq,ratio,poincare_lhs,poincare_rhs";
pub const VARIATIONAL_HEADER: &str = "t,xcm,eq32_lhs,eq32_rhs";
pub const CONVERGENCE_HEADER: &str = "level,dt,error,ratio";

pub fn write_field_csv<W: Write>(mut w: W, field: &ComplexField1D<f64>) -> Result<()> {
    writeln!(w, "{FIELD_HEADER}")?;
    for (&x, z) in field.grid().nodes().iter().zip(field.samples()) {
        writeln!(w, "{},{},{}", fmt_f64(x), fmt_f64(z.re), fmt_f64(z.im))?;
    }
    Ok(())
}

pub fn write_field_csv_file(path: &Path, field: &ComplexField1D<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_csv(&mut w, field)?;
    w.flush()?;
    Ok(())
}

/// Raw rows of a field snapshot: positions and complex samples.
pub fn read_field_csv(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut xs = Vec::new();
    let mut samples = Vec::new();
    for (lineno, fields) in CsvLines::open(path, FIELD_HEADER)? {
        let [x, re, im] = parse_floats::<3>(path, lineno, &fields)?;
        xs.push(x);
        samples.push(Complex64::new(re, im));
    }
    Ok((xs, samples))
}

/// Load a snapshot onto an existing grid; the node column must match the
/// grid nodes to within `1e-9 * dx` and the sample count must be exact.
pub fn field_from_csv(grid: &Grid1D<f64>, path: &Path) -> Result<ComplexField1D<f64>> {
    let (xs, samples) = read_field_csv(path)?;
    if xs.len() != grid.n() {
        return Err(Error::SampleCount {
            expected: grid.n(),
            got: xs.len(),
        });
    }
    let tol = grid.dx() * 1e-9;
    for (i, (&x, &node)) in xs.iter().zip(grid.nodes()).enumerate() {
        if (x - node).abs() > tol {
            return Err(Error::Malformed {
                path: path.display().to_string(),
                line: i + 2,
                msg: format!("node {i} is {x}, grid expects {node}"),
            });
        }
    }
    ComplexField1D::new(grid.clone(), samples)
}

pub fn write_diagnostics_csv<W: Write>(
    mut w: W,
    series: &[ConservedQuantities<f64>],
) -> Result<()> {
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for q in series {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_f64(q.t),
            fmt_f64(q.mass),
            fmt_f64(q.momentum),
            fmt_f64(q.kinetic),
            fmt_f64(q.potential),
            fmt_f64(q.energy),
            fmt_f64(q.lagrangian)
        )?;
    }
    Ok(())
}

pub fn write_diagnostics_csv_file(
    path: &Path,
    series: &[ConservedQuantities<f64>],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_diagnostics_csv(&mut w, series)?;
    w.flush()?;
    Ok(())
}

pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<ConservedQuantities<f64>>> {
    let mut rows = Vec::new();
    for (lineno, fields) in CsvLines::open(path, DIAGNOSTICS_HEADER)? {
        let [t, mass, momentum, kinetic, potential, energy, lagrangian] =
            parse_floats::<7>(path, lineno, &fields)?;
        rows.push(ConservedQuantities {
            t,
            mass,
            momentum,
            kinetic,
            potential,
            energy,
            lagrangian,
        });
    }
    Ok(rows)
}

pub fn write_ensemble_csv<W: Write>(mut w: W, members: &[MemberRecord<f64>]) -> Result<()> {
    writeln!(w, "{ENSEMBLE_HEADER}")?;
    for m in members {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            m.member_id,
            m.family,
            fmt_f64(m.a),
            fmt_f64(m.w),
            fmt_f64(m.k0),
            fmt_f64(m.x0),
            fmt_f64(m.lhs),
            fmt_f64(m.grad_norm_sq),
            fmt_f64(m.ratio),
            fmt_f64(m.poincare_lhs),
            fmt_f64(m.poincare_rhs)
        )?;
    }
    Ok(())
}

pub fn write_ensemble_csv_file(path: &Path, members: &[MemberRecord<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ensemble_csv(&mut w, members)?;
    w.flush()?;
    Ok(())
}

/// One parsed row of the ensemble table.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRow {
    pub member_id: usize,
    pub family: String,
    pub a: f64,
    pub w: f64,
    pub k0: f64,
    pub x0: f64,
    pub lhs: f64,
    pub grad_norm_sq: f64,
    pub ratio: f64,
    pub poincare_lhs: f64,
    pub poincare_rhs: f64,
}

pub fn read_ensemble_csv(path: &Path) -> Result<Vec<EnsembleRow>> {
    let mut rows = Vec::new();
    for (lineno, fields) in CsvLines::open(path, ENSEMBLE_HEADER)? {
        if fields.len() != 11 {
            return Err(Error::Malformed {
                path: path.display().to_string(),
                line: lineno,
                msg: format!("expected 11 fields, found {}", fields.len()),
            });
        }
        let member_id = fields[0].parse::<usize>().map_err(|e| Error::Malformed {
            path: path.display().to_string(),
            line: lineno,
            msg: format!("member_id: {e}"),
        })?;
        let family = fields[1].to_string();
        let [a, w, k0, x0, lhs, grad_norm_sq, ratio, poincare_lhs, poincare_rhs] =
            parse_floats::<9>(path, lineno, &fields[2..])?;
        rows.push(EnsembleRow {
            member_id,
            family,
            a,
            w,
            k0,
            x0,
            lhs,
            grad_norm_sq,
            ratio,
            poincare_lhs,
            poincare_rhs,
        });
    }
    Ok(rows)
}

pub fn write_variational_csv<W: Write>(
    mut w: W,
    report: &VariationalReport<f64>,
) -> Result<()> {
    writeln!(w, "{VARIATIONAL_HEADER}")?;
    // interior records: xcm[1..len-1] pairs with the eq32 sequences
    for (i, (&lhs, &rhs)) in report.eq32_lhs.iter().zip(&report.eq32_rhs).enumerate() {
        let (t, x) = report.xcm[i + 1];
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(t),
            fmt_f64(x),
            fmt_f64(lhs),
            fmt_f64(rhs)
        )?;
    }
    Ok(())
}

pub fn write_variational_csv_file(path: &Path, report: &VariationalReport<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_variational_csv(&mut w, report)?;
    w.flush()?;
    Ok(())
}

/// Rows `(t, xcm, eq32_lhs, eq32_rhs)`.
pub fn read_variational_csv(path: &Path) -> Result<Vec<[f64; 4]>> {
    let mut rows = Vec::new();
    for (lineno, fields) in CsvLines::open(path, VARIATIONAL_HEADER)? {
        rows.push(parse_floats::<4>(path, lineno, &fields)?);
    }
    Ok(rows)
}

/// One level of a dt-refinement study; `ratio` is `NaN` on the first level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub level: u32,
    pub dt: f64,
    pub error: f64,
    pub ratio: f64,
}

pub fn write_convergence_csv<W: Write>(mut w: W, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.level,
            fmt_f64(r.dt),
            fmt_f64(r.error),
            fmt_f64(r.ratio)
        )?;
    }
    Ok(())
}

pub fn write_convergence_csv_file(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_convergence_csv(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

pub fn read_convergence_csv(path: &Path) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for (lineno, fields) in CsvLines::open(path, CONVERGENCE_HEADER)? {
        if fields.len() != 4 {
            return Err(Error::Malformed {
                path: path.display().to_string(),
                line: lineno,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let level = fields[0].parse::<u32>().map_err(|e| Error::Malformed {
            path: path.display().to_string(),
            line: lineno,
            msg: format!("level: {e}"),
        })?;
        let [dt, error, ratio] = parse_floats::<3>(path, lineno, &fields[1..])?;
        rows.push(ConvergenceRow {
            level,
            dt,
            error,
            ratio,
        });
    }
    Ok(rows)
}

/// Line iterator that validates the header and splits on commas. These files
/// never contain quoted fields, so plain splitting is exact.
struct CsvLines {
    lines: std::iter::Enumerate<std::io::Lines<BufReader<File>>>,
}

impl CsvLines {
    fn open(path: &Path, expected_header: &str) -> Result<Self> {
        let mut lines = BufReader::new(File::open(path)?).lines().enumerate();
        match lines.next() {
            Some((_, Ok(header))) if header == expected_header => {}
            Some((_, Ok(header))) => {
                return Err(Error::Malformed {
                    path: path.display().to_string(),
                    line: 1,
                    msg: format!("header {header:?}, expected {expected_header:?}"),
                })
            }
            Some((_, Err(e))) => return Err(e.into()),
            None => {
                return Err(Error::Malformed {
                    path: path.display().to_string(),
                    line: 1,
                    msg: "empty file".into(),
                })
            }
        }
        Ok(Self { lines })
    }
}

impl Iterator for CsvLines {
    type Item = (usize, Vec<String>);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let (idx, line) = self.lines.next()?;
            let line = match line {
                Ok(l) => l,
                Err(_) => return None,
            };
            if line.is_empty() {
                continue;
            }
            return Some((idx + 1, line.split(',').map(str::to_string).collect()));
        }
    }
}

fn parse_floats<const N: usize>(
    path: &Path,
    lineno: usize,
    fields: &[String],
) -> Result<[f64; N]> {
    if fields.len() != N {
        return Err(Error::Malformed {
            path: path.display().to_string(),
            line: lineno,
            msg: format!("expected {N} fields, found {}", fields.len()),
        });
    }
    let mut out = [0.0; N];
    for (slot, field) in out.iter_mut().zip(fields) {
        *slot = field.parse::<f64>().map_err(|e| Error::Malformed {
            path: path.display().to_string(),
            line: lineno,
            msg: format!("{field:?}: {e}"),
        })?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::gaussian_packet;

    #[test]
    fn field_snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        let grid = Grid1D::new(128, 40.0).unwrap();
        let field = gaussian_packet(1.3, 0.5, 2.0, 2.0, &grid).unwrap();
        write_field_csv_file(&path, &field).unwrap();
        let back = field_from_csv(&grid, &path).unwrap();
        assert_eq!(back.samples(), field.samples());
    }

    #[test]
    fn field_reader_rejects_mismatched_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        let grid = Grid1D::new(128, 40.0).unwrap();
        let field = gaussian_packet(1.0, 0.0, 0.0, 2.0, &grid).unwrap();
        write_field_csv_file(&path, &field).unwrap();
        let other = Grid1D::new(256, 40.0).unwrap();
        assert!(matches!(
            field_from_csv(&other, &path),
            Err(Error::SampleCount { .. })
        ));
        let shifted = Grid1D::new(128, 41.0).unwrap();
        assert!(matches!(
            field_from_csv(&shifted, &path),
            Err(Error::Malformed { .. })
        ));
    }

    #[test]
    fn diagnostics_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("diag.csv");
        let series = vec![
            ConservedQuantities {
                t: 0.0,
                mass: std::f64::consts::PI,
                momentum: -1.0 / 3.0,
                kinetic: 1.2345678901234567e-7,
                potential: 2.0,
                energy: -2.0 / 3.0,
                lagrangian: 0.1,
            },
            ConservedQuantities {
                t: 1e-3,
                mass: std::f64::consts::PI,
                momentum: -1.0 / 3.0 + 1e-16,
                kinetic: 0.0,
                potential: f64::MIN_POSITIVE,
                energy: 1e300,
                lagrangian: -0.0,
            },
        ];
        write_diagnostics_csv_file(&path, &series).unwrap();
        let back = read_diagnostics_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in series.iter().zip(&back) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            assert_eq!(a.mass.to_bits(), b.mass.to_bits());
            assert_eq!(a.momentum.to_bits(), b.momentum.to_bits());
            assert_eq!(a.kinetic.to_bits(), b.kinetic.to_bits());
            assert_eq!(a.potential.to_bits(), b.potential.to_bits());
            assert_eq!(a.energy.to_bits(), b.energy.to_bits());
            assert_eq!(a.lagrangian.to_bits(), b.lagrangian.to_bits());
        }
    }

    #[test]
    fn ensemble_round_trip_with_nan_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ensemble.csv");
        let members = vec![MemberRecord {
            member_id: 0,
            family: "random_bandlimited",
            a: 1.5,
            w: f64::NAN,
            k0: f64::NAN,
            x0: f64::NAN,
            lhs: 0.25,
            grad_norm_sq: 3.0,
            ratio: 0.25 / 3.0,
            poincare_lhs: 1.0,
            poincare_rhs: 2.0,
        }];
        write_ensemble_csv_file(&path, &members).unwrap();
        let rows = read_ensemble_csv(&path).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].family, "random_bandlimited");
        assert!(rows[0].w.is_nan());
        assert_eq!(rows[0].ratio.to_bits(), (0.25f64 / 3.0).to_bits());
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "t,mass,momentum,kinetic,potential,energy,lagrangian\n1,2,3\n")
            .unwrap();
        match read_diagnostics_csv(&path) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed error, got {other:?}"),
        }
        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(matches!(
            read_diagnostics_csv(&path),
            Err(Error::Malformed { line: 1, .. })
        ));
    }
}
