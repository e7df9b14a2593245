//! CSV formats for measures, samples and tables.
//!
//! Measures: `x,weight` (atoms), `x,density,cdf` (grid) or `eigenvalue`
//! (uniform atoms). Samples: `i,j,value` triplets for `i < j`.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measure::ProbMeasure1D;

pub fn measure_to_csv(mu: &ProbMeasure1D) -> String {
    let mut out = String::new();
    match mu {
        ProbMeasure1D::Atoms { values, weights } => {
            out.push_str("x,weight\n");
            for (v, w) in values.iter().zip(weights) {
                writeln!(out, "{v},{w}").unwrap();
            }
        }
        ProbMeasure1D::Grid { x, density, cdf } => {
            out.push_str("x,density,cdf\n");
            for i in 0..x.len() {
                writeln!(out, "{},{},{}", x[i], density[i], cdf[i]).unwrap();
            }
        }
    }
    out
}

pub fn eigenvalues_to_csv(ev: &[f64]) -> String {
    let mut out = String::from("eigenvalue\n");
    for v in ev {
        writeln!(out, "{v}").unwrap();
    }
    out
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|e| Error::Parse(format!("line {line}: {e}")))
}

fn columns(s: &str, expected: usize) -> Result<Vec<Vec<f64>>> {
    let mut cols = vec![Vec::new(); expected];
    for (n, line) in s.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(Error::Parse(format!("line {}: expected {expected} fields", n + 1)));
        }
        for (c, f) in cols.iter_mut().zip(fields) {
            c.push(parse_f64(f, n + 1)?);
        }
    }
    Ok(cols)
}

/// Reads any of the three measure layouts, chosen by the header line.
pub fn measure_from_csv(s: &str) -> Result<ProbMeasure1D> {
    let header = s.lines().next().ok_or_else(|| Error::Parse("empty measure file".into()))?.trim();
    match header {
        "eigenvalue" => ProbMeasure1D::uniform_atoms(columns(s, 1)?.remove(0)),
        "x,weight" => {
            let mut c = columns(s, 2)?;
            let w = c.pop().unwrap();
            ProbMeasure1D::atoms(c.pop().unwrap(), w)
        }
        "x,density,cdf" => {
            let mut c = columns(s, 3)?;
            let cdf = c.pop().unwrap();
            let density = c.pop().unwrap();
            ProbMeasure1D::from_grid_parts(c.pop().unwrap(), density, cdf)
        }
        other => Err(Error::Parse(format!("unknown measure header {other:?}"))),
    }
}

/// Upper-triangle nonzero entries of a symmetric matrix.
pub fn triplets_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::from("i,j,value\n");
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{i},{j},{v}").unwrap();
            }
        }
    }
    out
}

/// Symmetric `n x n` matrix from upper-triangle triplets.
pub fn triplets_from_csv(s: &str, n: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(n, n);
    for (line_no, line) in s.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected i,j,value", line_no + 1)));
        }
        let idx = |s: &str| -> Result<usize> {
            s.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", line_no + 1)))
        };
        let (i, j) = (idx(f[0])?, idx(f[1])?);
        if i >= n || j >= n {
            return Err(Error::Parse(format!("line {}: index out of range for n = {n}", line_no + 1)));
        }
        let v = parse_f64(f[2], line_no + 1)?;
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(m)
}

/// Two-column CSV with the given header.
pub fn table_to_csv<A: std::fmt::Display, B: std::fmt::Display>(header: &str, rows: &[(A, B)]) -> String {
    let mut out = format!("{header}\n");
    for (a, b) in rows {
        writeln!(out, "{a},{b}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_round_trips() {
        let atoms = ProbMeasure1D::atoms(vec![-0.5, 1.25], vec![0.25, 0.75]).unwrap();
        assert_eq!(measure_from_csv(&measure_to_csv(&atoms)).unwrap(), atoms);
        let grid = ProbMeasure1D::from_density(vec![0.0, 0.5, 1.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(measure_from_csv(&measure_to_csv(&grid)).unwrap(), grid);
        let ev = measure_from_csv(&eigenvalues_to_csv(&[2.0, -1.0])).unwrap();
        assert_eq!(ev.breakpoints(), &[-1.0, 2.0]);
        assert!(measure_from_csv("t,u\n1,2\n").is_err());
    }

    #[test]
    fn triplets_round_trip() {
        let m = DMatrix::from_row_slice(3, 3, &[0.5, -1.0, 0.0, -1.0, 0.0, 0.125, 0.0, 0.125, 0.0]);
        let csv = triplets_to_csv(&m);
        assert_eq!(csv, "i,j,value\n0,0,0.5\n0,1,-1\n1,2,0.125\n");
        assert_eq!(triplets_from_csv(&csv, 3).unwrap(), m);
        assert!(triplets_from_csv(&csv, 2).is_err());
    }
}
