//! Kernel JSON (`{"boundaries":[...], "values":[[...]]}`) and adjacency CSV.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Partition, StepFunction, StepKernel};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct KernelFile {
    boundaries: Vec<f64>,
    values: Vec<Vec<f64>>,
}

pub fn function_to_json(f: &StepFunction) -> String {
    let file = KernelFile { boundaries: f.partition().boundaries().to_vec(), values: f.rows() };
    serde_json::to_string(&file).expect("kernel serializes")
}

pub fn kernel_to_json(w: &StepKernel) -> String {
    function_to_json(w)
}

pub fn function_from_json(s: &str) -> Result<StepFunction> {
    let file: KernelFile = serde_json::from_str(s)?;
    StepFunction::new(Partition::new(file.boundaries)?, file.values)
}

pub fn kernel_from_json(s: &str) -> Result<StepKernel> {
    function_from_json(s)?.try_into()
}

pub fn read_kernel(path: impl AsRef<Path>) -> Result<StepKernel> {
    kernel_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_kernel(path: impl AsRef<Path>, w: &StepKernel) -> Result<()> {
    std::fs::write(path, kernel_to_json(w) + "\n")?;
    Ok(())
}

/// Adjacency CSV: first line `n`, then `n` comma-separated rows.
pub fn adjacency_to_csv(a: &DMatrix<f64>) -> String {
    let n = a.nrows();
    let mut out = format!("{n}\n");
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", a[(i, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn adjacency_from_csv(s: &str) -> Result<DMatrix<f64>> {
    let mut lines = s.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::Parse("empty adjacency file".into()))?
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad size header: {e}")))?;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {i}")))?;
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != n {
            return Err(Error::Parse(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, v) in row.into_iter().enumerate() {
            a[(i, j)] = v.trim().parse().map_err(|e| Error::Parse(format!("entry ({i},{j}): {e}")))?;
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_the_documented_schema() {
        let w = kernel_from_json(r#"{"boundaries":[0.5,1.0],"values":[[2,0],[0,0]]}"#).unwrap();
        assert_eq!(w.degree_function(), vec![1.0, 0.0]);
        assert!(kernel_from_json(r#"{"boundaries":[0.5,1.0],"values":[[2,1],[0,0]]}"#).is_err());
        assert!(kernel_from_json(r#"{"boundaries":[1.0],"values":[[-1]]}"#).is_err());
    }

    #[test]
    fn adjacency_round_trip() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.5, 0.0, 1.5, 0.0, 0.25, 0.0, 0.25, 0.0]);
        assert_eq!(adjacency_from_csv(&adjacency_to_csv(&a)).unwrap(), a);
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(k in 1usize..6, seed in any::<u64>(), uniform in any::<bool>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let partition = if uniform {
                Partition::uniform(k)
            } else {
                let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.gen::<f64>()).collect();
                cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                cuts.dedup();
                cuts.retain(|&c| c > 0.0);
                cuts.push(1.0);
                Partition::new(cuts).unwrap()
            };
            let kk = partition.len();
            let mut rows = vec![vec![0.0; kk]; kk];
            for i in 0..kk {
                for j in 0..=i {
                    let v = rng.gen::<f64>() * 7.0;
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let w = StepKernel::new(partition, rows).unwrap();
            let back = kernel_from_json(&kernel_to_json(&w)).unwrap();
            prop_assert_eq!(back, w);
        }
    }
}
