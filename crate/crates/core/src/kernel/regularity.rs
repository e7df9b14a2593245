//! Upper regularity checks and a weak-regularity refinement loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cut::{cut_norm, CutNormMode, EXACT_CUT_NORM_MAX_PARTS};
use super::StepKernel;
use crate::error::{Error, Result};

/// A threshold function `K(ε)` sampled at increasing `ε`, linearly
/// interpolated in between and clamped outside.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    eps: Vec<f64>,
    thresholds: Vec<f64>,
}

impl ThresholdTable {
    pub fn new(eps: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        if eps.is_empty() || eps.len() != thresholds.len() {
            return Err(Error::DomainError("threshold table needs matching nonempty columns".into()));
        }
        if eps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::DomainError("threshold table eps must be increasing".into()));
        }
        Ok(ThresholdTable { eps, thresholds })
    }

    pub fn constant(k: f64) -> Self {
        ThresholdTable { eps: vec![0.0], thresholds: vec![k] }
    }

    pub fn from_fn(eps: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(eps.to_vec(), eps.iter().map(|&e| f(e)).collect())
    }

    pub fn eval(&self, e: f64) -> f64 {
        let n = self.eps.len();
        if e <= self.eps[0] {
            return self.thresholds[0];
        }
        if e >= self.eps[n - 1] {
            return self.thresholds[n - 1];
        }
        let i = self.eps.partition_point(|&x| x <= e);
        let (x0, x1) = (self.eps[i - 1], self.eps[i]);
        let t = (e - x0) / (x1 - x0);
        self.thresholds[i - 1] * (1.0 - t) + self.thresholds[i] * t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityViolation {
    pub eps: f64,
    pub threshold: f64,
    /// `‖W_P 1{W_P > K(ε)}‖_1`.
    pub excess_mass: f64,
    pub groups: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub passed: bool,
    /// True when the tested family does not exhaust all admissible partitions.
    pub partial: bool,
    pub partitions_tested: usize,
    pub violation: Option<RegularityViolation>,
}

const EXHAUSTIVE_MAX_PARTS: usize = 8;
const CONTIGUOUS_EXHAUSTIVE_MAX_PARTS: usize = 16;
const RANDOM_PARTITIONS: usize = 100;

/// All set partitions of `0..n` whose blocks have at least `min_size` elements.
fn set_partitions(n: usize, min_size: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, min_size: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            if cur.iter().all(|b| b.len() >= min_size) {
                out.push(cur.clone());
            }
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, n, min_size, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, n, min_size, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, n, min_size, &mut Vec::new(), &mut out);
    out
}

/// Contiguous block partitions of `0..n` with blocks of at least `min_size`.
fn contiguous_partitions(n: usize, min_size: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(start: usize, n: usize, min_size: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if start == n {
            out.push(cur.clone());
            return;
        }
        for end in (start + min_size)..=n {
            if n - end != 0 && n - end < min_size {
                continue;
            }
            cur.push((start..end).collect());
            rec(end, n, min_size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, min_size, &mut Vec::new(), &mut out);
    out
}

fn equal_width_partitions(n: usize, min_size: usize) -> Vec<Vec<Vec<usize>>> {
    let max_blocks = n / min_size;
    (1..=max_blocks).map(|b| (0..b).map(|g| ((g * n / b)..((g + 1) * n / b)).collect()).collect()).collect()
}

fn random_partition(n: usize, min_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let max_blocks = (n / min_size).max(1);
    let blocks = rng.gen_range(1..=max_blocks);
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    // deal min_size to each block, scatter the rest
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); blocks];
    for (idx, v) in order.into_iter().enumerate() {
        if idx < blocks * min_size {
            groups[idx / min_size].push(v);
        } else {
            let g = rng.gen_range(0..blocks);
            groups[g].push(v);
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// Checks `‖W_P 1{W_P > K(ε)}‖_1 ≤ ε` over a family of partitions of the
/// parts of an equal-measure kernel into groups of measure at least `eta`.
///
/// For at most 8 parts every set partition is tested. Otherwise the family is
/// 100 random partitions plus contiguous partitions (all of them up to 16
/// parts, equal-width ones beyond), and the report is flagged `partial`.
pub fn upper_regularity_check(
    w: &StepKernel,
    eta: f64,
    thresholds: &ThresholdTable,
    eps_list: &[f64],
    seed: u64,
) -> Result<RegularityReport> {
    if !w.partition().is_equal_measure() {
        return Err(Error::PartMeasureMismatch);
    }
    let n = w.parts();
    if eta * (n as f64) < 1.0 - 1e-12 || eta > 1.0 {
        return Err(Error::PreconditionViolated(format!("eta * n = {} must be at least 1", eta * n as f64)));
    }
    let min_size = ((eta * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let (family, partial) = if n <= EXHAUSTIVE_MAX_PARTS {
        (set_partitions(n, min_size), false)
    } else {
        let mut fam = if n <= CONTIGUOUS_EXHAUSTIVE_MAX_PARTS {
            contiguous_partitions(n, min_size)
        } else {
            equal_width_partitions(n, min_size)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        fam.extend((0..RANDOM_PARTITIONS).map(|_| random_partition(n, min_size, &mut rng)));
        (fam, true)
    };
    let lam = w.measures();
    let mut tested = 0;
    for groups in &family {
        tested += 1;
        let avg = w.average_over_groups(groups);
        for &e in eps_list {
            let threshold = thresholds.eval(e);
            let mut excess = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let v = avg.value(i, j);
                    if v > threshold {
                        excess += v * lam[i] * lam[j];
                    }
                }
            }
            if excess > e {
                return Ok(RegularityReport {
                    passed: false,
                    partial,
                    partitions_tested: tested,
                    violation: Some(RegularityViolation {
                        eps: e,
                        threshold,
                        excess_mass: excess,
                        groups: groups.clone(),
                    }),
                });
            }
        }
    }
    Ok(RegularityReport { passed: true, partial, partitions_tested: tested, violation: None })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakRegularity {
    /// Groups of parts of the input kernel.
    pub groups: Vec<Vec<usize>>,
    pub stepped: StepKernel,
    /// Cut norm of `W - W_P` at termination (a lower bound when computed heuristically).
    pub residual: f64,
    pub converged: bool,
}

/// Refines a grouping of the parts of `w` by cut-norm witnesses until
/// `‖W - W_P‖_□ ≤ eps` or the number of groups exceeds `max_groups`.
///
/// This is a Frieze–Kannan style heuristic, not a regularity lemma with
/// guaranteed constants.
pub fn weak_regularity_refinement(w: &StepKernel, eps: f64, max_groups: usize) -> Result<WeakRegularity> {
    let n = w.parts();
    let mode = if n <= EXACT_CUT_NORM_MAX_PARTS { CutNormMode::Exact } else { CutNormMode::heuristic() };
    let mut groups: Vec<Vec<usize>> = vec![(0..n).collect()];
    loop {
        let stepped = w.average_over_groups(&groups);
        let diff = w.difference(&stepped);
        let witness = cut_norm(&diff, mode)?;
        if witness.value <= eps || groups.len() >= max_groups {
            return Ok(WeakRegularity { converged: witness.value <= eps, groups, stepped, residual: witness.value });
        }
        let mut refined = Vec::with_capacity(groups.len() * 4);
        for g in &groups {
            for key in 0..4u8 {
                let part: Vec<usize> = g
                    .iter()
                    .copied()
                    .filter(|&i| (witness.rows[i] as u8) | ((witness.cols[i] as u8) << 1) == key)
                    .collect();
                if !part.is_empty() {
                    refined.push(part);
                }
            }
        }
        if refined.len() == groups.len() {
            // witness aligned with the grouping; nothing left to split
            return Ok(WeakRegularity { converged: false, groups, stepped, residual: witness.value });
        }
        groups = refined;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::kernel_from_graph;
    use nalgebra::DMatrix;

    #[test]
    fn set_partition_counts() {
        // Bell numbers
        assert_eq!(set_partitions(4, 1).len(), 15);
        assert_eq!(set_partitions(5, 1).len(), 52);
        // partitions of 4 into blocks of size >= 2: {4}, and 3 pairings
        assert_eq!(set_partitions(4, 2).len(), 4);
        // compositions of 5
        assert_eq!(contiguous_partitions(5, 1).len(), 16);
        // 5, 2+3, 3+2
        assert_eq!(contiguous_partitions(5, 2).len(), 3);
    }

    #[test]
    fn constant_and_zero_kernels_pass() {
        let eps = [0.01, 0.1, 0.5];
        let k = ThresholdTable::constant(2.0);
        let one = StepKernel::uniform(vec![vec![1.0; 4]; 4]).unwrap();
        let r = upper_regularity_check(&one, 0.25, &k, &eps, 0).unwrap();
        assert!(r.passed && !r.partial);
        let zero = StepKernel::zero(crate::kernel::Partition::uniform(4));
        assert!(upper_regularity_check(&zero, 0.5, &k, &eps, 0).unwrap().passed);
    }

    #[test]
    fn heavy_edge_is_a_violation() {
        let p = 0.1;
        let mut adj = DMatrix::<f64>::zeros(4, 4);
        adj[(0, 1)] = 100.0;
        adj[(1, 0)] = 100.0;
        let w = kernel_from_graph(&adj, p).unwrap();
        let r = upper_regularity_check(&w, 0.25, &ThresholdTable::constant(10.0), &[0.01], 0).unwrap();
        assert!(!r.passed);
        assert!(!r.partial);
        let v = r.violation.unwrap();
        assert!(v.excess_mass > 0.01);
    }

    #[test]
    fn large_kernels_are_partial() {
        let w = StepKernel::uniform(vec![vec![1.0; 10]; 10]).unwrap();
        let r = upper_regularity_check(&w, 0.2, &ThresholdTable::constant(2.0), &[0.1], 1).unwrap();
        assert!(r.passed && r.partial);
        assert!(r.partitions_tested > RANDOM_PARTITIONS);
    }

    #[test]
    fn threshold_interpolation() {
        let t = ThresholdTable::new(vec![0.1, 0.2], vec![10.0, 20.0]).unwrap();
        assert_eq!(t.eval(0.05), 10.0);
        assert!((t.eval(0.15) - 15.0).abs() < 1e-12);
        assert_eq!(t.eval(0.9), 20.0);
    }

    #[test]
    fn refinement_recovers_block_structure() {
        // two-community kernel in shuffled order
        let b = |i: usize| [0, 1, 0, 1, 1, 0][i];
        let rows: Vec<Vec<f64>> =
            (0..6).map(|i| (0..6).map(|j| if b(i) == b(j) { 3.0 } else { 0.5 }).collect()).collect();
        let w = StepKernel::uniform(rows).unwrap();
        let r = weak_regularity_refinement(&w, 1e-12, 16).unwrap();
        assert!(r.converged);
        assert!(r.residual <= 1e-12);
        for g in &r.groups {
            assert!(g.iter().all(|&i| b(i) == b(g[0])));
        }
    }
}
