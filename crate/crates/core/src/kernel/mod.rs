//! Symmetric step kernels on interval partitions of (0,1].
//!
//! Every kernel in this crate is stepped: a [`Partition`] of (0,1] into
//! half-open intervals together with a symmetric `k x k` table of values.
//! [`StepFunction`] admits any sign (differences of kernels), while
//! [`StepKernel`] additionally enforces nonnegativity.

mod cut;
pub mod io;
mod regularity;

use std::ops::Deref;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cut::{
    cut_distance, cut_norm, exact_sum, CutDistance, CutDistanceMode, CutNorm, CutNormMode, ANNEAL_COOLING,
    ANNEAL_PROPOSALS, EXACT_CUT_DISTANCE_MAX_PARTS, EXACT_CUT_NORM_MAX_PARTS,
};
pub use regularity::{
    upper_regularity_check, weak_regularity_refinement, RegularityReport, RegularityViolation, ThresholdTable,
    WeakRegularity,
};

/// Relative slack used when comparing part measures.
pub const MEASURE_TOL: f64 = 1e-12;

/// A partition of (0,1] into half-open intervals `(a_{i-1}, a_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    boundaries: Vec<f64>,
    measures: Vec<f64>,
    uniform: bool,
}

impl Partition {
    /// Builds a partition from its right endpoints. The last endpoint must be 1.
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::InvalidPartition("no boundaries".into()));
        }
        let mut prev = 0.0;
        for &b in &boundaries {
            if !b.is_finite() || b <= prev {
                return Err(Error::InvalidPartition(format!(
                    "boundaries must be strictly increasing in (0,1], got {b} after {prev}"
                )));
            }
            prev = b;
        }
        if *boundaries.last().unwrap() != 1.0 {
            return Err(Error::InvalidPartition("last boundary must equal 1".into()));
        }
        let mut measures = Vec::with_capacity(boundaries.len());
        let mut left = 0.0;
        for &b in &boundaries {
            measures.push(b - left);
            left = b;
        }
        let k = boundaries.len();
        let uniform = k == 1 || boundaries.iter().enumerate().all(|(i, &b)| b == (i + 1) as f64 / k as f64);
        if uniform {
            measures = vec![1.0 / k as f64; k];
        }
        Ok(Partition { boundaries, measures, uniform })
    }

    /// The partition into `k` intervals of length `1/k`.
    pub fn uniform(k: usize) -> Self {
        assert!(k >= 1, "a partition needs at least one part");
        let boundaries = (1..=k).map(|i| i as f64 / k as f64).collect();
        Partition { boundaries, measures: vec![1.0 / k as f64; k], uniform: true }
    }

    pub fn trivial() -> Self {
        Partition::uniform(1)
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn left(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.boundaries[i - 1]
        }
    }

    /// True when every part has the same Lebesgue measure.
    pub fn is_equal_measure(&self) -> bool {
        if self.uniform {
            return true;
        }
        let target = 1.0 / self.len() as f64;
        self.measures.iter().all(|&m| (m - target).abs() <= MEASURE_TOL)
    }

    /// Index of the part containing `x` in (0,1].
    pub fn part_of(&self, x: f64) -> usize {
        self.boundaries.partition_point(|&b| b < x).min(self.len() - 1)
    }

    /// Lebesgue measure of `part_i(self) ∩ part_j(other)`.
    pub fn overlap(&self, i: usize, other: &Partition, j: usize) -> f64 {
        let lo = self.left(i).max(other.left(j));
        let hi = self.boundaries[i].min(other.boundaries[j]);
        (hi - lo).max(0.0)
    }

    /// Smallest partition refining both inputs.
    pub fn common_refinement(&self, other: &Partition) -> Partition {
        if self == other {
            return self.clone();
        }
        if self.uniform && other.uniform {
            let k = lcm(self.len(), other.len());
            return Partition::uniform(k);
        }
        let mut merged: Vec<f64> = self.boundaries.iter().chain(other.boundaries.iter()).copied().collect();
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out: Vec<f64> = Vec::with_capacity(merged.len());
        for b in merged {
            match out.last() {
                Some(&last) if b - last <= 1e-14 => {}
                _ => out.push(b),
            }
        }
        *out.last_mut().unwrap() = 1.0;
        Partition::new(out).expect("refinement of valid partitions is valid")
    }

    /// For a partition refining `coarse`, maps each part to its parent part.
    pub fn parents_in(&self, coarse: &Partition) -> Result<Vec<usize>> {
        let mut parents = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let mid = 0.5 * (self.left(i) + self.boundaries[i]);
            let a = coarse.part_of(mid);
            if self.left(i) < coarse.left(a) - 1e-14 || self.boundaries[i] > coarse.boundaries[a] + 1e-14 {
                return Err(Error::InvalidPartition("partition does not refine the target".into()));
            }
            parents.push(a);
        }
        Ok(parents)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// A symmetric step function on `(0,1]^2`, any sign.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    partition: Partition,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(partition: Partition, rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = partition.len();
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidKernel(format!("values must be {k}x{k}")));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(partition, values)
    }

    /// Row-major `k*k` values.
    pub fn from_flat(partition: Partition, values: Vec<f64>) -> Result<Self> {
        let k = partition.len();
        if values.len() != k * k {
            return Err(Error::InvalidKernel(format!("values must be {k}x{k}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidKernel("values must be finite".into()));
        }
        for i in 0..k {
            for j in 0..i {
                if values[i * k + j] != values[j * k + i] {
                    return Err(Error::InvalidKernel(format!("values not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(StepFunction { partition, values })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn measures(&self) -> &[f64] {
        self.partition.measures()
    }

    /// Number of parts.
    pub fn parts(&self) -> usize {
        self.partition.len()
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.parts() + j]
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.parts()).map(|r| r.to_vec()).collect()
    }

    /// Value at a point of `(0,1]^2`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.value(self.partition.part_of(x), self.partition.part_of(y))
    }

    /// `Σ_ij |v_ij| λ_i λ_j`.
    pub fn l1_norm(&self) -> f64 {
        let lam = self.measures();
        let k = self.parts();
        let mut total = 0.0;
        for i in 0..k {
            for j in 0..k {
                total += self.value(i, j).abs() * lam[i] * lam[j];
            }
        }
        total
    }

    /// `∫∫ W`.
    pub fn integral(&self) -> f64 {
        let lam = self.measures();
        let k = self.parts();
        let mut total = 0.0;
        for i in 0..k {
            for j in 0..k {
                total += self.value(i, j) * lam[i] * lam[j];
            }
        }
        total
    }

    /// Per-part degree `Σ_j v_ij λ_j`.
    pub fn degree(&self) -> Vec<f64> {
        let lam = self.measures();
        let k = self.parts();
        (0..k).map(|i| (0..k).map(|j| self.value(i, j) * lam[j]).sum()).collect()
    }

    /// Re-expresses the function on a finer partition.
    pub fn refine_to(&self, target: &Partition) -> Result<StepFunction> {
        if target == &self.partition {
            return Ok(self.clone());
        }
        let parents = target.parents_in(&self.partition)?;
        let k = target.len();
        let mut values = Vec::with_capacity(k * k);
        for &a in &parents {
            for &b in &parents {
                values.push(self.value(a, b));
            }
        }
        Ok(StepFunction { partition: target.clone(), values })
    }

    /// `self - other` on the common refinement of both partitions.
    pub fn difference(&self, other: &StepFunction) -> StepFunction {
        let common = self.partition.common_refinement(&other.partition);
        let a = self.refine_to(&common).expect("common refinement");
        let b = other.refine_to(&common).expect("common refinement");
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        StepFunction { partition: common, values }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> StepFunction {
        StepFunction { partition: self.partition.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `W^σ`, i.e. `values[σ(i)][σ(j)]`.
    pub fn relabel(&self, sigma: &Relabel) -> Result<StepFunction> {
        let k = self.parts();
        if sigma.len() != k {
            return Err(Error::InvalidPermutation(format!(
                "permutation has {} entries, kernel has {k} parts",
                sigma.len()
            )));
        }
        if !self.partition.is_equal_measure() {
            return Err(Error::PartMeasureMismatch);
        }
        let s = sigma.as_slice();
        let mut values = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                values.push(self.value(s[i], s[j]));
            }
        }
        Ok(StepFunction { partition: self.partition.clone(), values })
    }

    /// Averages over the blocks `groups x groups`; the result lives on the
    /// original partition. `groups` must partition the part indices.
    pub fn average_over_groups(&self, groups: &[Vec<usize>]) -> StepFunction {
        let k = self.parts();
        let lam = self.measures();
        let mut group_of = vec![usize::MAX; k];
        for (g, members) in groups.iter().enumerate() {
            for &i in members {
                group_of[i] = g;
            }
        }
        debug_assert!(group_of.iter().all(|&g| g != usize::MAX));
        let gm: Vec<f64> = groups.iter().map(|m| m.iter().map(|&i| lam[i]).sum()).collect();
        let ng = groups.len();
        let mut mass = vec![0.0; ng * ng];
        for i in 0..k {
            for j in 0..k {
                mass[group_of[i] * ng + group_of[j]] += self.value(i, j) * lam[i] * lam[j];
            }
        }
        let mut values = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let (a, b) = (group_of[i], group_of[j]);
                values.push(mass[a * ng + b] / (gm[a] * gm[b]));
            }
        }
        // keep exact symmetry regardless of summation order
        for i in 0..k {
            for j in 0..i {
                values[j * k + i] = values[i * k + j];
            }
        }
        StepFunction { partition: self.partition.clone(), values }
    }
}

/// A nonnegative symmetric step kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct StepKernel(StepFunction);

impl Deref for StepKernel {
    type Target = StepFunction;
    fn deref(&self) -> &StepFunction {
        &self.0
    }
}

impl StepKernel {
    pub fn new(partition: Partition, rows: Vec<Vec<f64>>) -> Result<Self> {
        StepFunction::new(partition, rows)?.try_into()
    }

    pub fn from_flat(partition: Partition, values: Vec<f64>) -> Result<Self> {
        StepFunction::from_flat(partition, values)?.try_into()
    }

    /// Kernel on `k` equal parts.
    pub fn uniform(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidKernel("empty value table".into()));
        }
        Self::new(Partition::uniform(k), rows)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Partition::trivial(), vec![vec![c]])
    }

    pub fn zero(partition: Partition) -> Self {
        let k = partition.len();
        StepKernel(StepFunction { partition, values: vec![0.0; k * k] })
    }

    pub fn as_function(&self) -> &StepFunction {
        &self.0
    }

    pub fn into_function(self) -> StepFunction {
        self.0
    }

    /// Per-part degree function `d_W`.
    pub fn degree_function(&self) -> Vec<f64> {
        self.0.degree()
    }

    /// Largest degree, i.e. `‖d_W‖_∞` and also the sup-norm of the operator `S`.
    pub fn max_degree(&self) -> f64 {
        self.degree_function().into_iter().fold(0.0, f64::max)
    }

    /// `W^{(C)}`: zero the rows and columns whose degree exceeds `c`.
    pub fn truncate_by_degree(&self, c: f64) -> StepKernel {
        let deg = self.degree_function();
        let keep: Vec<bool> = deg.iter().map(|&d| d <= c).collect();
        let k = self.parts();
        let mut values = self.0.values.clone();
        for i in 0..k {
            for j in 0..k {
                if !(keep[i] && keep[j]) {
                    values[i * k + j] = 0.0;
                }
            }
        }
        StepKernel(StepFunction { partition: self.partition().clone(), values })
    }

    /// The `P`-stepped kernel `W_P`: Lebesgue averages over `P_i x P_j`.
    pub fn step_average(&self, target: &Partition) -> StepKernel {
        if target == self.partition() {
            return self.clone();
        }
        let src = self.partition();
        let (ks, kt) = (src.len(), target.len());
        let mut ov = vec![0.0; ks * kt];
        for a in 0..ks {
            for i in 0..kt {
                ov[a * kt + i] = src.overlap(a, target, i);
            }
        }
        let tm = target.measures();
        let mut values = vec![0.0; kt * kt];
        for i in 0..kt {
            for j in 0..=i {
                let mut s = 0.0;
                for a in 0..ks {
                    let oa = ov[a * kt + i];
                    if oa == 0.0 {
                        continue;
                    }
                    for b in 0..ks {
                        s += oa * ov[b * kt + j] * self.value(a, b);
                    }
                }
                let v = (s / (tm[i] * tm[j])).max(0.0);
                values[i * kt + j] = v;
                values[j * kt + i] = v;
            }
        }
        StepKernel(StepFunction { partition: target.clone(), values })
    }

    pub fn relabel(&self, sigma: &Relabel) -> Result<StepKernel> {
        Ok(StepKernel(self.0.relabel(sigma)?))
    }

    pub fn refine_to(&self, target: &Partition) -> Result<StepKernel> {
        Ok(StepKernel(self.0.refine_to(target)?))
    }

    pub fn average_over_groups(&self, groups: &[Vec<usize>]) -> StepKernel {
        StepKernel(self.0.average_over_groups(groups))
    }

    pub fn scale(&self, c: f64) -> Result<StepKernel> {
        self.0.map_values(|v| v * c).try_into()
    }
}

impl TryFrom<StepFunction> for StepKernel {
    type Error = Error;
    fn try_from(f: StepFunction) -> Result<Self> {
        if f.values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidKernel("kernel values must be nonnegative".into()));
        }
        Ok(StepKernel(f))
    }
}

/// Kernel of an edge-weighted graph: equal `n`-part partition, values `β_ij / p`.
pub fn kernel_from_graph(adjacency: &DMatrix<f64>, p: f64) -> Result<StepKernel> {
    let n = adjacency.nrows();
    if adjacency.ncols() != n || n == 0 {
        return Err(Error::InvalidKernel("adjacency must be a nonempty square matrix".into()));
    }
    if !(p > 0.0 && p < 1.0) && p != 1.0 {
        return Err(Error::DomainError(format!("p must lie in (0,1], got {p}")));
    }
    for i in 0..n {
        for j in 0..i {
            if adjacency[(i, j)] != adjacency[(j, i)] {
                return Err(Error::AsymmetricInput);
            }
        }
    }
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let a = adjacency[(i, j)];
            if !(a >= 0.0) || !a.is_finite() {
                return Err(Error::InvalidKernel(format!("adjacency entry ({i},{j}) = {a}")));
            }
            values.push(a / p);
        }
    }
    StepKernel::from_flat(Partition::uniform(n), values)
}

/// A permutation of part indices, acting on kernels with equal part measures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relabel(Vec<usize>);

impl Relabel {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let k = perm.len();
        let mut seen = vec![false; k];
        for &p in &perm {
            if p >= k || seen[p] {
                return Err(Error::InvalidPermutation(format!("{perm:?}")));
            }
            seen[p] = true;
        }
        Ok(Relabel(perm))
    }

    pub fn identity(k: usize) -> Self {
        Relabel((0..k).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Relabel {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Relabel(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves(rows: Vec<Vec<f64>>) -> StepKernel {
        StepKernel::uniform(rows).unwrap()
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0.5, 1.0]).is_ok());
        assert!(Partition::new(vec![0.5, 0.4, 1.0]).is_err());
        assert!(Partition::new(vec![0.5, 0.9]).is_err());
        assert!(Partition::new(vec![]).is_err());
        let p = Partition::new(vec![0.2, 0.7, 1.0]).unwrap();
        let s: f64 = p.measures().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(!p.is_equal_measure());
        assert!(Partition::uniform(7).is_equal_measure());
    }

    #[test]
    fn part_lookup_uses_half_open_intervals() {
        let p = Partition::uniform(2);
        assert_eq!(p.part_of(0.5), 0);
        assert_eq!(p.part_of(0.5000001), 1);
        assert_eq!(p.part_of(1.0), 1);
        assert_eq!(p.part_of(1e-9), 0);
    }

    #[test]
    fn degree_examples() {
        assert_eq!(StepKernel::constant(1.0).unwrap().degree_function(), vec![1.0]);
        assert_eq!(halves(vec![vec![2.0, 0.0], vec![0.0, 0.0]]).degree_function(), vec![1.0, 0.0]);
        assert_eq!(halves(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).degree_function(), vec![0.5, 0.5]);
    }

    #[test]
    fn degree_truncation() {
        let one = StepKernel::constant(1.0).unwrap();
        assert_eq!(one.truncate_by_degree(2.0), one);
        assert_eq!(one.truncate_by_degree(0.5).l1_norm(), 0.0);
        let w = halves(vec![vec![2.0, 0.0], vec![0.0, 0.0]]);
        let t = w.truncate_by_degree(0.5);
        assert_eq!(t.partition(), w.partition());
        assert_eq!(t.values_flat(), &[0.0; 4]);
    }

    #[test]
    fn step_average_examples() {
        let c = StepKernel::constant(3.0).unwrap();
        let p = Partition::new(vec![0.3, 0.8, 1.0]).unwrap();
        for &v in c.step_average(&p).values_flat() {
            assert!((v - 3.0).abs() < 1e-12);
        }
        let w = halves(vec![vec![4.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(w.step_average(w.partition()), w);
        let avg = w.step_average(&Partition::trivial());
        assert!((avg.value(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn step_average_onto_unaligned_partition() {
        // value 4 on (0,1/2]^2; target (0,1/4],(1/4,1]
        let w = halves(vec![vec![4.0, 0.0], vec![0.0, 0.0]]);
        let p = Partition::new(vec![0.25, 1.0]).unwrap();
        let a = w.step_average(&p);
        assert!((a.value(0, 0) - 4.0).abs() < 1e-12);
        // (1/4 * 1/4 * 4) / (1/4 * 3/4)
        assert!((a.value(0, 1) - 4.0 / 3.0).abs() < 1e-12);
        // (1/4 * 1/4 * 4) / (3/4)^2
        assert!((a.value(1, 1) - 4.0 / 9.0).abs() < 1e-12);
        assert!((a.integral() - w.integral()).abs() < 1e-12);
    }

    #[test]
    fn relabel_examples() {
        let w = halves(vec![vec![1.0, 2.0], vec![2.0, 3.0]]);
        assert_eq!(w.relabel(&Relabel::identity(2)).unwrap(), w);
        let swap = Relabel::new(vec![1, 0]).unwrap();
        assert_eq!(w.relabel(&swap).unwrap().rows(), vec![vec![3.0, 2.0], vec![2.0, 1.0]]);
        let sigma = Relabel::new(vec![2, 0, 3, 1]).unwrap();
        let w4 = StepKernel::uniform(vec![
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0, 5.0, 6.0, 7.0],
            vec![3.0, 6.0, 8.0, 9.0],
            vec![4.0, 7.0, 9.0, 10.0],
        ])
        .unwrap();
        let back = w4.relabel(&sigma).unwrap().relabel(&sigma.inverse()).unwrap();
        assert_eq!(back, w4);
        let uneven =
            StepKernel::new(Partition::new(vec![0.3, 1.0]).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(uneven.relabel(&swap), Err(Error::PartMeasureMismatch));
        assert!(Relabel::new(vec![0, 0]).is_err());
    }

    #[test]
    fn graph_kernels() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(kernel_from_graph(&z, 0.3).unwrap().l1_norm(), 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(kernel_from_graph(&a, 0.5).unwrap().rows(), vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert_eq!(kernel_from_graph(&asym, 0.5), Err(Error::AsymmetricInput));
    }

    #[test]
    fn l1_examples() {
        assert_eq!(StepKernel::zero(Partition::uniform(3)).l1_norm(), 0.0);
        assert_eq!(StepKernel::constant(1.0).unwrap().l1_norm(), 1.0);
        assert_eq!(halves(vec![vec![2.0, 0.0], vec![0.0, 0.0]]).l1_norm(), 0.5);
    }

    #[test]
    fn difference_on_common_refinement() {
        let a = StepKernel::constant(1.0).unwrap();
        let b = halves(vec![vec![2.0, 0.0], vec![0.0, 0.0]]);
        let d = a.difference(&b);
        assert_eq!(d.parts(), 2);
        assert_eq!(d.rows(), vec![vec![-1.0, 1.0], vec![1.0, 1.0]]);
        let c =
            StepKernel::new(Partition::new(vec![0.25, 1.0]).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let d2 = b.difference(&c);
        assert_eq!(d2.partition().boundaries(), &[0.25, 0.5, 1.0]);
        assert!((d2.integral() - (b.integral() - c.integral())).abs() < 1e-14);
    }

    #[test]
    fn group_average_preserves_block_mass() {
        let w = StepKernel::uniform(vec![vec![1.0, 2.0, 0.0], vec![2.0, 0.0, 5.0], vec![0.0, 5.0, 3.0]]).unwrap();
        let avg = w.average_over_groups(&[vec![0, 2], vec![1]]);
        assert!((avg.integral() - w.integral()).abs() < 1e-14);
        assert_eq!(avg.value(0, 0), avg.value(2, 2));
        assert_eq!(avg.value(0, 1), avg.value(2, 1));
        assert!((avg.value(0, 0) - 1.0).abs() < 1e-14);
    }
}
