//! Randomized verification suites shared by the command line and the tests.
//!
//! Each check draws its trials from its own ChaCha8 stream of the suite seed,
//! so adding checks never changes the trials of existing ones.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{cut_norm, exact_sum, CutNormMode, Partition, StepFunction, StepKernel};
use crate::matrices::{rank_ks_check, sample_sparse_wigner, schur_residual, ward_residual};
use crate::measure::{hw_check, interlacing_check, metric_inequality_check, ProbMeasure1D};
use crate::qve::{solve_qve, stability_check, stability_threshold};
use crate::rate::{k_alpha, psi, EntryLaw, LegendrePair};
use crate::trees::{counting_lemma_check, degree_bound_check, enumerate_trees, qve_moment, RootedPlanarTree};

/// Tolerance of the Schur and Ward identities in the identities suite.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Inequalities,
    Oracles,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identities" => Ok(Suite::Identities),
            "inequalities" => Ok(Suite::Inequalities),
            "oracles" => Ok(Suite::Oracles),
            other => Err(Error::Parse(format!("unknown suite {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Inequalities => "inequalities",
            Suite::Oracles => "oracles",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed value of the checked quantity (residual, or `lhs - rhs`).
    pub worst: f64,
}

impl CheckResult {
    fn new(name: &str) -> Self {
        CheckResult { name: name.to_string(), trials: 0, failures: 0, worst: f64::NEG_INFINITY }
    }

    fn record(&mut self, ok: bool, value: f64) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
        }
        if value > self.worst || self.worst.is_nan() {
            self.worst = value;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Random symmetric nonnegative kernel on `k` equal parts, values in `[0, max)`.
pub fn random_kernel(rng: &mut impl Rng, k: usize, max: f64) -> StepKernel {
    let mut rows = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let v = rng.gen::<f64>() * max;
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    StepKernel::uniform(rows).expect("valid random kernel")
}

/// Random symmetric signed step function on a random partition with `k` parts.
pub fn random_signed_function(rng: &mut impl Rng, k: usize) -> StepFunction {
    let partition = random_partition(rng, k);
    let mut rows = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let v = rng.gen::<f64>() * 2.0 - 1.0;
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    StepFunction::new(partition, rows).expect("valid random step function")
}

/// Partition with `k` parts of random positive lengths.
pub fn random_partition(rng: &mut impl Rng, k: usize) -> Partition {
    let weights: Vec<f64> = (0..k).map(|_| 0.2 + rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut b: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect();
    b[k - 1] = 1.0;
    Partition::new(b).expect("valid random partition")
}

/// Random atomic measure with up to `max_atoms` atoms in `[-3, 3]`.
pub fn random_atoms(rng: &mut impl Rng, max_atoms: usize) -> ProbMeasure1D {
    let n = rng.gen_range(1..=max_atoms);
    let values: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
    let raw: Vec<f64> = (0..n).map(|_| 0.1 + rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let rest: f64 = weights[..n - 1].iter().sum();
    weights[n - 1] = 1.0 - rest;
    ProbMeasure1D::atoms(values, weights).expect("valid random atoms")
}

fn random_symmetric(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen::<f64>() * 2.0 - 1.0;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn random_tree(rng: &mut impl Rng, min_edges: usize, max_edges: usize) -> RootedPlanarTree {
    let e = rng.gen_range(min_edges..=max_edges);
    let mut trees = enumerate_trees(e).expect("small tree");
    let i = rng.gen_range(0..trees.len());
    trees.swap_remove(i)
}

/// Runs a suite with `trials` randomized cases per check.
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Identities => identities(trials, seed)?,
        Suite::Inequalities => inequalities(trials, seed)?,
        Suite::Oracles => oracles(trials, seed)?,
    };
    Ok(SuiteReport { suite, seed, checks })
}

fn identities(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut schur = CheckResult::new("schur");
    let mut ward = CheckResult::new("ward");
    let mut rng = stream(seed, 1);
    for t in 0..trials {
        let n = rng.gen_range(2..=100);
        let m = if t % 2 == 0 {
            random_symmetric(&mut rng, n) * (1.0 / (n as f64).sqrt())
        } else {
            let p = rng.gen_range(0.05..0.5);
            sample_sparse_wigner(n, p, &EntryLaw::rademacher(), rng.gen()).expect("valid sample").entries
        };
        let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..3.0));
        let i = rng.gen_range(0..n);
        let r = schur_residual(&m, z, i)?;
        schur.record(r <= IDENTITY_TOL, r);
        let r = ward_residual(&m, z, i)?;
        ward.record(r <= IDENTITY_TOL, r);
    }
    Ok(vec![schur, ward])
}

fn inequalities(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    let mut c = CheckResult::new("stability");
    let mut rng = stream(seed, 10);
    for _ in 0..trials {
        let w = random_kernel(&mut rng, 3, 4.0);
        let re = rng.gen_range(-5.0..5.0);
        let z = Complex64::new(re, stability_threshold(&w, re) * (1.0 + rng.gen::<f64>()));
        let d: Vec<Complex64> =
            (0..3).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2e-3).collect();
        let r = stability_check(&w, &d, z)?;
        c.record(r.holds, r.lhs - r.rhs);
    }
    out.push(c);

    let mut c = CheckResult::new("counting");
    let mut rng = stream(seed, 11);
    for _ in 0..trials {
        let tree = random_tree(&mut rng, 1, 4);
        let e = tree.edges();
        let w: Vec<StepKernel> = (0..e).map(|_| random_kernel(&mut rng, 3, 4.0)).collect();
        let w2: Vec<StepKernel> = (0..e).map(|_| random_kernel(&mut rng, 3, 4.0)).collect();
        let r = counting_lemma_check(&tree, &w.iter().collect::<Vec<_>>(), &w2.iter().collect::<Vec<_>>())?;
        c.record(r.holds, r.lhs - r.rhs);
    }
    out.push(c);

    let mut c = CheckResult::new("degree");
    let mut rng = stream(seed, 12);
    for _ in 0..trials {
        let tree = random_tree(&mut rng, 0, 4);
        let w: Vec<StepKernel> = (0..tree.edges()).map(|_| random_kernel(&mut rng, 3, 4.0)).collect();
        let part = rng.gen_range(0..3);
        let r = degree_bound_check(&tree, &w.iter().collect::<Vec<_>>(), part)?;
        c.record(r.holds, r.lhs - r.rhs);
    }
    out.push(c);

    let mut c = CheckResult::new("interlacing");
    let mut rng = stream(seed, 13);
    for _ in 0..trials {
        let w = random_kernel(&mut rng, 4, 4.0);
        let part = rng.gen_range(0..4);
        let mut rows = w.rows();
        for j in 0..4 {
            let v = rng.gen::<f64>() * 4.0;
            rows[part][j] = v;
            rows[j][part] = v;
        }
        let w2 = StepKernel::uniform(rows)?;
        let r = interlacing_check(&w, &w2, 0.25)?;
        c.record(r.holds, r.lhs - r.rhs);
    }
    out.push(c);

    let mut c = CheckResult::new("hoffman_wielandt");
    let mut rng = stream(seed, 14);
    for _ in 0..trials {
        let k = rng.gen_range(1..=4);
        let w = random_kernel(&mut rng, k, 4.0);
        let w2 = random_kernel(&mut rng, k, 4.0);
        let r = hw_check(&w, &w2)?;
        c.record(r.holds, r.lhs - r.rhs);
    }
    out.push(c);

    let mut c = CheckResult::new("metric_d");
    let mut rng = stream(seed, 15);
    for _ in 0..trials {
        let mu = random_atoms(&mut rng, 6);
        let nu = random_atoms(&mut rng, 6);
        let r = metric_inequality_check(&mu, &nu)?;
        c.record(r.holds, r.lhs - r.rhs);
    }
    out.push(c);

    let mut c = CheckResult::new("rank_ks");
    let mut rng = stream(seed, 16);
    for _ in 0..trials {
        let n = rng.gen_range(10..=60);
        let m = random_symmetric(&mut rng, n);
        let r = rng.gen_range(1..=5);
        let rows: Vec<usize> = (0..r).map(|_| rng.gen_range(0..n)).collect();
        let rep = rank_ks_check(&m, &rows)?;
        c.record(rep.holds, rep.ks - rep.bound);
    }
    out.push(c);

    Ok(out)
}

/// Subset-pair enumeration of `max_{S,T} |Σ_{j∈T} Σ_{i∈S} λ_i v_ij λ_j|`,
/// with correctly rounded column integrals and totals.
fn cut_norm_by_subsets(f: &StepFunction) -> f64 {
    let k = f.parts();
    let lam = f.measures();
    let mut best: f64 = 0.0;
    for s in 1u32..(1 << k) {
        let cols: Vec<f64> = (0..k)
            .map(|j| exact_sum((0..k).filter(|i| s >> i & 1 == 1).map(|i| lam[i] * f.value(i, j) * lam[j])))
            .collect();
        for t in 1u32..(1 << k) {
            let v = exact_sum((0..k).filter(|j| t >> j & 1 == 1).map(|j| cols[j]));
            best = best.max(v.abs());
        }
    }
    best
}

fn oracles(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    let mut c = CheckResult::new("semicircle_qve");
    let mut rng = stream(seed, 20);
    let one = StepKernel::constant(1.0)?;
    for _ in 0..trials {
        let z = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(0.1..10.0));
        let m = solve_qve(&one, &[z])?.m_values[0][0];
        let exact = crate::qve::semicircle_stieltjes(z);
        let err = (m - exact).norm();
        c.record(err <= 1e-10, err);
    }
    out.push(c);

    let mut c = CheckResult::new("catalan_moments");
    for k in 0..=6 {
        let v = qve_moment(2 * k, &one)?;
        let err = (v - crate::trees::catalan(k) as f64).abs();
        c.record(err == 0.0 && qve_moment(2 * k + 1, &one)? == 0.0, err);
    }
    out.push(c);

    let mut c = CheckResult::new("cut_norm_exact");
    let mut rng = stream(seed, 21);
    for _ in 0..trials {
        let k = rng.gen_range(1..=8);
        let f = random_signed_function(&mut rng, k);
        let a = cut_norm(&f, CutNormMode::Exact)?.value;
        let b = cut_norm_by_subsets(&f);
        c.record(a == b, (a - b).abs());
    }
    out.push(c);

    let mut c = CheckResult::new("k_alpha_round_trip");
    let mut rng = stream(seed, 22);
    let pair = LegendrePair::new(EntryLaw::rademacher());
    for _ in 0..trials {
        let alpha = rng.gen_range(1.0..5.0);
        let eps = rng.gen_range(0.05..0.95);
        let u = k_alpha(&pair, alpha, eps)?;
        let err = (psi(&pair, u)? - alpha / eps).abs();
        c.record(err <= 1e-9, err);
    }
    out.push(c);

    let mut c = CheckResult::new("rademacher_rate");
    for i in 0..trials.max(2) {
        let u = 0.01 + (50.0 - 0.01) * i as f64 / (trials.max(2) - 1) as f64;
        let err = (pair.h(u)? - (u * u.ln() - u + 1.0)).abs();
        c.record(err <= 1e-9, err);
    }
    out.push(c);

    Ok(out)
}
