//! Sparse Wigner matrices, tilted ensembles, spectra and resolvent identities.
//!
//! Entry `(i, j)` with `i < j` draws two uniforms from words `4j..4j+4` of
//! the ChaCha8 stream `i` seeded by `seed`, so every entry is addressable
//! independently of the order in which the matrix is filled.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{kernel_from_graph, StepKernel};
use crate::measure::{ks_distance, ProbMeasure1D};
use crate::rate::{EntryLaw, LegendrePair};

/// Largest dimension accepted by [`esm`].
pub const MAX_EIG_DIM: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseWignerSample {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    /// `X = (A ∘ Ξ)/√(np)`.
    pub entries: DMatrix<f64>,
    /// `Ξ`, symmetric 0/1 with zero diagonal.
    pub mask: DMatrix<f64>,
    /// `A` on the support of the mask, zero elsewhere.
    pub raw: DMatrix<f64>,
}

impl SparseWignerSample {
    pub fn edge_count(&self) -> usize {
        let n = self.n;
        (0..n).map(|i| (i + 1..n).filter(|&j| self.mask[(i, j)] != 0.0).count()).sum()
    }
}

/// Row streams: one generator per row, positioned at column `i + 1`.
fn row_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng.set_word_pos(4 * (i as u128 + 1));
    rng
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

fn cumulative(w: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    w.map(|x| {
        acc += x;
        acc
    })
    .collect()
}

fn check_np(n: usize, p: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::PreconditionViolated("n must be at least 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::PreconditionViolated(format!("p must lie in (0,1), got {p}")));
    }
    Ok(())
}

/// Per-entry law: `P(ξ = 1)` and the conditional CDF of `A` given `ξ = 1`.
struct EntrySampler {
    edge: f64,
    values: Vec<f64>,
    cdf: Vec<f64>,
}

impl EntrySampler {
    fn plain(law: &EntryLaw, p: f64) -> Self {
        EntrySampler { edge: p, values: law.support().to_vec(), cdf: cumulative(law.probs().iter().copied()) }
    }

    /// `P(ξ=1, A=v) = p q_v e^{θv²}/Z`, `P(ξ=0) = (1-p)/Z`, `Z = 1 + pL(θ)`.
    fn tilted(pair: &LegendrePair, p: f64, theta: f64) -> Self {
        let law = pair.law();
        let one_plus_l = 1.0 + pair.l(theta);
        let z = 1.0 + p * pair.l(theta);
        let weights = law.support().iter().zip(law.probs()).map(|(v, q)| q * (theta * v * v).exp() / one_plus_l);
        EntrySampler { edge: p * one_plus_l / z, values: law.support().to_vec(), cdf: cumulative(weights) }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (bool, f64) {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let present = u1 < self.edge;
        (present, self.values[pick(&self.cdf, u2)])
    }
}

fn assemble(
    n: usize,
    p: f64,
    seed: u64,
    sampler: impl Fn(usize, usize) -> usize,
    samplers: &[EntrySampler],
) -> SparseWignerSample {
    let mut mask = DMatrix::zeros(n, n);
    let mut raw = DMatrix::zeros(n, n);
    let mut entries = DMatrix::zeros(n, n);
    let scale = 1.0 / (n as f64 * p).sqrt();
    for i in 0..n {
        let mut rng = row_rng(seed, i);
        for j in i + 1..n {
            let (present, a) = samplers[sampler(i, j)].draw(&mut rng);
            if present {
                mask[(i, j)] = 1.0;
                mask[(j, i)] = 1.0;
                raw[(i, j)] = a;
                raw[(j, i)] = a;
                entries[(i, j)] = a * scale;
                entries[(j, i)] = a * scale;
            }
        }
    }
    SparseWignerSample { n, p, seed, entries, mask, raw }
}

/// i.i.d. Bernoulli(p) mask above the diagonal and i.i.d. law entries.
pub fn sample_sparse_wigner(n: usize, p: f64, law: &EntryLaw, seed: u64) -> Result<SparseWignerSample> {
    check_np(n, p)?;
    Ok(assemble(n, p, seed, |_, _| 0, &[EntrySampler::plain(law, p)]))
}

/// Block of vertex `i` for a `k`-block equal partition of `n` vertices.
fn block_of(i: usize, n: usize, k: usize) -> usize {
    i / (n / k)
}

/// Exponentially tilted ensemble realizing the profile `U`. `U` must be
/// strictly positive on an equal-measure partition whose part count divides `n`.
pub fn tilted_sample(n: usize, p: f64, pair: &LegendrePair, u: &StepKernel, seed: u64) -> Result<SparseWignerSample> {
    check_np(n, p)?;
    let k = u.parts();
    if !u.partition().is_equal_measure() || !n.is_multiple_of(k) {
        return Err(Error::DivisibilityError { k, n });
    }
    if u.values_flat().iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::KernelNotPositive);
    }
    let mut samplers = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            samplers.push(EntrySampler::tilted(pair, p, pair.theta(u.value(a, b))?));
        }
    }
    Ok(assemble(n, p, seed, |i, j| block_of(i, n, k) * k + block_of(j, n, k), &samplers))
}

/// Tilted edge probability `p(1 + L(θ))/(1 + pL(θ))` with `θ = h_L'(u)`.
pub fn tilted_edge_probability(pair: &LegendrePair, p: f64, u: f64) -> Result<f64> {
    let theta = pair.theta(u)?;
    Ok(EntrySampler::tilted(pair, p, theta).edge)
}

/// Kernel that a tilted ensemble realizes: `E[ξ A²]/p` on each block.
pub fn tilted_effective_kernel(pair: &LegendrePair, p: f64, u: &StepKernel) -> Result<StepKernel> {
    let k = u.parts();
    let law = pair.law();
    let mut rows = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let theta = pair.theta(u.value(a, b))?;
            let s = EntrySampler::tilted(pair, p, theta);
            let mut prev = 0.0;
            let mut second = 0.0;
            for (v, c) in law.support().iter().zip(&s.cdf) {
                second += (c - prev) * v * v;
                prev = *c;
            }
            rows[a][b] = s.edge * second / p;
        }
    }
    StepKernel::new(u.partition().clone(), rows)
}

/// Dense variance-profile matrix `X_ij = ξ_ij A_ij √(W(x_i, x_j)/(np))` with
/// `x_i = (i + 1/2)/n`; `p = 1` gives a full profile.
pub fn sample_profile_wigner(w: &StepKernel, n: usize, p: f64, law: &EntryLaw, seed: u64) -> Result<DMatrix<f64>> {
    if n == 0 || !(p > 0.0 && p <= 1.0) {
        return Err(Error::PreconditionViolated(format!("need n ≥ 1 and p in (0,1], got n = {n}, p = {p}")));
    }
    let part: Vec<usize> = (0..n).map(|i| w.partition().part_of((i as f64 + 0.5) / n as f64)).collect();
    let sampler = EntrySampler::plain(law, p);
    let mut x = DMatrix::zeros(n, n);
    let scale = 1.0 / (n as f64 * p);
    for i in 0..n {
        let mut rng = row_rng(seed, i);
        for j in i + 1..n {
            let (present, a) = sampler.draw(&mut rng);
            if present {
                let v = a * (w.value(part[i], part[j]) * scale).sqrt();
                x[(i, j)] = v;
                x[(j, i)] = v;
            }
        }
    }
    Ok(x)
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::AsymmetricInput);
    }
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            if m[(i, j)] != m[(j, i)] {
                return Err(Error::AsymmetricInput);
            }
        }
    }
    Ok(())
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let n = m.nrows();
    if n > MAX_EIG_DIM {
        return Err(Error::EigFailure(format!("dimension {n} exceeds {MAX_EIG_DIM}")));
    }
    if n == 0 {
        return Err(Error::EigFailure("empty matrix".into()));
    }
    let f = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let mut ev = f.selfadjoint_eigenvalues(faer::Side::Lower);
    if ev.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigFailure("non-finite eigenvalue".into()));
    }
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}

/// Empirical spectral measure: uniform atoms on the eigenvalues.
pub fn esm(m: &DMatrix<f64>) -> Result<ProbMeasure1D> {
    ProbMeasure1D::uniform_atoms(eigenvalues(m)?)
}

/// `W_n = (A² ∘ Ξ)/p` on the equal `n`-part partition.
pub fn empirical_kernel(sample: &SparseWignerSample) -> Result<StepKernel> {
    let adj = sample.raw.component_mul(&sample.raw).component_mul(&sample.mask);
    kernel_from_graph(&adj, sample.p)
}

/// `G(z) = (M - z)^{-1}`.
pub fn resolvent(m: &DMatrix<f64>, z: Complex64) -> Result<DMatrix<Complex64>> {
    if !(z.im > 0.0) {
        return Err(Error::PreconditionViolated(format!("Im z must be positive, got {z}")));
    }
    if !m.is_square() {
        return Err(Error::AsymmetricInput);
    }
    let n = m.nrows();
    let a = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(m[(i, j)], 0.0) - if i == j { z } else { Complex64::new(0.0, 0.0) }
    });
    a.lu().try_inverse().ok_or(Error::SolveFailure)
}

fn minor(m: &DMatrix<f64>, i: usize) -> DMatrix<f64> {
    m.clone().remove_row(i).remove_column(i)
}

/// `|−1/G_ii − z + M_ii − Σ_{k,ℓ≠i} M_ik M_iℓ G^{(i)}_{kℓ}|`, where `G^{(i)}`
/// is the resolvent of `M` with row and column `i` removed.
pub fn schur_residual(m: &DMatrix<f64>, z: Complex64, i: usize) -> Result<f64> {
    let n = m.nrows();
    if i >= n {
        return Err(Error::PreconditionViolated(format!("index {i} out of range")));
    }
    let g = resolvent(m, z)?;
    let mut sum = Complex64::new(0.0, 0.0);
    if n > 1 {
        let gi = resolvent(&minor(m, i), z)?;
        let row: Vec<f64> = (0..n).filter(|&k| k != i).map(|k| m[(i, k)]).collect();
        for (a, &ma) in row.iter().enumerate() {
            if ma == 0.0 {
                continue;
            }
            for (b, &mb) in row.iter().enumerate() {
                sum += ma * mb * gi[(a, b)];
            }
        }
    }
    Ok((-1.0 / g[(i, i)] - z + m[(i, i)] - sum).norm())
}

/// `|Σ_k |G_jk|² − Im G_jj / Im z|`.
pub fn ward_residual(m: &DMatrix<f64>, z: Complex64, j: usize) -> Result<f64> {
    if j >= m.nrows() {
        return Err(Error::PreconditionViolated(format!("index {j} out of range")));
    }
    let g = resolvent(m, z)?;
    let lhs: f64 = (0..m.nrows()).map(|k| g[(j, k)].norm_sqr()).sum();
    Ok((lhs - g[(j, j)].im / z.im).abs())
}

/// Tolerance for the Schur identity, scaled by `1 + ‖M‖²/Im z`.
pub fn schur_tolerance(m: &DMatrix<f64>, z: Complex64) -> f64 {
    let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    1e-10 * (1.0 + norm * norm / z.im)
}

/// Copy of `M` with the given rows and columns set to zero.
pub fn zero_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let mut out = m.clone();
    for &r in rows {
        out.row_mut(r).fill(0.0);
        out.column_mut(r).fill(0.0);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankReport {
    pub ks: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `d_KS(μ_M, μ_{M'}) ≤ 2r/n` when `M'` zeroes `r` rows and columns of `M`.
pub fn rank_ks_check(m: &DMatrix<f64>, rows: &[usize]) -> Result<RankReport> {
    let mut distinct = rows.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let ks = ks_distance(&esm(m)?, &esm(&zero_rows(m, &distinct))?);
    let bound = 2.0 * distinct.len() as f64 / m.nrows() as f64;
    Ok(RankReport { ks, bound, holds: ks <= bound + 1e-12 })
}
