//! One-dimensional probability measures and the distances between them.
//!
//! A [`ProbMeasure1D`] is either a finite list of atoms or a density sampled
//! on a grid together with its CDF (piecewise linear between grid points).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::StepKernel;
use crate::qve::{qve_measure_with, InversionOptions, SpectralGrid};

/// Mass tolerance for validated measures.
pub const MASS_TOL: f64 = 1e-9;
/// Number of quantile nodes used by [`wasserstein`] for non-atomic inputs.
pub const QUANTILE_NODES: usize = 10_000;
/// Real parts of the evaluation grid of [`metric_d`]: `[-8, 8]` in steps of `0.25`.
pub const METRIC_D_RE_STEPS: usize = 65;
/// Imaginary parts of the evaluation grid of [`metric_d`].
pub const METRIC_D_IM: [f64; 6] = [2.0, 2.5, 3.0, 4.0, 6.0, 10.0];
/// Additive slack in [`hw_check`] absorbing Stieltjes-inversion bias.
pub const HW_SLACK: f64 = 2e-3;
/// Additive slack in [`interlacing_check`].
pub const INTERLACING_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum ProbMeasure1D {
    Atoms { values: Vec<f64>, weights: Vec<f64> },
    Grid { x: Vec<f64>, density: Vec<f64>, cdf: Vec<f64> },
}

impl ProbMeasure1D {
    /// Atoms with the given weights, sorted by location.
    pub fn atoms(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() || values.is_empty() {
            return Err(Error::InvalidMeasure("atoms need matching nonempty values and weights".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidMeasure("atoms must be finite with nonnegative weights".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (values, weights) = pairs.into_iter().unzip();
        Ok(ProbMeasure1D::Atoms { values, weights })
    }

    /// Uniform atoms `1/n` at each value.
    pub fn uniform_atoms(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("need finite atoms".into()));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let w = 1.0 / values.len() as f64;
        let weights = vec![w; values.len()];
        Ok(ProbMeasure1D::Atoms { values, weights })
    }

    pub fn dirac(x: f64) -> Self {
        ProbMeasure1D::Atoms { values: vec![x], weights: vec![1.0] }
    }

    /// Density on an increasing grid; the CDF is the cumulative trapezoid rule
    /// and both are normalized to unit mass.
    pub fn from_density(x: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        let (cdf, mass) = trapezoid_cdf(&x, &density)?;
        if !(mass > 0.0) {
            return Err(Error::InvalidMeasure("density has no mass".into()));
        }
        let density = density.iter().map(|d| d / mass).collect();
        let cdf = cdf.iter().map(|c| c / mass).collect();
        Ok(ProbMeasure1D::Grid { x, density, cdf })
    }

    /// Grid measure with an externally supplied CDF.
    pub fn from_grid_parts(x: Vec<f64>, density: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || density.len() != n || cdf.len() != n {
            return Err(Error::InvalidMeasure("grid columns must have equal length >= 2".into()));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidMeasure("grid must be strictly increasing".into()));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) || cdf[0] < -MASS_TOL {
            return Err(Error::InvalidMeasure("cdf must be nondecreasing from 0".into()));
        }
        if (cdf[n - 1] - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("cdf ends at {}", cdf[n - 1])));
        }
        Ok(ProbMeasure1D::Grid { x, density, cdf })
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, ProbMeasure1D::Atoms { .. })
    }

    /// Locations where the CDF may change slope or jump.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            ProbMeasure1D::Atoms { values, .. } => values,
            ProbMeasure1D::Grid { x, .. } => x,
        }
    }

    /// `F(t) = μ((-∞, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            ProbMeasure1D::Atoms { values, weights } => {
                let k = values.partition_point(|&v| v <= t);
                weights[..k].iter().sum::<f64>().min(1.0)
            }
            ProbMeasure1D::Grid { x, cdf, .. } => interp_cdf(x, cdf, t),
        }
    }

    /// Left limit `F(t-)`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        match self {
            ProbMeasure1D::Atoms { values, weights } => {
                let k = values.partition_point(|&v| v < t);
                weights[..k].iter().sum::<f64>().min(1.0)
            }
            ProbMeasure1D::Grid { x, cdf, .. } => interp_cdf(x, cdf, t),
        }
    }

    /// Generalized inverse `inf{x : F(x) ≥ u}` for `u ∈ (0,1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            ProbMeasure1D::Atoms { values, weights } => {
                let mut acc = 0.0;
                for (v, w) in values.iter().zip(weights) {
                    acc += w;
                    if acc >= u {
                        return *v;
                    }
                }
                *values.last().unwrap()
            }
            ProbMeasure1D::Grid { x, cdf, .. } => {
                let n = x.len();
                let i = cdf.partition_point(|&c| c < u);
                if i == 0 {
                    return x[0];
                }
                if i >= n {
                    return x[n - 1];
                }
                let (c0, c1) = (cdf[i - 1], cdf[i]);
                if c1 <= c0 {
                    return x[i];
                }
                x[i - 1] + (u - c0) / (c1 - c0) * (x[i] - x[i - 1])
            }
        }
    }

    /// Stieltjes transform `∫ dμ(x)/(x - z)`; trapezoid rule on grids.
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        match self {
            ProbMeasure1D::Atoms { values, weights } => values.iter().zip(weights).map(|(&v, &w)| w / (v - z)).sum(),
            ProbMeasure1D::Grid { x, density, .. } => {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..x.len() - 1 {
                    let h = x[i + 1] - x[i];
                    s += 0.5 * h * (density[i] / (x[i] - z) + density[i + 1] / (x[i + 1] - z));
                }
                s
            }
        }
    }

    /// `∫ x^k dμ`. Grid measures integrate against CDF increments at cell midpoints.
    pub fn moment(&self, k: u32) -> f64 {
        match self {
            ProbMeasure1D::Atoms { values, weights } => {
                values.iter().zip(weights).map(|(v, w)| w * v.powi(k as i32)).sum()
            }
            ProbMeasure1D::Grid { x, cdf, .. } => {
                (0..x.len() - 1).map(|i| (cdf[i + 1] - cdf[i]) * (0.5 * (x[i] + x[i + 1])).powi(k as i32)).sum()
            }
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            ProbMeasure1D::Atoms { weights, .. } => weights.iter().sum(),
            ProbMeasure1D::Grid { cdf, .. } => cdf[cdf.len() - 1] - cdf[0],
        }
    }
}

fn interp_cdf(x: &[f64], cdf: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t <= x[0] {
        return if t == x[0] { cdf[0] } else { 0.0 };
    }
    if t >= x[n - 1] {
        return 1.0;
    }
    let i = x.partition_point(|&v| v <= t);
    let (x0, x1) = (x[i - 1], x[i]);
    cdf[i - 1] + (t - x0) / (x1 - x0) * (cdf[i] - cdf[i - 1])
}

/// Cumulative trapezoid rule; returns `(cdf, total_mass)`.
pub fn trapezoid_cdf(x: &[f64], density: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = x.len();
    if n < 2 || density.len() != n {
        return Err(Error::InvalidMeasure("grid columns must have equal length >= 2".into()));
    }
    if x.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidMeasure("grid must be strictly increasing".into()));
    }
    if density.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(Error::InvalidMeasure("density must be finite and nonnegative".into()));
    }
    let mut cdf = Vec::with_capacity(n);
    let mut acc = 0.0;
    cdf.push(0.0);
    for i in 0..n - 1 {
        acc += 0.5 * (x[i + 1] - x[i]) * (density[i] + density[i + 1]);
        cdf.push(acc);
    }
    Ok((cdf, acc))
}

/// The `z` points at which [`metric_d`] compares Stieltjes transforms.
pub fn metric_d_grid() -> Vec<Complex64> {
    let mut zs = Vec::with_capacity(METRIC_D_RE_STEPS * METRIC_D_IM.len());
    for &im in &METRIC_D_IM {
        for r in 0..METRIC_D_RE_STEPS {
            zs.push(Complex64::new(-8.0 + 0.25 * r as f64, im));
        }
    }
    zs
}

/// Grid maximum of `|m_μ(z) - m_ν(z)|` over [`metric_d_grid`]; a lower bound
/// of the supremum over `Im z ≥ 2`.
pub fn metric_d(mu: &ProbMeasure1D, nu: &ProbMeasure1D) -> f64 {
    metric_d_transforms(|z| mu.stieltjes(z), |z| nu.stieltjes(z))
}

/// [`metric_d`] for arbitrary Stieltjes transforms.
pub fn metric_d_transforms(f: impl Fn(Complex64) -> Complex64, g: impl Fn(Complex64) -> Complex64) -> f64 {
    metric_d_grid().into_iter().map(|z| (f(z) - g(z)).norm()).fold(0.0, f64::max)
}

/// `sup_t |F_μ(t) - F_ν(t)|`, evaluated at every breakpoint of either
/// measure including left limits. Exact for atoms and piecewise-linear CDFs.
pub fn ks_distance(mu: &ProbMeasure1D, nu: &ProbMeasure1D) -> f64 {
    let mut best: f64 = 0.0;
    for &t in mu.breakpoints().iter().chain(nu.breakpoints()) {
        best = best.max((mu.cdf(t) - nu.cdf(t)).abs());
        best = best.max((mu.cdf_left(t) - nu.cdf_left(t)).abs());
    }
    best.min(1.0)
}

/// `W_p` via `(∫_0^1 |F_μ^{-1} - F_ν^{-1}|^p)^{1/p}`. Exact for two atomic
/// measures; otherwise a midpoint rule on [`QUANTILE_NODES`] quantile levels.
pub fn wasserstein(mu: &ProbMeasure1D, nu: &ProbMeasure1D, order: u32) -> Result<f64> {
    if order != 1 && order != 2 {
        return Err(Error::DomainError(format!("Wasserstein order must be 1 or 2, got {order}")));
    }
    let p = order as i32;
    let integral = match (mu, nu) {
        (ProbMeasure1D::Atoms { values: va, weights: wa }, ProbMeasure1D::Atoms { values: vb, weights: wb }) => {
            let (mut i, mut j) = (0, 0);
            let (mut ra, mut rb) = (wa[0], wb[0]);
            let mut total = 0.0;
            loop {
                let step = ra.min(rb);
                total += step * (va[i] - vb[j]).abs().powi(p);
                ra -= step;
                rb -= step;
                if ra <= 1e-15 {
                    i += 1;
                    if i == va.len() {
                        break;
                    }
                    ra += wa[i];
                }
                if rb <= 1e-15 {
                    j += 1;
                    if j == vb.len() {
                        break;
                    }
                    rb += wb[j];
                }
            }
            total
        }
        _ => {
            let n = QUANTILE_NODES;
            (0..n)
                .map(|k| {
                    let u = (k as f64 + 0.5) / n as f64;
                    (mu.quantile(u) - nu.quantile(u)).abs().powi(p)
                })
                .sum::<f64>()
                / n as f64
        }
    };
    Ok(integral.powf(1.0 / order as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        InequalityReport { lhs, rhs, holds: lhs <= rhs }
    }
}

/// `metric_d(μ,ν) ≤ min(W_1, KS)`, with slack `1e-9`.
pub fn metric_inequality_check(mu: &ProbMeasure1D, nu: &ProbMeasure1D) -> Result<InequalityReport> {
    let d = metric_d(mu, nu);
    let bound = wasserstein(mu, nu, 1)?.min(ks_distance(mu, nu));
    Ok(InequalityReport { lhs: d, rhs: bound, holds: d <= bound + 1e-9 })
}

/// Spectral grid covering the QVE supports of every kernel given.
pub fn common_grid(kernels: &[&StepKernel]) -> SpectralGrid {
    let s = kernels.iter().map(|w| crate::qve::support_bound(w)).fold(0.0, f64::max);
    SpectralGrid::new(-s - 1.0, s + 1.0, crate::qve::DEFAULT_GRID_POINTS, crate::qve::DEFAULT_ETA)
        .expect("valid default grid")
}

/// `W_2(υ_W, υ_{W'}) ≤ ‖W - W'‖_1^{1/2} + HW_SLACK`, both measures obtained
/// by Stieltjes inversion on a common grid.
pub fn hw_check(w: &StepKernel, w2: &StepKernel) -> Result<InequalityReport> {
    hw_check_on(w, w2, &common_grid(&[w, w2]))
}

pub fn hw_check_on(w: &StepKernel, w2: &StepKernel, grid: &SpectralGrid) -> Result<InequalityReport> {
    let opts = InversionOptions::default();
    let mu = qve_measure_with(w, grid, &opts)?;
    let nu = qve_measure_with(w2, grid, &opts)?;
    let lhs = wasserstein(&mu, &nu, 2)?;
    let rhs = w.difference(w2).l1_norm().sqrt();
    Ok(InequalityReport { lhs, rhs, holds: lhs <= rhs + HW_SLACK })
}

/// Kernel interlacing: if `W = W'` on `E^c x E^c` for a union
/// of parts `E` with `λ(E) ≤ e_measure`, then `d(υ_W, υ_{W'}) ≤ 2 e_measure`.
pub fn interlacing_check(w: &StepKernel, w2: &StepKernel, e_measure: f64) -> Result<InequalityReport> {
    if w.partition() != w2.partition() {
        return Err(Error::PartitionMismatch);
    }
    let needed = min_cover_measure(w, w2);
    if needed > e_measure + 1e-12 {
        return Err(Error::PreconditionViolated(format!(
            "kernels differ on parts of measure {needed}, more than E = {e_measure}"
        )));
    }
    let grid = common_grid(&[w, w2]);
    let opts = InversionOptions::default();
    let mu = qve_measure_with(w, &grid, &opts)?;
    let nu = qve_measure_with(w2, &grid, &opts)?;
    let lhs = metric_d(&mu, &nu);
    let rhs = 2.0 * e_measure;
    Ok(InequalityReport { lhs, rhs, holds: lhs <= rhs + INTERLACING_SLACK })
}

/// Smallest measure of a union of parts meeting every cell where the kernels
/// differ. Exhaustive for up to 16 parts, otherwise all touched parts.
fn min_cover_measure(w: &StepKernel, w2: &StepKernel) -> f64 {
    let k = w.parts();
    let lam = w.measures();
    let diff: Vec<(usize, usize)> =
        (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).filter(|&(i, j)| w.value(i, j) != w2.value(i, j)).collect();
    if diff.is_empty() {
        return 0.0;
    }
    if k > 16 {
        let mut touched = vec![false; k];
        for &(i, j) in &diff {
            touched[i] = true;
            touched[j] = true;
        }
        return (0..k).filter(|&i| touched[i]).map(|i| lam[i]).sum();
    }
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << k) {
        if diff.iter().all(|&(i, j)| mask >> i & 1 == 1 || mask >> j & 1 == 1) {
            let m: f64 = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| lam[i]).sum();
            best = best.min(m);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn stieltjes_examples() {
        let d0 = ProbMeasure1D::dirac(0.0);
        assert!((d0.stieltjes(c(0.0, 1.0)) - c(0.0, 1.0)).norm() < 1e-15);
        let mu = ProbMeasure1D::uniform_atoms(vec![-1.3, 0.2, 4.0]).unwrap();
        for z in [c(0.0, 0.5), c(3.0, 2.0), c(-5.0, 0.1)] {
            assert!(mu.stieltjes(z).norm() <= 1.0 / z.im + 1e-15);
        }
    }

    #[test]
    fn ks_examples() {
        let d0 = ProbMeasure1D::dirac(0.0);
        let d1 = ProbMeasure1D::dirac(1.0);
        assert_eq!(ks_distance(&d0, &d1), 1.0);
        assert_eq!(ks_distance(&d0, &d0), 0.0);
        let pm = ProbMeasure1D::uniform_atoms(vec![-1.0, 1.0]).unwrap();
        assert_eq!(ks_distance(&pm, &d0), 0.5);
    }

    #[test]
    fn wasserstein_examples() {
        let d0 = ProbMeasure1D::dirac(0.0);
        let d1 = ProbMeasure1D::dirac(1.0);
        assert_eq!(wasserstein(&d0, &d1, 1).unwrap(), 1.0);
        assert_eq!(wasserstein(&d0, &d0, 2).unwrap(), 0.0);
        let two = ProbMeasure1D::uniform_atoms(vec![0.0, 2.0]).unwrap();
        assert!((wasserstein(&two, &d1, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(wasserstein(&two, &d1, 3).is_err());
    }

    #[test]
    fn metric_d_examples() {
        let d0 = ProbMeasure1D::dirac(0.0);
        let d1 = ProbMeasure1D::dirac(1.0);
        assert_eq!(metric_d(&d0, &d0), 0.0);
        // direct evaluation of |1/z - 1/(z-1)| = 1/|z(z-1)| over the grid
        let mut expected: f64 = 0.0;
        for &im in &METRIC_D_IM {
            for r in 0..65 {
                let z = c(-8.0 + 0.25 * r as f64, im);
                expected = expected.max(1.0 / (z * (z - 1.0)).norm());
            }
        }
        assert!((metric_d(&d0, &d1) - expected).abs() < 1e-15);
        // maximum at Re z = 0.5, Im z = 2: 1/4.25
        assert!((expected - 1.0 / 4.25).abs() < 1e-15);
        assert_eq!(metric_d(&d0, &d1), metric_d(&d1, &d0));
        let r = metric_inequality_check(&d0, &d1).unwrap();
        assert!(r.holds && r.rhs == 1.0);
    }

    #[test]
    fn grid_measure_basics() {
        let x: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let mu = ProbMeasure1D::from_density(x.clone(), vec![3.0; 101]).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        assert!((mu.cdf(0.25) - 0.25).abs() < 1e-12);
        assert!((mu.quantile(0.75) - 0.75).abs() < 1e-12);
        assert!((mu.moment(1) - 0.5).abs() < 1e-12);
        let u = ProbMeasure1D::uniform_atoms(vec![0.5]).unwrap();
        assert!((ks_distance(&mu, &u) - 0.5).abs() < 1e-12);
        assert!((wasserstein(&mu, &u, 1).unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn atoms_validation() {
        assert!(ProbMeasure1D::atoms(vec![0.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(ProbMeasure1D::atoms(vec![], vec![]).is_err());
        let mu = ProbMeasure1D::atoms(vec![2.0, -1.0], vec![0.25, 0.75]).unwrap();
        assert_eq!(mu.breakpoints(), &[-1.0, 2.0]);
        assert_eq!(mu.cdf(0.0), 0.75);
        assert_eq!(mu.cdf_left(-1.0), 0.0);
        assert_eq!(mu.quantile(0.8), 2.0);
    }
}
