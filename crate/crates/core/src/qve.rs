//! Quadratic Vector Equation `-1/m_i = z + Σ_j S_ij m_j` for stepped kernels,
//! where `S_ij = W_ij λ_j`, and the QVE measure obtained by Stieltjes inversion.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::StepKernel;
use crate::measure::{trapezoid_cdf, ProbMeasure1D};

pub const SOLVER_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100_000;
pub const KAPPA: f64 = 128.0;
pub const DEFAULT_ETA: f64 = 1e-3;
pub const DEFAULT_GRID_POINTS: usize = 4000;
/// Minimal pre-normalization mass accepted by [`qve_measure`].
pub const MIN_MASS: f64 = 0.99;
/// Largest system for which Newton steps are attempted.
const NEWTON_MAX_PARTS: usize = 256;

/// Starting point of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// `m = -1/z`, the solution for the zero kernel.
    MinusInverseZ,
    /// `m = i`.
    ImaginaryUnit,
    Given(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub init: Init,
    /// Polish with Newton steps once the damped iteration stalls.
    pub newton: bool,
}

impl Default for QveOptions {
    fn default() -> Self {
        QveOptions { tol: SOLVER_TOL, max_iter: MAX_ITERATIONS, init: Init::MinusInverseZ, newton: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QveSolution {
    pub z_points: Vec<Complex64>,
    pub m_values: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSolution {
    pub m: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Dense `S_ij = W_ij λ_j`.
pub fn variance_matrix(w: &StepKernel) -> DMatrix<f64> {
    let k = w.parts();
    let lam = w.measures();
    DMatrix::from_fn(k, k, |i, j| w.value(i, j) * lam[j])
}

/// `‖S‖_∞`, the maximal row sum (the maximal degree).
pub fn s_norm(w: &StepKernel) -> f64 {
    w.max_degree()
}

fn apply(s: &DMatrix<f64>, m: &[Complex64], out: &mut [Complex64]) {
    let k = m.len();
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..k {
            acc += s[(i, j)] * m[j];
        }
        *o = acc;
    }
}

/// Returns `(F(m), ‖m - F(m)‖_∞)` with `F(m)_i = -1/(z + (Sm)_i + d_i)`.
fn fixed_map(
    s: &DMatrix<f64>,
    z: Complex64,
    d: &[Complex64],
    m: &[Complex64],
    sm: &mut [Complex64],
) -> (Vec<Complex64>, f64) {
    apply(s, m, sm);
    let mut res: f64 = 0.0;
    let f: Vec<Complex64> = (0..m.len())
        .map(|i| {
            let v = -1.0 / (z + sm[i] + d[i]);
            res = res.max((m[i] - v).norm());
            v
        })
        .collect();
    (f, res)
}

fn newton_direction(
    s: &DMatrix<f64>,
    z: Complex64,
    d: &[Complex64],
    m: &[Complex64],
    sm: &[Complex64],
) -> Option<Vec<Complex64>> {
    let k = m.len();
    // G(m) = m + 1/(z + Sm + d), G'(m) = I - diag(1/(z + Sm + d)^2) S
    let mut jac = DMatrix::<Complex64>::zeros(k, k);
    let mut g = DVector::<Complex64>::zeros(k);
    for i in 0..k {
        let inv = 1.0 / (z + sm[i] + d[i]);
        g[i] = m[i] + inv;
        let inv2 = inv * inv;
        for j in 0..k {
            jac[(i, j)] = -inv2 * s[(i, j)];
        }
        jac[(i, i)] += 1.0;
    }
    let delta = jac.lu().solve(&g)?;
    delta.iter().all(|v| v.is_finite()).then(|| delta.iter().copied().collect())
}

/// Solves the perturbed equation `-1/m_i = z + (Sm)_i + d_i` at one point.
/// When the direct iteration fails, the solution is continued in `Im z` from
/// a well-conditioned starting height down to the target.
pub fn solve_point(s: &DMatrix<f64>, z: Complex64, d: &[Complex64], opts: &QveOptions) -> Result<PointSolution> {
    if !(z.im > 0.0) {
        return Err(Error::PreconditionViolated(format!("Im z must be positive, got {z}")));
    }
    let direct = solve_direct(s, z, d, opts);
    if direct.is_ok() || !opts.newton {
        return direct;
    }
    let mut height = (4.0 * z.im).max(1.0);
    let mut sol =
        solve_direct(s, Complex64::new(z.re, height), d, &QveOptions { init: Init::MinusInverseZ, ..opts.clone() })?;
    let mut iterations = sol.iterations;
    while height > z.im {
        height = (height * 0.5).max(z.im);
        let step = QveOptions { init: Init::Given(sol.m), ..opts.clone() };
        sol = solve_direct(s, Complex64::new(z.re, height), d, &step)?;
        iterations += sol.iterations;
    }
    sol.iterations = iterations;
    Ok(sol)
}

fn solve_direct(s: &DMatrix<f64>, z: Complex64, d: &[Complex64], opts: &QveOptions) -> Result<PointSolution> {
    let k = s.nrows();
    let mut m: Vec<Complex64> = match &opts.init {
        Init::MinusInverseZ => vec![-1.0 / z; k],
        Init::ImaginaryUnit => vec![Complex64::i(); k],
        Init::Given(v) if v.len() == k && v.iter().all(|x| x.im > 0.0) => v.clone(),
        Init::Given(_) => {
            return Err(Error::PreconditionViolated("initial vector must lie in the upper half plane".into()))
        }
    };
    let mut sm = vec![Complex64::new(0.0, 0.0); k];
    let mut omega: f64 = 1.0;
    let mut streak = 0usize;
    let (mut f, mut res) = fixed_map(s, z, d, &m, &mut sm);
    let use_newton = opts.newton && k <= NEWTON_MAX_PARTS;
    for iter in 0..opts.max_iter {
        if res <= opts.tol {
            return Ok(PointSolution { m, residual: res, iterations: iter });
        }
        if use_newton && (res < 1e-2 || iter % 25 == 24) {
            if let Some((cand, f2, res2, sm2)) = newton_search(s, z, d, &m, &sm, res) {
                m = cand;
                f = f2;
                res = res2;
                sm = sm2;
                continue;
            }
        }
        let next: Vec<Complex64> = m.iter().zip(&f).map(|(a, b)| (1.0 - omega) * a + omega * b).collect();
        let (f2, res2) = fixed_map(s, z, d, &next, &mut sm);
        if res2 > res {
            omega *= 0.5;
            streak = 0;
        } else {
            streak += 1;
            if streak >= 10 {
                omega = (omega * 1.5).min(1.0);
                streak = 0;
            }
        }
        m = next;
        f = f2;
        res = res2;
    }
    if res <= opts.tol {
        return Ok(PointSolution { m, residual: res, iterations: opts.max_iter });
    }
    Err(Error::NotConverged { z, residual: res })
}

type Candidate = (Vec<Complex64>, Vec<Complex64>, f64, Vec<Complex64>);

/// Newton direction with backtracking; accepts the first step that stays in
/// the upper half plane and lowers the residual.
fn newton_search(
    s: &DMatrix<f64>,
    z: Complex64,
    d: &[Complex64],
    m: &[Complex64],
    sm: &[Complex64],
    res: f64,
) -> Option<Candidate> {
    let delta = newton_direction(s, z, d, m, sm)?;
    let k = m.len();
    let mut t = 1.0;
    for _ in 0..20 {
        let cand: Vec<Complex64> = (0..k).map(|i| m[i] - t * delta[i]).collect();
        if cand.iter().all(|v| v.im > 0.0 && v.is_finite()) {
            let mut sm2 = vec![Complex64::new(0.0, 0.0); k];
            let (f2, res2) = fixed_map(s, z, d, &cand, &mut sm2);
            if res2 < res {
                return Some((cand, f2, res2, sm2));
            }
        }
        t *= 0.5;
    }
    None
}
/// Per-point solve; failures are reported individually.
pub fn solve_qve_points(w: &StepKernel, z_points: &[Complex64], opts: &QveOptions) -> Vec<Result<PointSolution>> {
    let s = variance_matrix(w);
    let d = vec![Complex64::new(0.0, 0.0); w.parts()];
    z_points.iter().map(|&z| solve_point(&s, z, &d, opts)).collect()
}

/// Solves at every point, failing on the first point that does not converge.
pub fn solve_qve(w: &StepKernel, z_points: &[Complex64]) -> Result<QveSolution> {
    solve_qve_with(w, z_points, &QveOptions::default())
}

pub fn solve_qve_with(w: &StepKernel, z_points: &[Complex64], opts: &QveOptions) -> Result<QveSolution> {
    let mut m_values = Vec::with_capacity(z_points.len());
    let mut residuals = Vec::with_capacity(z_points.len());
    for r in solve_qve_points(w, z_points, opts) {
        let p = r?;
        m_values.push(p.m);
        residuals.push(p.residual);
    }
    Ok(QveSolution { z_points: z_points.to_vec(), m_values, residuals })
}

/// `Σ_i λ_i m_i(z)`, the Stieltjes transform of the QVE measure.
pub fn qve_stieltjes(w: &StepKernel, z: Complex64) -> Result<Complex64> {
    let sol = solve_qve(w, &[z])?;
    Ok(average(w.measures(), &sol.m_values[0]))
}

fn average(lam: &[f64], m: &[Complex64]) -> Complex64 {
    lam.iter().zip(m).map(|(l, v)| l * v).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub eta: f64,
}

impl SpectralGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, eta: f64) -> Result<Self> {
        if !(x_min < x_max) || n_points < 2 || !(eta > 0.0) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::PreconditionViolated(format!("invalid grid {x_min}:{x_max}:{n_points}:{eta}")));
        }
        Ok(SpectralGrid { x_min, x_max, n_points, eta })
    }

    /// Default grid over `[-s-1, s+1]` with `s` the support bound.
    pub fn for_kernel(w: &StepKernel) -> Self {
        let s = support_bound(w);
        SpectralGrid { x_min: -s - 1.0, x_max: s + 1.0, n_points: DEFAULT_GRID_POINTS, eta: DEFAULT_ETA }
    }

    pub fn points(&self) -> Vec<f64> {
        let h = (self.x_max - self.x_min) / (self.n_points - 1) as f64;
        (0..self.n_points).map(|i| self.x_min + h * i as f64).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InversionOptions {
    /// Two-point extrapolation `2ρ(η/2) - ρ(η)`, clipped at zero.
    pub richardson: bool,
    pub solver: QveOptions,
}

/// `Im s(x + iη)/π` along the grid, warm-starting each solve from its neighbour.
pub fn smoothed_density(w: &StepKernel, xs: &[f64], eta: f64, solver: &QveOptions) -> Result<Vec<f64>> {
    let s = variance_matrix(w);
    let k = w.parts();
    let d = vec![Complex64::new(0.0, 0.0); k];
    let lam = w.measures();
    let mut out = Vec::with_capacity(xs.len());
    let mut prev: Option<Vec<Complex64>> = None;
    for &x in xs {
        let z = Complex64::new(x, eta);
        let mut opts = solver.clone();
        if let (Some(p), Init::MinusInverseZ) = (&prev, &solver.init) {
            opts.init = Init::Given(p.clone());
        }
        let sol = match solve_point(&s, z, &d, &opts) {
            Ok(sol) => sol,
            Err(_) if prev.is_some() => solve_point(&s, z, &d, solver)?,
            Err(e) => return Err(e),
        };
        out.push(average(lam, &sol.m).im / std::f64::consts::PI);
        prev = Some(sol.m);
    }
    Ok(out)
}

/// QVE measure with default inversion (no extrapolation).
pub fn qve_measure(w: &StepKernel, grid: &SpectralGrid) -> Result<ProbMeasure1D> {
    qve_measure_with(w, grid, &InversionOptions::default())
}

pub fn qve_measure_with(w: &StepKernel, grid: &SpectralGrid, opts: &InversionOptions) -> Result<ProbMeasure1D> {
    let xs = grid.points();
    let mut rho = smoothed_density(w, &xs, grid.eta, &opts.solver)?;
    if opts.richardson {
        let half = smoothed_density(w, &xs, grid.eta / 2.0, &opts.solver)?;
        for (r, h) in rho.iter_mut().zip(&half) {
            *r = (2.0 * h - *r).max(0.0);
        }
    }
    let (_, mass) = trapezoid_cdf(&xs, &rho)?;
    if mass < MIN_MASS {
        return Err(Error::GridTooNarrow { mass });
    }
    ProbMeasure1D::from_density(xs, rho)
}

/// `2 ‖S‖_∞^{1/2}`.
pub fn support_bound(w: &StepKernel) -> f64 {
    2.0 * s_norm(w).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn l2(lam: &[f64], v: impl Iterator<Item = f64>) -> f64 {
    lam.iter().zip(v).map(|(l, x)| l * x * x).sum::<f64>().sqrt()
}

/// Smallest admissible `Im z` for [`stability_check`] at a given `Re z`.
pub fn stability_threshold(w: &StepKernel, re: f64) -> f64 {
    let s = s_norm(w).max(1.0);
    (KAPPA * s * s).max(re.abs())
}

/// Compares `‖m - m̃‖_{L²}` with `κ (‖S‖_∞ ∨ 1) ‖d‖_{L²}` where `m̃` solves
/// the equation perturbed by `d`.
pub fn stability_check(w: &StepKernel, d: &[Complex64], z: Complex64) -> Result<StabilityReport> {
    let k = w.parts();
    if d.len() != k {
        return Err(Error::PreconditionViolated(format!("perturbation has {} entries, expected {k}", d.len())));
    }
    let need = stability_threshold(w, z.re);
    if !(z.im >= need) {
        return Err(Error::PreconditionViolated(format!("Im z = {} below {need}", z.im)));
    }
    let s = variance_matrix(w);
    let opts = QveOptions::default();
    let zero = vec![Complex64::new(0.0, 0.0); k];
    let m = solve_point(&s, z, &zero, &opts)?.m;
    let mt = solve_point(&s, z, d, &opts)?.m;
    let lam = w.measures();
    let lhs = l2(lam, m.iter().zip(&mt).map(|(a, b)| (a - b).norm()));
    let rhs = KAPPA * s_norm(w).max(1.0) * l2(lam, d.iter().map(|x| x.norm()));
    Ok(StabilityReport { lhs, rhs, holds: lhs <= rhs })
}

/// Semicircle density `(2π)^{-1} √(4 - x²)_+`.
pub fn semicircle_density(x: f64) -> f64 {
    (4.0 - x * x).max(0.0).sqrt() / (2.0 * std::f64::consts::PI)
}

/// Semicircle CDF in closed form.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * std::f64::consts::PI) + (x / 2.0).asin() / std::f64::consts::PI
    }
}

/// Semicircle law sampled on the grid, with its exact CDF (renormalized to
/// the grid window when the window does not cover `[-2, 2]`).
pub fn semicircle_reference(grid: &SpectralGrid) -> ProbMeasure1D {
    let x = grid.points();
    let density: Vec<f64> = x.iter().map(|&t| semicircle_density(t)).collect();
    let lo = semicircle_cdf(grid.x_min);
    let hi = semicircle_cdf(grid.x_max);
    let cdf: Vec<f64> = x.iter().map(|&t| (semicircle_cdf(t) - lo) / (hi - lo)).collect();
    ProbMeasure1D::Grid { x, density, cdf }
}

/// Stieltjes transform of the semicircle law, `(-z + √(z² - 4))/2` on the
/// branch with positive imaginary part.
pub fn semicircle_stieltjes(z: Complex64) -> Complex64 {
    let r = (z * z - 4.0).sqrt();
    let a = (-z + r) / 2.0;
    if a.im > 0.0 {
        a
    } else {
        (-z - r) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent oracle: plain damped iteration with a fixed small step.
    fn oracle(w: &StepKernel, z: Complex64) -> Vec<Complex64> {
        let k = w.parts();
        let lam = w.measures();
        let mut m = vec![c(0.0, 1.0); k];
        for _ in 0..200_000 {
            let next: Vec<Complex64> = (0..k)
                .map(|i| {
                    let sm: Complex64 = (0..k).map(|j| w.value(i, j) * lam[j] * m[j]).sum();
                    -1.0 / (z + sm)
                })
                .collect();
            let diff = (0..k).map(|i| (next[i] - m[i]).norm()).fold(0.0, f64::max);
            m = (0..k).map(|i| 0.5 * m[i] + 0.5 * next[i]).collect();
            if diff < 1e-14 {
                break;
            }
        }
        m
    }

    #[test]
    fn constant_kernel_closed_forms() {
        let one = StepKernel::constant(1.0).unwrap();
        let s = solve_qve(&one, &[c(0.0, 2.0), c(0.0, 10.0)]).unwrap();
        assert!((s.m_values[0][0] - c(0.0, 2f64.sqrt() - 1.0)).norm() < 1e-12);
        assert!((s.m_values[1][0] - c(0.0, (104f64.sqrt() - 10.0) / 2.0)).norm() < 1e-12);
        assert!(s.residuals.iter().all(|&r| r <= SOLVER_TOL));
        assert!((qve_stieltjes(&one, c(0.0, 2.0)).unwrap() - c(0.0, 2f64.sqrt() - 1.0)).norm() < 1e-12);
    }

    #[test]
    fn symmetric_two_part_reduces_to_scalar() {
        let (a, b) = (1.5, 0.7);
        let w = StepKernel::uniform(vec![vec![a, b], vec![b, a]]).unwrap();
        let scalar = StepKernel::constant((a + b) / 2.0).unwrap();
        for z in [c(0.3, 0.5), c(-1.0, 2.0), c(0.0, 0.1)] {
            let m = solve_qve(&w, &[z]).unwrap().m_values.remove(0);
            let ms = solve_qve(&scalar, &[z]).unwrap().m_values[0][0];
            assert!((m[0] - m[1]).norm() < 1e-11);
            assert!((m[0] - ms).norm() < 1e-11);
        }
    }

    #[test]
    fn block_kernel_matches_oracle() {
        let w = StepKernel::uniform(vec![vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let z = c(0.0, 3.0);
        let m = oracle(&w, z);
        let expected = 0.5 * (m[0] + m[1]);
        assert!((qve_stieltjes(&w, z).unwrap() - expected).norm() < 1e-12);
        assert!(qve_stieltjes(&w, z).unwrap().norm() <= 1.0 / 3.0);
    }

    #[test]
    fn initializations_agree() {
        let w = StepKernel::uniform(vec![vec![3.0, 0.5, 0.0], vec![0.5, 0.1, 2.0], vec![0.0, 2.0, 1.0]]).unwrap();
        for z in [c(0.5, 0.1), c(-2.0, 0.3), c(1.0, 1.0)] {
            let a = solve_qve_with(&w, &[z], &QveOptions::default()).unwrap();
            let b = solve_qve_with(&w, &[z], &QveOptions { init: Init::ImaginaryUnit, ..Default::default() }).unwrap();
            for (x, y) in a.m_values[0].iter().zip(&b.m_values[0]) {
                assert!((x - y).norm() < 1e-10);
                assert!(x.im > 0.0);
            }
        }
    }

    #[test]
    fn rejects_real_axis() {
        let one = StepKernel::constant(1.0).unwrap();
        assert!(solve_qve(&one, &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn support_bound_examples() {
        assert_eq!(support_bound(&StepKernel::constant(1.0).unwrap()), 2.0);
        assert_eq!(support_bound(&StepKernel::constant(0.0).unwrap()), 0.0);
        let w = StepKernel::uniform(vec![vec![4.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!((support_bound(&w) - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn semicircle_measure_from_inversion() {
        let one = StepKernel::constant(1.0).unwrap();
        let grid = SpectralGrid::for_kernel(&one);
        let mu = qve_measure(&one, &grid).unwrap();
        if let ProbMeasure1D::Grid { x, density, .. } = &mu {
            let mid = x.iter().position(|&t| t >= 0.0).unwrap();
            assert!((density[mid] - 1.0 / std::f64::consts::PI).abs() < 2e-3);
        } else {
            panic!("grid measure expected");
        }
        for t in [0.3, 1.0, 1.7] {
            assert!((mu.cdf(-t) + mu.cdf(t) - 1.0).abs() <= 1e-3);
        }
    }

    #[test]
    fn zero_kernel_collapses_at_origin() {
        let zero = StepKernel::constant(0.0).unwrap();
        let grid = SpectralGrid::for_kernel(&zero);
        let mu = qve_measure(&zero, &grid).unwrap();
        assert!(mu.cdf(0.05) - mu.cdf(-0.05) > 0.97);
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let one = StepKernel::constant(1.0).unwrap();
        let grid = SpectralGrid::new(-1.0, 1.0, 500, 1e-3).unwrap();
        assert!(matches!(qve_measure(&one, &grid), Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn semicircle_reference_moments() {
        let grid = SpectralGrid::new(-3.0, 3.0, 2000, DEFAULT_ETA).unwrap();
        let mu = semicircle_reference(&grid);
        assert!((mu.total_mass() - 1.0).abs() < 1e-6);
        assert!((mu.moment(2) - 1.0).abs() < 1e-4);
        assert!((mu.moment(4) - 2.0).abs() < 1e-3);
        let m = mu.stieltjes(c(0.0, 2.0));
        assert!((m - c(0.0, 2f64.sqrt() - 1.0)).norm() < 1e-4);
    }

    #[test]
    fn stability_examples() {
        let one = StepKernel::constant(1.0).unwrap();
        let r = stability_check(&one, &[c(0.0, 0.0)], c(0.0, 200.0)).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.holds);
        let r = stability_check(&one, &[c(0.01, 0.0)], c(0.0, 200.0)).unwrap();
        assert!(r.holds && r.lhs < r.rhs / 100.0);
        assert!(stability_check(&one, &[c(0.01, 0.0)], c(0.0, 2.0)).is_err());
    }

    #[test]
    fn semicircle_stieltjes_branch() {
        for z in [c(0.0, 2.0), c(1.0, 0.01), c(-3.0, 0.5)] {
            let m = semicircle_stieltjes(z);
            assert!(m.im > 0.0);
            assert!((m * m + z * m + 1.0).norm() < 1e-12);
        }
    }
}
