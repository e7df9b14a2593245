//! Rate functions: the cumulant `L(θ) = E e^{θA²} - 1`, its Legendre
//! conjugate `h_L`, kernel entropy, thresholds and closed-form tail bounds.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{exact_sum, StepKernel};
use crate::measure::{metric_d_grid, ProbMeasure1D};
use crate::qve::{solve_qve_points, QveOptions};

/// Tolerance on the law's mass, mean and variance.
pub const LAW_TOL: f64 = 1e-12;
/// Tolerance of [`k_alpha`] on `ψ(u) = h_L(u)/u`.
pub const K_ALPHA_TOL: f64 = 1e-10;
/// Tolerance of the golden-section search behind [`chaos_exponent`].
pub const GOLDEN_TOL: f64 = 1e-10;
const TABLE_POINTS: usize = 201;

/// Discrete law of an entry `A_12`: finite support, mean 0, variance 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryLaw {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl EntryLaw {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::InvalidLaw("support and probs must be nonempty and of equal length".into()));
        }
        if support.iter().any(|v| !v.is_finite()) || probs.iter().any(|&q| !(q > 0.0) || !q.is_finite()) {
            return Err(Error::InvalidLaw("values must be finite and probabilities positive".into()));
        }
        let mass: f64 = probs.iter().sum();
        let mean: f64 = support.iter().zip(&probs).map(|(v, q)| v * q).sum();
        let var: f64 = support.iter().zip(&probs).map(|(v, q)| v * v * q).sum();
        if (mass - 1.0).abs() > LAW_TOL {
            return Err(Error::InvalidLaw(format!("probabilities sum to {mass}")));
        }
        if mean.abs() > LAW_TOL {
            return Err(Error::InvalidLaw(format!("mean is {mean}, expected 0")));
        }
        if (var - 1.0).abs() > LAW_TOL {
            return Err(Error::InvalidLaw(format!("variance is {var}, expected 1")));
        }
        Ok(EntryLaw { support, probs })
    }

    /// `±1` with probability `1/2` each.
    pub fn rademacher() -> Self {
        EntryLaw { support: vec![-1.0, 1.0], probs: vec![0.5, 0.5] }
    }

    /// `±√2` with probability `1/4` each, `0` with probability `1/2`.
    pub fn sparse3() -> Self {
        let r = std::f64::consts::SQRT_2;
        EntryLaw { support: vec![-r, 0.0, r], probs: vec![0.25, 0.5, 0.25] }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            support: Vec<f64>,
            probs: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        Self::new(raw.support, raw.probs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("law serializes")
    }

    /// `"rademacher"`, `"sparse3"` or a path to a JSON law file.
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec {
            "rademacher" => Ok(Self::rademacher()),
            "sparse3" => Ok(Self::sparse3()),
            path => Self::from_json(&std::fs::read_to_string(Path::new(path))?),
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Essential bound `R = max |v|`.
    pub fn bound(&self) -> f64 {
        self.support.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `P(A = 0)`.
    pub fn zero_mass(&self) -> f64 {
        self.support.iter().zip(&self.probs).filter(|(v, _)| **v == 0.0).map(|(_, q)| q).sum()
    }
}

/// An entry law with its cumulant `L`, and a cached inverse of `L'`.
#[derive(Debug)]
pub struct LegendrePair {
    law: EntryLaw,
    /// `(θ, ln L'(θ))` on `[-50/R², 50/R²]`, increasing in both columns.
    table: Vec<(f64, f64)>,
    memo: Mutex<HashMap<u64, f64>>,
}

impl Clone for LegendrePair {
    fn clone(&self) -> Self {
        LegendrePair::new(self.law.clone())
    }
}

impl LegendrePair {
    pub fn new(law: EntryLaw) -> Self {
        let span = 50.0 / law.bound().powi(2);
        let mut pair = LegendrePair { law, table: Vec::new(), memo: Mutex::new(HashMap::new()) };
        pair.table = (0..TABLE_POINTS)
            .map(|i| {
                let theta = -span + 2.0 * span * i as f64 / (TABLE_POINTS - 1) as f64;
                (theta, pair.ln_l_prime(theta))
            })
            .collect();
        pair
    }

    pub fn law(&self) -> &EntryLaw {
        &self.law
    }

    /// `L(θ) = Σ p_v (e^{θv²} - 1)`.
    pub fn l(&self, theta: f64) -> f64 {
        self.law.support.iter().zip(&self.law.probs).map(|(v, q)| q * (theta * v * v).exp_m1()).sum()
    }

    /// `L'(θ) = Σ p_v v² e^{θv²}`.
    pub fn l_prime(&self, theta: f64) -> f64 {
        self.ln_l_prime(theta).exp()
    }

    /// `ln L'(θ)` by log-sum-exp over the nonzero atoms.
    pub fn ln_l_prime(&self, theta: f64) -> f64 {
        self.log_moments(theta).0
    }

    /// `(ln L'(θ), L''(θ)/L'(θ))`.
    fn log_moments(&self, theta: f64) -> (f64, f64) {
        let terms: Vec<(f64, f64)> = self
            .law
            .support
            .iter()
            .zip(&self.law.probs)
            .filter(|(v, _)| **v != 0.0)
            .map(|(v, q)| ((q * v * v).ln() + theta * v * v, v * v))
            .collect();
        let top = terms.iter().fold(f64::NEG_INFINITY, |m, t| m.max(t.0));
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for (a, v2) in &terms {
            let e = (a - top).exp();
            sum += e;
            weighted += e * v2;
        }
        (top + sum.ln(), weighted / sum)
    }

    /// `h_L'(u)`, the solution `θ` of `L'(θ) = u`, memoized.
    pub fn theta(&self, u: f64) -> Result<f64> {
        let key = u.to_bits();
        if let Some(&t) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(t);
        }
        let t = self.theta_uncached(u)?;
        self.memo.lock().expect("memo lock").insert(key, t);
        Ok(t)
    }

    /// Newton on `ln L'(θ) - ln u`, kept inside a shrinking bracket and
    /// falling back to bisection.
    pub fn theta_uncached(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::DomainError(format!("h_L' needs u > 0, got {u}")));
        }
        if u == 1.0 {
            // L'(0) = E A² = 1
            return Ok(0.0);
        }
        let target = u.ln();
        let (mut lo, mut hi) = self.bracket(target)?;
        let mut theta = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (g, slope) = self.log_moments(theta);
            let f = g - target;
            if f == 0.0 {
                return Ok(theta);
            }
            if f > 0.0 {
                hi = theta;
            } else {
                lo = theta;
            }
            let mut next = theta - f / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - theta).abs() <= 1e-15 * theta.abs().max(1.0) || hi - lo <= 1e-15 * hi.abs().max(1.0) {
                return Ok(next);
            }
            theta = next;
        }
        Err(Error::NoConvergence(u))
    }

    fn bracket(&self, target: f64) -> Result<(f64, f64)> {
        let first = self.table[0];
        let last = self.table[TABLE_POINTS - 1];
        if target >= first.1 && target <= last.1 {
            let i = self.table.partition_point(|&(_, g)| g < target).clamp(1, TABLE_POINTS - 1);
            return Ok((self.table[i - 1].0, self.table[i].0));
        }
        let (mut lo, mut hi) = (first.0, last.0);
        for _ in 0..64 {
            if self.ln_l_prime(lo) > target {
                hi = lo;
                lo *= 2.0;
            } else if self.ln_l_prime(hi) < target {
                lo = hi;
                hi *= 2.0;
            } else {
                return Ok((lo, hi));
            }
        }
        Err(Error::NoConvergence(target.exp()))
    }

    /// `h_L(u) = sup_θ {θu - L(θ)}`: `+∞` for `u < 0`, `1 - P(A = 0)` at `u = 0`.
    pub fn h(&self, u: f64) -> Result<f64> {
        if u.is_nan() {
            return Err(Error::DomainError("h_L(NaN)".into()));
        }
        if u < 0.0 {
            return Ok(f64::INFINITY);
        }
        if u == 0.0 {
            return Ok(1.0 - self.law.zero_mass());
        }
        let theta = self.theta(u)?;
        Ok(theta * u - self.l(theta))
    }

    /// [`LegendrePair::h`] bypassing the memo.
    pub fn h_uncached(&self, u: f64) -> Result<f64> {
        if u <= 0.0 || u.is_nan() {
            return self.h(u);
        }
        let theta = self.theta_uncached(u)?;
        Ok(theta * u - self.l(theta))
    }
}

pub fn cgf_l(pair: &LegendrePair, theta: f64) -> f64 {
    pair.l(theta)
}

pub fn legendre_h_l(pair: &LegendrePair, u: f64) -> Result<f64> {
    pair.h(u)
}

/// `H(W) = ½ Σ_ij h_L(W_ij) λ_i λ_j`, summed with correct rounding so the
/// value does not depend on the order of the parts.
pub fn kernel_entropy(pair: &LegendrePair, w: &StepKernel) -> Result<f64> {
    let k = w.parts();
    let lam = w.measures();
    let mut terms = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            terms.push(pair.h(w.value(i, j))? * lam[i] * lam[j]);
        }
    }
    Ok(0.5 * exact_sum(terms))
}

/// `h(u) = u ln u - u + 1`, with `h(0) = 1`.
pub fn er_rate_h(u: f64) -> Result<f64> {
    if u < 0.0 || u.is_nan() {
        return Err(Error::NegativeInput(u));
    }
    if u == 0.0 {
        return Ok(1.0);
    }
    Ok(u * u.ln() - u + 1.0)
}

/// `ψ(u) = h_L(u)/u`.
pub fn psi(pair: &LegendrePair, u: f64) -> Result<f64> {
    Ok(pair.h(u)? / u)
}

/// The `u > 1` with `ψ(u) = α/ε`, by bisection in `ln u`.
pub fn k_alpha(pair: &LegendrePair, alpha: f64, eps: f64) -> Result<f64> {
    if !(alpha >= 1.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DomainError(format!("need α ≥ 1 and ε in (0,1), got α = {alpha}, ε = {eps}")));
    }
    let target = alpha / eps;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while psi(pair, hi.exp())? < target {
        lo = hi;
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::NoConvergence(target));
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = psi(pair, mid.exp())?;
        if (v - target).abs() <= K_ALPHA_TOL {
            break;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(mid.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BennettBound {
    /// `exp(-(λ/a) h(t/λ))`.
    pub bound: f64,
    /// `exp(-(t/a) ln(t/3λ))`, capped at 1.
    pub weak: f64,
}

pub fn dependent_bennett_bound(lambda: f64, a: f64, t: f64) -> Result<BennettBound> {
    if !(lambda > 0.0 && a > 0.0 && t > lambda) || !t.is_finite() {
        return Err(Error::DomainError(format!("need λ > 0, a > 0, t > λ; got λ = {lambda}, a = {a}, t = {t}")));
    }
    let bound = (-(lambda / a) * er_rate_h(t / lambda)?).exp();
    let weak = (-(t / a) * (t / (3.0 * lambda)).ln()).exp().min(1.0);
    Ok(BennettBound { bound, weak })
}

/// `h̃(x) = sup_{θ ≥ 0} {θx - (e^{θ²} - 1)}` by golden-section search.
pub fn chaos_exponent(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::DomainError(format!("h̃ needs x ≥ 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let obj = |t: f64| t * x - (t * t).exp_m1();
    // the maximizer solves 2θ e^{θ²} = x, so it lies below this bracket end
    let mut hi: f64 = 1.0;
    while 2.0 * hi * (hi * hi).exp() < x {
        hi *= 2.0;
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    while b - a > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = obj(d);
        }
    }
    Ok(obj(0.5 * (a + b)).max(0.0))
}

/// `2 exp(-np h̃((t/16) √ln(1/p)))`.
pub fn chaos_tail_bound(t: f64, p: f64, np: f64) -> Result<f64> {
    if !(t > 0.0) || !(p > 0.0 && p < 1.0) || !(np > 0.0) {
        return Err(Error::DomainError(format!("need t > 0, p in (0,1), np > 0; got t = {t}, p = {p}, np = {np}")));
    }
    let x = (t / 16.0) * (1.0 / p).ln().sqrt();
    Ok(2.0 * (-np * chaos_exponent(x)?).exp())
}

/// `q exp(-(H + e^{-1})/q)`, a lower bound on `P(E)` when `Q(E) = q`.
pub fn change_of_measure_bound(h_rel: f64, q: f64) -> Result<f64> {
    if !(h_rel >= 0.0) || !(q > 0.0 && q <= 1.0) {
        return Err(Error::DomainError(format!("need H ≥ 0 and q in (0,1]; got H = {h_rel}, q = {q}")));
    }
    Ok(q * (-(h_rel + (-1f64).exp()) / q).exp())
}

/// `H(Q | P) = Σ q ln(q/p)` for discrete laws on a common index set;
/// `+∞` when `Q` is not absolutely continuous with respect to `P`.
pub fn relative_entropy(q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::DomainError("laws must have the same length".into()));
    }
    let mut total = 0.0;
    for (&a, &b) in q.iter().zip(p) {
        if a < 0.0 || b < 0.0 {
            return Err(Error::DomainError("probabilities must be nonnegative".into()));
        }
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += a * (a / b).ln();
    }
    Ok(total.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateUpperBound {
    pub best_kernel: StepKernel,
    pub h_value: f64,
    pub attained_distance: f64,
}

/// `metric_d` between a measure and the QVE measure of `W`, using the QVE
/// Stieltjes transform directly on the evaluation grid.
pub fn qve_metric_d(target: &ProbMeasure1D, w: &StepKernel) -> Result<f64> {
    let zs: Vec<Complex64> = metric_d_grid();
    let lam = w.measures();
    let mut best: f64 = 0.0;
    for (z, sol) in zs.iter().zip(solve_qve_points(w, &zs, &QveOptions::default())) {
        let m: Complex64 = lam.iter().zip(&sol?.m).map(|(l, v)| l * v).sum();
        best = best.max((m - target.stieltjes(*z)).norm());
    }
    Ok(best)
}

/// Smallest kernel entropy among family members whose QVE measure is within
/// `tol` of the target in `metric_d`. An upper bound on the rate of the target.
pub fn rate_upper_bound(
    pair: &LegendrePair,
    target: &ProbMeasure1D,
    family: &[StepKernel],
    tol: f64,
) -> Result<RateUpperBound> {
    let mut best: Option<RateUpperBound> = None;
    for w in family {
        let dist = qve_metric_d(target, w)?;
        if dist > tol {
            continue;
        }
        let h = kernel_entropy(pair, w)?;
        if best.as_ref().is_none_or(|b| h < b.h_value) {
            best = Some(RateUpperBound { best_kernel: w.clone(), h_value: h, attained_distance: dist });
        }
    }
    best.ok_or(Error::NoFeasibleKernel)
}
