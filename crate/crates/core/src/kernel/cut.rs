//! Cut norm and cut distance for step functions.
//!
//! The cut objective `∫ f(x) g(y) W(x,y)` is bilinear in the per-part
//! fractions of `f` and `g`, so its supremum over `[0,1]`-valued functions is
//! attained at 0/1 part indicators. For a fixed row set `S` the best column
//! set is the set of columns with positive (resp. negative) partial sums,
//! which turns the `4^k` enumeration into `2^k` inner maximizations.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Relabel, StepFunction};
use crate::error::{Error, Result};

pub const EXACT_CUT_NORM_MAX_PARTS: usize = 12;
pub const EXACT_CUT_DISTANCE_MAX_PARTS: usize = 8;
pub const ANNEAL_PROPOSALS: usize = 10_000;
pub const ANNEAL_COOLING: f64 = 0.995;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutNormMode {
    Exact,
    /// Randomized alternating maximization; returns a certified lower bound.
    Heuristic {
        restarts: usize,
        seed: u64,
    },
}

impl CutNormMode {
    pub fn heuristic() -> Self {
        CutNormMode::Heuristic { restarts: 32, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutNorm {
    pub value: f64,
    pub exact: bool,
    /// Part indicators of the maximizing rectangle `S x T`.
    pub rows: Vec<bool>,
    pub cols: Vec<bool>,
}

/// Correctly rounded sum of finite values, independent of their order
/// (Shewchuk partials with a half-even correction).
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for k in 0..partials.len() {
            let mut y = partials[k];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// `λ_i v_ij λ_j`, the mass of each cell.
fn cell_masses(f: &StepFunction) -> Vec<f64> {
    let k = f.parts();
    let lam = f.measures();
    let mut m = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            m.push(lam[i] * f.value(i, j) * lam[j]);
        }
    }
    m
}

/// Integral over `S x {j}`, correctly rounded.
fn column_mass(m: &[f64], k: usize, rows: &[bool], j: usize) -> f64 {
    exact_sum((0..k).filter(|&i| rows[i]).map(|i| m[i * k + j]))
}

/// Column integrals over the row set, then the best column sets of either
/// sign. Returns `(pos, neg, pos_cols, neg_cols)`.
///
/// Every rectangle value is the correctly rounded sum of its correctly
/// rounded column integrals, so results do not depend on the part order.
fn best_columns(m: &[f64], k: usize, rows: &[bool]) -> (f64, f64, Vec<bool>, Vec<bool>) {
    let cols: Vec<f64> = (0..k).map(|j| column_mass(m, k, rows, j)).collect();
    let pos_cols: Vec<bool> = cols.iter().map(|&r| r > 0.0).collect();
    let neg_cols: Vec<bool> = cols.iter().map(|&r| r < 0.0).collect();
    let pos = exact_sum(cols.iter().copied().filter(|&r| r > 0.0));
    let neg = exact_sum(cols.iter().copied().filter(|&r| r < 0.0));
    (pos, neg, pos_cols, neg_cols)
}

fn best_rows(m: &[f64], k: usize, cols: &[bool], sign: f64) -> Vec<bool> {
    (0..k)
        .map(|i| {
            let c = exact_sum((0..k).filter(|&j| cols[j]).map(|j| m[i * k + j]));
            sign * c > 0.0
        })
        .collect()
}

fn rect_value(m: &[f64], k: usize, rows: &[bool], cols: &[bool]) -> f64 {
    exact_sum((0..k).filter(|&j| cols[j]).map(|j| column_mass(m, k, rows, j)))
}

/// `‖W‖_□ = sup_{S,T} |∫_{S×T} W|`.
pub fn cut_norm(f: &StepFunction, mode: CutNormMode) -> Result<CutNorm> {
    let k = f.parts();
    let m = cell_masses(f);
    match mode {
        CutNormMode::Exact => {
            if k > EXACT_CUT_NORM_MAX_PARTS {
                return Err(Error::ExactTooLarge { max: EXACT_CUT_NORM_MAX_PARTS, got: k });
            }
            let mut best = CutNorm { value: 0.0, exact: true, rows: vec![false; k], cols: vec![false; k] };
            let mut rows = vec![false; k];
            for mask in 1u32..(1u32 << k) {
                for (i, r) in rows.iter_mut().enumerate() {
                    *r = mask >> i & 1 == 1;
                }
                let (pos, neg, pc, nc) = best_columns(&m, k, &rows);
                if pos > best.value {
                    best.value = pos;
                    best.rows.clone_from(&rows);
                    best.cols = pc;
                }
                if -neg > best.value {
                    best.value = -neg;
                    best.rows.clone_from(&rows);
                    best.cols = nc;
                }
            }
            Ok(best)
        }
        CutNormMode::Heuristic { restarts, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = CutNorm { value: 0.0, exact: false, rows: vec![false; k], cols: vec![false; k] };
            for _ in 0..restarts.max(1) {
                for sign in [1.0, -1.0] {
                    let mut rows: Vec<bool> = (0..k).map(|_| rng.gen::<bool>()).collect();
                    let mut current = f64::NEG_INFINITY;
                    for _ in 0..100 {
                        let (pos, neg, pc, nc) = best_columns(&m, k, &rows);
                        let (val, cols) = if sign > 0.0 { (pos, pc) } else { (-neg, nc) };
                        let next_rows = best_rows(&m, k, &cols, sign);
                        let improved = sign * rect_value(&m, k, &next_rows, &cols);
                        let v = val.max(improved);
                        if v > best.value {
                            best.value = v;
                            if improved >= val {
                                best.rows.clone_from(&next_rows);
                            } else {
                                best.rows.clone_from(&rows);
                            }
                            best.cols = cols;
                        }
                        if v <= current {
                            break;
                        }
                        current = v;
                        rows = next_rows;
                    }
                }
            }
            Ok(best)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutDistanceMode {
    Exact,
    Anneal { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutDistance {
    pub value: f64,
    pub exact: bool,
    /// Relabelling `σ` of the second kernel achieving `value`.
    pub permutation: Relabel,
}

fn align(a: &StepFunction, b: &StepFunction) -> Result<(StepFunction, StepFunction)> {
    if !a.partition().is_equal_measure() || !b.partition().is_equal_measure() {
        return Err(Error::PartMeasureMismatch);
    }
    if a.parts() == b.parts() {
        return Ok((a.clone(), b.clone()));
    }
    let common = a.partition().common_refinement(b.partition());
    Ok((a.refine_to(&common)?, b.refine_to(&common)?))
}

fn cut_of_relabelled(a: &StepFunction, b: &StepFunction, sigma: &Relabel) -> Result<f64> {
    let mode = if a.parts() <= EXACT_CUT_NORM_MAX_PARTS { CutNormMode::Exact } else { CutNormMode::heuristic() };
    let diff = a.difference(&b.relabel(sigma)?);
    Ok(cut_norm(&diff, mode)?.value)
}

/// `δ_□(W1, W2)` minimized over part permutations of `W2`.
pub fn cut_distance(a: &StepFunction, b: &StepFunction, mode: CutDistanceMode) -> Result<CutDistance> {
    let (a, b) = align(a, b)?;
    let k = a.parts();
    match mode {
        CutDistanceMode::Exact => {
            if k > EXACT_CUT_DISTANCE_MAX_PARTS {
                return Err(Error::ExactTooLarge { max: EXACT_CUT_DISTANCE_MAX_PARTS, got: k });
            }
            // Heap's algorithm; the first minimum in generation order wins
            let mut perm: Vec<usize> = (0..k).collect();
            let mut best_perm = Relabel::identity(k);
            let mut best = cut_of_relabelled(&a, &b, &best_perm)?;
            let mut c = vec![0usize; k];
            let mut i = 0;
            while i < k && best > 0.0 {
                if c[i] < i {
                    if i % 2 == 0 {
                        perm.swap(0, i);
                    } else {
                        perm.swap(c[i], i);
                    }
                    let sigma = Relabel::new(perm.clone())?;
                    let v = cut_of_relabelled(&a, &b, &sigma)?;
                    if v < best {
                        best = v;
                        best_perm = sigma;
                    }
                    c[i] += 1;
                    i = 0;
                } else {
                    c[i] = 0;
                    i += 1;
                }
            }
            Ok(CutDistance { value: best, exact: true, permutation: best_perm })
        }
        CutDistanceMode::Anneal { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(&mut rng);
            let mut current = cut_of_relabelled(&a, &b, &Relabel::new(perm.clone())?)?;
            let identity = cut_of_relabelled(&a, &b, &Relabel::identity(k))?;
            let (mut best, mut best_perm) =
                if identity <= current { (identity, (0..k).collect::<Vec<_>>()) } else { (current, perm.clone()) };
            let mut temperature = 0.1 * current.max(1e-12);
            if k >= 2 {
                for _ in 0..ANNEAL_PROPOSALS {
                    if best == 0.0 {
                        break;
                    }
                    let i = rng.gen_range(0..k);
                    let mut j = rng.gen_range(0..k - 1);
                    if j >= i {
                        j += 1;
                    }
                    perm.swap(i, j);
                    let v = cut_of_relabelled(&a, &b, &Relabel::new(perm.clone())?)?;
                    let accept = v <= current || rng.gen::<f64>() < ((current - v) / temperature).exp();
                    if accept {
                        current = v;
                        if v < best {
                            best = v;
                            best_perm.clone_from(&perm);
                        }
                    } else {
                        perm.swap(i, j);
                    }
                    temperature *= ANNEAL_COOLING;
                }
            }
            Ok(CutDistance { value: best, exact: false, permutation: Relabel::new(best_perm)? })
        }
    }
}
