//! Rooted planar trees, homomorphism densities and the tree moment formula.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{cut_norm, CutNormMode, StepKernel, EXACT_CUT_NORM_MAX_PARTS};

/// Largest edge count accepted by [`enumerate_trees`].
pub const MAX_TREE_EDGES: usize = 10;

/// A rooted planar tree stored as its Dyck word (`true` = step away from the
/// root). Vertices are numbered in preorder with the root as `0`; the edge
/// above vertex `v` has index `v - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootedPlanarTree {
    word: Vec<bool>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
}

impl RootedPlanarTree {
    pub fn from_dyck(word: Vec<bool>) -> Result<Self> {
        let mut parent = vec![usize::MAX];
        let mut children = vec![Vec::new()];
        let mut stack = vec![0usize];
        for &up in &word {
            if up {
                let v = parent.len();
                let top = *stack.last().unwrap();
                parent.push(top);
                children.push(Vec::new());
                children[top].push(v);
                stack.push(v);
            } else {
                if stack.len() == 1 {
                    return Err(Error::Parse("Dyck word dips below zero".into()));
                }
                stack.pop();
            }
        }
        if stack.len() != 1 {
            return Err(Error::Parse("Dyck word is unbalanced".into()));
        }
        Ok(RootedPlanarTree { word, parent, children })
    }

    /// Parses a string of `1` (up) and `0` (down).
    pub fn parse(s: &str) -> Result<Self> {
        let word = s
            .chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(Error::Parse(format!("unexpected character {other:?} in Dyck word"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_dyck(word)
    }

    pub fn root_only() -> Self {
        RootedPlanarTree { word: Vec::new(), parent: vec![usize::MAX], children: vec![Vec::new()] }
    }

    /// Path with `k` edges hanging from the root.
    pub fn path(k: usize) -> Self {
        let mut w = vec![true; k];
        w.extend(std::iter::repeat_n(false, k));
        Self::from_dyck(w).expect("balanced")
    }

    /// Root with `k` leaf children.
    pub fn star(k: usize) -> Self {
        Self::from_dyck((0..k).flat_map(|_| [true, false]).collect()).expect("balanced")
    }

    pub fn dyck(&self) -> &[bool] {
        &self.word
    }

    pub fn edges(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn vertices(&self) -> usize {
        self.parent.len()
    }

    /// Parent of `v`, `None` for the root.
    pub fn parent(&self, v: usize) -> Option<usize> {
        (v > 0).then(|| self.parent[v])
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }
}

impl fmt::Display for RootedPlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.word {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for RootedPlanarTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// All rooted planar trees with `k` edges, in lexicographic order of their
/// Dyck words (down before up).
pub fn enumerate_trees(k: usize) -> Result<Vec<RootedPlanarTree>> {
    if k > MAX_TREE_EDGES {
        return Err(Error::KTooLarge { k, max: MAX_TREE_EDGES });
    }
    fn rec(word: &mut Vec<bool>, ups: usize, downs: usize, k: usize, out: &mut Vec<RootedPlanarTree>) {
        if ups == k && downs == k {
            out.push(RootedPlanarTree::from_dyck(word.clone()).expect("balanced"));
            return;
        }
        if downs < ups {
            word.push(false);
            rec(word, ups, downs + 1, k, out);
            word.pop();
        }
        if ups < k {
            word.push(true);
            rec(word, ups + 1, downs, k, out);
            word.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(2 * k), 0, 0, k, &mut out);
    Ok(out)
}

pub fn catalan(k: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..k as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

fn check_decoration(tree: &RootedPlanarTree, w: &[&StepKernel]) -> Result<()> {
    if w.len() != tree.edges() {
        return Err(Error::PreconditionViolated(format!(
            "tree has {} edges but {} kernels were given",
            tree.edges(),
            w.len()
        )));
    }
    if w.windows(2).any(|p| p[0].partition() != p[1].partition()) {
        return Err(Error::PartitionMismatch);
    }
    Ok(())
}

/// Per-part messages `g_v(a)` for every vertex, computed leaves first.
fn messages(tree: &RootedPlanarTree, w: &[&StepKernel], lam: &[f64]) -> Vec<Vec<f64>> {
    let k = lam.len();
    let n = tree.vertices();
    let mut g = vec![vec![1.0; k]; n];
    for v in (0..n).rev() {
        for &c in tree.children(v) {
            let we = w[c - 1];
            let mut msg = vec![0.0; k];
            for (a, m) in msg.iter_mut().enumerate() {
                *m = (0..k).map(|b| we.value(a, b) * lam[b] * g[c][b]).sum();
            }
            for a in 0..k {
                g[v][a] *= msg[a];
            }
        }
    }
    g
}

/// `t(F, w)` with kernel `w[v - 1]` on the edge above vertex `v`.
pub fn hom_density_decorated(tree: &RootedPlanarTree, w: &[&StepKernel]) -> Result<f64> {
    if tree.edges() == 0 {
        return Ok(1.0);
    }
    check_decoration(tree, w)?;
    let lam = w[0].measures();
    let g = messages(tree, w, lam);
    Ok(lam.iter().zip(&g[0]).map(|(l, x)| l * x).sum())
}

/// `t_{x_o}(F, w)` for `x_o` in the given part.
pub fn rooted_hom_density_decorated(tree: &RootedPlanarTree, w: &[&StepKernel], part: usize) -> Result<f64> {
    if tree.edges() == 0 {
        return Ok(1.0);
    }
    check_decoration(tree, w)?;
    if part >= w[0].parts() {
        return Err(Error::PreconditionViolated(format!("part {part} out of range")));
    }
    Ok(messages(tree, w, w[0].measures())[0][part])
}

/// `t(F, W) = ∫ Π_{ij ∈ E(F)} W(x_i, x_j) Π dx_i`.
pub fn hom_density(tree: &RootedPlanarTree, w: &StepKernel) -> f64 {
    let deco = vec![w; tree.edges()];
    hom_density_decorated(tree, &deco).expect("single kernel decoration is valid")
}

pub fn rooted_hom_density(tree: &RootedPlanarTree, w: &StepKernel, part: usize) -> Result<f64> {
    let deco = vec![w; tree.edges()];
    rooted_hom_density_decorated(tree, &deco, part)
}

/// `∫ τ^order dυ_W`: zero for odd orders, the sum of `t(F, W)` over trees with
/// `order / 2` edges otherwise.
pub fn qve_moment(order: usize, w: &StepKernel) -> Result<f64> {
    if order % 2 == 1 {
        return Ok(0.0);
    }
    let trees = enumerate_trees(order / 2)?;
    Ok(trees.iter().map(|t| hom_density(t, w)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn max_sup_degree(ws: &[&StepKernel]) -> f64 {
    ws.iter().map(|w| w.max_degree()).fold(0.0, f64::max)
}

/// `|t(F,w) - t(F,w')| ≤ M^{e(F)-1} Σ_e ‖W_e - W'_e‖_□` with `M` the largest
/// sup-degree among all kernels. The cut norm is exact up to
/// [`EXACT_CUT_NORM_MAX_PARTS`] parts and a lower bound beyond.
pub fn counting_lemma_check(tree: &RootedPlanarTree, w: &[&StepKernel], w2: &[&StepKernel]) -> Result<BoundReport> {
    let e = tree.edges();
    if e == 0 {
        return Ok(BoundReport { lhs: 0.0, rhs: 0.0, holds: true });
    }
    check_decoration(tree, w)?;
    check_decoration(tree, w2)?;
    if w[0].partition() != w2[0].partition() {
        return Err(Error::PartitionMismatch);
    }
    let lhs = (hom_density_decorated(tree, w)? - hom_density_decorated(tree, w2)?).abs();
    let all: Vec<&StepKernel> = w.iter().chain(w2).copied().collect();
    let m = max_sup_degree(&all);
    let mode = if w[0].parts() <= EXACT_CUT_NORM_MAX_PARTS { CutNormMode::Exact } else { CutNormMode::heuristic() };
    let mut total = 0.0;
    for (a, b) in w.iter().zip(w2) {
        total += cut_norm(&a.difference(b), mode)?.value;
    }
    let rhs = m.powi(e as i32 - 1) * total;
    Ok(BoundReport { lhs, rhs, holds: lhs <= rhs + 1e-12 })
}

/// `t_{x_o}(F, w) ≤ (max_e ‖d_{W_e}‖_∞)^{e(F)}` at a root in the given part.
pub fn degree_bound_check(tree: &RootedPlanarTree, w: &[&StepKernel], part: usize) -> Result<BoundReport> {
    let lhs = rooted_hom_density_decorated(tree, w, part)?;
    let rhs = max_sup_degree(w).powi(tree.edges() as i32);
    Ok(BoundReport { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) + 1e-300 })
}

/// Moment table `(order, value)` for orders `0..=max_order`.
pub fn moment_table(w: &StepKernel, max_order: usize) -> Result<Vec<(usize, f64)>> {
    (0..=max_order).map(|k| qve_moment(k, w).map(|v| (k, v))).collect()
}
