//! Upper bounds on connective constants from walks that avoid every loop up to
//! a given size.
//!
//! A loop is a minimal disallowed path: dropping its last step or any number
//! of leading steps leaves an allowed path. Walks avoiding all loops of size at
//! most `k` are counted by a transfer matrix whose states are the prefixes of
//! those loops, identified up to lattice symmetry.

use std::collections::{BTreeSet, HashMap};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Direction, LatticeId, SymmetryOp};
use crate::walk_rules::{RuleChecker, WalkRule, WalkState};

/// A loop in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Loop {
    pub steps: Vec<u8>,
}

impl Loop {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Lexicographically smallest image of a step sequence under the point group.
pub fn canonical(group: &[SymmetryOp], steps: &[u8]) -> Vec<u8> {
    let mut best: Option<Vec<u8>> = None;
    for op in group {
        let img: Vec<u8> = steps.iter().map(|&s| op.perm[s as usize]).collect();
        if best.as_ref().is_none_or(|b| img < *b) {
            best = Some(img);
        }
    }
    best.unwrap_or_default()
}

/// Pack a step sequence (at most 41 steps) into a hash key.
fn pack(steps: &[u8]) -> u128 {
    debug_assert!(steps.len() <= 41);
    let mut key: u128 = 1;
    for &s in steps {
        key = key << 3 | s as u128;
    }
    key
}

fn is_loop(checker: &RuleChecker, steps: &[u8]) -> bool {
    (1..steps.len() - 1).all(|n| checker.allowed(&steps[n..]))
}

/// Loops of every size `2..=k`, indexed by size.
///
/// The search fixes the first step to direction 0 and skips paths whose first
/// turn is clockwise; canonical forms restore the full symmetry.
pub fn find_loops_up_to(rule: WalkRule, k: usize) -> Result<Vec<Vec<Loop>>> {
    if k < 2 {
        return Err(Error::InvalidArgument("loop size must be at least 2".into()));
    }
    if k > 41 {
        return Err(Error::SizeCap {
            what: "loop size".into(),
            requested: k,
            cap: 41,
        });
    }
    let checker = RuleChecker::new(rule)?;
    let group = rule.lattice.symmetry_group();
    let kappa = rule.coordination() as u8;
    let found: Vec<Vec<Vec<u8>>> = (0..kappa)
        .into_par_iter()
        .filter(|&second| second <= kappa / 2)
        .map(|second| {
            let mut out = Vec::new();
            let mut st = checker.state(k);
            st.try_push(Direction(0));
            search(&checker, &mut st, second, k, kappa, &mut out);
            out
        })
        .collect();
    let mut by_size: Vec<BTreeSet<Loop>> = vec![BTreeSet::new(); k + 1];
    for steps in found.into_iter().flatten() {
        let n = steps.len();
        by_size[n].insert(Loop {
            steps: canonical(&group, &steps),
        });
    }
    Ok(by_size.into_iter().map(|s| s.into_iter().collect()).collect())
}

fn search(
    checker: &RuleChecker,
    st: &mut WalkState,
    next: u8,
    k: usize,
    kappa: u8,
    out: &mut Vec<Vec<u8>>,
) {
    if st.try_push(Direction(next)) {
        if st.len() < k {
            // until the first turn, only counterclockwise turns are explored
            let straight = st.steps().iter().all(|&s| s == 0);
            for d in 0..kappa {
                if straight && d > kappa / 2 {
                    continue;
                }
                search(checker, st, d, k, kappa, out);
            }
        }
        st.pop();
    } else {
        let mut steps = st.steps().to_vec();
        steps.push(next);
        if is_loop(checker, &steps) {
            out.push(steps);
        }
    }
}

/// Loops of size exactly `k`.
pub fn find_loops(rule: WalkRule, k: usize) -> Result<Vec<Loop>> {
    let mut all = find_loops_up_to(rule, k)?;
    Ok(all.pop().unwrap_or_default())
}

/// Transfer-matrix states: the single step plus every loop prefix that stops
/// at least two steps short of the loop's end.
#[derive(Clone, Debug)]
pub struct SuffixClassBasis {
    pub lattice: LatticeId,
    pub classes: Vec<Vec<u8>>,
    lookup: HashMap<u128, usize>,
}

impl SuffixClassBasis {
    /// Class of a path (any orientation), if it is one.
    pub fn class_of(&self, steps: &[u8]) -> Option<usize> {
        self.lookup.get(&pack(steps)).copied()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Index of the single-step class.
    pub fn start_index(&self) -> usize {
        self.classes.iter().position(|c| c.len() == 1).unwrap_or(0)
    }

    /// Reorder classes; `order[i]` is the old index of the new class `i`.
    pub fn permuted(&self, order: &[usize]) -> SuffixClassBasis {
        Self::from_classes(
            self.lattice,
            order.iter().map(|&i| self.classes[i].clone()).collect(),
        )
    }

    fn from_classes(lattice: LatticeId, classes: Vec<Vec<u8>>) -> SuffixClassBasis {
        let group = lattice.symmetry_group();
        let mut lookup = HashMap::with_capacity(classes.len() * group.len());
        for (i, c) in classes.iter().enumerate() {
            for op in &group {
                let img: Vec<u8> = c.iter().map(|&s| op.perm[s as usize]).collect();
                lookup.insert(pack(&img), i);
            }
        }
        SuffixClassBasis {
            lattice,
            classes,
            lookup,
        }
    }
}

pub fn build_basis(lattice: LatticeId, loops: &[Loop]) -> Result<SuffixClassBasis> {
    if loops.is_empty() {
        return Err(Error::Empty("no loops to build a basis from".into()));
    }
    let group = lattice.symmetry_group();
    let mut seen = BTreeSet::new();
    let mut classes = vec![vec![0u8]];
    seen.insert(vec![0u8]);
    for l in loops {
        for m in 2..l.len() {
            let c = canonical(&group, &l.steps[..m]);
            if seen.insert(c.clone()) {
                classes.push(c);
            }
        }
    }
    Ok(SuffixClassBasis::from_classes(lattice, classes))
}

/// Sparse nonnegative integer matrix; column `j` lists the successors of class `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub dim: usize,
    /// `(row, col, value)` sorted by row then column.
    pub triplets: Vec<(usize, usize, u64)>,
    pub start_index: usize,
}

impl TransferMatrix {
    pub fn from_dense(rows: &[Vec<u64>], start_index: usize) -> TransferMatrix {
        let mut triplets = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0 {
                    triplets.push((i, j, v));
                }
            }
        }
        TransferMatrix {
            dim: rows.len(),
            triplets,
            start_index,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<u64>> {
        let mut m = vec![vec![0; self.dim]; self.dim];
        for &(i, j, v) in &self.triplets {
            m[i][j] += v;
        }
        m
    }

    pub fn column_sums(&self) -> Vec<u64> {
        let mut s = vec![0; self.dim];
        for &(_, j, v) in &self.triplets {
            s[j] += v;
        }
        s
    }

    fn mul(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, v) in &self.triplets {
            y[i] += v as f64 * x[j];
        }
    }

    /// `kappa * 1^T M^(n-1) e_start` for `n = 1..=n_max`, exactly.
    pub fn walk_counts(&self, kappa: u64, n_max: usize) -> Vec<u128> {
        let mut v = vec![0u128; self.dim];
        v[self.start_index] = 1;
        let mut out = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            if n > 1 {
                let mut w = vec![0u128; self.dim];
                for &(i, j, m) in &self.triplets {
                    w[i] += m as u128 * v[j];
                }
                v = w;
            }
            out.push(kappa as u128 * v.iter().sum::<u128>());
        }
        out
    }
}

/// Fill in the one-step extensions of every class.
///
/// An extension that is disallowed contains a loop of size at most `k` and is
/// dropped; otherwise it is mapped to its longest suffix that is a class.
pub fn build_matrix(basis: &SuffixClassBasis, rule: WalkRule) -> Result<TransferMatrix> {
    let checker = RuleChecker::new(rule)?;
    let kappa = rule.coordination() as u8;
    let columns: Vec<Result<Vec<(usize, usize)>>> = basis
        .classes
        .par_iter()
        .enumerate()
        .map(|(col, alpha)| {
            let mut out = Vec::new();
            let mut p = alpha.clone();
            p.push(0);
            for beta in 0..kappa {
                *p.last_mut().expect("nonempty") = beta;
                if !checker.allowed(&p) {
                    continue;
                }
                let row = (0..p.len())
                    .find_map(|m| basis.class_of(&p[m..]))
                    .ok_or_else(|| Error::Basis(format!("extension {p:?} matches no class")))?;
                out.push((row, col));
            }
            Ok(out)
        })
        .collect();
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    for c in columns {
        for e in c? {
            *counts.entry(e).or_default() += 1;
        }
    }
    let mut triplets: Vec<(usize, usize, u64)> =
        counts.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    triplets.sort_unstable();
    Ok(TransferMatrix {
        dim: basis.len(),
        triplets,
        start_index: basis.start_index(),
    })
}

/// Scale of the fixed-point bracket endpoints: units of `10^-12`.
pub const BRACKET_DIGITS: u32 = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenBracket {
    pub lower: f64,
    pub upper: f64,
    /// Exact endpoints in units of `10^-BRACKET_DIGITS`: `lower_units` rounded
    /// down, `upper_units` rounded up.
    pub lower_units: u128,
    pub upper_units: u128,
    pub iterations: usize,
    pub converged: bool,
}

impl EigenBracket {
    /// Upper endpoint rounded up at `digits` decimals, in units of `10^-digits`.
    pub fn upper_rounded(&self, digits: u32) -> u128 {
        let q = 10u128.pow(BRACKET_DIGITS - digits);
        self.upper_units.div_ceil(q)
    }
}

fn dyadic(x: f64) -> (BigInt, i64) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    (BigInt::from(mant), e)
}

/// Collatz-Wielandt bracket `[min (Mv)_i / v_i, max (Mv)_i / v_i]` evaluated in
/// exact arithmetic on the binary values of `v`.
pub fn collatz_wielandt(m: &TransferMatrix, v: &[f64]) -> (u128, u128) {
    assert!(v.iter().all(|&x| x > 0.0 && x.is_finite()));
    let scale = BigInt::from(10u64).pow(BRACKET_DIGITS);
    let vs: Vec<(BigInt, i64)> = v.iter().map(|&x| dyadic(x)).collect();
    let mut rows: Vec<Vec<(usize, u64)>> = vec![Vec::new(); m.dim];
    for &(i, j, val) in &m.triplets {
        rows[i].push((j, val));
    }
    let per_row: Vec<(u128, u128)> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let e0 = row
                .iter()
                .map(|&(j, _)| vs[j].1)
                .chain([vs[i].1])
                .min()
                .expect("diagonal exponent");
            let mut num = BigInt::zero();
            for &(j, val) in row {
                num += (&vs[j].0 << (vs[j].1 - e0) as usize) * BigInt::from(val);
            }
            let den = &vs[i].0 << (vs[i].1 - e0) as usize;
            let scaled = num * &scale;
            let (q, r) = scaled.div_rem(&den);
            let lo = q.to_u128().expect("ratio fits");
            let hi = if r.sign() == Sign::NoSign { lo } else { lo + 1 };
            (lo, hi)
        })
        .collect();
    let lo = per_row.iter().map(|p| p.0).min().unwrap_or(0);
    let hi = per_row.iter().map(|p| p.1).max().unwrap_or(0);
    (lo, hi)
}

/// Power iteration on `M + I` for one irreducible block, from the all-ones
/// vector. Returns the final iterate and the iteration count.
fn power_iterate(m: &TransferMatrix, tol: f64, max_iter: usize) -> (Vec<f64>, usize, bool) {
    let n = m.dim;
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut iterations = 0;
    while iterations < max_iter {
        m.mul(&x, &mut y);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += xi;
        }
        let norm = y.iter().cloned().fold(0.0, f64::max);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        iterations += 1;
        if iterations % 16 == 0 {
            m.mul(&x, &mut y);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (yi, xi) in y.iter().zip(&x) {
                let r = yi / xi;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            if hi - lo <= tol * 0.25 {
                return (x, iterations, true);
            }
        }
    }
    (x, iterations, false)
}

/// Strongly connected blocks of the transition graph that contain a cycle,
/// each as a submatrix.
pub fn irreducible_blocks(m: &TransferMatrix) -> Vec<TransferMatrix> {
    let mut g = petgraph::Graph::<(), ()>::with_capacity(m.dim, m.triplets.len());
    let nodes: Vec<_> = (0..m.dim).map(|_| g.add_node(())).collect();
    for &(i, j, _) in &m.triplets {
        g.add_edge(nodes[j], nodes[i], ());
    }
    let mut local = vec![usize::MAX; m.dim];
    let mut comp = vec![usize::MAX; m.dim];
    let sccs = petgraph::algo::kosaraju_scc(&g);
    for (c, scc) in sccs.iter().enumerate() {
        for (l, node) in scc.iter().enumerate() {
            comp[node.index()] = c;
            local[node.index()] = l;
        }
    }
    let mut blocks: Vec<Vec<(usize, usize, u64)>> = vec![Vec::new(); sccs.len()];
    for &(i, j, v) in &m.triplets {
        if comp[i] == comp[j] {
            blocks[comp[i]].push((local[i], local[j], v));
        }
    }
    sccs.iter()
        .zip(blocks)
        .filter(|(_, t)| !t.is_empty())
        .map(|(scc, mut triplets)| {
            triplets.sort_unstable();
            TransferMatrix {
                dim: scc.len(),
                triplets,
                start_index: 0,
            }
        })
        .collect()
}

/// Bracket on the spectral radius.
///
/// The matrix is split into irreducible blocks; the spectral radius is the
/// largest block radius. Each block is iterated on `M + I`, which removes
/// periodicity, and bracketed exactly by Collatz-Wielandt at its final
/// iterate. The upper endpoint bounds the spectral radius whether or not the
/// iteration converged.
pub fn certified_dominant_eigenvalue(m: &TransferMatrix, tol: f64, max_iter: usize) -> Result<EigenBracket> {
    if m.dim == 0 {
        return Err(Error::Empty("zero-dimensional matrix".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let (mut lower_units, mut upper_units) = (0u128, 0u128);
    let mut iterations = 0;
    let mut all_converged = true;
    for block in irreducible_blocks(m) {
        let (x, it, converged) = power_iterate(&block, tol, max_iter);
        iterations += it;
        all_converged &= converged;
        let (lo, hi) = collatz_wielandt(&block, &x);
        lower_units = lower_units.max(lo);
        upper_units = upper_units.max(hi);
    }
    let unit = 10f64.powi(-(BRACKET_DIGITS as i32));
    let width = (upper_units - lower_units) as f64 * unit;
    Ok(EigenBracket {
        lower: lower_units as f64 * unit,
        upper: upper_units as f64 * unit,
        lower_units,
        upper_units,
        iterations,
        converged: all_converged && width <= tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomataReport {
    pub rule: String,
    pub lattice: String,
    pub k: usize,
    pub dim: usize,
    pub loops_per_size: Vec<usize>,
    pub bracket: [f64; 2],
    pub converged: bool,
    pub bound: f64,
}

/// Everything computed on the way to a bound, for callers that need the matrix.
pub struct AutomataRun {
    pub loops: Vec<Vec<Loop>>,
    pub basis: SuffixClassBasis,
    pub matrix: TransferMatrix,
    pub bracket: EigenBracket,
}

/// Which loop sizes enter the transfer matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopSizes {
    /// Every size from 2 to k.
    #[default]
    All,
    /// Size 2 and odd sizes only. Dropping loops can only raise the bound, so
    /// the result is still a valid upper bound.
    OddOnly,
}

impl LoopSizes {
    pub fn admits(self, size: usize) -> bool {
        match self {
            LoopSizes::All => true,
            LoopSizes::OddOnly => size == 2 || size % 2 == 1,
        }
    }
}

pub fn automata_run(rule: WalkRule, k: usize, tol: f64, sizes: LoopSizes) -> Result<AutomataRun> {
    let mut loops = find_loops_up_to(rule, k)?;
    for (size, l) in loops.iter_mut().enumerate() {
        if !sizes.admits(size) {
            l.clear();
        }
    }
    let all: Vec<Loop> = loops.iter().flatten().cloned().collect();
    let basis = build_basis(rule.lattice, &all)?;
    let matrix = build_matrix(&basis, rule)?;
    let bracket = certified_dominant_eigenvalue(&matrix, tol, 1_000_000)?;
    Ok(AutomataRun {
        loops,
        basis,
        matrix,
        bracket,
    })
}

/// Upper bound on the connective constant, rounded up at the fifth decimal.
pub fn automata_bound(rule: WalkRule, k: usize, tol: f64) -> Result<AutomataReport> {
    automata_bound_with(rule, k, tol, LoopSizes::All)
}

pub fn automata_bound_with(rule: WalkRule, k: usize, tol: f64, sizes: LoopSizes) -> Result<AutomataReport> {
    let run = automata_run(rule, k, tol, sizes)?;
    Ok(run.report(rule, k))
}

impl AutomataRun {
    pub fn report(&self, rule: WalkRule, k: usize) -> AutomataReport {
        AutomataReport {
            rule: rule.id.to_string(),
            lattice: rule.lattice.to_string(),
            k,
            dim: self.matrix.dim,
            loops_per_size: self.loops.iter().map(|l| l.len()).collect(),
            bracket: [self.bracket.lower, self.bracket.upper],
            converged: self.bracket.converged,
            bound: self.bracket.upper_rounded(5) as f64 / 1e5,
        }
    }
}

/// Count walks of each length `1..=n_max` all of whose subpaths of length at
/// most `k` are allowed, by direct search.
pub fn count_loop_avoiding(rule: WalkRule, k: usize, n_max: usize) -> Result<Vec<u128>> {
    let checker = RuleChecker::new(rule)?;
    let kappa = rule.coordination() as u8;
    let mut counts = vec![0u128; n_max + 1];
    let mut steps = Vec::with_capacity(n_max);
    fn go(
        checker: &RuleChecker,
        steps: &mut Vec<u8>,
        k: usize,
        n_max: usize,
        kappa: u8,
        counts: &mut [u128],
    ) {
        counts[steps.len()] += 1;
        if steps.len() == n_max {
            return;
        }
        for d in 0..kappa {
            steps.push(d);
            let n = steps.len();
            // only windows ending at the new step need checking
            let ok = (2..=k.min(n)).all(|w| checker.allowed(&steps[n - w..]));
            if ok {
                go(checker, steps, k, n_max, kappa, counts);
            }
            steps.pop();
        }
    }
    steps.push(0);
    go(&checker, &mut steps, k, n_max, kappa, &mut counts);
    Ok(counts[1..].iter().map(|c| c * kappa as u128).collect())
}
