//! Twig decomposition for fixed polyominoes (d = 2) and self-avoiding
//! surfaces on the cubic lattice (d = 3).
//!
//! A compact twig stores dead faces, crossed faces and white squares; each
//! white square may independently be switched on (alive) or crossed, subject
//! in d = 3 to no lattice edge carrying more than two faces. Switching the
//! alive faces to dead and looking at their fresh neighbours gives the twigs
//! of the next level.

use std::collections::BTreeMap;
use std::sync::Arc;

use arrayvec::ArrayVec;
use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::FaceCoord;
use crate::polyalg::{self, DiagonalRadius};

/// Doubled center coordinates of a face or edge in the plane `z = 0` (d = 2)
/// or in space (d = 3).
pub type Cell = [i32; 3];

/// Exact bivariate polynomial in `x`, `y`, keyed by `(deg_x, deg_y)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PolyJson", try_from = "PolyJson")]
pub struct BivariatePolynomial {
    pub terms: BTreeMap<(u32, u32), BigInt>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TermJson {
    dx: u32,
    dy: u32,
    coef_string: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PolyJson {
    terms: Vec<TermJson>,
}

impl From<BivariatePolynomial> for PolyJson {
    fn from(p: BivariatePolynomial) -> Self {
        PolyJson {
            terms: p
                .terms
                .into_iter()
                .map(|((dx, dy), c)| TermJson {
                    dx,
                    dy,
                    coef_string: c.to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<PolyJson> for BivariatePolynomial {
    type Error = String;

    fn try_from(j: PolyJson) -> std::result::Result<Self, String> {
        let mut p = BivariatePolynomial::zero();
        for t in j.terms {
            let c: BigInt = t
                .coef_string
                .parse()
                .map_err(|_| format!("bad coefficient `{}`", t.coef_string))?;
            p.add_term(t.dx, t.dy, c);
        }
        Ok(p)
    }
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, dx: u32, dy: u32, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((dx, dy)).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(dx, dy));
        }
    }

    pub fn coeff(&self, dx: u32, dy: u32) -> BigInt {
        self.terms.get(&(dx, dy)).cloned().unwrap_or_default()
    }

    pub fn degree_x(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn degree_y(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            for (&(d, e), f) in &other.terms {
                out.add_term(a + d, b + e, c * f);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(a, b), c) in &other.terms {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, 1)
    }

    pub fn monomial(dx: u32, dy: u32, c: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(dx, dy, BigInt::from(c));
        p
    }

    /// `c0 + c1 x`.
    pub fn linear_x(c0: i64, c1: i64) -> Self {
        Self::monomial(0, 0, c0).add(&Self::monomial(1, 0, c1))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| {
                let c: f64 = c.to_string().parse().unwrap_or(f64::INFINITY);
                c * x.powi(a as i32) * y.powi(b as i32)
            })
            .sum()
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.sign() != num_bigint::Sign::Minus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellState {
    Dead,
    Alive,
    Excluded,
}

/// One explicit twig.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Twig {
    pub cells: BTreeMap<FaceCoord, CellState>,
    pub first_cell: FaceCoord,
    pub level: usize,
}

impl Twig {
    pub fn n_dead(&self) -> usize {
        self.cells.values().filter(|&&s| s == CellState::Dead).count()
    }

    pub fn n_alive(&self) -> usize {
        self.cells.values().filter(|&&s| s == CellState::Alive).count()
    }

    /// `(N_c - 1, N_b)`: exponents of the twig's monomial.
    pub fn monomial(&self) -> (u32, u32) {
        let b = self.n_dead() as u32;
        let c = b + self.n_alive() as u32;
        (c - 1, b)
    }
}

fn half_int_dims(c: &Cell, d: usize) -> impl Iterator<Item = usize> + '_ {
    (0..d).filter(move |&i| c[i].rem_euclid(2) == 1)
}

fn int_dims(c: &Cell, d: usize) -> impl Iterator<Item = usize> + '_ {
    (0..d).filter(move |&i| c[i].rem_euclid(2) == 0)
}

fn shifted(c: &Cell, i: usize, s: i32) -> Cell {
    let mut o = *c;
    o[i] += s;
    o
}

/// The four edges of a face.
pub fn face_edges(f: &Cell, d: usize) -> [Cell; 4] {
    let mut out = [*f; 4];
    let mut k = 0;
    for j in half_int_dims(f, d) {
        out[k][j] -= 1;
        out[k + 1][j] += 1;
        k += 2;
    }
    debug_assert_eq!(k, 4, "faces have two half-integer coordinates");
    out
}

/// The faces containing an edge: 2 in the plane, 4 in space.
pub fn edge_faces(e: &Cell, d: usize) -> impl Iterator<Item = Cell> + '_ {
    int_dims(e, d).flat_map(move |i| [shifted(e, i, -1), shifted(e, i, 1)])
}

/// Faces sharing an edge with `f`.
pub fn face_neighbours(f: &Cell, d: usize) -> impl Iterator<Item = Cell> + '_ {
    face_edges(f, d)
        .into_iter()
        .flat_map(move |e| edge_faces(&e, d).filter(|g| g != f).collect::<ArrayVec<Cell, 4>>())
}

/// A set of twigs sharing their dead and crossed faces: every subset of the
/// white squares that keeps each lattice edge at two faces or fewer is a twig.
#[derive(Clone, Debug)]
pub struct CompactTwig {
    pub d: usize,
    pub level: usize,
    pub first: Cell,
    /// Dead faces in order of death; `layer_start` marks the newest layer.
    pub dead: Vec<Cell>,
    pub layer_start: usize,
    pub crossed: Vec<Cell>,
    pub whites: Vec<Cell>,
    /// Faces that may never be added again.
    closed: Arc<HashSet<Cell>>,
    /// Edges with a fixed extra occupant outside the twig (the entering edge in d = 3).
    pinned: Vec<Cell>,
}

/// The first face sits at the origin with its entering edge (or face) below it.
pub fn first_face() -> Cell {
    [1, 1, 0]
}

fn entering_edge() -> Cell {
    [1, 0, 0]
}

pub fn level1_twigs(d: usize) -> Result<CompactTwig> {
    if d != 2 && d != 3 {
        return Err(Error::InvalidArgument(format!("twigs are implemented for d = 2, 3, not {d}")));
    }
    let f = first_face();
    let mut closed: HashSet<Cell> = HashSet::default();
    let mut crossed = Vec::new();
    let mut pinned = Vec::new();
    closed.insert(f);
    if d == 2 {
        // the entering face is occupied by the previous twig: it and its
        // neighbours are settled
        let zeroth = [1, -1, 0];
        crossed.push(zeroth);
        closed.insert(zeroth);
        closed.extend(face_neighbours(&zeroth, d));
    } else {
        let e = entering_edge();
        pinned.push(e);
        closed.extend(edge_faces(&e, d));
    }
    let whites: Vec<Cell> = dedup(face_neighbours(&f, d).filter(|g| !closed.contains(g)));
    Ok(CompactTwig {
        d,
        level: 1,
        first: f,
        dead: vec![f],
        layer_start: 0,
        crossed,
        whites,
        closed: Arc::new(closed),
        pinned,
    })
}

fn dedup(it: impl Iterator<Item = Cell>) -> Vec<Cell> {
    let mut seen = HashSet::default();
    it.filter(|c| seen.insert(*c)).collect()
}

/// How many faces each edge near the twig already carries.
struct EdgeLoad(HashMap<Cell, u8>);

impl EdgeLoad {
    fn get(&self, e: &Cell) -> u8 {
        self.0.get(e).copied().unwrap_or(0)
    }
}

fn edge_load(t: &CompactTwig) -> EdgeLoad {
    let mut load: HashMap<Cell, u8> = HashMap::default();
    for e in t.dead.iter().flat_map(|f| face_edges(f, t.d)).chain(t.pinned.iter().copied()) {
        *load.entry(e).or_default() += 1;
    }
    EdgeLoad(load)
}

/// Constraints among white squares: edges where the whites could overflow.
struct WhiteConstraints {
    /// For each constraint: (capacity, indices of whites on the edge).
    constraints: Vec<(u8, Vec<usize>)>,
    /// Whites that can never be switched on.
    forbidden: Vec<bool>,
}

fn white_constraints(t: &CompactTwig) -> WhiteConstraints {
    // (edge, white index or usize::MAX for an occupied face)
    let mut inc: Vec<(Cell, usize)> = Vec::with_capacity(4 * (t.dead.len() + t.whites.len()) + 1);
    for f in &t.dead {
        inc.extend(face_edges(f, t.d).into_iter().map(|e| (e, usize::MAX)));
    }
    inc.extend(t.pinned.iter().map(|&e| (e, usize::MAX)));
    for (i, w) in t.whites.iter().enumerate() {
        inc.extend(face_edges(w, t.d).into_iter().map(|e| (e, i)));
    }
    inc.sort_unstable();
    let mut forbidden = vec![false; t.whites.len()];
    let mut constraints = Vec::new();
    for run in inc.chunk_by(|a, b| a.0 == b.0) {
        let used = run.iter().filter(|x| x.1 == usize::MAX).count();
        let ws: Vec<usize> = run.iter().filter(|x| x.1 != usize::MAX).map(|x| x.1).collect();
        if ws.is_empty() {
            continue;
        }
        let cap = 2usize.saturating_sub(used);
        if cap == 0 {
            for &i in &ws {
                forbidden[i] = true;
            }
        } else if ws.len() > cap {
            constraints.push((cap as u8, ws));
        }
    }
    WhiteConstraints {
        constraints,
        forbidden,
    }
}

/// Every admissible set of alive faces, as index lists, by direct enumeration.
pub fn admissible_subsets(t: &CompactTwig) -> Vec<Vec<usize>> {
    let wc = white_constraints(t);
    let n = t.whites.len();
    assert!(n < 30, "too many white squares to enumerate");
    let mut out = Vec::new();
    let mut chosen = vec![false; n];
    fn go(i: usize, chosen: &mut Vec<bool>, wc: &WhiteConstraints, out: &mut Vec<Vec<usize>>) {
        if i == chosen.len() {
            out.push((0..chosen.len()).filter(|&j| chosen[j]).collect());
            return;
        }
        go(i + 1, chosen, wc, out);
        if !wc.forbidden[i] {
            chosen[i] = true;
            let ok = wc.constraints.iter().all(|(cap, ws)| {
                ws.iter().filter(|&&j| chosen[j]).count() <= *cap as usize
            });
            if ok {
                go(i + 1, chosen, wc, out);
            }
            chosen[i] = false;
        }
    }
    go(0, &mut chosen, &wc, &mut out);
    out
}

/// `sum_S x^|S|` over admissible alive sets, as coefficients in `x`.
///
/// Whites are split into groups linked by binding edges; groups contribute
/// independent factors, so a white on no binding edge gives `(1 + x)`.
pub fn white_polynomial(t: &CompactTwig) -> Vec<u128> {
    let wc = white_constraints(t);
    let n = t.whites.len();
    // union-find over binding constraints
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let nx = p[j];
            p[j] = r;
            j = nx;
        }
        r
    }
    for (_, ws) in &wc.constraints {
        for w in ws.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::default();
    for i in 0..n {
        if !wc.forbidden[i] {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
    }
    let mut poly = vec![1u128];
    let mut group_list: Vec<Vec<usize>> = groups.into_values().collect();
    group_list.sort();
    for g in group_list {
        let gp = if g.len() == 1 {
            vec![1, 1]
        } else {
            group_polynomial(&g, &wc)
        };
        poly = mul_u128(&poly, &gp);
    }
    poly
}

fn group_polynomial(group: &[usize], wc: &WhiteConstraints) -> Vec<u128> {
    let mut local = vec![usize::MAX; wc.forbidden.len()];
    for (l, &g) in group.iter().enumerate() {
        local[g] = l;
    }
    let cons: Vec<(u8, Vec<usize>)> = wc
        .constraints
        .iter()
        .filter_map(|(cap, ws)| {
            let l: Vec<usize> = ws.iter().map(|&w| local[w]).filter(|&l| l != usize::MAX).collect();
            if l.len() > *cap as usize {
                Some((*cap, l))
            } else {
                None
            }
        })
        .collect();
    // constraints touching each local white
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); group.len()];
    for (ci, (_, ws)) in cons.iter().enumerate() {
        for &w in ws {
            touching[w].push(ci);
        }
    }
    let mut counts = vec![0u8; cons.len()];
    let mut out = vec![0u128; group.len() + 1];
    fn go(
        i: usize,
        size: usize,
        touching: &[Vec<usize>],
        cons: &[(u8, Vec<usize>)],
        counts: &mut [u8],
        out: &mut [u128],
    ) {
        if i == touching.len() {
            out[size] += 1;
            return;
        }
        go(i + 1, size, touching, cons, counts, out);
        if touching[i].iter().all(|&c| counts[c] < cons[c].0) {
            for &c in &touching[i] {
                counts[c] += 1;
            }
            go(i + 1, size + 1, touching, cons, counts, out);
            for &c in &touching[i] {
                counts[c] -= 1;
            }
        }
    }
    go(0, 0, &touching, &cons, &mut counts, &mut out);
    while out.len() > 1 && *out.last().unwrap() == 0 {
        out.pop();
    }
    out
}

fn mul_u128(a: &[u128], b: &[u128]) -> Vec<u128> {
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl CompactTwig {
    /// Twig of the next level obtained by switching on `alive` (indices into
    /// the white squares) and crossing the rest. `alive` must be nonempty and
    /// admissible.
    pub fn grow(&self, alive: &[usize]) -> CompactTwig {
        self.grow_with(&self.closed_after(), alive)
    }

    /// Faces closed for every child: the current closed set, neighbours of
    /// the newest dead layer, and all white squares.
    pub fn closed_after(&self) -> Arc<HashSet<Cell>> {
        let mut closed = (*self.closed).clone();
        for f in &self.dead[self.layer_start..] {
            closed.extend(face_neighbours(f, self.d));
        }
        closed.extend(self.whites.iter().copied());
        Arc::new(closed)
    }

    /// [`CompactTwig::grow`] with a precomputed [`CompactTwig::closed_after`].
    pub fn grow_with(&self, closed: &Arc<HashSet<Cell>>, alive: &[usize]) -> CompactTwig {
        let d = self.d;
        let mut on = vec![false; self.whites.len()];
        for &i in alive {
            on[i] = true;
        }
        let mut crossed = self.crossed.clone();
        crossed.extend(self.whites.iter().zip(&on).filter(|(_, &o)| !o).map(|(w, _)| *w));
        let mut dead = self.dead.clone();
        let layer_start = dead.len();
        dead.extend(alive.iter().map(|&i| self.whites[i]));
        let mut next = CompactTwig {
            d,
            level: self.level + 1,
            first: self.first,
            dead,
            layer_start,
            crossed,
            whites: Vec::new(),
            closed: Arc::clone(closed),
            pinned: self.pinned.clone(),
        };
        let load = edge_load(&next);
        let full = |g: &Cell| face_edges(g, d).iter().any(|e| load.get(e) >= 2);
        let mut cand: Vec<Cell> = next.dead[layer_start..]
            .iter()
            .flat_map(|f| face_neighbours(f, d))
            .filter(|g| !closed.contains(g))
            .collect();
        cand.sort_unstable();
        cand.dedup();
        cand.retain(|g| !full(g));
        next.whites = cand;
        next
    }

    pub fn n_dead(&self) -> u32 {
        self.dead.len() as u32
    }

    /// Expand into explicit twigs.
    pub fn expand(&self) -> Vec<Twig> {
        let to_fc = |c: &Cell| FaceCoord::new(c[..self.d].to_vec());
        admissible_subsets(self)
            .into_iter()
            .map(|s| {
                let mut cells = BTreeMap::new();
                for f in &self.dead {
                    cells.insert(to_fc(f), CellState::Dead);
                }
                for f in &self.crossed {
                    cells.insert(to_fc(f), CellState::Excluded);
                }
                let on: HashSet<usize> = s.iter().copied().collect();
                for (i, w) in self.whites.iter().enumerate() {
                    let st = if on.contains(&i) {
                        CellState::Alive
                    } else {
                        CellState::Excluded
                    };
                    cells.insert(to_fc(w), st);
                }
                Twig {
                    cells,
                    first_cell: to_fc(&self.first),
                    level: self.level,
                }
            })
            .collect()
    }
}

/// Dense accumulator for `p_l`.
#[derive(Clone, Debug, Default)]
struct Accum {
    c: Vec<Vec<u128>>,
}

impl Accum {
    fn add(&mut self, dx: usize, dy: usize, v: u128) {
        if self.c.len() <= dy {
            self.c.resize(dy + 1, Vec::new());
        }
        let row = &mut self.c[dy];
        if row.len() <= dx {
            row.resize(dx + 1, 0);
        }
        row[dx] += v;
    }

    fn merge(&mut self, other: Accum) {
        for (dy, row) in other.c.into_iter().enumerate() {
            for (dx, v) in row.into_iter().enumerate() {
                if v != 0 {
                    self.add(dx, dy, v);
                }
            }
        }
    }

    fn into_poly(self) -> BivariatePolynomial {
        let mut p = BivariatePolynomial::zero();
        for (dy, row) in self.c.into_iter().enumerate() {
            for (dx, v) in row.into_iter().enumerate() {
                if v != 0 {
                    p.add_term(dx as u32, dy as u32, BigInt::from(v));
                }
            }
        }
        p
    }
}

/// Statistics of one level construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwigStats {
    /// Compact twigs created at each level `1..=l`.
    pub compact_per_level: Vec<u64>,
}

/// The twig polynomial `p_l`: twigs of level `l` plus every fully dead twig
/// from lower levels.
pub fn twig_polynomial(d: usize, level: usize) -> Result<(BivariatePolynomial, TwigStats)> {
    if level == 0 {
        return Err(Error::InvalidArgument("twig level starts at 1".into()));
    }
    let root = level1_twigs(d)?;
    let mut stats = TwigStats {
        compact_per_level: vec![0; level],
    };
    let acc = build(&root, level, &mut stats.compact_per_level);
    Ok((acc.into_poly(), stats))
}

fn build(t: &CompactTwig, target: usize, per_level: &mut [u64]) -> Accum {
    use rayon::prelude::*;
    per_level[t.level - 1] += 1;
    let nb = t.n_dead() as usize;
    let mut acc = Accum::default();
    if t.level == target {
        for (k, v) in white_polynomial(t).into_iter().enumerate() {
            if v != 0 {
                acc.add(nb - 1 + k, nb, v);
            }
        }
        return acc;
    }
    // all white squares crossed: a finished twig carried to every later level
    acc.add(nb - 1, nb, 1);
    let subsets: Vec<Vec<usize>> = admissible_subsets(t).into_iter().filter(|s| !s.is_empty()).collect();
    let closed = t.closed_after();
    let parts: Vec<(Accum, Vec<u64>)> = subsets
        .par_iter()
        .map(|s| {
            let mut local = vec![0u64; per_level.len()];
            let child = t.grow_with(&closed, s);
            (build(&child, target, &mut local), local)
        })
        .collect();
    for (a, counts) in parts {
        acc.merge(a);
        for (x, y) in per_level.iter_mut().zip(counts) {
            *x += y;
        }
    }
    acc
}

/// All twigs of one level: compact twigs still carrying white squares, plus
/// the dead-face counts of finished twigs carried from earlier levels.
#[derive(Clone, Debug)]
pub struct TwigSet {
    pub d: usize,
    pub level: usize,
    pub compact: Vec<CompactTwig>,
    pub finished: Vec<u32>,
}

impl TwigSet {
    pub fn level1(d: usize) -> Result<TwigSet> {
        Ok(TwigSet {
            d,
            level: 1,
            compact: vec![level1_twigs(d)?],
            finished: Vec::new(),
        })
    }

    /// Exact `p_l` of this set.
    pub fn polynomial(&self) -> BivariatePolynomial {
        let mut acc = Accum::default();
        for &nb in &self.finished {
            acc.add(nb as usize - 1, nb as usize, 1);
        }
        for t in &self.compact {
            let nb = t.dead.len();
            for (k, v) in white_polynomial(t).into_iter().enumerate() {
                if v != 0 {
                    acc.add(nb - 1 + k, nb, v);
                }
            }
        }
        acc.into_poly()
    }

    /// Number of explicit twigs in the set.
    pub fn explicit_len(&self) -> u128 {
        self.finished.len() as u128
            + self.compact.iter().map(|t| white_polynomial(t).iter().sum::<u128>()).sum::<u128>()
    }
}

/// The twigs of the next level: every nonempty admissible alive set becomes
/// dead with fresh white squares; the empty choice is finished and carried.
pub fn next_level(ts: &TwigSet) -> TwigSet {
    let mut out = TwigSet {
        d: ts.d,
        level: ts.level + 1,
        compact: Vec::new(),
        finished: ts.finished.clone(),
    };
    for t in &ts.compact {
        out.finished.push(t.n_dead());
        let closed = t.closed_after();
        for s in admissible_subsets(t).into_iter().filter(|s| !s.is_empty()) {
            out.compact.push(t.grow_with(&closed, &s));
        }
    }
    out
}

/// The same polynomial by listing every explicit twig; only for small levels.
pub fn twig_polynomial_explicit(d: usize, level: usize) -> Result<BivariatePolynomial> {
    let root = level1_twigs(d)?;
    let mut p = BivariatePolynomial::zero();
    let mut stack = vec![root];
    while let Some(t) = stack.pop() {
        for tw in t.expand() {
            let fully_dead = tw.n_alive() == 0;
            if t.level == level || fully_dead {
                let (a, b) = tw.monomial();
                p.add_term(a, b, BigInt::one());
            }
        }
        if t.level < level {
            let closed = t.closed_after();
            for s in admissible_subsets(&t).into_iter().filter(|s| !s.is_empty()) {
                stack.push(t.grow_with(&closed, &s));
            }
        }
    }
    Ok(p)
}

/// Numerator of the generating function of twig sequences.
pub fn numerator(d: usize) -> BivariatePolynomial {
    if d == 3 {
        BivariatePolynomial::monomial(1, 1, 1).mul(&BivariatePolynomial::linear_x(1, 3).pow(4))
    } else {
        BivariatePolynomial::monomial(1, 0, 1)
    }
}

/// The level-zero inverse radius: the closed-form surface bound at `k = 2`.
pub fn initial_inverse_root(d: usize) -> Result<f64> {
    let b = crate::manifolds::bound_sam_som_upper(d, 2)?;
    b.to_f64().ok_or_else(|| Error::InvalidArgument(format!("no float value for d = {d}")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwigBoundReport {
    pub d: usize,
    pub level: usize,
    pub bound: f64,
    pub inverse_radius: f64,
    pub oracle_inverse_radius: f64,
    /// `p/q` when the selected root is the rational starting value, checked exactly.
    pub exact: Option<String>,
    pub per_level: Vec<DiagonalRadius>,
    pub stats: TwigStats,
}

/// Upper bound on the growth constant from twigs of levels `1..=level`, each
/// level's root chosen below the previous one.
pub fn twig_bound(d: usize, level: usize) -> Result<TwigBoundReport> {
    if level == 0 {
        return Err(Error::InvalidArgument("twig level starts at 1".into()));
    }
    let start = crate::manifolds::bound_sam_som_upper(d, 2)?;
    let start_f = initial_inverse_root(d)?;
    let mut prev = start_f;
    let mut per_level = Vec::new();
    let mut last = None;
    let mut exact = None;
    for l in 1..=level {
        let (p, stats) = twig_polynomial(d, l)?;
        let r = polyalg::diagonal_radius(&p, prev)?;
        exact = None;
        if (r.selected - start_f).abs() <= 1e-12 * start_f && polyalg::is_exact_inverse_root(&p, &start)? {
            exact = Some(format!("{}/{}", start.numer(), start.denom()));
        }
        prev = r.selected;
        per_level.push(r);
        last = Some(stats);
    }
    let final_r = per_level.last().expect("level >= 1").clone();
    Ok(TwigBoundReport {
        d,
        level,
        exact,
        bound: round_up5(final_r.selected),
        inverse_radius: final_r.selected,
        oracle_inverse_radius: final_r.oracle,
        per_level,
        stats: last.unwrap_or_default(),
    })
}

/// Round up at the fifth decimal, absorbing float noise below 1e-9.
pub fn round_up5(v: f64) -> f64 {
    ((v * 1e5) - 1e-4).ceil() / 1e5
}
