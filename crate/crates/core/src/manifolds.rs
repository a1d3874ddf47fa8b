//! Restricted k-manifolds on the d-dimensional hypercubic lattice: exact
//! enumeration at small size and the closed-form growth-constant bounds.
//!
//! Faces are stored by doubled center coordinates (odd entries are the
//! half-integer directions). A (k-1)-edge is shared by at most
//! `2(d-k+1)` faces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::FaceCoord;

/// Largest supported dimension for enumeration.
pub const MAX_DIM: usize = 8;

type F = [i8; MAX_DIM];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldKind {
    Sam,
    Som,
    Xd,
    SamClosed,
}

impl ManifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Sam => "sam",
            ManifoldKind::Som => "som",
            ManifoldKind::Xd => "xd",
            ManifoldKind::SamClosed => "sam_closed",
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sam" | "sas" => Ok(ManifoldKind::Sam),
            "som" | "sos" => Ok(ManifoldKind::Som),
            "xd" => Ok(ManifoldKind::Xd),
            "sam_closed" | "closed" | "sam-closed" => Ok(ManifoldKind::SamClosed),
            _ => Err(Error::InvalidArgument(format!("unknown manifold class `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldClass {
    pub kind: ManifoldKind,
    pub d: usize,
    pub k: usize,
}

impl ManifoldClass {
    pub fn new(kind: ManifoldKind, d: usize, k: usize) -> Result<Self> {
        if k < 1 || k > d {
            return Err(Error::InvalidArgument(format!("need 1 <= k <= d, got d = {d}, k = {k}")));
        }
        if d > MAX_DIM {
            return Err(Error::InvalidArgument(format!("d = {d} exceeds {MAX_DIM}")));
        }
        Ok(ManifoldClass { kind, d, k })
    }

    /// Default largest enumerable size.
    pub fn default_cap(&self) -> usize {
        match (self.d, self.k) {
            (2, 2) => 10,
            (3, 2) | (3, 3) => 8,
            _ => 6,
        }
    }
}

/// Connection structure at one edge met by more than two faces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub pairs: Vec<(FaceCoord, FaceCoord)>,
    pub lone: Option<FaceCoord>,
}

/// A translation-canonical set of faces with its connections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellComplex {
    pub d: usize,
    pub k: usize,
    pub faces: Vec<FaceCoord>,
    /// Written as a list of `[edge, connection]` entries (JSON keys must be strings).
    #[serde(with = "entry_list")]
    pub connections: BTreeMap<FaceCoord, Connection>,
}

mod entry_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<FaceCoord, Connection>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<FaceCoord, Connection>, D::Error> {
        Ok(Vec::<(FaceCoord, Connection)>::deserialize(d)?.into_iter().collect())
    }
}

// ---------------------------------------------------------------------------
// geometry on fixed-size coordinates

fn to_f(c: &FaceCoord) -> Result<F> {
    if c.dim() > MAX_DIM {
        return Err(Error::InvalidArgument(format!("dimension {} exceeds {MAX_DIM}", c.dim())));
    }
    let mut f = [0i8; MAX_DIM];
    for (i, &x) in c.doubled.iter().enumerate() {
        f[i] = i8::try_from(x).map_err(|_| Error::InvalidArgument(format!("coordinate {x} out of range")))?;
    }
    Ok(f)
}

fn from_f(f: &F, d: usize) -> FaceCoord {
    FaceCoord::new(f[..d].iter().map(|&x| x as i32).collect())
}

fn odd(x: i8) -> bool {
    x.rem_euclid(2) == 1
}

fn edges_of(f: &F, d: usize) -> impl Iterator<Item = F> + '_ {
    (0..d).filter(move |&j| odd(f[j])).flat_map(move |j| {
        [-1i8, 1].map(|s| {
            let mut e = *f;
            e[j] += s;
            e
        })
    })
}

fn faces_of(e: &F, d: usize) -> impl Iterator<Item = F> + '_ {
    (0..d).filter(move |&i| !odd(e[i])).flat_map(move |i| {
        [-1i8, 1].map(|s| {
            let mut g = *e;
            g[i] += s;
            g
        })
    })
}

/// Offset from an edge to an incident face as (axis, sign).
fn unit(face: &F, edge: &F, d: usize) -> Option<(usize, i8)> {
    let mut out = None;
    for i in 0..d {
        let diff = face[i] - edge[i];
        if diff != 0 {
            if diff.abs() != 1 || odd(edge[i]) || out.is_some() {
                return None;
            }
            out = Some((i, diff));
        }
    }
    out
}

type Unit = (usize, i8);

fn antiparallel(a: Unit, b: Unit) -> bool {
    a.0 == b.0 && a.1 == -b.1
}

fn pair_pair_ok(p: (Unit, Unit), q: (Unit, Unit)) -> bool {
    let all = [p.0, p.1, q.0, q.1];
    for i in 0..4 {
        for j in i + 1..4 {
            if all[i] == all[j] {
                return false;
            }
        }
    }
    if antiparallel(p.0, p.1) && q.0 .0 == q.1 .0 {
        return false;
    }
    if antiparallel(q.0, q.1) && p.0 .0 == p.1 .0 {
        return false;
    }
    true
}

fn pairs_ok(pairs: &[(Unit, Unit)]) -> bool {
    (0..pairs.len()).all(|i| (i + 1..pairs.len()).all(|j| pair_pair_ok(pairs[i], pairs[j])))
}

/// Osculating condition on units; the lone face (if any) must admit a
/// partner at an unoccupied slot of the edge that keeps the condition.
fn osculating_units(pairs: &[(Unit, Unit)], lone: Option<Unit>, slots: &[Unit]) -> bool {
    match lone {
        None => pairs_ok(pairs),
        Some(l) => {
            let used: Vec<Unit> = pairs.iter().flat_map(|&(a, b)| [a, b]).chain([l]).collect();
            slots.iter().filter(|s| !used.contains(s)).any(|&h| {
                let mut ext = pairs.to_vec();
                ext.push((l, h));
                pairs_ok(&ext)
            })
        }
    }
}

/// Whether the given connections at `edge` satisfy the osculating condition.
///
/// All four unit offsets of any two pairs must differ, and a pair of
/// antiparallel offsets forces every other pair to be perpendicular. With an
/// odd number of faces the lone face must be pairable with some free slot
/// of the edge so that the condition holds.
pub fn osculating_ok(edge: &FaceCoord, pairs: &[(FaceCoord, FaceCoord)], lone: Option<&FaceCoord>) -> Result<bool> {
    let d = edge.dim();
    let e = to_f(edge)?;
    let u = |f: &FaceCoord| -> Result<Unit> {
        let g = to_f(f)?;
        unit(&g, &e, d).ok_or_else(|| Error::NotIncident(format!("face {f} is not incident to edge {edge}")))
    };
    let mut up = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        up.push((u(a)?, u(b)?));
    }
    let lone = lone.map(u).transpose()?;
    let slots: Vec<Unit> = (0..d).filter(|&i| !odd(e[i])).flat_map(|i| [(i, -1), (i, 1)]).collect();
    Ok(osculating_units(&up, lone, &slots))
}

/// Every way to split `m` items into pairs plus at most one lone item.
/// Pairs of positions plus the unpaired one, if any.
type Pairing = (Vec<(usize, usize)>, Option<usize>);
/// A multi-edge, its faces, and the pairings allowed there.
type EdgeOptions = (F, Vec<F>, Vec<Pairing>);

fn pairings(m: usize) -> Vec<Pairing> {
    fn rec(rest: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = rest[0];
        for j in 1..rest.len() {
            let b = rest[j];
            let remaining: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != b).collect();
            cur.push((a, b));
            rec(&remaining, cur, out);
            cur.pop();
        }
    }
    let items: Vec<usize> = (0..m).collect();
    let mut out = Vec::new();
    if m.is_multiple_of(2) {
        let mut v = Vec::new();
        rec(&items, &mut Vec::new(), &mut v);
        out.extend(v.into_iter().map(|p| (p, None)));
    } else {
        for lone in 0..m {
            let rest: Vec<usize> = items.iter().copied().filter(|&x| x != lone).collect();
            let mut v = Vec::new();
            rec(&rest, &mut Vec::new(), &mut v);
            out.extend(v.into_iter().map(|p| (p, Some(lone))));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// connection structures of a face set

/// Allowed connection structures on each edge met by three or more faces.
fn multi_edge_options(faces: &[F], d: usize) -> Vec<EdgeOptions> {
    let mut by_edge: BTreeMap<F, Vec<F>> = BTreeMap::new();
    for f in faces {
        for e in edges_of(f, d) {
            by_edge.entry(e).or_default().push(*f);
        }
    }
    let mut out = Vec::new();
    for (e, fs) in by_edge {
        if fs.len() <= 2 {
            continue;
        }
        let units: Vec<Unit> = fs.iter().map(|f| unit(f, &e, d).expect("incident")).collect();
        let slots: Vec<Unit> = (0..d).filter(|&i| !odd(e[i])).flat_map(|i| [(i, -1), (i, 1)]).collect();
        let ok: Vec<_> = pairings(fs.len())
            .into_iter()
            .filter(|(ps, lone)| {
                let up: Vec<(Unit, Unit)> = ps.iter().map(|&(a, b)| (units[a], units[b])).collect();
                osculating_units(&up, lone.map(|l| units[l]), &slots)
            })
            .collect();
        out.push((e, fs, ok));
    }
    out
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let n = self.0[j];
            self.0[j] = r;
            j = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a] = b;
            true
        } else {
            false
        }
    }
}

/// Connected osculating structures on a face set, each as one choice index
/// per multi-face edge.
fn som_structures(faces: &[F], d: usize) -> (Vec<EdgeOptions>, Vec<Vec<usize>>) {
    let opts = multi_edge_options(faces, d);
    let index: FxHashMap<F, usize> = faces.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    // forced links across edges with exactly two faces
    let mut base = Dsu::new(faces.len());
    let mut by_edge: FxHashMap<F, Vec<usize>> = FxHashMap::default();
    for (i, f) in faces.iter().enumerate() {
        for e in edges_of(f, d) {
            by_edge.entry(e).or_default().push(i);
        }
    }
    let mut comps = faces.len();
    for fs in by_edge.values() {
        if fs.len() == 2 && base.union(fs[0], fs[1]) {
            comps -= 1;
        }
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; opts.len()];
    fn rec(
        i: usize,
        choice: &mut Vec<usize>,
        dsu: &Dsu,
        comps: usize,
        opts: &[EdgeOptions],
        index: &FxHashMap<F, usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == opts.len() {
            if comps == 1 {
                out.push(choice.clone());
            }
            return;
        }
        let (_, fs, options) = &opts[i];
        for (ci, (ps, _)) in options.iter().enumerate() {
            let mut dsu2 = Dsu(dsu.0.clone());
            let mut c = comps;
            for &(a, b) in ps {
                if dsu2.union(index[&fs[a]], index[&fs[b]]) {
                    c -= 1;
                }
            }
            choice[i] = ci;
            rec(i + 1, choice, &dsu2, c, opts, index, out);
        }
    }
    rec(0, &mut choice, &base, comps, &opts, &index, &mut out);
    (opts, out)
}

// ---------------------------------------------------------------------------
// enumeration

struct Enumerator {
    class: ManifoldClass,
    n_max: usize,
    root: F,
    counts: Vec<u128>,
    faces: Vec<F>,
    load: FxHashMap<F, u8>,
    /// edges currently carrying exactly one face
    open_edges: usize,
    /// edges carrying three or more faces
    multi_edges: usize,
    seen: FxHashSet<F>,
    keep: Option<Vec<Vec<F>>>,
}

impl Enumerator {
    fn add(&mut self, f: &F) -> bool {
        let d = self.class.d;
        let avoiding = matches!(self.class.kind, ManifoldKind::Sam | ManifoldKind::SamClosed);
        if avoiding && edges_of(f, d).any(|e| self.load.get(&e).copied().unwrap_or(0) >= 2) {
            return false;
        }
        for e in edges_of(f, d) {
            let l = self.load.entry(e).or_insert(0);
            *l += 1;
            match *l {
                1 => self.open_edges += 1,
                2 => self.open_edges -= 1,
                3 => self.multi_edges += 1,
                _ => {}
            }
        }
        self.faces.push(*f);
        true
    }

    fn remove(&mut self) {
        let d = self.class.d;
        let f = self.faces.pop().expect("nonempty");
        for e in edges_of(&f, d) {
            let l = self.load.get_mut(&e).expect("loaded edge");
            match *l {
                1 => self.open_edges -= 1,
                2 => self.open_edges += 1,
                3 => self.multi_edges -= 1,
                _ => {}
            }
            *l -= 1;
            if *l == 0 {
                self.load.remove(&e);
            }
        }
    }

    fn weight(&self) -> u128 {
        match self.class.kind {
            ManifoldKind::Sam | ManifoldKind::Xd => 1,
            ManifoldKind::SamClosed => u128::from(self.open_edges == 0),
            ManifoldKind::Som => {
                if self.multi_edges == 0 {
                    1
                } else {
                    som_structures(&self.faces, self.class.d).1.len() as u128
                }
            }
        }
    }

    fn run(&mut self, untried: &mut Vec<F>) {
        let d = self.class.d;
        while let Some(f) = untried.pop() {
            if !self.add(&f) {
                continue;
            }
            let size = self.faces.len();
            let w = self.weight();
            self.counts[size] += w;
            if w > 0 && size == self.n_max {
                if let Some(keep) = self.keep.as_mut() {
                    keep.push(self.faces.clone());
                }
            }
            if size < self.n_max {
                let mut fresh = Vec::new();
                for e in edges_of(&f, d) {
                    for g in faces_of(&e, d) {
                        if g != f && g > self.root && self.seen.insert(g) {
                            fresh.push(g);
                        }
                    }
                }
                let mut next = untried.clone();
                next.extend(fresh.iter().copied());
                self.run(&mut next);
                for g in &fresh {
                    self.seen.remove(g);
                }
            }
            self.remove();
        }
    }
}

/// Canonical positions of a lexicographically smallest face, one per orientation.
fn roots(d: usize, k: usize) -> Vec<F> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize == k {
            let mut f = [0i8; MAX_DIM];
            for (i, c) in f.iter_mut().enumerate().take(d) {
                if mask >> i & 1 == 1 {
                    *c = 1;
                }
            }
            out.push(f);
        }
    }
    out
}

fn enumerate_impl(class: ManifoldClass, n_max: usize, keep: bool) -> (Vec<u128>, Vec<Vec<F>>) {
    let parts: Vec<(Vec<u128>, Vec<Vec<F>>)> = roots(class.d, class.k)
        .into_par_iter()
        .map(|root| {
            let mut en = Enumerator {
                class,
                n_max,
                root,
                counts: vec![0; n_max + 1],
                faces: Vec::new(),
                load: FxHashMap::default(),
                open_edges: 0,
                multi_edges: 0,
                seen: FxHashSet::from_iter([root]),
                keep: keep.then(Vec::new),
            };
            en.run(&mut vec![root]);
            (en.counts, en.keep.unwrap_or_default())
        })
        .collect();
    let mut counts = vec![0u128; n_max + 1];
    let mut all = Vec::new();
    for (c, k) in parts {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
        all.extend(k);
    }
    (counts, all)
}

fn check_cap(class: &ManifoldClass, n: usize, cap: Option<usize>) -> Result<()> {
    let cap = cap.unwrap_or_else(|| class.default_cap());
    if n == 0 {
        return Err(Error::InvalidArgument("size must be at least 1".into()));
    }
    if n > cap {
        return Err(Error::SizeCap {
            what: format!("{} ({},{}) size", class.kind, class.d, class.k),
            requested: n,
            cap,
        });
    }
    Ok(())
}

/// Counts `c_1..=c_n` (index 0 unused) of translation classes in `class`.
pub fn enumerate_counts(class: ManifoldClass, n: usize, cap: Option<usize>) -> Result<Vec<u128>> {
    check_cap(&class, n, cap)?;
    Ok(enumerate_impl(class, n, false).0)
}

/// Number of translation classes of size `n` in `class`.
pub fn enumerate_fixed(class: ManifoldClass, n: usize) -> Result<u128> {
    Ok(enumerate_counts(class, n, None)?[n])
}

/// Every complex of size `n`, with its connections when the class has them.
pub fn enumerate_fixed_list(class: ManifoldClass, n: usize) -> Result<Vec<CellComplex>> {
    check_cap(&class, n, None)?;
    let (_, sets) = enumerate_impl(class, n, true);
    let mut out = Vec::new();
    for faces in sets {
        if class.kind == ManifoldKind::Som {
            out.extend(som_complexes(&faces, class.d, class.k));
        } else {
            out.push(complex_from(&faces, class.d, class.k, BTreeMap::new()));
        }
    }
    Ok(out)
}

fn complex_from(faces: &[F], d: usize, k: usize, connections: BTreeMap<FaceCoord, Connection>) -> CellComplex {
    let mut fs: Vec<FaceCoord> = faces.iter().map(|f| from_f(f, d)).collect();
    fs.sort();
    CellComplex {
        d,
        k,
        faces: fs,
        connections,
    }
}

fn som_complexes(faces: &[F], d: usize, k: usize) -> Vec<CellComplex> {
    let (opts, choices) = som_structures(faces, d);
    choices
        .into_iter()
        .map(|choice| {
            let mut conns = BTreeMap::new();
            for ((e, fs, options), ci) in opts.iter().zip(choice) {
                let (ps, lone) = &options[ci];
                conns.insert(
                    from_f(e, d),
                    Connection {
                        pairs: ps.iter().map(|&(a, b)| (from_f(&fs[a], d), from_f(&fs[b], d))).collect(),
                        lone: lone.map(|l| from_f(&fs[l], d)),
                    },
                );
            }
            complex_from(faces, d, k, conns)
        })
        .collect()
}

/// Connected osculating structures on an explicit face set (e.g. a fixed
/// polyominoid), as complexes.
pub fn osculating_structures(faces: &[FaceCoord]) -> Result<Vec<CellComplex>> {
    let first = faces.first().ok_or_else(|| Error::Empty("face set".into()))?;
    let (d, k) = (first.dim(), first.k());
    let fs: Vec<F> = faces.iter().map(to_f).collect::<Result<_>>()?;
    Ok(som_complexes(&fs, d, k))
}

/// Translate so the smallest face sits at its canonical position.
pub fn canonical_faces(faces: &[FaceCoord]) -> Result<Vec<FaceCoord>> {
    crate::lattice::canonical_translate(faces)
}

/// Whether a face set is connected across shared edges and no edge meets
/// more than two faces.
pub fn is_sam(faces: &[FaceCoord]) -> Result<bool> {
    let Some(first) = faces.first() else {
        return Ok(false);
    };
    let d = first.dim();
    let fs: Vec<F> = faces.iter().map(to_f).collect::<Result<_>>()?;
    let mut by_edge: FxHashMap<F, Vec<usize>> = FxHashMap::default();
    for (i, f) in fs.iter().enumerate() {
        for e in edges_of(f, d) {
            by_edge.entry(e).or_default().push(i);
        }
    }
    if by_edge.values().any(|v| v.len() > 2) {
        return Ok(false);
    }
    let distinct: FxHashSet<F> = fs.iter().copied().collect();
    if distinct.len() != fs.len() {
        return Ok(false);
    }
    let mut dsu = Dsu::new(fs.len());
    let mut comps = fs.len();
    for v in by_edge.values() {
        if v.len() == 2 && dsu.union(v[0], v[1]) {
            comps -= 1;
        }
    }
    Ok(comps == 1)
}

// ---------------------------------------------------------------------------
// directed-walk configurations

/// All directed-walk complexes of size `n`: from one face, repeatedly attach
/// a face across one of the `k` coordinate-increasing edges of the last face
/// in one of the `d-k+1` increasing directions.
pub fn directed_walk_witnesses(d: usize, k: usize, n: usize) -> Result<Vec<Vec<FaceCoord>>> {
    let class = ManifoldClass::new(ManifoldKind::Sam, d, k)?;
    let per_step = (k * (d - k + 1)) as u128;
    let total = roots(d, k).len() as u128 * per_step.pow(n.saturating_sub(1) as u32);
    const CAP: u128 = 1 << 20;
    if n == 0 || total > CAP {
        return Err(Error::SizeCap {
            what: format!("directed walks ({d},{k}) size"),
            requested: n,
            cap: class.default_cap(),
        });
    }
    let mut out = Vec::new();
    for root in roots(d, k) {
        let mut cur: Vec<Vec<F>> = vec![vec![root]];
        for _ in 1..n {
            let mut next = Vec::new();
            for walk in &cur {
                let last = *walk.last().unwrap();
                for j in (0..d).filter(|&j| odd(last[j])) {
                    let mut e = last;
                    e[j] += 1;
                    for i in (0..d).filter(|&i| !odd(e[i])) {
                        let mut g = e;
                        g[i] += 1;
                        let mut w = walk.clone();
                        w.push(g);
                        next.push(w);
                    }
                }
            }
            cur = next;
        }
        out.extend(cur.into_iter().map(|w| w.iter().map(|f| from_f(f, d)).collect::<Vec<_>>()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// closed-form bounds

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn ratio(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

/// `w^w / (w-1)^(w-1)`, with `0^0 = 1`.
fn binomial_growth(w: u64) -> BigRational {
    if w == 0 {
        return BigRational::one();
    }
    ratio(big(w).pow(w as u32), big(w - 1).pow((w - 1) as u32))
}

fn check_dk(d: usize, k: usize) -> Result<()> {
    if k < 1 || k > d {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= d, got d = {d}, k = {k}")));
    }
    Ok(())
}

/// Closed self-avoiding manifolds: `2(d-k) + 1`.
pub fn bound_closed_sam_upper(d: usize, k: usize) -> Result<BigRational> {
    check_dk(d, k)?;
    if k >= d {
        return Err(Error::InvalidArgument("closed-manifold bound needs k < d".into()));
    }
    Ok(BigRational::from_integer(big((2 * (d - k) + 1) as u64)))
}

/// Self-avoiding and self-osculating manifolds:
/// `(2k-1)^(2k-1) / (2k-2)^(2k-2) * (2(d-k)+1)`.
pub fn bound_sam_som_upper(d: usize, k: usize) -> Result<BigRational> {
    check_dk(d, k)?;
    Ok(binomial_growth((2 * k - 1) as u64) * big((2 * (d - k) + 1) as u64))
}

/// Fixed polyominoids: `w^w / (w-1)^(w-1)` with `w = (2k-1)(2(d-k)+1)`.
pub fn bound_xd_upper(d: usize, k: usize) -> Result<BigRational> {
    check_dk(d, k)?;
    Ok(binomial_growth(((2 * k - 1) * (2 * (d - k) + 1)) as u64))
}

/// Directed-walk lower bound `k(d-k+1)`.
pub fn bound_sam_lower(d: usize, k: usize) -> Result<BigInt> {
    check_dk(d, k)?;
    Ok(big((k * (d - k + 1)) as u64))
}

/// Closed-manifold lower bound `((k+1)(d-k))^(1/(2k))`.
pub fn bound_closed_sam_lower(d: usize, k: usize) -> Result<f64> {
    check_dk(d, k)?;
    if k >= d {
        return Err(Error::InvalidArgument("closed-manifold bound needs k < d".into()));
    }
    Ok((((k + 1) * (d - k)) as f64).powf(1.0 / (2 * k) as f64))
}

/// Whether the closed upper bound lies strictly below the open lower bound.
pub fn strict_separation(d: usize, k: usize) -> Result<bool> {
    let up = bound_closed_sam_upper(d, k)?;
    let low = BigRational::from_integer(bound_sam_lower(d, k)?);
    Ok(up < low)
}

/// `x` rounded half-to-even at five decimals.
pub fn decimal5(x: &BigRational) -> String {
    let scaled = x * BigRational::from_integer(big(100_000));
    let fl = scaled.floor();
    let frac = &scaled - &fl;
    let half = ratio(BigInt::one(), big(2));
    let mut q = fl.to_integer();
    if frac > half || (frac == half && q.is_odd()) {
        q += 1;
    }
    let neg = q.is_negative();
    let a = q.abs();
    let (int, rem) = a.div_rem(&big(100_000));
    format!("{}{}.{:05}", if neg { "-" } else { "" }, int, rem.to_u64().unwrap_or(0))
}

/// One closed-form bound ready for output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaBound {
    pub formula_id: String,
    pub d: usize,
    pub k: usize,
    /// `p/q`, or `None` when the value is irrational.
    pub exact: Option<String>,
    /// Rounded half-to-even at five decimals.
    pub decimal: f64,
}

fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Closed-form bound by theorem number: 2 closed upper, 3 SAM/SOM upper,
/// 4 XD upper, 5 SAM lower, 6 closed lower.
pub fn formula_bound(theorem: u8, d: usize, k: usize) -> Result<FormulaBound> {
    let exact_of = |id: &str, r: BigRational| FormulaBound {
        formula_id: id.to_string(),
        d,
        k,
        exact: Some(rational_string(&r)),
        decimal: decimal5(&r).parse().expect("decimal string"),
    };
    match theorem {
        2 => Ok(exact_of("closed_sam_upper", bound_closed_sam_upper(d, k)?)),
        3 => Ok(exact_of("sam_som_upper", bound_sam_som_upper(d, k)?)),
        4 => Ok(exact_of("xd_upper", bound_xd_upper(d, k)?)),
        5 => Ok(exact_of("sam_lower", BigRational::from_integer(bound_sam_lower(d, k)?))),
        6 => {
            let v = bound_closed_sam_lower(d, k)?;
            Ok(FormulaBound {
                formula_id: "closed_sam_lower".into(),
                d,
                k,
                exact: None,
                decimal: format!("{v:.5}").parse().expect("decimal string"),
            })
        }
        _ => Err(Error::InvalidArgument(format!("no formula for theorem {theorem}"))),
    }
}

fn binom(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Upper bounds on `c_n` from the counting schemes: the binomial count and
/// its exponential relaxation.
#[derive(Clone, Debug, PartialEq)]
pub struct CountBounds {
    pub binomial: BigUint,
    pub exponential: BigRational,
}

pub fn count_upper_bounds(class: ManifoldClass, n: usize) -> Result<CountBounds> {
    let (d, k) = (class.d as u64, class.k as u64);
    if n == 0 {
        return Err(Error::InvalidArgument("size must be at least 1".into()));
    }
    let n = n as u64;
    let orient = binom(d, k);
    let branch = 2 * (d - k) + 1;
    let to_rat = |u: &BigUint| BigRational::from_integer(BigInt::from(u.clone()));
    Ok(match class.kind {
        ManifoldKind::Sam | ManifoldKind::Som => {
            let b = &orient * binom((2 * k - 1) * (n - 1) + 1, n - 1) * BigUint::from(branch).pow((n - 1) as u32);
            let growth = binomial_growth(2 * k - 1);
            let mut e = to_rat(&orient) * BigRational::from_integer(big(branch).pow((n - 1) as u32));
            for _ in 0..n {
                e *= &growth;
            }
            CountBounds {
                binomial: b,
                exponential: e,
            }
        }
        ManifoldKind::Xd => {
            let w = (2 * k - 1) * branch;
            let b = &orient * binom(w * (n - 1) + branch, n - 1);
            let growth = binomial_growth(w);
            let mut e = to_rat(&orient);
            for _ in 1..n {
                e *= &growth;
            }
            CountBounds {
                binomial: b,
                exponential: e,
            }
        }
        ManifoldKind::SamClosed => {
            let b = &orient * BigUint::from(branch).pow((n - 1) as u32);
            CountBounds {
                exponential: to_rat(&b),
                binomial: b,
            }
        }
    })
}

/// Directed-walk lower bound on `c_n` for open self-avoiding manifolds:
/// `C(d,k) (k(d-k+1))^(n-1)`.
pub fn count_lower_bound(d: usize, k: usize, n: usize) -> Result<BigUint> {
    check_dk(d, k)?;
    Ok(binom(d as u64, k as u64) * BigUint::from((k * (d - k + 1)) as u64).pow(n.saturating_sub(1) as u32))
}

/// Canonical key of a face set, for distinctness checks.
pub fn canonical_key(faces: &[FaceCoord]) -> Result<BTreeSet<FaceCoord>> {
    Ok(canonical_faces(faces)?.into_iter().collect())
}
