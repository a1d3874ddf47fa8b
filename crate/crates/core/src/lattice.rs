//! Lattice geometry: direction sets, point-group symmetries and center
//! coordinates of k-faces in the hypercubic lattice.
//!
//! Planar lattices use integer coordinates. The triangular lattice is embedded
//! in the oblique basis `(1,0)` (0 degrees) and `(0,1)` (60 degrees), so every
//! symmetry is an integer matrix.
//!
//! Center coordinates are stored doubled: a k-face has exactly k odd entries.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square lattice directions in cyclic order: E, N, W, S.
const SQUARE_DIRS: [[i32; 2]; 4] = [[1, 0], [0, 1], [-1, 0], [0, -1]];

/// Triangular lattice directions at 60 degree steps, in the oblique basis.
const TRIANGULAR_DIRS: [[i32; 2]; 6] = [[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LatticeId {
    Square,
    Triangular,
    Hypercubic(usize),
}

impl fmt::Display for LatticeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeId::Square => write!(f, "square"),
            LatticeId::Triangular => write!(f, "triangular"),
            LatticeId::Hypercubic(d) => write!(f, "hypercubic{d}"),
        }
    }
}

impl FromStr for LatticeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LatticeId::Square),
            "triangular" => Ok(LatticeId::Triangular),
            "cubic" => Ok(LatticeId::Hypercubic(3)),
            other => {
                if let Some(d) = other.strip_prefix("hypercubic") {
                    match d.parse::<usize>() {
                        Ok(d) if d >= 1 => Ok(LatticeId::Hypercubic(d)),
                        _ => Err(Error::UnknownLattice(other.to_string())),
                    }
                } else {
                    Err(Error::UnknownLattice(other.to_string()))
                }
            }
        }
    }
}

/// A lattice direction, identified by its index in the lattice's fixed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction(pub u8);

impl Direction {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LatticeId {
    pub fn dim(self) -> usize {
        match self {
            LatticeId::Square | LatticeId::Triangular => 2,
            LatticeId::Hypercubic(d) => d,
        }
    }

    /// Number of nearest neighbours of a vertex.
    pub fn coordination(self) -> usize {
        match self {
            LatticeId::Square => 4,
            LatticeId::Triangular => 6,
            LatticeId::Hypercubic(d) => 2 * d,
        }
    }

    pub fn directions(self) -> impl Iterator<Item = Direction> {
        (0..self.coordination() as u8).map(Direction)
    }

    /// Hypercubic directions are `+e_a` at index `a` and `-e_a` at index `a + d`,
    /// which for `d = 2` reproduces the square order E, N, W, S.
    pub fn displacement(self, dir: Direction) -> Vec<i32> {
        match self {
            LatticeId::Square => SQUARE_DIRS[dir.index()].to_vec(),
            LatticeId::Triangular => TRIANGULAR_DIRS[dir.index()].to_vec(),
            LatticeId::Hypercubic(d) => {
                let mut v = vec![0; d];
                let i = dir.index();
                if i < d {
                    v[i] = 1;
                } else {
                    v[i - d] = -1;
                }
                v
            }
        }
    }

    /// Planar displacement; only meaningful for two-dimensional lattices.
    pub fn planar_step(self, dir: Direction) -> [i32; 2] {
        match self {
            LatticeId::Square => SQUARE_DIRS[dir.index()],
            LatticeId::Triangular => TRIANGULAR_DIRS[dir.index()],
            LatticeId::Hypercubic(2) => SQUARE_DIRS[dir.index()],
            LatticeId::Hypercubic(_) => panic!("planar_step on a non-planar lattice"),
        }
    }

    pub fn opposite(self, dir: Direction) -> Direction {
        let c = self.coordination() as u8;
        match self {
            LatticeId::Hypercubic(d) if d != 2 => {
                let d = d as u8;
                if dir.0 < d {
                    Direction(dir.0 + d)
                } else {
                    Direction(dir.0 - d)
                }
            }
            _ => Direction((dir.0 + c / 2) % c),
        }
    }

    /// All coordination-many neighbours of `p`, in the lattice's cyclic order.
    pub fn neighbors(self, p: &[i32]) -> Result<Vec<(Direction, Vec<i32>)>> {
        if p.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "point of dimension {} on the {} lattice",
                p.len(),
                self
            )));
        }
        Ok(self
            .directions()
            .map(|dir| {
                let q = p
                    .iter()
                    .zip(self.displacement(dir))
                    .map(|(a, b)| a + b)
                    .collect();
                (dir, q)
            })
            .collect())
    }

    /// The full point group of the lattice, acting on direction indices.
    pub fn symmetry_group(self) -> Vec<SymmetryOp> {
        match self {
            LatticeId::Square | LatticeId::Hypercubic(2) => dihedral(4, self),
            LatticeId::Triangular => dihedral(6, self),
            LatticeId::Hypercubic(d) => hyperoctahedral(d),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryKind {
    Rotation,
    Reflection,
}

/// A point-group element, stored as its action on direction indices together
/// with the integer matrix it represents (row-major).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryOp {
    pub kind: SymmetryKind,
    pub perm: Vec<u8>,
    pub matrix: Vec<Vec<i32>>,
}

impl SymmetryOp {
    pub fn apply(&self, dir: Direction) -> Direction {
        Direction(self.perm[dir.index()])
    }

    pub fn apply_point(&self, p: &[i32]) -> Vec<i32> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SymmetryOp) -> SymmetryOp {
        let perm = other.perm.iter().map(|&i| self.perm[i as usize]).collect();
        let n = self.matrix.len();
        let matrix = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| (0..n).map(|k| self.matrix[r][k] * other.matrix[k][c]).sum())
                    .collect()
            })
            .collect();
        let kind = if self.kind == other.kind {
            SymmetryKind::Rotation
        } else {
            SymmetryKind::Reflection
        };
        SymmetryOp { kind, perm, matrix }
    }
}

/// Integer matrix for a direction permutation of a planar lattice: the images
/// of the two basis directions (index 0 and 1) give the columns.
fn planar_matrix(lattice: LatticeId, perm: &[u8]) -> Vec<Vec<i32>> {
    let c0 = lattice.planar_step(Direction(perm[0]));
    let c1 = lattice.planar_step(Direction(perm[1]));
    vec![vec![c0[0], c1[0]], vec![c0[1], c1[1]]]
}

fn dihedral(n: u8, lattice: LatticeId) -> Vec<SymmetryOp> {
    let mut ops = Vec::with_capacity(2 * n as usize);
    for r in 0..n {
        let perm: Vec<u8> = (0..n).map(|i| (i + r) % n).collect();
        let matrix = planar_matrix(lattice, &perm);
        ops.push(SymmetryOp {
            kind: SymmetryKind::Rotation,
            perm,
            matrix,
        });
    }
    for r in 0..n {
        let perm: Vec<u8> = (0..n).map(|i| (n - i + r) % n).collect();
        let matrix = planar_matrix(lattice, &perm);
        ops.push(SymmetryOp {
            kind: SymmetryKind::Reflection,
            perm,
            matrix,
        });
    }
    ops
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn hyperoctahedral(d: usize) -> Vec<SymmetryOp> {
    let mut ops = Vec::new();
    for perm in permutations(d) {
        for signs in 0u32..(1 << d) {
            let mut matrix = vec![vec![0; d]; d];
            let mut dir_perm = vec![0u8; 2 * d];
            let mut negatives = 0;
            for (a, &b) in perm.iter().enumerate() {
                let s = if signs >> a & 1 == 1 { -1 } else { 1 };
                if s < 0 {
                    negatives += 1;
                }
                matrix[b][a] = s;
                let (plus, minus) = if s > 0 { (b, b + d) } else { (b + d, b) };
                dir_perm[a] = plus as u8;
                dir_perm[a + d] = minus as u8;
            }
            let inversions = (0..d)
                .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
                .filter(|&(i, j)| perm[i] > perm[j])
                .count();
            let kind = if (negatives + inversions) % 2 == 0 {
                SymmetryKind::Rotation
            } else {
                SymmetryKind::Reflection
            };
            ops.push(SymmetryOp {
                kind,
                perm: dir_perm,
                matrix,
            });
        }
    }
    ops
}

/// Center coordinates of a k-face, doubled so that half-integers become odd.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceCoord {
    pub doubled: Vec<i32>,
}

impl FaceCoord {
    pub fn new(doubled: Vec<i32>) -> Self {
        FaceCoord { doubled }
    }

    /// Build from ordinary coordinates given as halves, e.g. `[1, 1, 0]` for `(½, ½, 0)`.
    pub fn from_halves(halves: &[i32]) -> Self {
        FaceCoord {
            doubled: halves.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.doubled.len()
    }

    pub fn k(&self) -> usize {
        self.doubled.iter().filter(|c| c.rem_euclid(2) == 1).count()
    }

    pub fn half_int_dims(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.doubled[i].rem_euclid(2) == 1)
            .collect()
    }

    pub fn int_dims(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.doubled[i].rem_euclid(2) == 0)
            .collect()
    }

    /// Shift coordinate `i` by `delta` halves.
    pub fn shifted(&self, i: usize, delta: i32) -> FaceCoord {
        let mut c = self.doubled.clone();
        c[i] += delta;
        FaceCoord { doubled: c }
    }

    /// Offset `self - other` in halves.
    pub fn offset_from(&self, other: &FaceCoord) -> Vec<i32> {
        self.doubled
            .iter()
            .zip(&other.doubled)
            .map(|(a, b)| a - b)
            .collect()
    }
}

impl fmt::Display for FaceCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.doubled.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if c % 2 == 0 {
                write!(f, "{}", c / 2)?;
            } else {
                write!(f, "{}/2", c)?;
            }
        }
        write!(f, ")")
    }
}

/// The bounding (k-1)-edges of a face and, for each, the other k-faces that
/// can be attached across it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidences {
    pub edges: Vec<FaceCoord>,
    pub coface_slots: Vec<Vec<FaceCoord>>,
}

/// All k-faces incident to a (k-1)-edge.
pub fn faces_on_edge(edge: &FaceCoord) -> Vec<FaceCoord> {
    let mut out = Vec::new();
    for i in edge.int_dims() {
        out.push(edge.shifted(i, -1));
        out.push(edge.shifted(i, 1));
    }
    out
}

/// The 2k bounding edges of `f` and the `2(d-k)+1` candidate cofaces per edge.
pub fn face_incidences(f: &FaceCoord) -> Result<Incidences> {
    let k = f.k();
    if k == 0 || k > f.dim() {
        return Err(Error::InvalidArgument(format!(
            "face {f} has k = {k}; need 1 <= k <= d"
        )));
    }
    let mut edges = Vec::with_capacity(2 * k);
    let mut coface_slots = Vec::with_capacity(2 * k);
    for j in f.half_int_dims() {
        for s in [-1, 1] {
            let e = f.shifted(j, s);
            let slots = faces_on_edge(&e).into_iter().filter(|g| g != f).collect();
            edges.push(e);
            coface_slots.push(slots);
        }
    }
    Ok(Incidences {
        edges,
        coface_slots,
    })
}

/// Faces sharing a (k-1)-edge with `f`.
pub fn face_neighbors(f: &FaceCoord) -> Vec<FaceCoord> {
    let mut out = Vec::new();
    for j in f.half_int_dims() {
        for s in [-1, 1] {
            let e = f.shifted(j, s);
            out.extend(faces_on_edge(&e).into_iter().filter(|g| g != f));
        }
    }
    out
}

/// Translate a set of faces so that its lexicographically smallest face has
/// every coordinate in `{0, ½}`; the result is sorted.
pub fn canonical_translate(cells: &[FaceCoord]) -> Result<Vec<FaceCoord>> {
    let min = cells
        .iter()
        .min()
        .ok_or_else(|| Error::Empty("canonical_translate of an empty set".into()))?;
    let d = min.dim();
    if cells.iter().any(|c| c.dim() != d) {
        return Err(Error::InvalidArgument("faces of mixed dimension".into()));
    }
    let shift: Vec<i32> = min.doubled.iter().map(|&c| 2 * c.div_euclid(2)).collect();
    let out: BTreeSet<FaceCoord> = cells
        .iter()
        .map(|c| FaceCoord {
            doubled: c.doubled.iter().zip(&shift).map(|(a, s)| a - s).collect(),
        })
        .collect();
    Ok(out.into_iter().collect())
}
