//! Restricted walk models on the square and triangular lattices.
//!
//! A vertex configuration records, for every incident direction, what the walk
//! does there: nothing, a path end (stub) or a passage to another direction
//! (chord). Configurations are packed three bits per direction: codes `0..=5`
//! name the chord partner, [`STUB`] marks an end and [`UNUSED`] an idle edge.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Direction, LatticeId};

pub const STUB: u32 = 6;
pub const UNUSED: u32 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    Saw,
    Sow,
    Odw,
    Naw,
    Eaw,
    Nrw,
    Lwalk,
    Rw,
}

impl RuleId {
    pub const ALL: [RuleId; 8] = [
        RuleId::Saw,
        RuleId::Sow,
        RuleId::Odw,
        RuleId::Naw,
        RuleId::Eaw,
        RuleId::Nrw,
        RuleId::Lwalk,
        RuleId::Rw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Saw => "saw",
            RuleId::Sow => "sow",
            RuleId::Odw => "odw",
            RuleId::Naw => "naw",
            RuleId::Eaw => "eaw",
            RuleId::Nrw => "nrw",
            RuleId::Lwalk => "lwalk",
            RuleId::Rw => "rw",
        }
    }

    pub fn has_table(self) -> bool {
        matches!(self, RuleId::Saw | RuleId::Sow | RuleId::Odw | RuleId::Lwalk)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownRule(s.to_string()))
    }
}

/// A walk model on a specific planar lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WalkRule {
    pub id: RuleId,
    pub lattice: LatticeId,
}

impl WalkRule {
    pub fn new(id: RuleId, lattice: LatticeId) -> Result<Self> {
        let lattice = match lattice {
            LatticeId::Hypercubic(2) => LatticeId::Square,
            LatticeId::Hypercubic(_) => {
                return Err(Error::RuleNotOnLattice {
                    rule: id.to_string(),
                    lattice: lattice.to_string(),
                })
            }
            l => l,
        };
        if id == RuleId::Lwalk && lattice != LatticeId::Square {
            return Err(Error::RuleNotOnLattice {
                rule: id.to_string(),
                lattice: lattice.to_string(),
            });
        }
        Ok(WalkRule { id, lattice })
    }

    pub fn coordination(self) -> usize {
        self.lattice.coordination()
    }
}

impl fmt::Display for WalkRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on the {} lattice", self.id, self.lattice)
    }
}

/// A walk from the origin given by its steps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub lattice: LatticeId,
    pub steps: Vec<Direction>,
}

impl Path {
    pub fn new(lattice: LatticeId, steps: Vec<Direction>) -> Self {
        Path { lattice, steps }
    }

    pub fn from_indices(lattice: LatticeId, steps: &[u8]) -> Self {
        Path {
            lattice,
            steps: steps.iter().map(|&s| Direction(s)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn positions(&self) -> Vec<[i32; 2]> {
        let mut p = [0, 0];
        let mut out = vec![p];
        for &s in &self.steps {
            let d = self.lattice.planar_step(s);
            p = [p[0] + d[0], p[1] + d[1]];
            out.push(p);
        }
        out
    }
}

/// Chords and stubs realized at one vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexChordConfig {
    pub chords: Vec<(u8, u8)>,
    pub stubs: Vec<u8>,
}

impl VertexChordConfig {
    pub fn empty() -> Self {
        VertexChordConfig {
            chords: vec![],
            stubs: vec![],
        }
    }

    /// Packed code; `None` if some direction is used twice or out of range.
    pub fn key(&self, coordination: usize) -> Option<u32> {
        let mut key = empty_key(coordination);
        let mut set = |dir: u8, code: u32| -> bool {
            if dir as usize >= coordination || field(key, dir as usize) != UNUSED {
                return false;
            }
            key = with_field(key, dir as usize, code);
            true
        };
        for &(a, b) in &self.chords {
            if a == b || !set(a, b as u32) || !set(b, a as u32) {
                return None;
            }
        }
        for &s in &self.stubs {
            if !set(s, STUB) {
                return None;
            }
        }
        Some(key)
    }

    pub fn from_key(key: u32, coordination: usize) -> Self {
        let mut chords = Vec::new();
        let mut stubs = Vec::new();
        for i in 0..coordination {
            match field(key, i) {
                UNUSED => {}
                STUB => stubs.push(i as u8),
                j if (j as usize) > i => chords.push((i as u8, j as u8)),
                _ => {}
            }
        }
        VertexChordConfig { chords, stubs }
    }
}

pub fn empty_key(coordination: usize) -> u32 {
    (1u32 << (3 * coordination)) - 1
}

#[inline]
pub fn field(key: u32, dir: usize) -> u32 {
    (key >> (3 * dir)) & 7
}

#[inline]
fn with_field(key: u32, dir: usize, code: u32) -> u32 {
    (key & !(7 << (3 * dir))) | (code << (3 * dir))
}

/// True iff no two chords interleave in the cyclic order of directions.
pub fn noncrossing_check(cfg: &VertexChordConfig, lattice: LatticeId) -> bool {
    let n = lattice.coordination() as u8;
    let between = |a: u8, b: u8, x: u8| {
        // x strictly inside the arc a -> b (counterclockwise)
        let span = (b + n - a) % n;
        let off = (x + n - a) % n;
        off > 0 && off < span
    };
    for (i, &(a, b)) in cfg.chords.iter().enumerate() {
        for &(c, d) in &cfg.chords[i + 1..] {
            if between(a, b, c) != between(a, b, d) && ![a, b].contains(&c) && ![a, b].contains(&d)
            {
                return false;
            }
        }
    }
    true
}

fn generators(rule: WalkRule) -> Result<Vec<Vec<(u8, u8)>>> {
    use LatticeId::*;
    use RuleId::*;
    let g = match (rule.id, rule.lattice) {
        (Saw, Square) => vec![vec![(0, 2)], vec![(0, 1)]],
        (Saw, Triangular) => vec![vec![(0, 1)], vec![(0, 2)], vec![(0, 3)]],
        (Sow | Odw, Square) => vec![vec![(0, 2)], vec![(1, 2), (0, 3)]],
        (Sow, Triangular) => vec![
            vec![(0, 1), (2, 3), (4, 5)],
            vec![(1, 5), (2, 4)],
            vec![(1, 5), (2, 3)],
            vec![(0, 3), (2, 1), (5, 4)],
        ],
        (Odw, Triangular) => vec![
            vec![(0, 1), (2, 3), (4, 5)],
            vec![(1, 5), (2, 4)],
            vec![(1, 5), (2, 3)],
            vec![(2, 1), (5, 4)],
            vec![(2, 1), (0, 3)],
        ],
        (Lwalk, Square) => vec![vec![(0, 1)]],
        (id, _) if !id.has_table() => return Err(Error::NoGeneratorTable(id.to_string())),
        _ => {
            return Err(Error::RuleNotOnLattice {
                rule: rule.id.to_string(),
                lattice: rule.lattice.to_string(),
            })
        }
    };
    Ok(g)
}

/// Every allowed vertex configuration of a table-defined rule.
#[derive(Clone, Debug)]
pub struct VertexConfigTable {
    pub rule: WalkRule,
    /// Sorted packed keys.
    pub keys: Vec<u32>,
    dense: Vec<bool>,
}

impl VertexConfigTable {
    pub fn contains_key(&self, key: u32) -> bool {
        self.dense[key as usize]
    }

    pub fn contains(&self, cfg: &VertexChordConfig) -> bool {
        cfg.key(self.rule.coordination())
            .map(|k| self.contains_key(k))
            .unwrap_or(false)
    }

    pub fn configs(&self) -> Vec<VertexChordConfig> {
        let c = self.rule.coordination();
        self.keys
            .iter()
            .map(|&k| VertexChordConfig::from_key(k, c))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Close the rule's generators under the point group and under truncation.
///
/// Each generator chord is kept, cut down to a stub on one of its two edges,
/// or dropped.
pub fn build_config_table(rule: WalkRule) -> Result<VertexConfigTable> {
    let gens = generators(rule)?;
    let c = rule.coordination();
    let mut keys = BTreeSet::new();
    for op in rule.lattice.symmetry_group() {
        for g in &gens {
            let chords: Vec<(u8, u8)> = g
                .iter()
                .map(|&(a, b)| (op.perm[a as usize], op.perm[b as usize]))
                .collect();
            for choice in 0..4usize.pow(chords.len() as u32) {
                let mut cfg = VertexChordConfig::empty();
                let mut t = choice;
                for &(a, b) in &chords {
                    match t % 4 {
                        0 => cfg.chords.push((a, b)),
                        1 => cfg.stubs.push(a),
                        2 => cfg.stubs.push(b),
                        _ => {}
                    }
                    t /= 4;
                }
                keys.insert(cfg.key(c).expect("generator chords are disjoint"));
            }
        }
    }
    let mut dense = vec![false; 1 << (3 * c)];
    for &k in &keys {
        dense[k as usize] = true;
    }
    Ok(VertexConfigTable {
        rule,
        keys: keys.into_iter().collect(),
        dense,
    })
}

/// Incremental rule checker on a dense grid around the origin.
#[derive(Clone)]
pub struct WalkState {
    rule: WalkRule,
    table: Option<std::sync::Arc<Vec<bool>>>,
    radius: usize,
    codes: Vec<u32>,
    deltas: Vec<isize>,
    pos: usize,
    steps: Vec<u8>,
    undo: Vec<UndoEntry>,
}

#[derive(Clone, Copy)]
struct UndoEntry {
    pos: usize,
    code_u: u32,
    code_v: u32,
}

impl WalkState {
    pub fn new(rule: WalkRule, capacity: usize) -> Result<Self> {
        let table = if rule.id.has_table() {
            Some(std::sync::Arc::new(build_config_table(rule)?.dense))
        } else {
            None
        };
        Ok(Self::with_table(rule, table, capacity))
    }

    fn with_table(rule: WalkRule, table: Option<std::sync::Arc<Vec<bool>>>, capacity: usize) -> Self {
        let radius = capacity + 2;
        let side = 2 * radius + 1;
        let deltas = rule
            .lattice
            .directions()
            .map(|d| {
                let s = rule.lattice.planar_step(d);
                s[0] as isize + s[1] as isize * side as isize
            })
            .collect();
        WalkState {
            rule,
            table,
            radius,
            codes: vec![empty_key(rule.coordination()); side * side],
            deltas,
            pos: radius * side + radius,
            steps: Vec::with_capacity(capacity),
            undo: Vec::with_capacity(capacity),
        }
    }

    pub fn rule(&self) -> WalkRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[u8] {
        &self.steps
    }

    pub fn clear(&mut self) {
        while self.pop().is_some() {}
    }

    fn grow(&mut self) {
        let mut bigger = Self::with_table(self.rule, self.table.clone(), 2 * self.radius + 8);
        for &s in &self.steps {
            let ok = bigger.try_push(Direction(s));
            debug_assert!(ok);
        }
        *self = bigger;
    }

    /// Append a step if the extended walk is still allowed; the state is
    /// unchanged otherwise.
    pub fn try_push(&mut self, dir: Direction) -> bool {
        if self.steps.len() + 2 >= self.radius {
            self.grow();
        }
        let lat = self.rule.lattice;
        let d = dir.index();
        let back = lat.opposite(dir).index();
        let u = self.pos;
        let v = (u as isize + self.deltas[d]) as usize;
        let last = self.steps.last().map(|&s| lat.opposite(Direction(s)).index());
        match self.rule.id {
            RuleId::Rw => {}
            RuleId::Nrw => {
                if last == Some(d) {
                    return false;
                }
            }
            _ => {
                let cu = self.codes[u];
                let cv = self.codes[v];
                if field(cu, d) != UNUSED || field(cv, back) != UNUSED {
                    return false;
                }
                let nu = match last {
                    None => with_field(cu, d, STUB),
                    Some(inc) => with_field(with_field(cu, inc, d as u32), d, inc as u32),
                };
                let nv = with_field(cv, back, STUB);
                let ok = match self.rule.id {
                    RuleId::Eaw => true,
                    RuleId::Naw => {
                        let empty = empty_key(self.rule.coordination());
                        cv == empty
                            && self.deltas.iter().all(|&dl| {
                                let w = (v as isize + dl) as usize;
                                w == u || self.codes[w] == empty
                            })
                    }
                    _ => {
                        let t = self.table.as_ref().expect("table rule");
                        t[nu as usize] && t[nv as usize]
                    }
                };
                if !ok {
                    return false;
                }
                self.undo.push(UndoEntry {
                    pos: u,
                    code_u: cu,
                    code_v: cv,
                });
                self.codes[u] = nu;
                self.codes[v] = nv;
                self.pos = v;
                self.steps.push(d as u8);
                return true;
            }
        }
        self.undo.push(UndoEntry {
            pos: u,
            code_u: 0,
            code_v: 0,
        });
        self.pos = v;
        self.steps.push(d as u8);
        true
    }

    /// Remove the last step, returning it.
    pub fn pop(&mut self) -> Option<Direction> {
        let s = self.steps.pop()?;
        let e = self.undo.pop().expect("undo entry per step");
        if !matches!(self.rule.id, RuleId::Rw | RuleId::Nrw) {
            self.codes[self.pos] = e.code_v;
            self.codes[e.pos] = e.code_u;
        }
        self.pos = e.pos;
        Some(Direction(s))
    }
}

/// Incremental check that leaves the input state untouched.
pub fn is_allowed_incremental(state: &WalkState, next: Direction) -> (bool, WalkState) {
    let mut s = state.clone();
    let ok = s.try_push(next);
    (ok, s)
}

/// Reusable checker for many short paths under one rule.
pub struct RuleChecker {
    rule: WalkRule,
    table: Option<std::sync::Arc<Vec<bool>>>,
}

impl RuleChecker {
    pub fn new(rule: WalkRule) -> Result<Self> {
        let table = if rule.id.has_table() {
            Some(std::sync::Arc::new(build_config_table(rule)?.dense))
        } else {
            None
        };
        Ok(RuleChecker { rule, table })
    }

    pub fn rule(&self) -> WalkRule {
        self.rule
    }

    /// A fresh incremental state sharing this checker's table.
    pub fn state(&self, capacity: usize) -> WalkState {
        WalkState::with_table(self.rule, self.table.clone(), capacity)
    }

    /// Whole-path check using a hash map, independent of the dense grid.
    pub fn allowed(&self, steps: &[u8]) -> bool {
        let lat = self.rule.lattice;
        match self.rule.id {
            RuleId::Rw => return true,
            RuleId::Nrw => {
                return steps
                    .windows(2)
                    .all(|w| lat.opposite(Direction(w[0])).0 != w[1])
            }
            _ => {}
        }
        let c = self.rule.coordination();
        let empty = empty_key(c);
        let mut codes: HashMap<[i32; 2], u32> = HashMap::with_capacity(steps.len() + 1);
        let mut p = [0i32, 0i32];
        let mut order = vec![p];
        for (i, &s) in steps.iter().enumerate() {
            let d = s as usize;
            let back = lat.opposite(Direction(s)).index();
            let st = lat.planar_step(Direction(s));
            let q = [p[0] + st[0], p[1] + st[1]];
            let cu = *codes.get(&p).unwrap_or(&empty);
            if field(cu, d) != UNUSED {
                return false;
            }
            let nu = if i == 0 {
                with_field(cu, d, STUB)
            } else {
                let inc = lat.opposite(Direction(steps[i - 1])).index();
                with_field(with_field(cu, inc, d as u32), d, inc as u32)
            };
            codes.insert(p, nu);
            let cv = *codes.get(&q).unwrap_or(&empty);
            if field(cv, back) != UNUSED {
                return false;
            }
            codes.insert(q, with_field(cv, back, STUB));
            p = q;
            order.push(p);
        }
        match self.rule.id {
            RuleId::Eaw => true,
            RuleId::Naw => {
                let n = order.len();
                for i in 0..n {
                    for j in i + 1..n {
                        let dx = order[j][0] - order[i][0];
                        let dy = order[j][1] - order[i][1];
                        if dx == 0 && dy == 0 {
                            return false;
                        }
                        if j > i + 1 && lat.directions().any(|d| lat.planar_step(d) == [dx, dy]) {
                            return false;
                        }
                    }
                }
                true
            }
            _ => {
                let t = self.table.as_ref().expect("table rule");
                codes.values().all(|&k| t[k as usize])
            }
        }
    }
}

/// Whether every vertex the path visits carries an allowed configuration.
pub fn is_allowed(rule: WalkRule, path: &Path) -> Result<bool> {
    if path.lattice != rule.lattice {
        return Err(Error::InvalidArgument(format!(
            "path on the {} lattice checked against {}",
            path.lattice, rule
        )));
    }
    let checker = RuleChecker::new(rule)?;
    let steps: Vec<u8> = path.steps.iter().map(|d| d.0).collect();
    Ok(checker.allowed(&steps))
}
