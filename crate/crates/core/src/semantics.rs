//! Consumption functions, state-space membership and lattice navigation.
//!
//! A vertex is a point of the integer lattice `∏ [0 : top_j]`; for a whole
//! program `top_j = l(j)+1`. Consumption at integer coordinate `k` counts
//! locks held strictly between a `P` and its matching `V`, so a thread
//! standing on a `P(r)` does not hold `r` yet and a thread standing on a
//! `V(r)` no longer does. On the open segment `]k, k+1[` it holds `r`
//! exactly when it locked `r` at or before `k` and releases after `k`.

use std::fmt;

use thiserror::Error;

use crate::pv_lang::{ActionKind, Program};

/// Integer lattice point; `coords[j]` is the position of thread `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub Vec<usize>);

impl Vertex {
    pub fn new(coords: Vec<usize>) -> Self {
        Vertex(coords)
    }

    pub fn origin(n: usize) -> Self {
        Vertex(vec![0; n])
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &Vertex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn step(&self, j: usize) -> Vertex {
        let mut c = self.0.clone();
        c[j] += 1;
        Vertex(c)
    }
}

impl From<Vec<usize>> for Vertex {
    fn from(v: Vec<usize>) -> Self {
        Vertex(v)
    }
}

impl std::ops::Index<usize> for Vertex {
    type Output = usize;
    fn index(&self, j: usize) -> &usize {
        &self.0[j]
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Set of thread directions, one bit per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Dirs(pub u64);

impl Dirs {
    pub const EMPTY: Dirs = Dirs(0);

    pub fn single(j: usize) -> Dirs {
        Dirs(1 << j)
    }

    pub fn from_slice(dirs: &[usize]) -> Dirs {
        Dirs(dirs.iter().fold(0, |m, &j| m | (1 << j)))
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn insert(self, j: usize) -> Dirs {
        Dirs(self.0 | (1 << j))
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |j| bits >> j & 1 == 1)
    }

    pub fn is_subset(self, other: Dirs) -> bool {
        self.0 & !other.0 == 0
    }
}

/// One coordinate of a [`Box`]: an interval with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn point(x: usize) -> Self {
        Interval {
            lo: x,
            hi: x,
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// Membership of `y / 2`.
    pub fn contains_doubled(&self, y2: usize) -> bool {
        let (lo, hi) = (2 * self.lo, 2 * self.hi);
        (if self.lo_closed { y2 >= lo } else { y2 > lo })
            && (if self.hi_closed { y2 <= hi } else { y2 < hi })
    }
}

/// Product of intervals, used for doomed, critical and eliminated regions.
///
/// [`Box::half_open`] builds `]w, x]` and [`Box::open`] builds `]w, x[`;
/// coordinates where `w_j = x_j` collapse to the single value `w_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Box {
    pub spans: Vec<Interval>,
}

impl Box {
    fn build(low: &Vertex, high: &Vertex, hi_closed: bool) -> Box {
        assert_eq!(low.dim(), high.dim(), "box corners of different dimension");
        let spans = low
            .0
            .iter()
            .zip(&high.0)
            .map(|(&w, &x)| {
                assert!(w <= x, "box corners out of order");
                if w == x {
                    Interval::point(w)
                } else {
                    Interval {
                        lo: w,
                        hi: x,
                        lo_closed: false,
                        hi_closed,
                    }
                }
            })
            .collect();
        Box { spans }
    }

    /// `]low, high]`.
    pub fn half_open(low: &Vertex, high: &Vertex) -> Box {
        Box::build(low, high, true)
    }

    /// `]low, high[`.
    pub fn open(low: &Vertex, high: &Vertex) -> Box {
        Box::build(low, high, false)
    }

    pub fn low(&self) -> Vertex {
        Vertex(self.spans.iter().map(|s| s.lo).collect())
    }

    pub fn high(&self) -> Vertex {
        Vertex(self.spans.iter().map(|s| s.hi).collect())
    }

    pub fn dim(&self) -> usize {
        self.spans.len()
    }

    pub fn contains_vertex(&self, v: &Vertex) -> bool {
        self.contains_doubled(&v.0.iter().map(|c| 2 * c).collect::<Vec<_>>())
    }

    /// Membership of the point with coordinates `y2[j] / 2`.
    pub fn contains_doubled(&self, y2: &[usize]) -> bool {
        self.spans
            .iter()
            .zip(y2)
            .all(|(s, &y)| s.contains_doubled(y))
    }

    /// Does the closed cube `[v, v + e_dirs]` meet this box?
    pub fn meets_cube(&self, v: &[usize], dirs: Dirs) -> bool {
        self.spans.iter().zip(v).enumerate().all(|(j, (s, &c))| {
            if dirs.contains(j) {
                (2 * c..=2 * c + 2).any(|y| s.contains_doubled(y))
            } else {
                s.contains_doubled(2 * c)
            }
        })
    }

    fn uniform_shape(&self) -> Option<(bool, bool)> {
        let first = self.spans.iter().find(|s| s.lo != s.hi)?;
        let shape = (first.lo_closed, first.hi_closed);
        self.spans
            .iter()
            .all(|s| s.lo == s.hi || (s.lo_closed, s.hi_closed) == shape)
            .then_some(shape)
    }
}

impl fmt::Display for Box {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((lc, hc)) = self.uniform_shape() {
            let l = if lc { '[' } else { ']' };
            let h = if hc { ']' } else { '[' };
            return write!(f, "{l}{},{}{h}", self.low(), self.high());
        }
        for (j, s) in self.spans.iter().enumerate() {
            if j > 0 {
                write!(f, "×")?;
            }
            if s.lo == s.hi {
                write!(f, "{{{}}}", s.lo)?;
            } else {
                let l = if s.lo_closed { '[' } else { ']' };
                let h = if s.hi_closed { ']' } else { '[' };
                write!(f, "{l}{},{}{h}", s.lo, s.hi)?;
            }
        }
        Ok(())
    }
}

/// Dense mixed-radix indexing of `∏ [0 : top_j]`; the last coordinate varies fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    tops: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl Lattice {
    pub fn new(tops: Vec<usize>) -> Self {
        let mut strides = vec![0; tops.len()];
        let mut size = 1usize;
        for j in (0..tops.len()).rev() {
            strides[j] = size;
            size = size
                .checked_mul(tops[j] + 1)
                .expect("lattice size overflows usize");
        }
        Lattice {
            tops,
            strides,
            size,
        }
    }

    pub fn tops(&self) -> &[usize] {
        &self.tops
    }

    pub fn dim(&self) -> usize {
        self.tops.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn stride(&self, j: usize) -> usize {
        self.strides[j]
    }

    pub fn contains(&self, coords: &[usize]) -> bool {
        coords.len() == self.tops.len() && coords.iter().zip(&self.tops).all(|(c, t)| c <= t)
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.tops.len()];
        for (j, s) in self.strides.iter().enumerate() {
            out[j] = index / s;
            index %= s;
        }
        out
    }

    pub fn top(&self) -> Vertex {
        Vertex(self.tops.clone())
    }

    /// All lattice points in increasing index order.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.size).map(|i| Vertex(self.coords(i)))
    }
}

/// Tabulated consumption and call data for one thread on `[0 : top]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadProfile {
    top: usize,
    at: Vec<Vec<u8>>,
    open: Vec<Vec<u8>>,
    calls: Vec<Vec<i8>>,
    lock_at: Vec<Option<usize>>,
    release_at: Vec<Option<usize>>,
}

impl ThreadProfile {
    pub fn top(&self) -> usize {
        self.top
    }

    /// `cr_j(k)` for every resource.
    pub fn at(&self, k: usize) -> &[u8] {
        &self.at[k]
    }

    /// Consumption on `]k, k+1[`.
    pub fn open(&self, k: usize) -> &[u8] {
        &self.open[k]
    }

    /// `dr_j(k)` for every resource.
    pub fn calls(&self, k: usize) -> &[i8] {
        &self.calls[k]
    }

    pub fn lock_at(&self, k: usize) -> Option<usize> {
        self.lock_at.get(k).copied().flatten()
    }

    pub fn release_at(&self, k: usize) -> Option<usize> {
        self.release_at.get(k).copied().flatten()
    }

    /// Restriction to `[0 : top]`; the new top is final and issues no call.
    fn truncated(&self, top: usize) -> ThreadProfile {
        let nres = self.at[0].len();
        let mut calls = self.calls[..=top].to_vec();
        calls[top] = vec![0; nres];
        let mut lock_at = self.lock_at[..=top].to_vec();
        lock_at[top] = None;
        let mut release_at = self.release_at[..=top].to_vec();
        release_at[top] = None;
        ThreadProfile {
            top,
            at: self.at[..=top].to_vec(),
            open: self.open[..top].to_vec(),
            calls,
            lock_at,
            release_at,
        }
    }
}

/// `cr_j` and `dr_j` for every thread of a program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumptionProfile {
    pub threads: Vec<ThreadProfile>,
}

impl ConsumptionProfile {
    pub fn cr(&self, thread: usize, resource: usize, k: usize) -> u8 {
        self.threads[thread].at[k][resource]
    }

    pub fn dr(&self, thread: usize, resource: usize, k: usize) -> i8 {
        self.threads[thread].calls[k][resource]
    }
}

/// Tabulates consumption by one left-to-right pass per thread.
///
/// With `h(k)` the holdings on `]k, k+1[`, `h(k) = h(k−1) + dr(k)` and the
/// value at the integer `k` is `h(k−1)` minus one when `k` releases.
pub fn build_consumption_profiles(program: &Program) -> ConsumptionProfile {
    let nres = program.resource_count();
    let threads = program
        .threads
        .iter()
        .map(|t| {
            let top = t.len() + 1;
            let mut calls = vec![vec![0i8; nres]; top + 1];
            let mut lock_at = vec![None; top + 1];
            let mut release_at = vec![None; top + 1];
            for (i, a) in t.actions.iter().enumerate() {
                let k = i + 1;
                match a.kind {
                    ActionKind::Lock => {
                        calls[k][a.resource] = 1;
                        lock_at[k] = Some(a.resource);
                    }
                    ActionKind::Release => {
                        calls[k][a.resource] = -1;
                        release_at[k] = Some(a.resource);
                    }
                }
            }
            let mut at = vec![vec![0u8; nres]; top + 1];
            let mut open = vec![vec![0u8; nres]; top];
            let mut held = vec![0i8; nres];
            for k in 0..=top {
                for r in 0..nres {
                    let d = calls[k][r];
                    at[k][r] = (held[r] + d.min(0)) as u8;
                    held[r] += d;
                    if k < top {
                        open[k][r] = held[r] as u8;
                    }
                }
            }
            ThreadProfile {
                top,
                at,
                open,
                calls,
                lock_at,
                release_at,
            }
        })
        .collect();
    ConsumptionProfile { threads }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("vertex {vertex} outside the lattice with tops {tops:?}")]
    OutOfBounds { vertex: Vertex, tops: Vec<usize> },
    #[error("thread {thread} has no release of the given resources above position {position}")]
    NoSuccessor { thread: usize, position: usize },
    #[error("vertex {0} is not in the state space")]
    Forbidden(Vertex),
}

/// Why a vertex is not a P-vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtherReason {
    /// The coordinate is 0.
    Start,
    /// The coordinate holds a release.
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexClass {
    /// Every coordinate is a lock position or final, at least one non-final.
    PVertex,
    Final,
    Other {
        thread: usize,
        reason: OtherReason,
    },
}

/// Calls issued at a vertex: `d(v)`, `R(v)` and `Pr(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexCalls {
    pub demand: Vec<u32>,
    pub requested: Vec<usize>,
    pub callers: Vec<Vec<usize>>,
}

/// A program's cubical state space, possibly with extra excluded boxes.
///
/// Coordinates may be a window of the program (threads cut at a target) or
/// may omit frozen threads whose held locks enter as `background` consumption.
#[derive(Debug, Clone)]
pub struct StateSpace {
    program: Program,
    thread_ids: Vec<usize>,
    capacities: Vec<u32>,
    profiles: ConsumptionProfile,
    background: Vec<u32>,
    extra_boxes: Vec<Box>,
    lattice: Lattice,
}

impl StateSpace {
    pub fn new(program: &Program) -> Self {
        let profiles = build_consumption_profiles(program);
        let lattice = Lattice::new(program.tops());
        assert!(lattice.dim() <= 64, "at most 64 threads are supported");
        StateSpace {
            program: program.clone(),
            thread_ids: (0..program.thread_count()).collect(),
            capacities: program.capacities(),
            background: vec![0; program.resource_count()],
            profiles,
            extra_boxes: Vec::new(),
            lattice,
        }
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn profiles(&self) -> &ConsumptionProfile {
        &self.profiles
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn background(&self) -> &[u32] {
        &self.background
    }

    pub fn extra_boxes(&self) -> &[Box] {
        &self.extra_boxes
    }

    pub fn is_pure(&self) -> bool {
        self.extra_boxes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn resource_count(&self) -> usize {
        self.capacities.len()
    }

    pub fn tops(&self) -> &[usize] {
        self.lattice.tops()
    }

    pub fn top(&self) -> Vertex {
        self.lattice.top()
    }

    pub fn origin(&self) -> Vertex {
        Vertex::origin(self.dim())
    }

    /// Program thread index behind coordinate `j`.
    pub fn thread_id(&self, j: usize) -> usize {
        self.thread_ids[j]
    }

    pub fn thread_name(&self, j: usize) -> &str {
        &self.program.threads[self.thread_ids[j]].name
    }

    pub fn resource_name(&self, r: usize) -> &str {
        &self.program.resources[r].name
    }

    /// New space with extra boxes appended.
    pub fn with_boxes(&self, boxes: impl IntoIterator<Item = Box>) -> StateSpace {
        let mut s = self.clone();
        for b in boxes {
            assert_eq!(b.dim(), s.dim(), "box dimension mismatch");
            if !s.extra_boxes.contains(&b) {
                s.extra_boxes.push(b);
            }
        }
        s
    }

    pub fn without_boxes(&self) -> StateSpace {
        let mut s = self.clone();
        s.extra_boxes.clear();
        s
    }

    /// Restriction to `[0, t]`: coordinate `j` stops at `t_j`, which becomes final.
    pub fn window(&self, t: &Vertex) -> Result<StateSpace, SemanticsError> {
        self.check(t)?;
        let mut s = self.clone();
        s.profiles.threads = self
            .profiles
            .threads
            .iter()
            .zip(&t.0)
            .map(|(p, &tj)| p.truncated(tj))
            .collect();
        s.lattice = Lattice::new(t.0.clone());
        Ok(s)
    }

    /// Removes coordinate `j`, charging `held` as constant consumption.
    pub fn freeze_thread(&self, j: usize, held: &[u8]) -> StateSpace {
        let mut s = self.clone();
        s.thread_ids.remove(j);
        s.profiles.threads.remove(j);
        for (b, &h) in s.background.iter_mut().zip(held) {
            *b += h as u32;
        }
        let mut tops = self.tops().to_vec();
        tops.remove(j);
        s.lattice = Lattice::new(tops);
        s.extra_boxes = self
            .extra_boxes
            .iter()
            .map(|b| {
                let mut spans = b.spans.clone();
                spans.remove(j);
                Box { spans }
            })
            .collect();
        s
    }

    pub fn check(&self, v: &Vertex) -> Result<(), SemanticsError> {
        if self.lattice.contains(&v.0) {
            Ok(())
        } else {
            Err(SemanticsError::OutOfBounds {
                vertex: v.clone(),
                tops: self.tops().to_vec(),
            })
        }
    }

    pub fn thread_profile(&self, j: usize) -> &ThreadProfile {
        &self.profiles.threads[j]
    }

    pub fn is_final_coord(&self, j: usize, c: usize) -> bool {
        c == self.tops()[j]
    }

    pub fn is_final(&self, v: &Vertex) -> bool {
        v.0 == self.tops()
    }

    /// Directions `j` with `v_j` below its top.
    pub fn active_dirs(&self, v: &[usize]) -> Dirs {
        Dirs(
            v.iter()
                .zip(self.tops())
                .enumerate()
                .filter(|(_, (c, t))| c < t)
                .fold(0, |m, (j, _)| m | 1 << j),
        )
    }

    /// Total consumption `c(v)`.
    pub fn vertex_consumption(&self, v: &Vertex) -> Result<Vec<u32>, SemanticsError> {
        self.check(v)?;
        Ok(self.consumption_unchecked(&v.0))
    }

    pub(crate) fn consumption_unchecked(&self, v: &[usize]) -> Vec<u32> {
        let mut c = self.background.clone();
        for (p, &k) in self.profiles.threads.iter().zip(v) {
            for (acc, &x) in c.iter_mut().zip(p.at(k)) {
                *acc += x as u32;
            }
        }
        c
    }

    /// Consumption at the point `y2 / 2`.
    pub fn point_consumption(&self, y2: &[usize]) -> Vec<u32> {
        let mut c = self.background.clone();
        for (p, &y) in self.profiles.threads.iter().zip(y2) {
            let row = if y % 2 == 0 {
                p.at(y / 2)
            } else {
                p.open(y / 2)
            };
            for (acc, &x) in c.iter_mut().zip(row) {
                *acc += x as u32;
            }
        }
        c
    }

    /// Is the point `y2 / 2` in the state space?
    pub fn point_allowed(&self, y2: &[usize]) -> bool {
        self.point_consumption(y2)
            .iter()
            .zip(&self.capacities)
            .all(|(c, k)| c <= k)
            && !self.extra_boxes.iter().any(|b| b.contains_doubled(y2))
    }

    /// `d(v)`, `R(v)` and the callers of each resource.
    pub fn vertex_calls(&self, v: &Vertex) -> Result<VertexCalls, SemanticsError> {
        self.check(v)?;
        Ok(self.calls_unchecked(&v.0))
    }

    pub(crate) fn calls_unchecked(&self, v: &[usize]) -> VertexCalls {
        let nres = self.resource_count();
        let mut demand = vec![0u32; nres];
        let mut callers = vec![Vec::new(); nres];
        for (j, (p, &k)) in self.profiles.threads.iter().zip(v).enumerate() {
            if let Some(r) = p.lock_at(k) {
                demand[r] += 1;
                callers[r].push(j);
            }
        }
        let requested = (0..nres).filter(|&r| demand[r] > 0).collect();
        VertexCalls {
            demand,
            requested,
            callers,
        }
    }

    pub fn classify_vertex(&self, v: &Vertex) -> Result<VertexClass, SemanticsError> {
        self.check(v)?;
        Ok(self.classify_unchecked(&v.0))
    }

    pub(crate) fn classify_unchecked(&self, v: &[usize]) -> VertexClass {
        let mut all_final = true;
        for (j, (p, &k)) in self.profiles.threads.iter().zip(v).enumerate() {
            if k == p.top() {
                continue;
            }
            all_final = false;
            if k == 0 {
                return VertexClass::Other {
                    thread: j,
                    reason: OtherReason::Start,
                };
            }
            if p.lock_at(k).is_none() {
                return VertexClass::Other {
                    thread: j,
                    reason: OtherReason::Release,
                };
            }
        }
        if all_final {
            VertexClass::Final
        } else {
            VertexClass::PVertex
        }
    }

    /// Is the closed cube `[v, v + e_dirs]` contained in the state space?
    pub fn cube_allowed(&self, v: &Vertex, dirs: Dirs) -> Result<bool, SemanticsError> {
        self.check(v)?;
        let tops = self.tops();
        if let Some(j) = dirs.iter().find(|&j| j >= tops.len() || v[j] >= tops[j]) {
            let mut hi = v.0.clone();
            if j < hi.len() {
                hi[j] += 1;
            }
            return Err(SemanticsError::OutOfBounds {
                vertex: Vertex(hi),
                tops: tops.to_vec(),
            });
        }
        Ok(self.cube_allowed_unchecked(&v.0, dirs))
    }

    /// Every point of the cube sits in the relative interior of a face, and
    /// along a coordinate in `dirs` the open segment dominates both of its
    /// endpoints, so the largest consumption over the cube is obtained by
    /// taking open-segment values on `dirs` and integer values elsewhere.
    pub(crate) fn cube_allowed_unchecked(&self, v: &[usize], dirs: Dirs) -> bool {
        for (r, &cap) in self.capacities.iter().enumerate() {
            let mut total = self.background[r];
            for (j, (p, &k)) in self.profiles.threads.iter().zip(v).enumerate() {
                total += if dirs.contains(j) {
                    p.open(k)[r]
                } else {
                    p.at(k)[r]
                } as u32;
            }
            if total > cap {
                return false;
            }
        }
        !self.extra_boxes.iter().any(|b| b.meets_cube(v, dirs))
    }

    pub fn vertex_allowed(&self, v: &Vertex) -> Result<bool, SemanticsError> {
        self.cube_allowed(v, Dirs::EMPTY)
    }

    pub(crate) fn edge_allowed_unchecked(&self, v: &[usize], j: usize) -> bool {
        v[j] < self.tops()[j] && self.cube_allowed_unchecked(v, Dirs::single(j))
    }

    /// Does an extra box meet the maximal future cube of `v`?
    pub fn boxes_near(&self, v: &Vertex) -> bool {
        let dirs = self.active_dirs(&v.0);
        self.extra_boxes.iter().any(|b| b.meets_cube(&v.0, dirs))
    }

    /// `p_{R'}(v)`: per coordinate, the largest lock position of a resource
    /// in `resources` (or the final coordinate, or 0) strictly below `v_j`.
    pub fn predecessor_vertex(
        &self,
        v: &Vertex,
        resources: &[usize],
    ) -> Result<Vertex, SemanticsError> {
        self.check(v)?;
        let coords = self
            .profiles
            .threads
            .iter()
            .zip(&v.0)
            .map(|(p, &vj)| {
                (1..vj)
                    .rev()
                    .find(|&k| k == p.top() || p.lock_at(k).is_some_and(|r| resources.contains(&r)))
                    .unwrap_or(0)
            })
            .collect();
        Ok(Vertex(coords))
    }

    /// `s_{R'}(v)`: per coordinate, the smallest release position of a resource
    /// in `resources` strictly above `v_j`. Final coordinates stay final.
    pub fn successor_vertex(
        &self,
        v: &Vertex,
        resources: &[usize],
    ) -> Result<Vertex, SemanticsError> {
        self.check(v)?;
        let mut coords = Vec::with_capacity(v.dim());
        for (j, (p, &vj)) in self.profiles.threads.iter().zip(&v.0).enumerate() {
            if vj == p.top() {
                coords.push(vj);
                continue;
            }
            let next = (vj + 1..p.top())
                .find(|&k| p.release_at(k).is_some_and(|r| resources.contains(&r)))
                .ok_or(SemanticsError::NoSuccessor {
                    thread: j,
                    position: vj,
                })?;
            coords.push(next);
        }
        Ok(Vertex(coords))
    }

    /// All vertices with a monotone path of allowed edges to `t`.
    pub fn reachable_to_target(&self, t: &Vertex) -> Result<VertexSet, SemanticsError> {
        self.check(t)?;
        if !self.cube_allowed_unchecked(&t.0, Dirs::EMPTY) {
            return Err(SemanticsError::Forbidden(t.clone()));
        }
        let lat = &self.lattice;
        let mut bits = vec![false; lat.size()];
        let ti = lat.index(&t.0);
        bits[ti] = true;
        for idx in (0..ti).rev() {
            let v = lat.coords(idx);
            if !v.iter().zip(&t.0).all(|(a, b)| a <= b) {
                continue;
            }
            if !self.cube_allowed_unchecked(&v, Dirs::EMPTY) {
                continue;
            }
            bits[idx] = (0..v.len()).any(|j| {
                v[j] < t.0[j]
                    && bits[idx + lat.stride(j)]
                    && self.cube_allowed_unchecked(&v, Dirs::single(j))
            });
        }
        Ok(VertexSet {
            lattice: lat.clone(),
            bits,
        })
    }
}

/// Dense vertex set over a lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    lattice: Lattice,
    bits: Vec<bool>,
}

impl VertexSet {
    pub fn contains(&self, v: &Vertex) -> bool {
        self.lattice.contains(&v.0) && self.bits[self.lattice.index(&v.0)]
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| Vertex(self.lattice.coords(i)))
    }
}
