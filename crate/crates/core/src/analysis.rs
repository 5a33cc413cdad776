//! Spare capacities, deadlocks, doomed and critical regions, chain bounds on
//! path components, and crash scenarios.

use std::cmp::Ordering;
use std::collections::HashMap;

use thiserror::Error;

use crate::links::{
    descriptor_unchecked, future_link_descriptor, link_components_unchecked, spare_connectivity,
    ConnectivityClass, LinkError, Spare,
};
use crate::pv_lang::Program;
use crate::semantics::{
    Box, Dirs, Interval, SemanticsError, StateSpace, Vertex, VertexClass, VertexSet,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("vertex {0} is not a deadlock")]
    NotDeadlock(Vertex),
    #[error("vertex {0} is not critical")]
    NotCritical(Vertex),
    #[error("vertex {from} is not below the target {target}")]
    SourceNotBelow { from: Vertex, target: Vertex },
    #[error("invalid crash scenario: {0}")]
    BadScenario(String),
}

/// `κ(X;v)` at a P-vertex with no extra boxes nearby.
pub fn spare_capacity_at(s: &StateSpace, v: &Vertex) -> Result<Spare, AnalysisError> {
    Ok(future_link_descriptor(s, v)?.spare())
}

/// Spare capacity of an allowed non-final vertex, read off the future link
/// when the closed formula does not apply: only its π₀ is certain there.
pub(crate) fn effective_spare(s: &StateSpace, v: &[usize]) -> Spare {
    let pvertex = s.classify_unchecked(v) == VertexClass::PVertex;
    let near = {
        let dirs = s.active_dirs(v);
        s.extra_boxes().iter().any(|b| b.meets_cube(v, dirs))
    };
    if pvertex && !near {
        return descriptor_unchecked(s, v).spare();
    }
    match link_components_unchecked(s, v).len() {
        0 => Spare::Finite(0),
        1 if pvertex => match descriptor_unchecked(s, v).spare() {
            Spare::Finite(k) => Spare::Finite(k.max(2)),
            Spare::Infinite => Spare::Infinite,
        },
        1 => Spare::Infinite,
        _ => Spare::Finite(1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalSpare {
    pub kappa: Spare,
    pub witness: Option<Vertex>,
}

/// The window `[0, t]` with every region from which `t` is unreachable removed.
pub fn target_space(s: &StateSpace, t: &Vertex) -> Result<StateSpace, AnalysisError> {
    Ok(eliminate_deadlocks(&s.window(t)?)?.space)
}

/// `κ(X)` for target `t`: the least spare capacity over P-vertices below `t`
/// from which `t` is reachable, with future links taken inside
/// [`target_space`]. Ties go to the first vertex in lexicographic order.
pub fn global_spare_capacity(s: &StateSpace, t: &Vertex) -> Result<GlobalSpare, AnalysisError> {
    let w = target_space(s, t)?;
    let reach = w.reachable_to_target(t)?;
    let lat = w.lattice();
    let mut best = GlobalSpare {
        kappa: Spare::Infinite,
        witness: None,
    };
    for idx in 0..lat.size() {
        if !reach.contains_index(idx) {
            continue;
        }
        let v = lat.coords(idx);
        if w.classify_unchecked(&v) != VertexClass::PVertex {
            continue;
        }
        let k = effective_spare(&w, &v);
        if k < best.kappa {
            best = GlobalSpare {
                kappa: k,
                witness: Some(Vertex(v)),
            };
        }
    }
    Ok(best)
}

fn holders(s: &StateSpace, v: &[usize], r: usize) -> Vec<usize> {
    (0..s.dim())
        .filter(|&j| s.thread_profile(j).at(v[j])[r] > 0)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deadlock {
    pub vertex: Vertex,
    /// `R(v)`.
    pub requested: Vec<usize>,
    /// Per requested resource, the coordinates holding it.
    pub holders: Vec<Vec<usize>>,
    /// Per requested resource, the coordinates calling it.
    pub callers: Vec<Vec<usize>>,
    /// Blocked by consumption alone, without help from extra boxes.
    pub primary: bool,
}

fn blocked(s: &StateSpace, v: &[usize]) -> bool {
    s.active_dirs(v)
        .iter()
        .all(|j| !s.cube_allowed_unchecked(v, Dirs::single(j)))
}

fn is_deadlock(s: &StateSpace, v: &[usize]) -> bool {
    !s.active_dirs(v).is_empty() && s.cube_allowed_unchecked(v, Dirs::EMPTY) && blocked(s, v)
}

fn deadlock_data(s: &StateSpace, pure: &StateSpace, v: Vec<usize>) -> Deadlock {
    let calls = s.calls_unchecked(&v);
    let primary =
        s.classify_unchecked(&v) == VertexClass::PVertex && (s.is_pure() || blocked(pure, &v));
    Deadlock {
        holders: calls.requested.iter().map(|&r| holders(s, &v, r)).collect(),
        callers: calls
            .requested
            .iter()
            .map(|&r| calls.callers[r].clone())
            .collect(),
        requested: calls.requested,
        primary,
        vertex: Vertex(v),
    }
}

/// Allowed non-final vertices with no allowed outgoing edge.
pub fn find_deadlocks(s: &StateSpace) -> Vec<Deadlock> {
    let pure = s.without_boxes();
    let lat = s.lattice();
    (0..lat.size())
        .map(|i| lat.coords(i))
        .filter(|v| is_deadlock(s, v))
        .map(|v| deadlock_data(s, &pure, v))
        .collect()
}

fn deadlock_at(s: &StateSpace, v: &Vertex) -> Result<Deadlock, AnalysisError> {
    s.check(v)?;
    if !is_deadlock(s, v.coords()) {
        return Err(AnalysisError::NotDeadlock(v.clone()));
    }
    Ok(deadlock_data(s, &s.without_boxes(), v.0.clone()))
}

/// `]v−1, v]` in each coordinate, clipped at 0.
fn cell_below(v: &Vertex) -> Box {
    Box {
        spans: v
            .0
            .iter()
            .map(|&c| {
                if c == 0 {
                    Interval::point(0)
                } else {
                    Interval {
                        lo: c - 1,
                        hi: c,
                        lo_closed: false,
                        hi_closed: true,
                    }
                }
            })
            .collect(),
    }
}

/// Open neighbourhood `]v−1, v+1[`, closed where it hits 0 or a top.
fn star(v: &Vertex, tops: &[usize]) -> Box {
    Box {
        spans: v
            .0
            .iter()
            .zip(tops)
            .map(|(&c, &t)| Interval {
                lo: c.saturating_sub(1),
                hi: (c + 1).min(t),
                lo_closed: c == 0,
                hi_closed: c == t,
            })
            .collect(),
    }
}

fn close_at_tops(mut b: Box, tops: &[usize]) -> Box {
    for (s, &t) in b.spans.iter_mut().zip(tops) {
        if s.hi == t {
            s.hi_closed = true;
        }
    }
    b
}

/// `D(v) = ]p_{R(v)}(v), v]` for a primary deadlock; a box-induced
/// deadlock only dooms its own vertex.
pub fn doomed_box(s: &StateSpace, v: &Vertex) -> Result<Box, AnalysisError> {
    let d = deadlock_at(s, v)?;
    Ok(doomed_box_of(s, &d)?)
}

fn doomed_box_of(s: &StateSpace, d: &Deadlock) -> Result<Box, SemanticsError> {
    if d.primary {
        let w = s.predecessor_vertex(&d.vertex, &d.requested)?;
        Ok(Box::half_open(&w, &d.vertex))
    } else {
        Ok(cell_below(&d.vertex))
    }
}

/// The region removed to lift a deadlock: `]w, s_{R(v)}(v)[`, or the open
/// star of the vertex for box-induced deadlocks.
pub fn elimination_box(s: &StateSpace, v: &Vertex) -> Result<Box, AnalysisError> {
    let d = deadlock_at(s, v)?;
    Ok(elimination_box_of(s, &d)?)
}

/// `s_{R'}(v)`, with coordinates that release nothing before their top sent to the top.
fn release_bound(s: &StateSpace, v: &Vertex, resources: &[usize]) -> Vertex {
    Vertex(
        (0..s.dim())
            .map(|j| {
                let p = s.thread_profile(j);
                (v[j] + 1..p.top())
                    .find(|&k| p.release_at(k).is_some_and(|r| resources.contains(&r)))
                    .unwrap_or(p.top())
            })
            .collect(),
    )
}

fn elimination_box_of(s: &StateSpace, d: &Deadlock) -> Result<Box, SemanticsError> {
    if d.primary {
        let w = s.predecessor_vertex(&d.vertex, &d.requested)?;
        let x = release_bound(s, &d.vertex, &d.requested);
        Ok(close_at_tops(Box::open(&w, &x), s.tops()))
    } else {
        Ok(star(&d.vertex, s.tops()))
    }
}

#[derive(Debug, Clone)]
pub struct Elimination {
    pub space: StateSpace,
    /// Doomed regions below each deadlock, in discovery order.
    pub doomed: Vec<Box>,
    /// Boxes added to the space.
    pub eliminated: Vec<Box>,
    pub deadlocks: Vec<Deadlock>,
    /// Rounds that found deadlocks.
    pub rounds: usize,
}

/// Removes deadlocks round by round until none remain.
pub fn eliminate_deadlocks(s: &StateSpace) -> Result<Elimination, AnalysisError> {
    let mut cur = s.clone();
    let mut out = Elimination {
        space: s.clone(),
        doomed: Vec::new(),
        eliminated: Vec::new(),
        deadlocks: Vec::new(),
        rounds: 0,
    };
    loop {
        let found = find_deadlocks(&cur);
        if found.is_empty() {
            break;
        }
        let mut added = Vec::new();
        for d in &found {
            out.doomed.push(doomed_box_of(&cur, d)?);
            added.push(elimination_box_of(&cur, d)?);
        }
        cur = cur.with_boxes(added.iter().cloned());
        out.eliminated.extend(added);
        out.deadlocks.extend(found);
        out.rounds += 1;
    }
    out.space = cur;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Critical {
    pub vertex: Vertex,
    pub requested: Vec<usize>,
    /// The requested resource with exactly one unit left, when there is one.
    pub resource: Option<usize>,
    pub holders: Vec<Vec<usize>>,
    pub callers: Vec<Vec<usize>>,
    /// Components of the future link as direction sets.
    pub exits: Vec<Vec<usize>>,
}

fn critical_data(s: &StateSpace, v: Vec<usize>, exits: Vec<Vec<usize>>) -> Critical {
    let calls = s.calls_unchecked(&v);
    let c = s.consumption_unchecked(&v);
    let resource = calls
        .requested
        .iter()
        .copied()
        .find(|&r| s.capacities()[r] == c[r] + 1 && calls.demand[r] > 1);
    Critical {
        holders: calls.requested.iter().map(|&r| holders(s, &v, r)).collect(),
        callers: calls
            .requested
            .iter()
            .map(|&r| calls.callers[r].clone())
            .collect(),
        requested: calls.requested,
        resource,
        exits,
        vertex: Vertex(v),
    }
}

fn critical_exits(s: &StateSpace, v: &[usize]) -> Option<Vec<Vec<usize>>> {
    if s.is_final(&Vertex(v.to_vec())) || !s.cube_allowed_unchecked(v, Dirs::EMPTY) {
        return None;
    }
    if s.is_pure() && s.classify_unchecked(v) != VertexClass::PVertex {
        return None;
    }
    let comps = link_components_unchecked(s, v);
    (comps.len() >= 2).then_some(comps)
}

/// Allowed vertices whose future link is disconnected (spare capacity 1).
pub fn find_critical_vertices(s: &StateSpace) -> Vec<Critical> {
    let lat = s.lattice();
    (0..lat.size())
        .filter_map(|i| {
            let v = lat.coords(i);
            critical_exits(s, &v).map(|e| critical_data(s, v, e))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalRegion {
    pub vertex: Vertex,
    /// `]p_{R(v)}(v), v]`.
    pub region: Box,
    /// `s_{R(v)}(v)`, when every active coordinate releases later.
    pub exit_target: Option<Vertex>,
    pub exit_components: Vec<Vec<usize>>,
}

pub fn critical_region(s: &StateSpace, v: &Vertex) -> Result<CriticalRegion, AnalysisError> {
    s.check(v)?;
    let exits =
        critical_exits(s, v.coords()).ok_or_else(|| AnalysisError::NotCritical(v.clone()))?;
    let requested = s.calls_unchecked(v.coords()).requested;
    let w = s.predecessor_vertex(v, &requested)?;
    Ok(CriticalRegion {
        vertex: v.clone(),
        region: Box::half_open(&w, v),
        exit_target: s.successor_vertex(v, &requested).ok(),
        exit_components: exits,
    })
}

/// Regions every execution of which passes through the critical vertex `v`:
/// the doomed regions that appear once `v` itself is removed.
pub fn critical_shadow(s: &StateSpace, v: &Vertex) -> Result<Vec<Box>, AnalysisError> {
    s.check(v)?;
    critical_exits(s, v.coords()).ok_or_else(|| AnalysisError::NotCritical(v.clone()))?;
    let base: Vec<usize> = {
        let e = eliminate_deadlocks(s)?;
        e.deadlocks
            .iter()
            .map(|d| s.lattice().index(d.vertex.coords()))
            .collect()
    };
    let cut = eliminate_deadlocks(&s.with_boxes([star(v, s.tops())]))?;
    Ok(cut
        .deadlocks
        .iter()
        .zip(&cut.doomed)
        .filter(|(d, _)| !base.contains(&s.lattice().index(d.vertex.coords())))
        .map(|(_, b)| b.clone())
        .collect())
}

/// Node of the chain poset: a critical vertex and one component of its future link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainNode {
    pub vertex: Vertex,
    pub exits: Vec<usize>,
}

/// Critical vertices between a source and a target, ordered by reachability
/// along paths that meet no other critical vertex on the way.
#[derive(Debug, Clone)]
pub struct ChainPoset {
    pub nodes: Vec<ChainNode>,
    /// `next[i]`: nodes reached from node `i` first.
    pub next: Vec<Vec<usize>>,
    /// Node `i` reaches the target without meeting another critical vertex.
    pub to_target: Vec<bool>,
    /// Nodes the source reaches first.
    pub from_source: Vec<usize>,
    /// The source reaches the target avoiding every critical vertex.
    pub direct: bool,
    pub reachable: bool,
}

struct Sweep<'a> {
    s: &'a StateSpace,
    reach: &'a VertexSet,
    critical: &'a HashMap<usize, usize>,
    target: usize,
}

impl Sweep<'_> {
    /// Forward search from `start` leaving along `first`; stops at critical
    /// vertices and at the target.
    fn run(&self, start: &[usize], first: Dirs) -> (Vec<usize>, bool) {
        let lat = self.s.lattice();
        let mut seen = vec![false; lat.size()];
        let mut hits = Vec::new();
        let mut hit_target = false;
        let mut stack = Vec::new();
        let si = lat.index(start);
        let push = |v: &[usize], j: usize, stack: &mut Vec<usize>, seen: &mut Vec<bool>| {
            let ni = lat.index(v) + lat.stride(j);
            if !seen[ni] && self.reach.contains_index(ni) && self.s.edge_allowed_unchecked(v, j) {
                seen[ni] = true;
                stack.push(ni);
            }
        };
        for j in first.iter() {
            push(start, j, &mut stack, &mut seen);
        }
        if si == self.target {
            hit_target = true;
        }
        while let Some(i) = stack.pop() {
            if i == self.target {
                hit_target = true;
                continue;
            }
            if let Some(&c) = self.critical.get(&i) {
                hits.push(c);
                continue;
            }
            let v = lat.coords(i);
            for j in 0..v.len() {
                if v[j] < lat.tops()[j] {
                    push(&v, j, &mut stack, &mut seen);
                }
            }
        }
        hits.sort_unstable();
        (hits, hit_target)
    }
}

impl ChainPoset {
    pub fn build(s: &StateSpace, source: &Vertex, t: &Vertex) -> Result<ChainPoset, AnalysisError> {
        s.check(source)?;
        if !source.le(t) {
            return Err(AnalysisError::SourceNotBelow {
                from: source.clone(),
                target: t.clone(),
            });
        }
        let w = target_space(s, t)?;
        let reach = w.reachable_to_target(t)?;
        let mut poset = ChainPoset {
            nodes: Vec::new(),
            next: Vec::new(),
            to_target: Vec::new(),
            from_source: Vec::new(),
            direct: false,
            reachable: reach.contains(source),
        };
        if !poset.reachable {
            return Ok(poset);
        }
        let lat = w.lattice();
        let mut critical = HashMap::new();
        let mut crit_nodes: Vec<Vec<usize>> = Vec::new();
        for idx in 0..lat.size() {
            let v = lat.coords(idx);
            if !reach.contains_index(idx) || !source.coords().iter().zip(&v).all(|(a, b)| a <= b) {
                continue;
            }
            if let Some(exits) = critical_exits(&w, &v) {
                critical.insert(idx, crit_nodes.len());
                let mut ids = Vec::new();
                for e in exits {
                    ids.push(poset.nodes.len());
                    poset.nodes.push(ChainNode {
                        vertex: Vertex(v.clone()),
                        exits: e,
                    });
                }
                crit_nodes.push(ids);
            }
        }
        let sweep = Sweep {
            s: &w,
            reach: &reach,
            critical: &critical,
            target: lat.index(t.coords()),
        };
        for node in &poset.nodes {
            let (hits, to_t) = sweep.run(node.vertex.coords(), Dirs::from_slice(&node.exits));
            poset.next.push(
                hits.iter()
                    .flat_map(|&c| crit_nodes[c].iter().copied())
                    .collect(),
            );
            poset.to_target.push(to_t);
        }
        let si = lat.index(source.coords());
        if let Some(&c) = critical.get(&si) {
            poset.from_source = crit_nodes[c].clone();
        } else {
            let (hits, to_t) = sweep.run(source.coords(), w.active_dirs(source.coords()));
            poset.from_source = hits
                .iter()
                .flat_map(|&c| crit_nodes[c].iter().copied())
                .collect();
            poset.direct = to_t;
        }
        Ok(poset)
    }

    /// Number of chains from the source to the target.
    pub fn count_chains(&self) -> u64 {
        if !self.reachable {
            return 0;
        }
        let mut memo: Vec<Option<u64>> = vec![None; self.nodes.len()];
        fn count(p: &ChainPoset, i: usize, memo: &mut Vec<Option<u64>>) -> u64 {
            if let Some(c) = memo[i] {
                return c;
            }
            let mut c = p.to_target[i] as u64;
            for &k in &p.next[i] {
                c = c.saturating_add(count(p, k, memo));
            }
            memo[i] = Some(c);
            c
        }
        let mut total = self.direct as u64;
        for &i in &self.from_source {
            total = total.saturating_add(count(self, i, &mut memo));
        }
        total
    }
}

/// Upper bound on the number of path components from `source` to `t`.
pub fn component_upper_bound(
    s: &StateSpace,
    source: &Vertex,
    t: &Vertex,
) -> Result<u64, AnalysisError> {
    Ok(ChainPoset::build(s, source, t)?.count_chains())
}

/// Thread `thread` stops for good inside `]after_step, after_step+1[`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrashScenario {
    pub thread: usize,
    pub after_step: usize,
}

impl CrashScenario {
    fn validate(&self, s: &StateSpace) -> Result<(), AnalysisError> {
        if self.thread >= s.dim() {
            return Err(AnalysisError::BadScenario(format!(
                "no thread with index {}",
                self.thread
            )));
        }
        let l = s.tops()[self.thread] - 1;
        if self.after_step > l {
            return Err(AnalysisError::BadScenario(format!(
                "thread {} has only {l} steps",
                s.thread_name(self.thread)
            )));
        }
        Ok(())
    }

    /// Resources held on `]m, m+1[`.
    pub fn held_locks(&self, s: &StateSpace) -> Vec<usize> {
        let open = s.thread_profile(self.thread).open(self.after_step);
        (0..open.len()).filter(|&r| open[r] > 0).collect()
    }

    /// Last lock position at or before the crash, 0 if none.
    pub fn last_lock(&self, s: &StateSpace) -> usize {
        let p = s.thread_profile(self.thread);
        (1..=self.after_step)
            .rev()
            .find(|&k| p.lock_at(k).is_some())
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrashReport {
    pub scenario: CrashScenario,
    pub held_locks: Vec<usize>,
    pub last_lock: usize,
    pub kappa_before: Spare,
    pub witness_before: Option<Vertex>,
    pub kappa_after: Spare,
    pub witness_after: Option<Vertex>,
    /// `κ(X_C)` compared with `κ(X)`.
    pub change: Ordering,
}

impl CrashReport {
    /// `κ(X_C) ≥ κ(X) − 1`.
    pub fn inequality_holds(&self) -> bool {
        match (self.kappa_before, self.kappa_after) {
            (_, Spare::Infinite) => true,
            (Spare::Infinite, Spare::Finite(_)) => false,
            (Spare::Finite(b), Spare::Finite(a)) => a + 1 >= b,
        }
    }
}

/// Compares `κ(X)` with the spare capacity of the space in which the crashed
/// thread is frozen: its coordinate is dropped and its held locks stay charged.
pub fn analyze_crash(
    s: &StateSpace,
    scenario: CrashScenario,
    t_prime: Option<&Vertex>,
) -> Result<CrashReport, AnalysisError> {
    scenario.validate(s)?;
    let before = global_spare_capacity(s, &s.top())?;
    let held = s
        .thread_profile(scenario.thread)
        .open(scenario.after_step)
        .to_vec();
    let xc = s.freeze_thread(scenario.thread, &held);
    let t = t_prime.cloned().unwrap_or_else(|| xc.top());
    let after = global_spare_capacity(&xc, &t)?;
    Ok(CrashReport {
        scenario,
        held_locks: scenario.held_locks(s),
        last_lock: scenario.last_lock(s),
        change: after.kappa.cmp(&before.kappa),
        kappa_before: before.kappa,
        witness_before: before.witness,
        kappa_after: after.kappa,
        witness_after: after.witness,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VertexFlags {
    pub forbidden: bool,
    pub deadlock: bool,
    pub critical: bool,
    pub doomed: bool,
    pub unreachable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexReport {
    pub vertex: Vertex,
    pub class: VertexClass,
    pub consumption: Vec<u32>,
    pub demand: Vec<u32>,
    /// `None` for forbidden vertices.
    pub spare: Option<Spare>,
    pub connectivity: Option<ConnectivityClass>,
    pub flags: VertexFlags,
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub source: Option<Vertex>,
    pub target: Option<Vertex>,
    pub eliminate: bool,
    pub per_vertex: bool,
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub space: StateSpace,
    pub source: Vertex,
    pub target: Vertex,
    pub global_spare: Spare,
    pub witness: Option<Vertex>,
    pub connectivity: ConnectivityClass,
    pub deadlocks: Vec<Deadlock>,
    pub doomed: Vec<Box>,
    /// Boxes removed by elimination, when requested.
    pub eliminated: Vec<Box>,
    pub elimination_rounds: usize,
    pub critical: Vec<Critical>,
    pub critical_regions: Vec<CriticalRegion>,
    /// Higher-order critical regions, when elimination was requested.
    pub critical_shadows: Vec<Box>,
    pub component_bound: u64,
    pub per_vertex: Vec<VertexReport>,
}

/// Full analysis of `program` inside the window `[0, target]`.
pub fn analyze(program: &Program, opts: &AnalyzeOptions) -> Result<AnalysisReport, AnalysisError> {
    let full = StateSpace::new(program);
    let target = opts.target.clone().unwrap_or_else(|| full.top());
    let source = opts.source.clone().unwrap_or_else(|| full.origin());
    full.check(&target)?;
    full.check(&source)?;
    if !source.le(&target) {
        return Err(AnalysisError::SourceNotBelow {
            from: source,
            target,
        });
    }
    let w = full.window(&target)?;
    let global = global_spare_capacity(&full, &target)?;
    let deadlocks = find_deadlocks(&w);
    let (doomed, eliminated, rounds) = if opts.eliminate {
        let e = eliminate_deadlocks(&w)?;
        (e.doomed, e.eliminated, e.rounds)
    } else {
        let doomed = deadlocks
            .iter()
            .map(|d| doomed_box_of(&w, d))
            .collect::<Result<_, _>>()?;
        (doomed, Vec::new(), 0)
    };
    let ts = target_space(&full, &target)?;
    let critical = find_critical_vertices(&ts);
    let critical_regions = critical
        .iter()
        .map(|c| critical_region(&ts, &c.vertex))
        .collect::<Result<_, _>>()?;
    let mut critical_shadows = Vec::new();
    if opts.eliminate {
        for c in &critical {
            for b in critical_shadow(&ts, &c.vertex)? {
                if !critical_shadows.contains(&b) {
                    critical_shadows.push(b);
                }
            }
        }
    }
    let component_bound = if w.vertex_allowed(&source)? && w.vertex_allowed(&target)? {
        component_upper_bound(&full, &source, &target)?
    } else {
        0
    };
    let per_vertex = if opts.per_vertex {
        vertex_table(&w, &target, &doomed)?
    } else {
        Vec::new()
    };
    Ok(AnalysisReport {
        source,
        connectivity: spare_connectivity(global.kappa),
        global_spare: global.kappa,
        witness: global.witness,
        deadlocks,
        doomed,
        eliminated,
        elimination_rounds: rounds,
        critical,
        critical_regions,
        critical_shadows,
        component_bound,
        per_vertex,
        target,
        space: w,
    })
}

/// One row per P-vertex of the window.
pub fn vertex_table(
    w: &StateSpace,
    t: &Vertex,
    doomed: &[Box],
) -> Result<Vec<VertexReport>, AnalysisError> {
    let reach = if w.vertex_allowed(t)? {
        Some(w.reachable_to_target(t)?)
    } else {
        None
    };
    let lat = w.lattice();
    let mut rows = Vec::new();
    for idx in 0..lat.size() {
        let v = lat.coords(idx);
        let class = w.classify_unchecked(&v);
        if class != VertexClass::PVertex {
            continue;
        }
        let allowed = w.cube_allowed_unchecked(&v, Dirs::EMPTY);
        let spare = allowed.then(|| effective_spare(w, &v));
        let vertex = Vertex(v);
        let flags = VertexFlags {
            forbidden: !allowed,
            deadlock: spare == Some(Spare::Finite(0)),
            critical: spare == Some(Spare::Finite(1)),
            doomed: doomed.iter().any(|b| b.contains_vertex(&vertex)),
            unreachable: !reach.as_ref().is_some_and(|r| r.contains_index(idx)),
        };
        rows.push(VertexReport {
            consumption: w.consumption_unchecked(vertex.coords()),
            demand: w.calls_unchecked(vertex.coords()).demand,
            connectivity: spare.map(spare_connectivity),
            class,
            spare,
            flags,
            vertex,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::pv_lang::generate_threshold_program;

    fn v(c: &[usize]) -> Vertex {
        Vertex(c.to_vec())
    }

    #[test]
    fn spare_examples() {
        let f = StateSpace::new(&corpus::crossed3());
        assert_eq!(
            spare_capacity_at(&f, &v(&[2, 2, 2])).unwrap(),
            Spare::Finite(1)
        );
        let a = StateSpace::new(&corpus::lopsided4());
        assert_eq!(
            spare_capacity_at(&a, &v(&[2, 2, 2, 2])).unwrap(),
            Spare::Finite(2)
        );
        let b = StateSpace::new(&corpus::balanced5());
        assert_eq!(
            spare_capacity_at(&b, &v(&[2, 2, 2, 2, 2])).unwrap(),
            Spare::Finite(1)
        );
        let d = StateSpace::new(&corpus::dine2());
        assert_eq!(
            spare_capacity_at(&d, &v(&[2, 2])).unwrap(),
            Spare::Finite(0)
        );
        assert!(spare_capacity_at(&d, &v(&[3, 2])).is_err());
    }

    #[test]
    fn global_examples() {
        let f = StateSpace::new(&corpus::crossed3());
        let g = global_spare_capacity(&f, &f.top()).unwrap();
        assert_eq!(g.kappa, Spare::Finite(1));
        assert_eq!(g.witness, Some(v(&[2, 2, 2])));

        let p = generate_threshold_program(4, &[3, 3]).unwrap();
        let s = StateSpace::new(&p);
        let g = global_spare_capacity(&s, &s.top()).unwrap();
        assert_eq!(g.kappa, Spare::Finite(2));
        assert_eq!(
            spare_capacity_at(&s, &v(&[2, 2, 2, 2])).unwrap(),
            Spare::Finite(2)
        );

        let c = StateSpace::new(&corpus::shared3());
        let g = global_spare_capacity(&c, &c.top()).unwrap();
        assert_eq!(g.kappa, Spare::Finite(2));
        assert_eq!(g.witness, Some(v(&[1, 1, 1])));
    }

    #[test]
    fn deadlocks_and_boxes() {
        let d = StateSpace::new(&corpus::dine2());
        let found = find_deadlocks(&d);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].vertex, v(&[2, 2]));
        assert_eq!(found[0].holders, vec![vec![0], vec![1]]);
        assert_eq!(found[0].callers, vec![vec![1], vec![0]]);
        assert!(found[0].primary);
        let b = doomed_box(&d, &v(&[2, 2])).unwrap();
        assert_eq!((b.low(), b.high()), (v(&[1, 1]), v(&[2, 2])));
        assert!(matches!(
            doomed_box(&d, &v(&[1, 1])),
            Err(AnalysisError::NotDeadlock(_))
        ));
        let e = eliminate_deadlocks(&d).unwrap();
        assert_eq!(e.rounds, 1);
        assert_eq!(e.eliminated.len(), 1);
        assert_eq!(
            (e.eliminated[0].low(), e.eliminated[0].high()),
            (v(&[1, 1]), v(&[3, 3]))
        );
        assert!(find_deadlocks(&e.space).is_empty());

        let t = StateSpace::new(&corpus::dine3());
        let found = find_deadlocks(&t);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].vertex, v(&[2, 2, 2]));
        let e = eliminate_deadlocks(&t).unwrap();
        assert_eq!(e.rounds, 1);
        assert_eq!(e.eliminated[0].high(), v(&[3, 3, 3]));

        let free = StateSpace::new(&corpus::free(2));
        let e = eliminate_deadlocks(&free).unwrap();
        assert_eq!(e.rounds, 0);
        assert!(e.eliminated.is_empty());
    }

    #[test]
    fn critical_examples() {
        let f = StateSpace::new(&corpus::crossed3());
        let crit = find_critical_vertices(&f);
        assert!(crit.iter().any(|c| c.vertex == v(&[2, 2, 2])));
        let region = critical_region(&f, &v(&[2, 2, 2])).unwrap();
        assert_eq!(region.region.low(), v(&[1, 1, 1]));
        assert_eq!(region.exit_components, vec![vec![0], vec![2]]);
        assert!(matches!(
            critical_region(&f, &v(&[1, 1, 1])),
            Err(AnalysisError::NotCritical(_))
        ));

        let b = StateSpace::new(&corpus::balanced5());
        let region = critical_region(&b, &v(&[2, 2, 2, 2, 2])).unwrap();
        assert_eq!(region.exit_components, vec![vec![0], vec![1], vec![2]]);

        let a = StateSpace::new(&corpus::lopsided4());
        assert!(find_critical_vertices(&a).is_empty());
    }

    #[test]
    fn chain_bounds() {
        let f = StateSpace::new(&corpus::crossed3());
        assert_eq!(
            component_upper_bound(&f, &v(&[2, 2, 2]), &f.top()).unwrap(),
            2
        );
        let free = StateSpace::new(&corpus::free(2));
        assert_eq!(
            component_upper_bound(&free, &free.origin(), &free.top()).unwrap(),
            1
        );
        let d = StateSpace::new(&corpus::dine2());
        assert_eq!(component_upper_bound(&d, &v(&[2, 2]), &d.top()).unwrap(), 0);
    }

    #[test]
    fn crash_examples() {
        let s = StateSpace::new(&corpus::shared3());
        let r = analyze_crash(
            &s,
            CrashScenario {
                thread: 2,
                after_step: 1,
            },
            None,
        )
        .unwrap();
        assert_eq!(r.kappa_before, Spare::Finite(2));
        assert_eq!(r.kappa_after, Spare::Finite(1));
        assert_eq!(r.witness_after, Some(v(&[1, 1])));
        assert_eq!(r.held_locks, vec![0]);
        assert_eq!(r.last_lock, 1);
        assert!(r.inequality_holds());

        let r = analyze_crash(
            &s,
            CrashScenario {
                thread: 2,
                after_step: 2,
            },
            None,
        )
        .unwrap();
        assert!(r.held_locks.is_empty());
        assert_eq!(r.kappa_after, Spare::Infinite);
        assert_eq!(r.change, Ordering::Greater);

        assert!(analyze_crash(
            &s,
            CrashScenario {
                thread: 5,
                after_step: 0
            },
            None
        )
        .is_err());
    }

    #[test]
    fn report() {
        let r = analyze(
            &corpus::crossed3(),
            &AnalyzeOptions {
                per_vertex: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.global_spare, Spare::Finite(1));
        assert_eq!(r.connectivity, ConnectivityClass::Exactly(-1));
        assert!(r.deadlocks.is_empty());
        assert!(!r.critical.is_empty());
        assert!(r
            .per_vertex
            .iter()
            .any(|row| row.vertex == v(&[2, 2, 2]) && row.flags.critical));
        for row in &r.per_vertex {
            assert_eq!(row.flags.deadlock, row.spare == Some(Spare::Finite(0)));
        }
    }
}
