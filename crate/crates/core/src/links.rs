//! Future links of vertices.
//!
//! For a P-vertex of a program without extra boxes the future link is a join
//! with one factor per requested resource `r`: the `(κ(r) − cr(v) − 1)`-skeleton
//! of the simplex spanned by the `dr(v)` callers. Elsewhere the link is built
//! directly from the allowed cubes above the vertex.

use std::fmt;

use thiserror::Error;

use crate::semantics::{Dirs, SemanticsError, StateSpace, Vertex, VertexClass};

/// A spare capacity, `ℕ ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spare {
    Finite(u32),
    Infinite,
}

impl Spare {
    pub fn finite(self) -> Option<u32> {
        match self {
            Spare::Finite(k) => Some(k),
            Spare::Infinite => None,
        }
    }
}

impl fmt::Display for Spare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spare::Finite(k) => write!(f, "{k}"),
            Spare::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinFactor {
    pub resource: usize,
    /// `dr(v)`, the number of callers.
    pub points: u32,
    /// `κ(r) − cr(v) − 1`; `-1` is the empty complex.
    pub skeleton_dim: i64,
}

impl JoinFactor {
    /// Remaining capacity `κ(r) − cr(v)`.
    pub fn room(&self) -> u32 {
        (self.skeleton_dim + 1) as u32
    }

    pub fn is_empty(&self) -> bool {
        self.skeleton_dim < 0
    }

    /// Whether the skeleton is the full simplex (and so contractible).
    pub fn is_full(&self) -> bool {
        !self.is_empty() && self.points <= self.room()
    }

    /// Dimension of the factor, `-1` when empty.
    pub fn dim(&self) -> i64 {
        self.skeleton_dim.min(self.points as i64 - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinOfSkeleta {
    pub factors: Vec<JoinFactor>,
}

impl JoinOfSkeleta {
    /// `∞` when some factor is a full non-empty simplex, else the total room.
    pub fn spare(&self) -> Spare {
        if self.factors.iter().any(|f| f.is_full()) {
            Spare::Infinite
        } else {
            Spare::Finite(self.factors.iter().map(|f| f.room()).sum())
        }
    }

    pub fn is_empty(&self) -> bool {
        self.factors.iter().all(|f| f.is_empty())
    }

    /// Dimension of the join: one less than the sum of factor vertex counts per top simplex.
    pub fn dim(&self) -> i64 {
        self.factors.iter().map(|f| f.dim() + 1).sum::<i64>() - 1
    }

    /// π₀ of the realization.
    pub fn predicted_components(&self) -> usize {
        let nonempty: Vec<_> = self.factors.iter().filter(|f| !f.is_empty()).collect();
        match nonempty.as_slice() {
            [] => 0,
            [f] if f.skeleton_dim == 0 => f.points as usize,
            _ => 1,
        }
    }
}

impl fmt::Display for JoinOfSkeleta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            write!(f, "Δ^{}_({})", x.points as i64 - 1, x.skeleton_dim)?;
        }
        Ok(())
    }
}

/// Connectivity of a future link or a path space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConnectivityClass {
    Empty,
    Contractible,
    /// `k`-connected and not `(k+1)`-connected; `-1` is non-empty and disconnected.
    Exactly(i64),
}

impl fmt::Display for ConnectivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnectivityClass::Empty => write!(f, "empty"),
            ConnectivityClass::Contractible => write!(f, "contractible"),
            ConnectivityClass::Exactly(-1) => write!(f, "non-empty, disconnected"),
            ConnectivityClass::Exactly(0) => {
                write!(f, "0-connected (path-connected), not simply connected")
            }
            ConnectivityClass::Exactly(k) => {
                write!(f, "{k}-connected, not {}-connected", k + 1)
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinkError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("vertex {0} is not a P-vertex")]
    NotPVertex(Vertex),
    #[error("vertex {0} is forbidden")]
    Forbidden(Vertex),
    #[error("vertex {0} is final")]
    Final(Vertex),
    #[error("extra boxes meet the future cube of {0}")]
    BoxesNearby(Vertex),
}

pub fn future_link_descriptor(s: &StateSpace, v: &Vertex) -> Result<JoinOfSkeleta, LinkError> {
    match s.classify_vertex(v)? {
        VertexClass::PVertex => {}
        _ => return Err(LinkError::NotPVertex(v.clone())),
    }
    if !s.vertex_allowed(v)? {
        return Err(LinkError::Forbidden(v.clone()));
    }
    if s.boxes_near(v) {
        return Err(LinkError::BoxesNearby(v.clone()));
    }
    Ok(descriptor_unchecked(s, v.coords()))
}

pub(crate) fn descriptor_unchecked(s: &StateSpace, v: &[usize]) -> JoinOfSkeleta {
    let c = s.consumption_unchecked(v);
    let calls = s.calls_unchecked(v);
    let factors = calls
        .requested
        .iter()
        .map(|&r| JoinFactor {
            resource: r,
            points: calls.demand[r],
            skeleton_dim: s.capacities()[r] as i64 - c[r] as i64 - 1,
        })
        .collect();
    JoinOfSkeleta { factors }
}

/// `∞` → contractible, `0` → empty, finite `k` → exactly `(k−2)`-connected.
pub fn descriptor_connectivity(_d: &JoinOfSkeleta, kappa_v: Spare) -> ConnectivityClass {
    spare_connectivity(kappa_v)
}

pub fn spare_connectivity(kappa: Spare) -> ConnectivityClass {
    match kappa {
        Spare::Infinite => ConnectivityClass::Contractible,
        Spare::Finite(0) => ConnectivityClass::Empty,
        Spare::Finite(k) => ConnectivityClass::Exactly(k as i64 - 2),
    }
}

/// Downward-closed family of direction sets whose cubes above a vertex are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkComplex {
    pub ground: Vec<usize>,
    pub simplices: Vec<Dirs>,
}

impl LinkComplex {
    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Largest simplex size minus one; `-1` when empty.
    pub fn dim(&self) -> i64 {
        self.simplices
            .iter()
            .map(|s| s.len() as i64)
            .max()
            .unwrap_or(0)
            - 1
    }

    pub fn contains(&self, s: Dirs) -> bool {
        self.simplices.contains(&s)
    }

    pub fn maximal(&self) -> Vec<Dirs> {
        self.simplices
            .iter()
            .copied()
            .filter(|&s| !self.simplices.iter().any(|&t| t != s && s.is_subset(t)))
            .collect()
    }

    /// Every maximal simplex contains `apex`.
    pub fn is_cone_with_apex(&self, apex: usize) -> bool {
        !self.is_empty() && self.maximal().iter().all(|s| s.contains(apex))
    }
}

pub fn future_link_complex(s: &StateSpace, v: &Vertex) -> Result<LinkComplex, LinkError> {
    if !s.vertex_allowed(v)? {
        return Err(LinkError::Forbidden(v.clone()));
    }
    if s.is_final(v) {
        return Err(LinkError::Final(v.clone()));
    }
    let active = s.active_dirs(v.coords());
    let ground: Vec<usize> = active.iter().collect();
    let mut simplices: Vec<Dirs> = Vec::new();
    let mut layer: Vec<Dirs> = ground
        .iter()
        .map(|&j| Dirs::single(j))
        .filter(|&d| s.cube_allowed_unchecked(v.coords(), d))
        .collect();
    while !layer.is_empty() {
        simplices.extend(&layer);
        let mut next: Vec<Dirs> = Vec::new();
        for &d in &layer {
            let top = d.iter().last().expect("non-empty simplex");
            for &j in ground.iter().filter(|&&j| j > top) {
                let e = d.insert(j);
                let faces_ok = d.iter().all(|i| simplices.contains(&Dirs(e.0 & !(1 << i))));
                if faces_ok && s.cube_allowed_unchecked(v.coords(), e) {
                    next.push(e);
                }
            }
        }
        layer = next;
    }
    Ok(LinkComplex { ground, simplices })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a] = b;
        }
    }
}

/// Components of the 1-skeleton, as sorted direction lists.
pub fn complex_component_sets(c: &LinkComplex) -> Vec<Vec<usize>> {
    let verts: Vec<usize> = c
        .simplices
        .iter()
        .filter(|s| s.len() == 1)
        .map(|s| s.iter().next().unwrap())
        .collect();
    let pos = |j: usize| verts.iter().position(|&x| x == j).unwrap();
    let mut uf = UnionFind::new(verts.len());
    for e in c.simplices.iter().filter(|s| s.len() == 2) {
        let mut it = e.iter();
        let (a, b) = (it.next().unwrap(), it.next().unwrap());
        uf.union(pos(a), pos(b));
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, &j) in verts.iter().enumerate() {
        let root = uf.find(i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(j),
            None => groups.push((root, vec![j])),
        }
    }
    let mut out: Vec<Vec<usize>> = groups.into_iter().map(|(_, g)| g).collect();
    out.sort();
    out
}

pub fn complex_components(c: &LinkComplex) -> usize {
    complex_component_sets(c).len()
}

/// Components of the future link at an allowed non-final vertex, from
/// allowed edges and squares only.
pub(crate) fn link_components_unchecked(s: &StateSpace, v: &[usize]) -> Vec<Vec<usize>> {
    let dirs: Vec<usize> = s
        .active_dirs(v)
        .iter()
        .filter(|&j| s.cube_allowed_unchecked(v, Dirs::single(j)))
        .collect();
    let mut uf = UnionFind::new(dirs.len());
    for a in 0..dirs.len() {
        for b in a + 1..dirs.len() {
            if s.cube_allowed_unchecked(v, Dirs::from_slice(&[dirs[a], dirs[b]])) {
                uf.union(a, b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for (i, &j) in dirs.iter().enumerate() {
        let r = uf.find(i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => groups[k].push(j),
            None => {
                roots.push(r);
                groups.push(vec![j]);
            }
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn v(c: &[usize]) -> Vertex {
        Vertex(c.to_vec())
    }

    fn factor(d: &JoinOfSkeleta, r: usize) -> (u32, i64) {
        let f = d.factors.iter().find(|f| f.resource == r).unwrap();
        (f.points, f.skeleton_dim)
    }

    #[test]
    fn crossed3_descriptor() {
        let s = StateSpace::new(&corpus::crossed3());
        let d = future_link_descriptor(&s, &v(&[2, 2, 2])).unwrap();
        assert_eq!(factor(&d, 0), (1, -1));
        assert_eq!(factor(&d, 1), (2, 0));
        assert_eq!(d.spare(), Spare::Finite(1));
        assert_eq!(d.predicted_components(), 2);
    }

    #[test]
    fn four_thread_descriptors() {
        let a = StateSpace::new(&corpus::lopsided4());
        let d = future_link_descriptor(&a, &v(&[2, 2, 2, 2])).unwrap();
        assert_eq!(factor(&d, 0), (1, -1));
        assert_eq!(factor(&d, 1), (3, 1));
        assert_eq!(d.dim(), 1);
        let b = StateSpace::new(&corpus::balanced4());
        let d = future_link_descriptor(&b, &v(&[2, 2, 2, 2])).unwrap();
        assert_eq!(factor(&d, 0), (2, 0));
        assert_eq!(factor(&d, 1), (2, 0));
        assert_eq!(d.spare(), Spare::Finite(2));
        assert_eq!(d.predicted_components(), 1);
    }

    #[test]
    fn descriptor_preconditions() {
        let s = StateSpace::new(&corpus::crossed3());
        assert_eq!(
            future_link_descriptor(&s, &v(&[3, 2, 2])),
            Err(LinkError::NotPVertex(v(&[3, 2, 2])))
        );
        let a = StateSpace::new(&corpus::lopsided5());
        assert!(matches!(
            future_link_descriptor(&a, &v(&[2, 2, 2, 2, 2])),
            Err(LinkError::Forbidden(_))
        ));
    }

    #[test]
    fn connectivity_from_spare() {
        let d = JoinOfSkeleta { factors: vec![] };
        assert_eq!(
            descriptor_connectivity(&d, Spare::Finite(1)),
            ConnectivityClass::Exactly(-1)
        );
        assert_eq!(
            descriptor_connectivity(&d, Spare::Finite(2)),
            ConnectivityClass::Exactly(0)
        );
        assert_eq!(
            descriptor_connectivity(&d, Spare::Infinite),
            ConnectivityClass::Contractible
        );
        assert_eq!(
            descriptor_connectivity(&d, Spare::Finite(0)),
            ConnectivityClass::Empty
        );
    }

    #[test]
    fn crossed3_complex() {
        let s = StateSpace::new(&corpus::crossed3());
        let c = future_link_complex(&s, &v(&[2, 2, 2])).unwrap();
        assert_eq!(c.simplices, vec![Dirs::single(0), Dirs::single(2)]);
        assert_eq!(complex_components(&c), 2);
        assert_eq!(complex_component_sets(&c), vec![vec![0], vec![2]]);
    }

    #[test]
    fn dine2_complex_is_empty() {
        let s = StateSpace::new(&corpus::dine2());
        let c = future_link_complex(&s, &v(&[2, 2])).unwrap();
        assert!(c.is_empty());
        assert_eq!(complex_components(&c), 0);
        assert_eq!(c.dim(), -1);
    }

    #[test]
    fn full_simplex() {
        let s = StateSpace::new(&corpus::free(3));
        let c = future_link_complex(&s, &v(&[1, 1, 1])).unwrap();
        assert_eq!(c.simplices.len(), 7);
        assert_eq!(complex_components(&c), 1);
        assert_eq!(c.dim(), 2);
        assert!(c.is_cone_with_apex(0));
    }

    #[test]
    fn release_direction_is_apex() {
        let s = StateSpace::new(&corpus::crossed3());
        let c = future_link_complex(&s, &v(&[3, 2, 2])).unwrap();
        assert!(c.is_cone_with_apex(0));
    }

    #[test]
    fn lopsided4_complex_is_a_circle() {
        let s = StateSpace::new(&corpus::lopsided4());
        let c = future_link_complex(&s, &v(&[2, 2, 2, 2])).unwrap();
        assert_eq!(c.maximal().len(), 3);
        assert_eq!(c.dim(), 1);
        assert_eq!(complex_components(&c), 1);
    }
}
