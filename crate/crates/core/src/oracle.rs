//! Ground truth by brute force: tame path enumeration, path classes under
//! elementary square swaps, and forbidden-region membership by explicit boxes.
//!
//! Two tame paths are equivalent when one is obtained from the other by
//! repeatedly swapping adjacent steps `j, k` across an allowed square. This
//! equivalence is taken to compute the path components of the directed path
//! space between two vertices.

use std::collections::HashMap;

use thiserror::Error;

use crate::pv_lang::{ActionKind, Program};
use crate::semantics::{Dirs, SemanticsError, StateSpace, Vertex, VertexSet};

pub const DEFAULT_CAP: usize = 1_000_000;
pub const MAX_BOXES: u64 = 100_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("more than {cap} paths")]
    Overflow { cap: usize },
    #[error("vertex {0} is forbidden")]
    Forbidden(Vertex),
    #[error("source {from} is not below target {target}")]
    NotBelow { from: Vertex, target: Vertex },
    #[error("{boxes} forbidden boxes exceed the enumeration limit")]
    TooLarge { boxes: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TamePath {
    pub start: Vertex,
    pub steps: Vec<usize>,
}

impl TamePath {
    /// Vertex after the first `i` steps.
    pub fn vertex_at(&self, i: usize) -> Vertex {
        let mut c = self.start.0.clone();
        for &j in &self.steps[..i] {
            c[j] += 1;
        }
        Vertex(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathClassSet {
    pub path_count: usize,
    pub class_count: usize,
    pub representatives: Vec<TamePath>,
}

fn endpoints(s: &StateSpace, source: &Vertex, t: &Vertex) -> Result<VertexSet, OracleError> {
    s.check(source)?;
    s.check(t)?;
    if !source.le(t) {
        return Err(OracleError::NotBelow {
            from: source.clone(),
            target: t.clone(),
        });
    }
    for x in [source, t] {
        if !s.vertex_allowed(x)? {
            return Err(OracleError::Forbidden(x.clone()));
        }
    }
    Ok(s.reachable_to_target(t)?)
}

/// All tame paths from `source` to `t`, in lexicographic order of their steps.
pub fn enumerate_tame_paths(
    s: &StateSpace,
    source: &Vertex,
    t: &Vertex,
    cap: usize,
) -> Result<Vec<TamePath>, OracleError> {
    let reach = endpoints(s, source, t)?;
    let mut out = Vec::new();
    if !reach.contains(source) {
        return Ok(out);
    }
    let lat = s.lattice();
    let len: usize = t.0.iter().zip(&source.0).map(|(a, b)| a - b).sum();
    let mut cur = source.0.clone();
    let mut steps = Vec::with_capacity(len);
    // Depth-first with an explicit stack of next direction to try.
    let mut next_dir = vec![0usize];
    while let Some(d) = next_dir.last_mut() {
        if steps.len() == len {
            out.push(TamePath {
                start: source.clone(),
                steps: steps.clone(),
            });
            if out.len() > cap {
                return Err(OracleError::Overflow { cap });
            }
            next_dir.pop();
            if let Some(j) = steps.pop() {
                cur[j] -= 1;
            }
            continue;
        }
        let mut advanced = false;
        while *d < cur.len() {
            let j = *d;
            *d += 1;
            if cur[j] < t[j]
                && reach.contains_index(lat.index(&cur) + lat.stride(j))
                && s.edge_allowed_unchecked(&cur, j)
            {
                cur[j] += 1;
                steps.push(j);
                next_dir.push(0);
                advanced = true;
                break;
            }
        }
        if !advanced {
            next_dir.pop();
            if let Some(j) = steps.pop() {
                cur[j] -= 1;
            }
        }
    }
    Ok(out)
}

/// Classes of tame paths under allowed square swaps.
pub fn count_path_components(
    s: &StateSpace,
    source: &Vertex,
    t: &Vertex,
    cap: usize,
) -> Result<PathClassSet, OracleError> {
    let paths = enumerate_tame_paths(s, source, t, cap)?;
    let index: HashMap<&[usize], usize> = paths
        .iter()
        .enumerate()
        .map(|(i, p)| (p.steps.as_slice(), i))
        .collect();
    let mut parent: Vec<usize> = (0..paths.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, p) in paths.iter().enumerate() {
        let mut u = p.start.0.clone();
        let mut swapped = p.steps.clone();
        for k in 0..p.steps.len().saturating_sub(1) {
            let (a, b) = (p.steps[k], p.steps[k + 1]);
            if a != b && s.cube_allowed_unchecked(&u, Dirs::from_slice(&[a, b])) {
                swapped.swap(k, k + 1);
                let other = index[swapped.as_slice()];
                swapped.swap(k, k + 1);
                let (x, y) = (find(&mut parent, i), find(&mut parent, other));
                if x != y {
                    parent[x] = y;
                }
            }
            u[a] += 1;
        }
    }
    let mut representatives = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        if find(&mut parent, i) == i {
            representatives.push(p.clone());
        }
    }
    Ok(PathClassSet {
        path_count: paths.len(),
        class_count: representatives.len(),
        representatives,
    })
}

/// Path classes to a fixed target from every vertex at once.
///
/// Classes of paths from `v` are classes of paths from the successors
/// `v + e_j`, glued along each allowed square at `v`; each vertex keeps, per
/// outgoing edge, the map sending a class at the successor to the class of
/// its one-step extension.
#[derive(Debug, Clone)]
pub struct ClassTable {
    target: Vertex,
    reach: VertexSet,
    counts: Vec<usize>,
}

impl ClassTable {
    pub fn build(s: &StateSpace, t: &Vertex) -> Result<ClassTable, OracleError> {
        s.check(t)?;
        if !s.vertex_allowed(t)? {
            return Err(OracleError::Forbidden(t.clone()));
        }
        let reach = s.reachable_to_target(t)?;
        let lat = s.lattice();
        let n = lat.dim();
        let mut counts = vec![0usize; lat.size()];
        // prefix[idx][j]: classes at v + e_j mapped into classes at v
        let mut prefix: Vec<Vec<Vec<usize>>> = vec![Vec::new(); lat.size()];
        let ti = lat.index(t.coords());
        counts[ti] = 1;
        prefix[ti] = vec![Vec::new(); n];
        for idx in (0..ti).rev() {
            if !reach.contains_index(idx) {
                continue;
            }
            let v = lat.coords(idx);
            let mut offset = vec![usize::MAX; n];
            let mut total = 0;
            for j in 0..n {
                let nj = idx + lat.stride(j);
                if v[j] < t[j] && reach.contains_index(nj) && s.edge_allowed_unchecked(&v, j) {
                    offset[j] = total;
                    total += counts[nj];
                }
            }
            let mut parent: Vec<usize> = (0..total).collect();
            fn find(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            for a in 0..n {
                for b in a + 1..n {
                    if offset[a] == usize::MAX
                        || offset[b] == usize::MAX
                        || !s.cube_allowed_unchecked(&v, Dirs::from_slice(&[a, b]))
                    {
                        continue;
                    }
                    let ab = idx + lat.stride(a) + lat.stride(b);
                    let via_a = &prefix[idx + lat.stride(a)][b][..counts[ab]];
                    let via_b = &prefix[idx + lat.stride(b)][a][..counts[ab]];
                    for (&pa, &pb) in via_a.iter().zip(via_b) {
                        let (x, y) = (offset[a] + pa, offset[b] + pb);
                        let (x, y) = (find(&mut parent, x), find(&mut parent, y));
                        if x != y {
                            parent[x] = y;
                        }
                    }
                }
            }
            let mut label = vec![usize::MAX; total];
            let mut count = 0;
            for x in 0..total {
                let r = find(&mut parent, x);
                if label[r] == usize::MAX {
                    label[r] = count;
                    count += 1;
                }
            }
            let mut maps = vec![Vec::new(); n];
            for j in 0..n {
                if offset[j] != usize::MAX {
                    let nj = idx + lat.stride(j);
                    maps[j] = (0..counts[nj])
                        .map(|q| label[find(&mut parent, offset[j] + q)])
                        .collect();
                }
            }
            counts[idx] = count;
            prefix[idx] = maps;
        }
        Ok(ClassTable {
            target: t.clone(),
            reach,
            counts,
        })
    }

    pub fn target(&self) -> &Vertex {
        &self.target
    }

    pub fn reaches(&self, v: &Vertex) -> bool {
        self.reach.contains(v)
    }

    /// Number of path classes from `v` to the target; 0 when unreachable.
    pub fn classes_from(&self, s: &StateSpace, v: &Vertex) -> usize {
        if !self.reach.contains(v) {
            return 0;
        }
        self.counts[s.lattice().index(v.coords())]
    }
}

/// Is the point `y2 / 2` in some box `∏ ]P, V[ × full intervals` built from
/// `κ(r)+1` distinct threads each inside one of its `r`-critical sections?
pub fn check_membership_by_boxes(program: &Program, y2: &[usize]) -> Result<bool, OracleError> {
    let n = program.thread_count();
    // sections[r][j]: (P, V) pairs of thread j on resource r
    let mut sections = vec![vec![Vec::new(); n]; program.resource_count()];
    for (j, t) in program.threads.iter().enumerate() {
        let mut open: HashMap<usize, usize> = HashMap::new();
        for (i, a) in t.actions.iter().enumerate() {
            match a.kind {
                ActionKind::Lock => {
                    open.insert(a.resource, i + 1);
                }
                ActionKind::Release => {
                    let p = open.remove(&a.resource).expect("valid program");
                    sections[a.resource][j].push((p, i + 1));
                }
            }
        }
    }
    let subsets = |k: usize| -> Vec<Vec<usize>> {
        (0u64..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).filter(|j| m >> j & 1 == 1).collect())
            .collect()
    };
    let mut boxes = 0u64;
    for (r, decl) in program.resources.iter().enumerate() {
        let k = decl.capacity as usize + 1;
        if k > n {
            continue;
        }
        for sub in subsets(k) {
            boxes += sub
                .iter()
                .map(|&j| sections[r][j].len() as u64)
                .product::<u64>();
        }
    }
    if n > 3 && boxes > MAX_BOXES {
        return Err(OracleError::TooLarge { boxes });
    }
    for (r, decl) in program.resources.iter().enumerate() {
        let k = decl.capacity as usize + 1;
        if k > n {
            continue;
        }
        for sub in subsets(k) {
            // choose one section per thread; the point lies in the product
            // iff each chosen section contains its coordinate
            let inside = sub.iter().all(|&j| {
                sections[r][j]
                    .iter()
                    .any(|&(p, v)| 2 * p < y2[j] && y2[j] < 2 * v)
            });
            if inside {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn v(c: &[usize]) -> Vertex {
        Vertex(c.to_vec())
    }

    #[test]
    fn free_grid_paths() {
        let s = StateSpace::new(&corpus::free(2));
        let paths = enumerate_tame_paths(&s, &v(&[0, 0]), &v(&[2, 2]), DEFAULT_CAP).unwrap();
        assert_eq!(paths.len(), 6);
        assert_eq!(paths[0].steps, vec![0, 0, 1, 1]);
        let c = count_path_components(&s, &v(&[0, 0]), &v(&[2, 2]), DEFAULT_CAP).unwrap();
        assert_eq!(c.class_count, 1);
    }

    #[test]
    fn dine2_paths_avoid_deadlock() {
        let s = StateSpace::new(&corpus::dine2());
        let paths = enumerate_tame_paths(&s, &s.origin(), &s.top(), DEFAULT_CAP).unwrap();
        assert!(!paths.is_empty());
        for p in &paths {
            assert!((0..=p.steps.len()).all(|i| p.vertex_at(i) != v(&[2, 2])));
        }
        let c = count_path_components(&s, &s.origin(), &s.top(), DEFAULT_CAP).unwrap();
        assert_eq!(c.class_count, 2);
    }

    #[test]
    fn crossed3_first_steps() {
        let s = StateSpace::new(&corpus::crossed3());
        let paths = enumerate_tame_paths(&s, &v(&[2, 2, 2]), &s.top(), DEFAULT_CAP).unwrap();
        assert!(!paths.is_empty());
        assert!(paths.iter().all(|p| p.steps[0] != 1));
        let c = count_path_components(&s, &v(&[2, 2, 2]), &s.top(), DEFAULT_CAP).unwrap();
        assert_eq!(c.class_count, 2);
    }

    #[test]
    fn overflow_is_reported() {
        let s = StateSpace::new(&corpus::free(2));
        assert_eq!(
            enumerate_tame_paths(&s, &v(&[0, 0]), &v(&[2, 2]), 5),
            Err(OracleError::Overflow { cap: 5 })
        );
    }

    fn lattice_paths(from: &Vertex, to: &Vertex) -> u64 {
        let mut total = 0u64;
        let mut count = 1u64;
        for (a, b) in from.0.iter().zip(&to.0) {
            for i in 1..=(b - a) as u64 {
                total += 1;
                count = count * total / i;
            }
        }
        count
    }

    #[test]
    fn table_matches_enumeration() {
        for p in [
            corpus::crossed3(),
            corpus::dine2(),
            corpus::dine3(),
            corpus::shared3(),
        ] {
            let s = StateSpace::new(&p);
            let table = ClassTable::build(&s, &s.top()).unwrap();
            for x in s.lattice().vertices() {
                if !s.vertex_allowed(&x).unwrap() || lattice_paths(&x, &s.top()) > 20_000 {
                    continue;
                }
                let brute = count_path_components(&s, &x, &s.top(), DEFAULT_CAP).unwrap();
                assert_eq!(table.classes_from(&s, &x), brute.class_count, "{x}");
            }
        }
    }

    #[test]
    fn box_membership() {
        let p = corpus::crossed3();
        assert!(!check_membership_by_boxes(&p, &[3, 3, 0]).unwrap());
        assert!(check_membership_by_boxes(&p, &[3, 5, 3]).unwrap());
        assert!(!check_membership_by_boxes(&p, &[0, 0, 0]).unwrap());
        let s = StateSpace::new(&p);
        assert!(!s.point_allowed(&[3, 5, 3]));
    }
}
