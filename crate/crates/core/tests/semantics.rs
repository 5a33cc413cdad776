mod common;

use common::{named_corpus, random_corpus, v};
use proptest::prelude::*;
use pvcap_core::pv_lang::{Action, ActionKind};
use pvcap_core::semantics::build_consumption_profiles;
use pvcap_core::{Dirs, StateSpace, Vertex};

/// Literal sub-face test: every face `[u, u + e_B]` with `u = v + e_A`, `A, B`
/// disjoint in `S`, must keep `cr(u) + #{j ∈ B : dr_j(u_j) = +1} ≤ κ`.
fn faces_allowed(s: &StateSpace, x: &Vertex, dirs: &[usize]) -> bool {
    let k = dirs.len();
    for code in 0..3usize.pow(k as u32) {
        let mut u = x.clone();
        let mut b = Vec::new();
        let mut c = code;
        for &j in dirs {
            match c % 3 {
                1 => u.0[j] += 1,
                2 => b.push(j),
                _ => {}
            }
            c /= 3;
        }
        let cons = s.vertex_consumption(&u).unwrap();
        for (r, &cap) in s.capacities().iter().enumerate() {
            let extra = b
                .iter()
                .filter(|&&j| s.profiles().dr(j, r, u[j]) == 1)
                .count() as u32;
            if cons[r] + extra > cap {
                return false;
            }
        }
    }
    true
}

#[test]
fn cube_test_matches_face_enumeration() {
    let mut programs: Vec<_> = named_corpus().into_iter().map(|(_, p)| p).collect();
    programs.extend(random_corpus(11, 60, 3, 6));
    let mut cubes = 0;
    for p in programs {
        let s = StateSpace::new(&p);
        for x in s.lattice().vertices() {
            let active: Vec<usize> = s.active_dirs(x.coords()).iter().collect();
            for mask in 0u64..1 << active.len() {
                let dirs: Vec<usize> = (0..active.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| active[i])
                    .collect();
                let fast = s.cube_allowed(&x, Dirs::from_slice(&dirs)).unwrap();
                assert_eq!(fast, faces_allowed(&s, &x, &dirs), "{x} {dirs:?}");
                cubes += 1;
            }
        }
    }
    assert!(cubes > 10_000);
}

#[test]
fn locks_balance_and_profiles_are_bounded() {
    for p in random_corpus(12, 100, 4, 8) {
        let prof = build_consumption_profiles(&p);
        for (j, t) in p.threads.iter().enumerate() {
            for r in 0..p.resource_count() {
                let sum: i32 = (0..=t.len() + 1).map(|k| prof.dr(j, r, k) as i32).sum();
                assert_eq!(sum, 0);
                assert_eq!(prof.cr(j, r, 0), 0);
                assert_eq!(prof.cr(j, r, t.len() + 1), 0);
                for k in 0..=t.len() {
                    let d = prof.cr(j, r, k + 1) as i32 - prof.cr(j, r, k) as i32;
                    assert!((-1..=1).contains(&d));
                }
            }
        }
    }
}

#[test]
fn consumption_is_the_open_interval_indicator() {
    for p in random_corpus(13, 100, 3, 8) {
        let prof = build_consumption_profiles(&p);
        for (j, t) in p.threads.iter().enumerate() {
            let mut sections = Vec::new();
            let mut open = std::collections::HashMap::new();
            for (i, a) in t.actions.iter().enumerate() {
                match a.kind {
                    ActionKind::Lock => {
                        open.insert(a.resource, i + 1);
                    }
                    ActionKind::Release => {
                        sections.push((a.resource, open.remove(&a.resource).unwrap(), i + 1))
                    }
                }
            }
            for r in 0..p.resource_count() {
                for k in 0..=t.len() + 1 {
                    let inside = sections
                        .iter()
                        .any(|&(x, lo, hi)| x == r && lo < k && k < hi);
                    assert_eq!(prof.cr(j, r, k) == 1, inside);
                }
            }
        }
    }
}

#[test]
fn adding_a_lock_never_frees_a_vertex() {
    for p in random_corpus(14, 60, 3, 4) {
        let s = StateSpace::new(&p);
        // wrap thread 0 in an extra section on the first resource when it is free
        let r = 0;
        if p.threads[0].actions.iter().any(|a| a.resource == r) {
            continue;
        }
        let mut q = p.clone();
        q.threads[0].actions.insert(0, Action::lock(r));
        q.threads[0].actions.push(Action::release(r));
        let t = StateSpace::new(&q);
        for x in s.lattice().vertices() {
            let mut y = x.clone();
            y.0[0] += 1;
            if !s.vertex_allowed(&x).unwrap() {
                assert!(!t.vertex_allowed(&y).unwrap(), "{x}");
            }
        }
    }
}

#[test]
fn reachable_vertices_are_allowed() {
    for p in random_corpus(15, 80, 3, 6) {
        let s = StateSpace::new(&p);
        let reach = s.reachable_to_target(&s.top()).unwrap();
        assert!(reach.contains(&s.top()));
        for x in reach.iter() {
            assert!(s.vertex_allowed(&x).unwrap());
        }
    }
}

#[test]
fn free_space_reaches_everything() {
    let s = StateSpace::new(&pvcap_core::corpus::free(3));
    let t = v(&[3, 2, 3]);
    assert_eq!(s.reachable_to_target(&t).unwrap().len(), 4 * 3 * 4);
}

proptest! {
    #[test]
    fn lattice_index_round_trips(tops in proptest::collection::vec(0usize..6, 1..5), seed in any::<u64>()) {
        let lat = pvcap_core::semantics::Lattice::new(tops.clone());
        let idx = (seed as usize) % lat.size();
        let c = lat.coords(idx);
        prop_assert!(lat.contains(&c));
        prop_assert_eq!(lat.index(&c), idx);
    }

    #[test]
    fn predecessor_below_successor(seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_program(&mut rng, 3, 6);
        let s = StateSpace::new(&p);
        let all: Vec<usize> = (0..p.resource_count()).collect();
        for x in s.lattice().vertices() {
            let w = s.predecessor_vertex(&x, &all).unwrap();
            prop_assert!(w.0.iter().zip(&x.0).all(|(a, b)| a < b || *b == 0 && *a == 0));
            if let Ok(y) = s.successor_vertex(&x, &all) {
                prop_assert!(x.le(&y));
            }
        }
    }
}
