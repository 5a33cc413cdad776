mod common;

use common::{allowed_vertices, named_corpus, random_corpus, v};
use pvcap_core::analysis::{
    analyze, component_upper_bound, critical_shadow, eliminate_deadlocks, find_critical_vertices,
    find_deadlocks, global_spare_capacity, spare_capacity_at, AnalyzeOptions,
};
use pvcap_core::links::{complex_components, future_link_complex, LinkComplex};
use pvcap_core::oracle::{count_path_components, enumerate_tame_paths, ClassTable, DEFAULT_CAP};
use pvcap_core::semantics::{OtherReason, VertexClass};
use pvcap_core::{corpus, Program, Spare, StateSpace};

fn programs() -> Vec<Program> {
    let mut all: Vec<Program> = named_corpus().into_iter().map(|(_, p)| p).collect();
    all.extend(random_corpus(21, 150, 3, 6));
    all
}

#[test]
fn spare_matches_link_components() {
    for p in programs() {
        let s = StateSpace::new(&p);
        let n = s.dim() as u32;
        for x in allowed_vertices(&s) {
            if s.classify_vertex(&x).unwrap() != VertexClass::PVertex {
                continue;
            }
            let k = spare_capacity_at(&s, &x).unwrap();
            let c = complex_components(&future_link_complex(&s, &x).unwrap());
            match k {
                Spare::Finite(0) => assert_eq!(c, 0, "{x}"),
                Spare::Finite(1) => assert!(c >= 2, "{x}"),
                _ => assert_eq!(c, 1, "{x}"),
            }
            if let Spare::Finite(k) = k {
                let requested = s.vertex_calls(&x).unwrap().requested.len() as u32;
                assert!(k <= n - requested);
            }
        }
    }
}

fn cone_apex(c: &LinkComplex, j: usize) -> bool {
    c.is_cone_with_apex(j)
}

#[test]
fn start_and_release_coordinates_give_cones() {
    for p in programs() {
        let s = StateSpace::new(&p);
        for x in allowed_vertices(&s) {
            if let VertexClass::Other { thread, reason } = s.classify_vertex(&x).unwrap() {
                let c = future_link_complex(&s, &x).unwrap();
                assert!(cone_apex(&c, thread), "{x} {reason:?}");
                // any other start or release coordinate is an apex as well
                for j in 0..s.dim() {
                    let k = x[j];
                    let p = s.thread_profile(j);
                    if k < p.top() && (k == 0 || p.release_at(k).is_some()) {
                        assert!(cone_apex(&c, j));
                    }
                }
                let _ = OtherReason::Start;
            }
        }
    }
}

#[test]
fn deadlocks_are_unreachable_and_doomed_boxes_escape_free() {
    for p in programs() {
        let s = StateSpace::new(&p);
        let top = s.top();
        let reach = s.reachable_to_target(&top).unwrap();
        let e = eliminate_deadlocks(&s).unwrap();
        for d in find_deadlocks(&s) {
            assert!(!reach.contains(&d.vertex));
            assert_eq!(spare_capacity_at(&s, &d.vertex).unwrap(), Spare::Finite(0));
        }
        for b in &e.doomed {
            for x in s.lattice().vertices().filter(|x| b.contains_vertex(x)) {
                if s.vertex_allowed(&x).unwrap() {
                    let paths = enumerate_tame_paths(&s, &x, &top, DEFAULT_CAP).unwrap();
                    assert!(paths.is_empty(), "{x} in doomed {b} reaches the top");
                }
            }
        }
        assert!(find_deadlocks(&e.space).is_empty());
    }
}

#[test]
fn elimination_keeps_path_classes() {
    for p in programs() {
        let s = StateSpace::new(&p);
        let e = eliminate_deadlocks(&s).unwrap();
        if e.eliminated.is_empty() {
            continue;
        }
        let before = ClassTable::build(&s, &s.top()).unwrap();
        let after = ClassTable::build(&e.space, &s.top()).unwrap();
        for x in allowed_vertices(&s) {
            if e.doomed.iter().any(|b| b.contains_vertex(&x)) {
                continue;
            }
            assert_eq!(
                before.classes_from(&s, &x),
                after.classes_from(&e.space, &x),
                "{x}"
            );
        }
        // every allowed vertex left reaches the top
        for x in allowed_vertices(&e.space) {
            assert!(after.reaches(&x), "{x}");
        }
    }
}

#[test]
fn chain_bound_dominates_oracle() {
    let mut pairs = 0;
    for p in random_corpus(22, 120, 3, 6) {
        let s = StateSpace::new(&p);
        let top = s.top();
        let table = ClassTable::build(&s, &top).unwrap();
        for x in allowed_vertices(&s) {
            let classes = table.classes_from(&s, &x) as u64;
            let bound = component_upper_bound(&s, &x, &top).unwrap();
            assert!(bound >= classes, "{x}: bound {bound} < {classes}");
            assert_eq!(bound == 0, classes == 0, "{x}");
            pairs += 1;
        }
    }
    assert!(pairs > 1000);
}

#[test]
fn no_critical_vertices_means_one_class() {
    for p in random_corpus(23, 150, 3, 6) {
        let s = StateSpace::new(&p);
        let g = global_spare_capacity(&s, &s.top()).unwrap();
        if g.kappa < Spare::Finite(2) {
            continue;
        }
        assert!(
            find_critical_vertices(&pvcap_core::analysis::target_space(&s, &s.top()).unwrap())
                .is_empty()
        );
        let table = ClassTable::build(&s, &s.top()).unwrap();
        for x in allowed_vertices(&s) {
            assert!(table.classes_from(&s, &x) <= 1);
            if table.reaches(&x) {
                assert_eq!(component_upper_bound(&s, &x, &s.top()).unwrap(), 1);
            }
        }
    }
}

#[test]
fn class_table_agrees_with_brute_force() {
    for p in random_corpus(24, 80, 3, 4) {
        let s = StateSpace::new(&p);
        let table = ClassTable::build(&s, &s.top()).unwrap();
        for x in allowed_vertices(&s) {
            let steps: usize = s.top().0.iter().zip(&x.0).map(|(a, b)| a - b).sum();
            if steps > 10 {
                continue;
            }
            let brute = count_path_components(&s, &x, &s.top(), DEFAULT_CAP).unwrap();
            assert_eq!(table.classes_from(&s, &x), brute.class_count, "{x}");
        }
    }
}

#[test]
fn crossed_shadow_and_report() {
    let s = StateSpace::new(&corpus::crossed3());
    let shadow = critical_shadow(&s, &v(&[2, 2, 2])).unwrap();
    for b in &shadow {
        assert!(!b.contains_vertex(&s.origin()));
    }
    let r = analyze(
        &corpus::dine2(),
        &AnalyzeOptions {
            eliminate: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(r.deadlocks.len(), 1);
    assert_eq!(r.elimination_rounds, 1);
    assert_eq!(r.eliminated[0].to_string(), "](1,1),(3,3)[");
    assert_eq!(r.doomed[0].to_string(), "](1,1),(2,2)]");
    // the direct route and both exits of (1,1) are counted; the oracle finds 2
    assert_eq!(r.component_bound, 3);
}

#[test]
fn windowed_targets() {
    let s = StateSpace::new(&corpus::crossed3());
    let g = global_spare_capacity(&s, &v(&[2, 2, 2])).unwrap();
    assert_eq!(g.kappa, Spare::Infinite);
    assert!(g.witness.is_none());
    assert!(global_spare_capacity(&s, &v(&[9, 0, 0])).is_err());
}
