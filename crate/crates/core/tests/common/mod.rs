#![allow(dead_code)]

use pvcap_core::pv_lang::{validate_program, Action, Program, ResourceDecl, Thread};
use pvcap_core::{corpus, StateSpace, Vertex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random valid thread of `len` actions (even) over `nres` resources.
pub fn random_thread(rng: &mut impl Rng, name: String, len: usize, nres: usize) -> Thread {
    let mut held: Vec<usize> = Vec::new();
    let mut actions = Vec::with_capacity(len);
    for pos in 0..len {
        let remaining = len - pos;
        let free: Vec<usize> = (0..nres).filter(|r| !held.contains(r)).collect();
        let can_lock = !free.is_empty() && held.len() + 2 <= remaining;
        let lock = can_lock && (held.is_empty() || rng.gen_bool(0.5));
        if lock {
            let r = *free.choose(rng).unwrap();
            held.push(r);
            actions.push(Action::lock(r));
        } else {
            let i = rng.gen_range(0..held.len());
            let r = held.remove(i);
            actions.push(Action::release(r));
        }
    }
    Thread { name, actions }
}

pub fn random_program(rng: &mut impl Rng, threads: usize, max_len: usize) -> Program {
    let nres = rng.gen_range(1..=3);
    let resources = (0..nres)
        .map(|r| ResourceDecl {
            name: format!("r{}", r + 1),
            capacity: rng.gen_range(1..=threads.max(1) as u32),
        })
        .collect();
    let threads = (0..threads)
        .map(|j| {
            let len = 2 * rng.gen_range(1..=max_len / 2);
            random_thread(rng, format!("T{}", j + 1), len, nres)
        })
        .collect();
    let p = Program { resources, threads };
    assert!(validate_program(&p).is_valid(), "generator produced {p:?}");
    p
}

/// Seeded corpus of `count` programs with 1 to `max_threads` threads of length at most `max_len`.
pub fn random_corpus(seed: u64, count: usize, max_threads: usize, max_len: usize) -> Vec<Program> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_threads);
            random_program(&mut rng, n, max_len)
        })
        .collect()
}

pub fn named_corpus() -> Vec<(&'static str, Program)> {
    vec![
        ("crossed3", corpus::crossed3()),
        ("dine2", corpus::dine2()),
        ("dine3", corpus::dine3()),
        ("lopsided4", corpus::lopsided4()),
        ("balanced4", corpus::balanced4()),
        ("lopsided5", corpus::lopsided5()),
        ("balanced5", corpus::balanced5()),
        ("shared3", corpus::shared3()),
        ("single", corpus::single_resource(&[2, 1, 2], 2)),
    ]
}

pub fn v(c: &[usize]) -> Vertex {
    Vertex(c.to_vec())
}

/// Every lattice vertex of `s` that is allowed.
pub fn allowed_vertices(s: &StateSpace) -> Vec<Vertex> {
    s.lattice()
        .vertices()
        .filter(|x| s.vertex_allowed(x).unwrap())
        .collect()
}
