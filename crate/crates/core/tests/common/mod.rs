#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeaut::{Aut, TreeParams, Vertex};

pub fn p3() -> TreeParams {
    TreeParams::new(3).unwrap()
}

pub fn random_vertex(rng: &mut ChaCha8Rng, k: usize, max_len: usize) -> Vertex {
    let mut w = Vertex::root();
    for _ in 0..rng.random_range(0..=max_len) {
        let c = loop {
            let c = rng.random_range(0..k as u8);
            if w.last() != Some(c) {
                break c;
            }
        };
        w = w.step(c);
    }
    w
}

/// A product of one to four primitives: short left multiplications, Haar
/// stabilizer elements and depth-1 portraits.
pub fn fuzz_aut(p: TreeParams, rng: &mut ChaCha8Rng) -> Aut {
    let k = p.k();
    let mut g = Aut::identity(p);
    for _ in 0..rng.random_range(1..=4) {
        let f = match rng.random_range(0..3) {
            0 => Aut::left_mult(p, &random_vertex(rng, k, 3)).unwrap(),
            1 => Aut::random_stabilizer(p, rng.random()),
            _ => {
                let base = random_vertex(rng, k, 2);
                let mut sigma: Vec<u8> = (0..k as u8).collect();
                sigma.shuffle(rng);
                Aut::finite_portrait(p, base, BTreeMap::from([(Vertex::root(), sigma)]), 1).unwrap()
            }
        };
        g = g.compose(&f);
    }
    g
}

pub fn fuzz_from_seed(p: TreeParams, seed: u64) -> Aut {
    fuzz_aut(p, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Distance through the longest common prefix, independent of the library.
pub fn oracle_distance(u: &Vertex, v: &Vertex) -> usize {
    let (a, b) = (u.letters(), v.letters());
    let lcp = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    a.len() + b.len() - 2 * lcp
}
