//! Permutation groups via a Schreier–Sims stabilizer chain.
//!
//! Permutations act on `0..n`; `p[i]` is the image of `i` and products
//! follow `(a∘b)[i] = a[b[i]]`.

use num_bigint::BigUint;
use num_traits::One;

pub type Perm = Vec<u32>;

pub fn identity(n: usize) -> Perm {
    (0..n as u32).collect()
}

pub fn is_identity(p: &[u32]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i as u32 == x)
}

/// `a ∘ b`.
pub fn compose(a: &[u32], b: &[u32]) -> Perm {
    b.iter().map(|&x| a[x as usize]).collect()
}

pub fn invert(a: &[u32]) -> Perm {
    let mut inv = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x as usize] = i as u32;
    }
    inv
}

#[derive(Clone, Debug)]
struct Level {
    base: u32,
    /// Indices into the strong generating set of generators fixing all
    /// earlier base points.
    gens: Vec<usize>,
    orbit: Vec<u32>,
    /// `transversal[b]` maps the base point to `b`.
    transversal: Vec<Option<Perm>>,
}

/// A permutation group with a base and strong generating set.
#[derive(Clone, Debug)]
pub struct PermGroup {
    n: usize,
    strong: Vec<Perm>,
    levels: Vec<Level>,
}

impl PermGroup {
    pub fn trivial(n: usize) -> Self {
        PermGroup {
            n,
            strong: Vec::new(),
            levels: Vec::new(),
        }
    }

    pub fn new(n: usize, gens: Vec<Perm>) -> Self {
        let mut g = PermGroup::trivial(n);
        for p in gens {
            g.extend(p);
        }
        g
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn strong_generators(&self) -> &[Perm] {
        &self.strong
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    /// Sifts `g` through the chain. Returns the residue and the level at
    /// which sifting stopped (`levels.len()` if it passed every level).
    fn strip(&self, g: &[u32], from: usize) -> (Perm, usize) {
        let mut h = g.to_vec();
        for (i, level) in self.levels.iter().enumerate().skip(from) {
            let b = h[level.base as usize];
            match &level.transversal[b as usize] {
                Some(u) => h = compose(&invert(u), &h),
                None => return (h, i),
            }
        }
        (h, self.levels.len())
    }

    pub fn contains(&self, g: &[u32]) -> bool {
        assert_eq!(g.len(), self.n, "permutation of the wrong degree");
        let (h, j) = self.strip(g, 0);
        j == self.levels.len() && is_identity(&h)
    }

    /// Adds `g` to the generators. Returns whether the group grew.
    pub fn extend(&mut self, g: Perm) -> bool {
        assert_eq!(g.len(), self.n, "permutation of the wrong degree");
        let (h, j) = self.strip(&g, 0);
        if j == self.levels.len() && is_identity(&h) {
            return false;
        }
        let mut i = self.add_strong(h, j);
        // Holt's restart loop: levels deeper than `i` are complete.
        loop {
            match self.find_nonmember_schreier(i) {
                Some((h, j)) => i = self.add_strong(h, j),
                None if i == 0 => break,
                None => i -= 1,
            }
        }
        true
    }

    /// Registers `h` (fixing the first `j` base points) as a strong
    /// generator and returns the deepest level it joins.
    fn add_strong(&mut self, h: Perm, j: usize) -> usize {
        if j == self.levels.len() {
            let moved = h
                .iter()
                .enumerate()
                .find(|&(i, &x)| i as u32 != x)
                .map(|(i, _)| i as u32)
                .expect("non-identity residue");
            let mut transversal = vec![None; self.n];
            transversal[moved as usize] = Some(identity(self.n));
            self.levels.push(Level {
                base: moved,
                gens: Vec::new(),
                orbit: vec![moved],
                transversal,
            });
        }
        let idx = self.strong.len();
        self.strong.push(h);
        for l in 0..=j {
            // Shallower levels already contain `h` as a product, but it is
            // part of their generating sets all the same.
            self.levels[l].gens.push(idx);
        }
        for l in 0..=j {
            self.rebuild_orbit(l);
        }
        j
    }

    fn rebuild_orbit(&mut self, l: usize) {
        let level = &self.levels[l];
        let gens: Vec<&Perm> = level.gens.iter().map(|&g| &self.strong[g]).collect();
        let mut transversal = level.transversal.clone();
        let mut orbit = level.orbit.clone();
        let mut cursor = 0;
        while cursor < orbit.len() {
            let p = orbit[cursor];
            for s in &gens {
                let q = s[p as usize];
                if transversal[q as usize].is_none() {
                    let u = compose(s, transversal[p as usize].as_ref().expect("orbit point"));
                    transversal[q as usize] = Some(u);
                    orbit.push(q);
                }
            }
            cursor += 1;
        }
        let level = &mut self.levels[l];
        level.orbit = orbit;
        level.transversal = transversal;
    }

    /// Finds a Schreier generator of level `i` that does not sift through
    /// the levels below it.
    fn find_nonmember_schreier(&self, i: usize) -> Option<(Perm, usize)> {
        let level = &self.levels[i];
        for &b in &level.orbit {
            let ub = level.transversal[b as usize].as_ref().expect("orbit point");
            for &gi in &level.gens {
                let s = &self.strong[gi];
                let sb = s[b as usize];
                let usb = level.transversal[sb as usize].as_ref().expect("orbit is closed");
                let schreier = compose(&invert(usb), &compose(s, ub));
                let (h, j) = self.strip(&schreier, i + 1);
                if j < self.levels.len() || !is_identity(&h) {
                    return Some((h, j));
                }
            }
        }
        None
    }
}
