//! Finite spherically homogeneous rooted trees and their automorphisms.
//!
//! A vertex of level `l` is a tuple `(r0, …, r_{l-1})` with `r_i < d_i`.
//! Vertices of one level are indexed in lexicographic (mixed-radix) order,
//! so the descendants of a vertex form one contiguous block of every deeper
//! level. Portraits are indexed by source vertex and act on the left:
//! `φ(r0, r1, …) = (σ_∅(r0), σ_(r0)(r1), …)`.

pub mod permgroup;

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use permgroup::{Perm, PermGroup};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct RootedShape {
    degrees: Vec<usize>,
}

impl TryFrom<Vec<usize>> for RootedShape {
    type Error = Error;
    fn try_from(degrees: Vec<usize>) -> Result<Self> {
        RootedShape::new(degrees)
    }
}

impl From<RootedShape> for Vec<usize> {
    fn from(s: RootedShape) -> Self {
        s.degrees
    }
}

impl fmt::Display for RootedShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.degrees.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl RootedShape {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::ShapeMismatch("a shape needs at least one level".into()));
        }
        if let Some(&d) = degrees.iter().find(|&&d| d == 0 || d > u8::MAX as usize) {
            return Err(Error::ShapeMismatch(format!("unsupported level degree {d}")));
        }
        Ok(RootedShape { degrees })
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Number of levels carrying local permutations.
    pub fn depth(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self, level: usize) -> usize {
        self.degrees[level]
    }

    /// Number of vertices at `level` (`0..=depth`).
    pub fn level_size(&self, level: usize) -> usize {
        self.degrees[..level].iter().product()
    }

    pub fn leaf_count(&self) -> usize {
        self.level_size(self.depth())
    }

    /// The shape of the subtree hanging below a vertex of `level`.
    pub fn suffix(&self, level: usize) -> Result<RootedShape> {
        if level >= self.depth() {
            return Err(Error::IndexOutOfRange {
                index: level,
                len: self.depth(),
            });
        }
        RootedShape::new(self.degrees[level..].to_vec())
    }

    pub fn prefix(&self, levels: usize) -> Result<RootedShape> {
        if levels == 0 || levels > self.depth() {
            return Err(Error::IndexOutOfRange {
                index: levels,
                len: self.depth(),
            });
        }
        RootedShape::new(self.degrees[..levels].to_vec())
    }

    /// Level index of a vertex tuple.
    pub fn index_of(&self, v: &[usize]) -> Result<usize> {
        if v.len() > self.depth() {
            return Err(Error::IndexOutOfRange {
                index: v.len(),
                len: self.depth(),
            });
        }
        let mut idx = 0;
        for (l, &r) in v.iter().enumerate() {
            if r >= self.degrees[l] {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    len: self.degrees[l],
                });
            }
            idx = idx * self.degrees[l] + r;
        }
        Ok(idx)
    }

    /// Vertex tuple of the `idx`-th vertex of `level`.
    pub fn vertex_at(&self, level: usize, mut idx: usize) -> Vec<usize> {
        let mut v = vec![0; level];
        for l in (0..level).rev() {
            v[l] = idx % self.degrees[l];
            idx /= self.degrees[l];
        }
        v
    }

    /// All vertices of `level`, in index order.
    pub fn level_vertices(&self, level: usize) -> Vec<Vec<usize>> {
        (0..self.level_size(level))
            .map(|i| self.vertex_at(level, i))
            .collect()
    }

    /// `|Aut|`: the product over internal vertices of `d_level!`.
    pub fn aut_order(&self) -> BigUint {
        let mut order = BigUint::one();
        for (l, &d) in self.degrees.iter().enumerate() {
            let fact: BigUint = (1..=d).map(BigUint::from).product();
            order *= num_traits::pow(fact, self.level_size(l));
        }
        order
    }
}

/// `|Aut(T(d₀,…,d_{L−1}))|`.
pub fn aut_order(shape: &RootedShape) -> BigUint {
    shape.aut_order()
}

/// An automorphism of a finite rooted tree, stored as its portrait.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RootedAutRecord", into = "RootedAutRecord")]
pub struct RootedAut {
    shape: RootedShape,
    /// `locals[l][i]`: permutation of `0..d_l` at the `i`-th vertex of level `l`.
    locals: Vec<Vec<Vec<u8>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootedAutRecord {
    pub degrees: Vec<usize>,
    pub locals: Vec<Vec<Vec<u8>>>,
}

impl TryFrom<RootedAutRecord> for RootedAut {
    type Error = Error;
    fn try_from(r: RootedAutRecord) -> Result<Self> {
        RootedAut::from_locals(RootedShape::new(r.degrees)?, r.locals)
    }
}

impl From<RootedAut> for RootedAutRecord {
    fn from(a: RootedAut) -> Self {
        RootedAutRecord {
            degrees: a.shape.degrees,
            locals: a.locals,
        }
    }
}

impl fmt::Debug for RootedAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedAut{}{:?}", self.shape, self.locals)
    }
}

fn is_perm(p: &[u8], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    p.iter().all(|&x| {
        let x = x as usize;
        x < n && !std::mem::replace(&mut seen[x], true)
    })
}

fn identity_perm(n: usize) -> Vec<u8> {
    (0..n as u8).collect()
}

impl RootedAut {
    pub fn identity(shape: &RootedShape) -> Self {
        let locals = (0..shape.depth())
            .map(|l| vec![identity_perm(shape.degree(l)); shape.level_size(l)])
            .collect();
        RootedAut {
            shape: shape.clone(),
            locals,
        }
    }

    pub fn from_locals(shape: RootedShape, locals: Vec<Vec<Vec<u8>>>) -> Result<Self> {
        if locals.len() != shape.depth() {
            return Err(Error::ShapeMismatch(format!(
                "{} levels of locals for a shape of depth {}",
                locals.len(),
                shape.depth()
            )));
        }
        for (l, level) in locals.iter().enumerate() {
            if level.len() != shape.level_size(l) {
                return Err(Error::ShapeMismatch(format!(
                    "level {l} has {} locals, expected {}",
                    level.len(),
                    shape.level_size(l)
                )));
            }
            if let Some(p) = level.iter().find(|p| !is_perm(p, shape.degree(l))) {
                return Err(Error::InvalidPermutation(format!(
                    "{p:?} is not a permutation of 0..{}",
                    shape.degree(l)
                )));
            }
        }
        Ok(RootedAut { shape, locals })
    }

    /// The elementary automorphism with local `perm` at one vertex and
    /// identity elsewhere.
    pub fn elementary(shape: &RootedShape, v: &[usize], perm: Vec<u8>) -> Result<Self> {
        let mut a = RootedAut::identity(shape);
        let idx = shape.index_of(v)?;
        let l = v.len();
        if l >= shape.depth() {
            return Err(Error::IndexOutOfRange {
                index: l,
                len: shape.depth(),
            });
        }
        if !is_perm(&perm, shape.degree(l)) {
            return Err(Error::InvalidPermutation(format!("{perm:?}")));
        }
        a.locals[l][idx] = perm;
        Ok(a)
    }

    pub fn shape(&self) -> &RootedShape {
        &self.shape
    }

    pub fn local(&self, level: usize, idx: usize) -> &[u8] {
        &self.locals[level][idx]
    }

    pub fn locals(&self) -> &[Vec<Vec<u8>>] {
        &self.locals
    }

    pub fn is_identity(&self) -> bool {
        self.locals
            .iter()
            .all(|level| level.iter().all(|p| p.iter().enumerate().all(|(i, &x)| i == x as usize)))
    }

    /// Image of a vertex tuple.
    pub fn apply(&self, v: &[usize]) -> Result<Vec<usize>> {
        self.shape.index_of(v)?;
        let mut out = Vec::with_capacity(v.len());
        let mut idx = 0;
        for (l, &r) in v.iter().enumerate() {
            out.push(self.locals[l][idx][r] as usize);
            idx = idx * self.shape.degree(l) + r;
        }
        Ok(out)
    }

    /// Image index of every vertex, level by level (`0..=depth`).
    pub fn level_images(&self) -> Vec<Vec<usize>> {
        let mut images = vec![vec![0usize]];
        for l in 0..self.shape.depth() {
            let d = self.shape.degree(l);
            let prev = &images[l];
            let mut next = vec![0; prev.len() * d];
            for (p, &ip) in prev.iter().enumerate() {
                let sigma = &self.locals[l][p];
                for c in 0..d {
                    next[p * d + c] = ip * d + sigma[c] as usize;
                }
            }
            images.push(next);
        }
        images
    }

    /// The action on leaves as a permutation: `perm[i]` is the image of leaf `i`.
    pub fn leaf_permutation(&self) -> Perm {
        self.level_images()
            .pop()
            .expect("at least the root level")
            .into_iter()
            .map(|x| x as u32)
            .collect()
    }

    /// Recovers the portrait from a leaf permutation; the inverse of
    /// [`RootedAut::leaf_permutation`] on tree automorphisms.
    pub fn from_leaf_permutation(shape: &RootedShape, perm: &[u32]) -> Result<Self> {
        if perm.len() != shape.leaf_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} leaves, expected {}",
                perm.len(),
                shape.leaf_count()
            )));
        }
        let depth = shape.depth();
        let mut images: Vec<usize> = perm.iter().map(|&x| x as usize).collect();
        let mut locals = vec![Vec::new(); depth];
        for l in (0..depth).rev() {
            let d = shape.degree(l);
            let parents = shape.level_size(l);
            let mut parent_images = vec![0; parents];
            let mut level = Vec::with_capacity(parents);
            for p in 0..parents {
                let block = &images[p * d..(p + 1) * d];
                let ip = block[0] / d;
                if block.iter().any(|&x| x / d != ip) {
                    return Err(Error::InvalidPermutation(
                        "leaf permutation does not preserve the tree".into(),
                    ));
                }
                parent_images[p] = ip;
                level.push(block.iter().map(|&x| (x % d) as u8).collect());
            }
            locals[l] = level;
            images = parent_images;
        }
        RootedAut::from_locals(shape.clone(), locals)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RootedAut) -> RootedAut {
        assert_eq!(self.shape, other.shape, "composing across shapes");
        let images = other.level_images();
        let locals = (0..self.shape.depth())
            .map(|l| {
                other.locals[l]
                    .iter()
                    .enumerate()
                    .map(|(i, inner)| {
                        let outer = &self.locals[l][images[l][i]];
                        inner.iter().map(|&x| outer[x as usize]).collect()
                    })
                    .collect()
            })
            .collect();
        RootedAut {
            shape: self.shape.clone(),
            locals,
        }
    }

    pub fn inverse(&self) -> RootedAut {
        let images = self.level_images();
        let mut locals: Vec<Vec<Vec<u8>>> = (0..self.shape.depth())
            .map(|l| vec![Vec::new(); self.shape.level_size(l)])
            .collect();
        for l in 0..self.shape.depth() {
            for (i, sigma) in self.locals[l].iter().enumerate() {
                let mut inv = vec![0u8; sigma.len()];
                for (x, &y) in sigma.iter().enumerate() {
                    inv[y as usize] = x as u8;
                }
                locals[l][images[l][i]] = inv;
            }
        }
        RootedAut {
            shape: self.shape.clone(),
            locals,
        }
    }

    pub fn pow(&self, n: i64) -> RootedAut {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = RootedAut::identity(&self.shape);
        for _ in 0..n.unsigned_abs() {
            out = base.compose(&out);
        }
        out
    }

    /// The state at an internal vertex: the induced automorphism of the
    /// subtree below `v`.
    pub fn state(&self, v: &[usize]) -> Result<RootedAut> {
        let level = v.len();
        let shape = self.shape.suffix(level)?;
        let idx = self.shape.index_of(v)?;
        let mut block = 1;
        let locals = (level..self.shape.depth())
            .map(|l| {
                let out = self.locals[l][idx * block..(idx + 1) * block].to_vec();
                block *= self.shape.degree(l);
                out
            })
            .collect();
        Ok(RootedAut { shape, locals })
    }

    /// The action on the first `levels` levels.
    pub fn truncate(&self, levels: usize) -> Result<RootedAut> {
        let shape = self.shape.prefix(levels)?;
        Ok(RootedAut {
            shape,
            locals: self.locals[..levels].to_vec(),
        })
    }

    /// Extends a truncation to `shape` with identity locals below.
    pub fn extend_to(&self, shape: &RootedShape) -> Result<RootedAut> {
        if shape.degrees()[..self.shape.depth().min(shape.depth())] != *self.shape.degrees()
        {
            return Err(Error::ShapeMismatch(format!("{} is not a prefix of {shape}", self.shape)));
        }
        let mut out = RootedAut::identity(shape);
        out.locals[..self.shape.depth()].clone_from_slice(&self.locals);
        Ok(out)
    }

    /// The automorphism of `shape` acting as `state` below `v` and trivially
    /// elsewhere.
    pub fn embed_state(shape: &RootedShape, v: &[usize], state: &RootedAut) -> Result<RootedAut> {
        let level = v.len();
        if shape.suffix(level)? != state.shape {
            return Err(Error::ShapeMismatch("state shape does not fit below v".into()));
        }
        let idx = shape.index_of(v)?;
        let mut out = RootedAut::identity(shape);
        let mut block = 1;
        for (j, l) in (level..shape.depth()).enumerate() {
            out.locals[l][idx * block..(idx + 1) * block].clone_from_slice(&state.locals[j]);
            block *= shape.degree(l);
        }
        Ok(out)
    }

    /// Minimal `m ≥ 1` with `a^m(u) = u`.
    pub fn orbit_period(&self, u: &[usize]) -> Result<usize> {
        let mut x = self.apply(u)?;
        let mut m = 1;
        while x != u {
            x = self.apply(&x)?;
            m += 1;
        }
        Ok(m)
    }

    /// `a∘u`: the state at `u` of `a^m`, `m` the orbit period of `u`.
    /// Computed as the cyclic product of states along the orbit.
    pub fn state_power(&self, u: &[usize]) -> Result<RootedAut> {
        let mut acc = self.state(u)?;
        let mut x = self.apply(u)?;
        while x != u {
            acc = self.state(&x)?.compose(&acc);
            x = self.apply(&x)?;
        }
        Ok(acc)
    }

    /// A compact integer code, injective on automorphisms of a fixed shape.
    pub fn code(&self) -> u64 {
        let mut code = 0u64;
        for (l, level) in self.locals.iter().enumerate() {
            let d = self.shape.degree(l) as u64;
            let fact: u64 = (1..=d).product();
            for p in level {
                code = code.wrapping_mul(fact).wrapping_add(perm_rank(p));
            }
        }
        code
    }
}

/// Lexicographic rank of a permutation.
pub fn perm_rank(p: &[u8]) -> u64 {
    let n = p.len();
    let mut rank = 0u64;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count() as u64;
        rank = rank * (n - i) as u64 + smaller;
    }
    rank
}

/// Uniform random automorphism: independent uniform locals, deterministic in
/// `seed`.
pub fn uniform_rooted(shape: &RootedShape, seed: u64) -> RootedAut {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    uniform_rooted_with(shape, &mut rng)
}

pub fn uniform_rooted_with<R: rand::Rng + ?Sized>(shape: &RootedShape, rng: &mut R) -> RootedAut {
    let mut a = RootedAut::identity(shape);
    for level in a.locals.iter_mut() {
        for p in level.iter_mut() {
            p.shuffle(rng);
        }
    }
    a
}

/// Generators of `Aut(shape)`: a transposition and a full cycle at every
/// internal vertex.
pub fn elementary_generators(shape: &RootedShape) -> Vec<RootedAut> {
    let mut gens = Vec::new();
    for l in 0..shape.depth() {
        let d = shape.degree(l);
        if d < 2 {
            continue;
        }
        let mut transposition = identity_perm(d);
        transposition.swap(0, 1);
        let cycle: Vec<u8> = (0..d).map(|i| ((i + 1) % d) as u8).collect();
        for v in shape.level_vertices(l) {
            gens.push(RootedAut::elementary(shape, &v, transposition.clone()).expect("valid vertex"));
            if d > 2 {
                gens.push(RootedAut::elementary(shape, &v, cycle.clone()).expect("valid vertex"));
            }
        }
    }
    gens
}

/// Generators of the pointwise stabilizer of the subtree below the root's
/// child `child` (that child included).
pub fn subtree_fixer_generators(shape: &RootedShape, child: usize) -> Result<Vec<RootedAut>> {
    let d0 = shape.degree(0);
    if child >= d0 {
        return Err(Error::IndexOutOfRange { index: child, len: d0 });
    }
    let mut gens = Vec::new();
    // Root locals fixing `child`: generated by transpositions of the others.
    let others: Vec<usize> = (0..d0).filter(|&c| c != child).collect();
    for w in others.windows(2) {
        let mut p = identity_perm(d0);
        p.swap(w[0], w[1]);
        gens.push(RootedAut::elementary(shape, &[], p)?);
    }
    for l in 1..shape.depth() {
        let d = shape.degree(l);
        if d < 2 {
            continue;
        }
        let mut transposition = identity_perm(d);
        transposition.swap(0, 1);
        let cycle: Vec<u8> = (0..d).map(|i| ((i + 1) % d) as u8).collect();
        for v in shape.level_vertices(l) {
            if v[0] == child {
                continue;
            }
            gens.push(RootedAut::elementary(shape, &v, transposition.clone())?);
            if d > 2 {
                gens.push(RootedAut::elementary(shape, &v, cycle.clone())?);
            }
        }
    }
    Ok(gens)
}

/// Exact order of the group generated by `gens` (all over one shape).
pub fn group_order(shape: &RootedShape, gens: &[RootedAut]) -> Result<BigUint> {
    Ok(group_of(shape, gens)?.order())
}

/// Whether `gens` generate the full automorphism group of `shape`.
pub fn generates_full(gens: &[RootedAut], shape: &RootedShape) -> Result<bool> {
    Ok(group_order(shape, gens)? == shape.aut_order())
}

/// The stabilizer-chain group of the leaf permutations of `gens`.
pub fn group_of(shape: &RootedShape, gens: &[RootedAut]) -> Result<PermGroup> {
    if let Some(g) = gens.iter().find(|g| g.shape != *shape) {
        return Err(Error::ShapeMismatch(format!(
            "generator over {} in a group over {shape}",
            g.shape
        )));
    }
    Ok(PermGroup::new(
        shape.leaf_count(),
        gens.iter().map(RootedAut::leaf_permutation).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn shape(d: &[usize]) -> RootedShape {
        RootedShape::new(d.to_vec()).unwrap()
    }

    /// Closure of a generating set by breadth-first multiplication.
    fn closure(gens: &[RootedAut], s: &RootedShape) -> HashSet<RootedAut> {
        let mut seen = HashSet::from([RootedAut::identity(s)]);
        let mut frontier = vec![RootedAut::identity(s)];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = g.compose(&x);
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        seen
    }

    #[test]
    fn aut_orders() {
        assert_eq!(shape(&[2]).aut_order(), BigUint::from(2u32));
        assert_eq!(shape(&[2, 2]).aut_order(), BigUint::from(8u32));
        assert_eq!(shape(&[3, 2]).aut_order(), BigUint::from(48u32));
        assert_eq!(shape(&[3, 2, 2]).aut_order(), BigUint::from(3072u32));
        for d in [[2, 2], [3, 2]] {
            let s = shape(&d);
            assert_eq!(
                BigUint::from(closure(&elementary_generators(&s), &s).len()),
                s.aut_order()
            );
        }
    }

    #[test]
    fn group_orders_match_closure() {
        let s = shape(&[2, 2]);
        assert_eq!(group_order(&s, &elementary_generators(&s)).unwrap(), BigUint::from(8u32));
        assert_eq!(group_order(&s, &[RootedAut::identity(&s)]).unwrap(), BigUint::one());
        let s = shape(&[3, 2]);
        let x = subtree_fixer_generators(&s, 0).unwrap();
        let y = subtree_fixer_generators(&s, 1).unwrap();
        assert_eq!(group_order(&s, &x).unwrap(), BigUint::from(closure(&x, &s).len()));
        let both: Vec<_> = x.into_iter().chain(y).collect();
        assert!(generates_full(&both, &s).unwrap());
    }

    #[test]
    fn binary_control_is_not_full() {
        let s = shape(&[2, 2]);
        let mut gens = subtree_fixer_generators(&s, 0).unwrap();
        gens.extend(subtree_fixer_generators(&s, 1).unwrap());
        assert_eq!(group_order(&s, &gens).unwrap(), BigUint::from(4u32));
        assert!(!generates_full(&gens, &s).unwrap());
    }

    #[test]
    fn portraits_are_unique() {
        let s = shape(&[2, 2, 2]);
        let all = closure(&elementary_generators(&s), &s);
        assert_eq!(all.len(), 128);
        let perms: HashSet<Perm> = all.iter().map(RootedAut::leaf_permutation).collect();
        assert_eq!(perms.len(), 128);
        for a in &all {
            let back = RootedAut::from_leaf_permutation(&s, &a.leaf_permutation()).unwrap();
            assert_eq!(&back, a);
        }
    }

    #[test]
    fn states_and_recomposition() {
        let s = shape(&[2, 2, 2]);
        let id = RootedAut::identity(&s);
        assert!(id.state(&[1]).unwrap().is_identity());
        let root_only = RootedAut::elementary(&s, &[], vec![1, 0]).unwrap();
        for v in s.level_vertices(1) {
            assert!(root_only.state(&v).unwrap().is_identity());
        }
        for seed in 0..100 {
            let a = uniform_rooted(&s, seed);
            for l in 1..s.depth() {
                let mut prod = RootedAut::identity(&s);
                for v in s.level_vertices(l) {
                    let st = a.state(&v).unwrap();
                    prod = prod.compose(&RootedAut::embed_state(&s, &v, &st).unwrap());
                }
                let top = a.truncate(l).unwrap().extend_to(&s).unwrap();
                assert_eq!(top.compose(&prod), a);
            }
        }
        assert!(id.state(&[0, 0, 0]).is_err());
        assert!(id.truncate(0).is_err());
        assert!(id.truncate(4).is_err());
    }

    #[test]
    fn orbit_periods_and_state_powers() {
        let s = shape(&[2, 2]);
        let root = RootedAut::elementary(&s, &[], vec![1, 0]).unwrap();
        assert_eq!(root.orbit_period(&[0]).unwrap(), 2);
        let below = RootedAut::elementary(&s, &[0], vec![1, 0]).unwrap();
        assert_eq!(below.orbit_period(&[0]).unwrap(), 1);
        assert_eq!(below.state_power(&[0]).unwrap(), below.state(&[0]).unwrap());
        let a = root.compose(&below);
        let sp = a.state_power(&[0]).unwrap();
        assert!(!sp.is_identity());
        assert_eq!(sp, a.pow(2).state(&[0]).unwrap());
        for seed in 0..50 {
            let a = uniform_rooted(&shape(&[3, 2, 2]), seed);
            for u in a.shape().level_vertices(1) {
                let m = a.orbit_period(&u).unwrap();
                assert_eq!(a.pow(m as i64).apply(&u).unwrap(), u);
                for j in 1..m {
                    assert_ne!(a.pow(j as i64).apply(&u).unwrap(), u);
                }
                assert_eq!(a.state_power(&u).unwrap(), a.pow(m as i64).state(&u).unwrap());
            }
        }
    }

    #[test]
    fn composition_matches_leaf_permutations() {
        let s = shape(&[3, 2, 2]);
        let a = uniform_rooted(&s, 1);
        let b = uniform_rooted(&s, 2);
        let pa = a.leaf_permutation();
        let pb = b.leaf_permutation();
        let pab: Perm = pb.iter().map(|&x| pa[x as usize]).collect();
        assert_eq!(a.compose(&b).leaf_permutation(), pab);
        assert!(a.compose(&a.inverse()).is_identity());
    }

    #[test]
    fn json_round_trip() {
        let s = shape(&[3, 2]);
        let a = uniform_rooted(&s, 9);
        let js = serde_json::to_value(&a).unwrap();
        assert_eq!(js["degrees"], serde_json::json!([3, 2]));
        assert_eq!(js["locals"].as_array().unwrap().len(), 2);
        let back: RootedAut = serde_json::from_value(js).unwrap();
        assert_eq!(back, a);
        let bad = serde_json::json!({"degrees": [2], "locals": [[[0, 0]]]});
        assert!(serde_json::from_value::<RootedAut>(bad).is_err());
    }

    #[test]
    fn codes_are_injective() {
        let s = shape(&[2, 2, 2]);
        let all = closure(&elementary_generators(&s), &s);
        let codes: HashSet<u64> = all.iter().map(RootedAut::code).collect();
        assert_eq!(codes.len(), all.len());
        assert!(codes.iter().all(|&c| c < 128));
    }
}
