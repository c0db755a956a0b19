//! Building blocks of automorphisms.
//!
//! An automorphism `g` of the coloured tree is determined by the image of the
//! base vertex together with, at every vertex `v`, the bijection from the
//! colours at `v` to the colours at `g(v)`. Along any edge the two endpoint
//! bijections must agree on the colour of that edge (the parent-label
//! constraint), so away from the base vertex a local is really a bijection
//! between the `k - 1` remaining colours. It is stored *relative*: as a
//! permutation of ranks, where rank `r` at a vertex entered through colour
//! `p` is the `r`-th colour different from `p`.

use std::collections::{BTreeMap, HashMap};

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::stream::{self, Key};
use crate::error::{Error, Result};
use crate::tree::{path_colors, TreeParams, Vertex, MAX_DEGREE};

/// Locals at depth below this are cached in a [`LazyHaar`] memo.
pub const MEMO_DEPTH: usize = 8;

#[inline]
fn rank_excluding(x: u8, excluded: u8) -> u8 {
    x - (x > excluded) as u8
}

#[inline]
fn unrank_excluding(r: u8, excluded: u8) -> u8 {
    r + (r >= excluded) as u8
}

fn check_perm(perm: &[u8], n: usize) -> Result<()> {
    let mut seen = [false; 256];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "{perm:?} has length {}, expected {n}",
            perm.len()
        )));
    }
    for &p in perm {
        if p as usize >= n || seen[p as usize] {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p as usize] = true;
    }
    Ok(())
}

fn invert_small(perm: &[u8], x: u8) -> u8 {
    perm.iter().position(|&p| p == x).expect("validated permutation") as u8
}

/// A finite portrait: explicit colour bijections on the vertices of depth
/// below `depth`; deeper vertices use the order-preserving bijection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Portrait {
    k: usize,
    base_image: Vertex,
    depth: usize,
    /// Full colour permutations, keyed by domain vertex.
    locals: BTreeMap<Vertex, Vec<u8>>,
}

impl Portrait {
    pub fn new(
        params: TreeParams,
        base_image: Vertex,
        locals: BTreeMap<Vertex, Vec<u8>>,
        depth: usize,
    ) -> Result<Self> {
        params.check(&base_image)?;
        let k = params.k();
        let mut portrait = Portrait {
            k,
            base_image,
            depth,
            locals: BTreeMap::new(),
        };
        // BTreeMap order visits every ancestor before its descendants, so the
        // constraint below only ever reads already validated locals.
        for (v, perm) in locals {
            params.check(&v)?;
            if v.len() >= depth {
                return Err(Error::InconsistentPortrait(format!(
                    "local at {v:?} lies at depth {} >= {depth}",
                    v.len()
                )));
            }
            check_perm(&perm, k)?;
            if let Some(p) = v.last() {
                let q = *portrait
                    .image_colors(v.letters())
                    .last()
                    .expect("non-root vertex");
                if perm[p as usize] != q {
                    return Err(Error::InconsistentPortrait(format!(
                        "local at {v:?} sends parent colour {p} to {}, but the parent edge maps to colour {q}",
                        perm[p as usize]
                    )));
                }
            }
            portrait.locals.insert(v, perm);
        }
        Ok(portrait)
    }

    pub fn base_image(&self) -> &Vertex {
        &self.base_image
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn locals(&self) -> &BTreeMap<Vertex, Vec<u8>> {
        &self.locals
    }

    #[inline]
    fn image(&self, prefix: &[u8], parent: Option<(u8, u8)>, x: u8) -> u8 {
        if let Some(perm) = self.locals.get(prefix) {
            return perm[x as usize];
        }
        match parent {
            None => x,
            Some((p, q)) => unrank_excluding(rank_excluding(x, p), q),
        }
    }

    #[inline]
    fn preimage(&self, prefix: &[u8], parent: Option<(u8, u8)>, c: u8) -> u8 {
        if let Some(perm) = self.locals.get(prefix) {
            return invert_small(perm, c);
        }
        match parent {
            None => c,
            Some((p, q)) => unrank_excluding(rank_excluding(c, q), p),
        }
    }

    /// Colours of the image path of `t0 → v`.
    fn image_colors(&self, letters: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(letters.len());
        let mut parent = None;
        for (i, &x) in letters.iter().enumerate() {
            let c = self.image(&letters[..i], parent, x);
            out.push(c);
            parent = Some((x, c));
        }
        out
    }

    pub fn to_record(&self) -> PortraitRecord {
        PortraitRecord {
            k: self.k,
            base_image: self.base_image.clone(),
            depth: self.depth,
            locals: self.locals.clone(),
        }
    }

    pub fn from_record(record: PortraitRecord) -> Result<Self> {
        let params = TreeParams::new(record.k)?;
        Portrait::new(params, record.base_image, record.locals, record.depth)
    }
}

/// JSON form of a [`Portrait`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortraitRecord {
    pub k: usize,
    pub base_image: Vertex,
    pub depth: usize,
    pub locals: BTreeMap<Vertex, Vec<u8>>,
}

/// A Haar-random element of the stabilizer of `t0`, sampled lazily.
///
/// The relative local at each vertex is an independent uniform permutation.
/// It is a pure function of the seed and the vertex; shallow locals are kept
/// in a memo once drawn, and memo entries take precedence over the stream.
#[derive(Debug)]
pub struct LazyHaar {
    k: usize,
    seed: u64,
    key: Key,
    lookup_depth: usize,
    memo: RwLock<HashMap<Vertex, Vec<u8>>>,
}

impl Clone for LazyHaar {
    fn clone(&self) -> Self {
        LazyHaar {
            k: self.k,
            seed: self.seed,
            key: self.key,
            lookup_depth: self.lookup_depth,
            memo: RwLock::new(self.memo.read().clone()),
        }
    }
}

impl LazyHaar {
    pub fn new(params: TreeParams, seed: u64) -> Self {
        LazyHaar {
            k: params.k(),
            seed,
            key: stream::key_from_seed(seed),
            lookup_depth: MEMO_DEPTH,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().len()
    }

    /// Relative local at `prefix` (hash `h`): a permutation of `0..k` at the
    /// root, of `0..k-1` elsewhere.
    #[inline]
    fn relative(&self, prefix: &[u8], h: u64) -> ([u8; MAX_DEGREE], usize) {
        let n = if prefix.is_empty() { self.k } else { self.k - 1 };
        if prefix.len() < self.lookup_depth {
            if let Some(perm) = self.memo.read().get(prefix) {
                let mut out = [0u8; MAX_DEGREE];
                out[..n].copy_from_slice(perm);
                return (out, n);
            }
            let sampled = stream::sample_perm(&self.key, h, n);
            if prefix.len() < MEMO_DEPTH {
                self.memo
                    .write()
                    .entry(Vertex::from_letters(prefix.to_vec()).expect("reduced prefix"))
                    .or_insert_with(|| sampled.0[..n].to_vec());
            }
            return sampled;
        }
        stream::sample_perm(&self.key, h, n)
    }

    #[inline]
    fn image(&self, prefix: &[u8], h: u64, parent: Option<(u8, u8)>, x: u8) -> u8 {
        let (perm, _) = self.relative(prefix, h);
        match parent {
            None => perm[x as usize],
            Some((p, q)) => unrank_excluding(perm[rank_excluding(x, p) as usize], q),
        }
    }

    #[inline]
    fn preimage(&self, prefix: &[u8], h: u64, parent: Option<(u8, u8)>, c: u8) -> u8 {
        let (perm, n) = self.relative(prefix, h);
        match parent {
            None => invert_small(&perm[..n], c),
            Some((p, q)) => unrank_excluding(invert_small(&perm[..n], rank_excluding(c, q)), p),
        }
    }

    pub fn to_record(&self) -> LazyHaarRecord {
        LazyHaarRecord {
            seed: self.seed,
            memo: self
                .memo
                .read()
                .iter()
                .map(|(v, p)| (v.clone(), p.clone()))
                .collect(),
        }
    }

    pub fn from_record(params: TreeParams, record: LazyHaarRecord) -> Result<Self> {
        let mut haar = LazyHaar::new(params, record.seed);
        let mut memo = HashMap::with_capacity(record.memo.len());
        for (v, perm) in record.memo {
            params.check(&v)?;
            check_perm(&perm, if v.is_root() { params.k() } else { params.k() - 1 })?;
            haar.lookup_depth = haar.lookup_depth.max(v.len() + 1);
            memo.insert(v, perm);
        }
        haar.memo = RwLock::new(memo);
        Ok(haar)
    }
}

/// JSON form of a [`LazyHaar`]: the seed and every memoised local.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LazyHaarRecord {
    pub seed: u64,
    pub memo: BTreeMap<Vertex, Vec<u8>>,
}

#[derive(Debug, Clone)]
pub enum Primitive {
    /// Left multiplication by a reduced word in the free product.
    LeftMult(Vertex),
    Portrait(Portrait),
    LazyHaar(LazyHaar),
}

impl Primitive {
    pub fn base_image(&self) -> &Vertex {
        static ROOT: Vertex = Vertex::root();
        match self {
            Primitive::LeftMult(w) => w,
            Primitive::Portrait(p) => &p.base_image,
            Primitive::LazyHaar(_) => &ROOT,
        }
    }

    pub fn apply(&self, v: &Vertex) -> Vertex {
        match self {
            Primitive::LeftMult(w) => w.mul(v),
            Primitive::Portrait(p) => {
                let mut out = p.base_image.clone();
                let letters = v.letters();
                let mut parent = None;
                for (i, &x) in letters.iter().enumerate() {
                    let c = p.image(&letters[..i], parent, x);
                    out.push_step(c);
                    parent = Some((x, c));
                }
                out
            }
            Primitive::LazyHaar(haar) => {
                let letters = v.letters();
                let mut out = Vec::with_capacity(letters.len());
                let mut parent = None;
                let mut h = stream::ROOT_HASH;
                for (i, &x) in letters.iter().enumerate() {
                    let c = haar.image(&letters[..i], h, parent, x);
                    out.push(c);
                    parent = Some((x, c));
                    h = stream::extend_hash(h, x);
                }
                Vertex::from_letters(out).expect("image of a reduced word under a stabilizer element is reduced")
            }
        }
    }

    pub fn apply_inverse(&self, v: &Vertex) -> Vertex {
        match self {
            Primitive::LeftMult(w) => w.reversed().mul(v),
            Primitive::Portrait(p) => {
                let colors = path_colors(&p.base_image, v);
                let mut out: Vec<u8> = Vec::with_capacity(colors.len());
                let mut parent = None;
                for &c in &colors {
                    let x = p.preimage(&out, parent, c);
                    out.push(x);
                    parent = Some((x, c));
                }
                Vertex::from_letters(out).expect("preimage path is reduced")
            }
            Primitive::LazyHaar(haar) => {
                let colors = v.letters();
                let mut out: Vec<u8> = Vec::with_capacity(colors.len());
                let mut parent = None;
                let mut h = stream::ROOT_HASH;
                for &c in colors {
                    let x = haar.preimage(&out, h, parent, c);
                    out.push(x);
                    parent = Some((x, c));
                    h = stream::extend_hash(h, x);
                }
                Vertex::from_letters(out).expect("preimage path is reduced")
            }
        }
    }
}
