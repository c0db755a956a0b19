//! Automorphisms of the k-regular tree as composition words of primitives.
//!
//! An [`Aut`] is an ordered product of primitives with exponents `±1`,
//! evaluated right to left. Nothing is ever flattened into an infinite
//! portrait: images are computed on demand, Haar-random factors sample their
//! locals lazily, and inverses are exact.

mod primitive;
pub mod stream;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use primitive::{LazyHaar, LazyHaarRecord, Portrait, PortraitRecord, Primitive, MEMO_DEPTH};

use crate::error::{Error, Result};
use crate::rooted::{RootedAut, RootedShape};
use crate::tree::{distance, TreeParams, Vertex};

#[derive(Clone, Debug)]
struct Factor {
    prim: Arc<Primitive>,
    inverted: bool,
}

impl Factor {
    #[inline]
    fn apply(&self, v: &Vertex) -> Vertex {
        if self.inverted {
            self.prim.apply_inverse(v)
        } else {
            self.prim.apply(v)
        }
    }

    /// The word of a left multiplication, accounting for the exponent.
    fn left_word(&self) -> Option<Vertex> {
        match &*self.prim {
            Primitive::LeftMult(w) if self.inverted => Some(w.reversed()),
            Primitive::LeftMult(w) => Some(w.clone()),
            _ => None,
        }
    }

    fn cancels(&self, other: &Factor) -> bool {
        Arc::ptr_eq(&self.prim, &other.prim) && self.inverted != other.inverted
    }
}

/// An automorphism of the k-regular tree.
///
/// Composition performs free cancellation of a primitive against its own
/// inverse and merges adjacent left multiplications; both are exact.
#[derive(Clone)]
pub struct Aut {
    params: TreeParams,
    factors: Vec<Factor>,
}

impl fmt::Debug for Aut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|fa| {
                let body = match &*fa.prim {
                    Primitive::LeftMult(w) => format!("lm:{w}"),
                    Primitive::Portrait(p) => format!("portrait[{}]", p.base_image()),
                    Primitive::LazyHaar(h) => format!("haar:{}", h.seed()),
                };
                if fa.inverted {
                    format!("{body}^-1")
                } else {
                    body
                }
            })
            .collect();
        if parts.is_empty() {
            f.write_str("id")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

impl Aut {
    pub fn identity(params: TreeParams) -> Self {
        Aut {
            params,
            factors: Vec::new(),
        }
    }

    fn from_primitive(params: TreeParams, prim: Primitive) -> Self {
        Aut {
            params,
            factors: vec![Factor {
                prim: Arc::new(prim),
                inverted: false,
            }],
        }
    }

    /// Left multiplication by the reduced word `w`; sends `t0` to `w`.
    pub fn left_mult(params: TreeParams, w: &Vertex) -> Result<Self> {
        params.check(w)?;
        if w.is_root() {
            return Ok(Aut::identity(params));
        }
        Ok(Aut::from_primitive(params, Primitive::LeftMult(w.clone())))
    }

    /// Parses `w` as a word and builds its left multiplication.
    pub fn left_mult_str(params: TreeParams, w: &str) -> Result<Self> {
        Aut::left_mult(params, &params.parse_vertex(w)?)
    }

    pub fn finite_portrait(
        params: TreeParams,
        base_image: Vertex,
        locals: BTreeMap<Vertex, Vec<u8>>,
        depth: usize,
    ) -> Result<Self> {
        let p = Portrait::new(params, base_image, locals, depth)?;
        Ok(Aut::from_primitive(params, Primitive::Portrait(p)))
    }

    pub fn from_portrait_record(record: PortraitRecord) -> Result<Self> {
        let params = TreeParams::new(record.k)?;
        Ok(Aut::from_primitive(
            params,
            Primitive::Portrait(Portrait::from_record(record)?),
        ))
    }

    /// Haar-random element of the stabilizer of `t0`.
    pub fn random_stabilizer(params: TreeParams, seed: u64) -> Self {
        Aut::from_primitive(params, Primitive::LazyHaar(LazyHaar::new(params, seed)))
    }

    pub fn from_lazy_haar_record(params: TreeParams, record: LazyHaarRecord) -> Result<Self> {
        Ok(Aut::from_primitive(
            params,
            Primitive::LazyHaar(LazyHaar::from_record(params, record)?),
        ))
    }

    /// Normalized Haar measure restricted to `{g : d(t0, g·t0) ≤ radius}`:
    /// a uniform vertex `v` of the ball times a random stabilizer element.
    pub fn sample_slice(params: TreeParams, radius: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(stream::derive_seed(seed, 0x511ce));
        let total = params.ball_size(radius);
        let mut pick = rng.random_range(0..total);
        let mut d = 0;
        while pick >= params.sphere_size(d) {
            pick -= params.sphere_size(d);
            d += 1;
        }
        // Uniform vertex of the sphere of radius d.
        let k = params.k() as u8;
        let mut v = Vertex::root();
        for _ in 0..d {
            let choices: Vec<u8> = (0..k).filter(|&c| Some(c) != v.last()).collect();
            v.push_step(choices[rng.random_range(0..choices.len())]);
        }
        let stab = Aut::random_stabilizer(params, stream::derive_seed(seed, 0x57ab));
        Aut::left_mult(params, &v)
            .expect("sampled word is valid")
            .compose(&stab)
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn is_trivial_word(&self) -> bool {
        self.factors.is_empty()
    }

    /// The primitive factors, outermost first, with their exponents.
    pub fn primitives(&self) -> impl Iterator<Item = (&Primitive, bool)> {
        self.factors.iter().map(|f| (&*f.prim, f.inverted))
    }

    pub fn apply(&self, v: &Vertex) -> Vertex {
        let mut x = v.clone();
        for f in self.factors.iter().rev() {
            x = f.apply(&x);
        }
        x
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Aut) -> Aut {
        assert_eq!(
            self.params, other.params,
            "composing automorphisms of trees of different degree"
        );
        let mut factors = self.factors.clone();
        for f in &other.factors {
            push_reduced(&mut factors, f.clone());
        }
        Aut {
            params: self.params,
            factors,
        }
    }

    pub fn inverse(&self) -> Aut {
        Aut {
            params: self.params,
            factors: self
                .factors
                .iter()
                .rev()
                .map(|f| Factor {
                    prim: f.prim.clone(),
                    inverted: !f.inverted,
                })
                .collect(),
        }
    }

    pub fn pow(&self, n: i64) -> Aut {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Aut::identity(self.params);
        for _ in 0..n.unsigned_abs() {
            out = out.compose(&base);
        }
        out
    }

    /// `h ∘ self ∘ h⁻¹`.
    pub fn conjugate_by(&self, h: &Aut) -> Aut {
        h.compose(self).compose(&h.inverse())
    }

    /// Whether `self` and `other` agree on every vertex of `B(t0, depth)`.
    pub fn agree_to_depth(&self, other: &Aut, depth: usize) -> bool {
        self.params
            .ball(&Vertex::root(), depth)
            .iter()
            .all(|v| self.apply(v) == other.apply(v))
    }

    /// Whether `self` preserves the bipartition, i.e. moves `t0` an even
    /// distance.
    pub fn type_preserving(&self) -> bool {
        self.apply(&Vertex::root()).len().is_multiple_of(2)
    }

    /// The permutation action on the rooted ball of radius `depth` at `s`.
    ///
    /// Children of `s` are indexed by colour; children of any other ball
    /// vertex by the rank of their colour among the colours different from
    /// the one leading back towards `s`.
    pub fn ball_action(&self, s: &Vertex, depth: usize) -> Result<RootedAut> {
        if &self.apply(s) != s {
            return Err(Error::NotFixed(s.clone()));
        }
        let shape = ball_shape(self.params, depth)?;
        let ball = RootedBall::new(self.params, s, depth);
        let images: Vec<Vertex> = ball.vertices.iter().map(|v| self.apply(v)).collect();
        ball.action_from_images(&shape, &images)
    }
}

fn push_reduced(factors: &mut Vec<Factor>, f: Factor) {
    let Some(last) = factors.last() else {
        factors.push(f);
        return;
    };
    if last.cancels(&f) {
        factors.pop();
        return;
    }
    if let (Some(a), Some(b)) = (last.left_word(), f.left_word()) {
        factors.pop();
        let merged = a.mul(&b);
        if !merged.is_root() {
            factors.push(Factor {
                prim: Arc::new(Primitive::LeftMult(merged)),
                inverted: false,
            });
        }
        return;
    }
    factors.push(f);
}

/// Shape `(k, k-1, …, k-1)` of a rooted ball of radius `depth`.
pub fn ball_shape(params: TreeParams, depth: usize) -> Result<RootedShape> {
    let degrees = (0..depth)
        .map(|l| if l == 0 { params.k() } else { params.k() - 1 })
        .collect();
    RootedShape::new(degrees)
}

/// The vertices of `B(s, depth)` listed in rooted order: level by level,
/// each level in lexicographic order of child-index tuples. This matches the
/// vertex indexing of [`RootedAut`] over [`ball_shape`].
#[derive(Clone, Debug)]
pub struct RootedBall {
    pub center: Vertex,
    pub depth: usize,
    /// All ball vertices in rooted order.
    pub vertices: Vec<Vertex>,
    /// Start offset of each level inside `vertices` (plus a final end).
    pub level_offsets: Vec<usize>,
    /// Colour of the edge leading back towards the centre, per vertex.
    back: Vec<Option<u8>>,
    index: HashMap<Vertex, usize>,
}

impl RootedBall {
    pub fn new(params: TreeParams, center: &Vertex, depth: usize) -> Self {
        let mut vertices = vec![center.clone()];
        let mut back = vec![None];
        let mut level_offsets = vec![0, 1];
        for l in 0..depth {
            let (start, end) = (level_offsets[l], level_offsets[l + 1]);
            for i in start..end {
                let v = vertices[i].clone();
                let b = back[i];
                for c in 0..params.k() as u8 {
                    if Some(c) != b {
                        vertices.push(v.step(c));
                        back.push(Some(c));
                    }
                }
            }
            level_offsets.push(vertices.len());
        }
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        RootedBall {
            center: center.clone(),
            depth,
            vertices,
            level_offsets,
            back,
            index,
        }
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// The sphere of radius `depth`, in rooted (leaf) order.
    pub fn leaves(&self) -> &[Vertex] {
        &self.vertices[self.level_offsets[self.depth]..]
    }

    /// Builds the rooted automorphism induced by a map sending the `i`-th
    /// ball vertex to `images[i]`; the map must preserve the ball.
    pub fn action_from_images(&self, shape: &RootedShape, images: &[Vertex]) -> Result<RootedAut> {
        let mut locals: Vec<Vec<Vec<u8>>> = Vec::with_capacity(self.depth);
        for l in 0..self.depth {
            let (start, end) = (self.level_offsets[l], self.level_offsets[l + 1]);
            let child_start = self.level_offsets[l + 1];
            let d = shape.degree(l);
            let mut level = Vec::with_capacity(end - start);
            for i in start..end {
                let target = &images[i];
                let tb = self.index_of(target).ok_or_else(|| {
                    Error::ShapeMismatch(format!("image {target:?} leaves the ball"))
                })?;
                let mut perm = vec![0u8; d];
                for (slot, p) in perm.iter_mut().enumerate() {
                    let child = child_start + (i - start) * d + slot;
                    let img = &images[child];
                    let ci = self.index_of(img).ok_or_else(|| {
                        Error::ShapeMismatch(format!("image {img:?} leaves the ball"))
                    })?;
                    let cstart = self.level_offsets[l + 1] + (tb - self.level_offsets[l]) * d;
                    if ci < cstart || ci >= cstart + d {
                        return Err(Error::ShapeMismatch(format!(
                            "map is not a tree automorphism at {:?}",
                            self.vertices[i]
                        )));
                    }
                    *p = (ci - cstart) as u8;
                }
                level.push(perm);
            }
            locals.push(level);
        }
        RootedAut::from_locals(shape.clone(), locals)
    }

    /// Colour of the edge from the `i`-th vertex back towards the centre.
    pub fn back_colour(&self, i: usize) -> Option<u8> {
        self.back[i]
    }
}

/// Displacement parity of `g`: the image of `g` in `Aut / Aut⁰`.
pub fn displacement_parity_odd(g: &Aut) -> bool {
    distance(&Vertex::root(), &g.apply(&Vertex::root())) % 2 == 1
}
