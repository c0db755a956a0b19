//! Finite probes of the group generated by a tuple: density at a vertex,
//! freeness, and pointwise stabilizers.

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{GenTuple, Letter, SignedWord};
use crate::automorphism::{ball_shape, displacement_parity_odd, Aut, RootedBall};
use crate::classify::classify_exact;
use crate::error::Result;
use crate::rooted::PermGroup;
use crate::tree::Vertex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "Aut")]
    Aut,
    /// The index-2 subgroup preserving the bipartition.
    #[serde(rename = "Aut0")]
    AutZero,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Aut => "Aut",
            Target::AutZero => "Aut0",
        })
    }
}

/// Budgets of the density probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityParams {
    /// Radius of the rooted ball at `s`.
    pub depth: usize,
    /// Maximal length of a stabilizer word.
    pub word_budget: usize,
    /// Maximal number of orbit points explored.
    pub node_cap: usize,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams {
            depth: 2,
            word_budget: 64,
            node_cap: 40_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityCertificate {
    pub s: Vertex,
    pub depth: usize,
    pub target: Target,
    /// A hyperbolic element of the group.
    pub hyperbolic: SignedWord,
    /// Words fixing `s` whose ball actions generate the full ball group.
    pub generators: Vec<SignedWord>,
    /// Longest stabilizer word examined.
    pub word_length: usize,
    /// Orbit points explored.
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DensityOutcome {
    Certified(DensityCertificate),
    NotCertified {
        reason: String,
        /// Order of the ball group generated within budget.
        order: String,
        full_order: String,
        word_length: usize,
        nodes: usize,
    },
}

impl DensityOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, DensityOutcome::Certified(_))
    }
}

/// A hyperbolic entry, else a hyperbolic pairwise product.
pub(crate) fn hyperbolic_word(t: &GenTuple) -> Option<SignedWord> {
    if let Some(i) = (0..t.len()).find(|&i| classify_exact(t.entry(i)).is_hyperbolic()) {
        return Some(SignedWord::letter(i));
    }
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            if classify_exact(&t.entry(i).compose(t.entry(j))).is_hyperbolic() {
                return Some(SignedWord(vec![Letter::new(i, false), Letter::new(j, false)]));
            }
        }
    }
    None
}

pub(crate) fn target_of(t: &GenTuple) -> Target {
    if t.entries().iter().any(displacement_parity_odd) {
        Target::Aut
    } else {
        Target::AutZero
    }
}

fn all_letters(t: &GenTuple) -> Vec<(Letter, Aut)> {
    (0..t.len())
        .flat_map(|i| [Letter::new(i, false), Letter::new(i, true)])
        .map(|l| (l, t.letter(l)))
        .collect()
}

struct Node {
    word: SignedWord,
    /// Images of the ball vertices under the transversal element.
    images: Vec<Vertex>,
    index: HashMap<Vertex, u32>,
}

/// Image of the stabilizer `Γ_s` in the rooted ball group at `s`, as far as
/// a bounded Schreier walk gets.
#[derive(Clone, Debug)]
pub struct StabilizerImage {
    pub group: PermGroup,
    pub full_order: BigUint,
    /// Stabilizer words whose leaf actions strictly enlarged the group.
    pub generators: Vec<SignedWord>,
    pub word_length: usize,
    pub nodes: usize,
    /// A budget cut the walk short.
    pub capped: bool,
}

impl StabilizerImage {
    pub fn is_full(&self) -> bool {
        self.group.order() == self.full_order
    }
}

/// Walks the orbit of `s` breadth-first with a transversal; every non-tree
/// edge yields a Schreier generator of `Γ_s`, whose action on the rooted
/// ball of radius `depth` is fed into a stabilizer chain. Stops early once
/// the chain reaches the full ball group.
pub fn stabilizer_image(t: &GenTuple, s: &Vertex, params: DensityParams) -> Result<StabilizerImage> {
    let tp = t.params();
    tp.check(s)?;
    let depth = params.depth.max(1);
    let full_order = ball_shape(tp, depth)?.aut_order();
    let ball = RootedBall::new(tp, s, depth);
    let leaf_off = ball.level_offsets[ball.depth];
    let nleaves = ball.vertices.len() - leaf_off;
    let letters = all_letters(t);

    let root_index = ball
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i as u32))
        .collect();
    let mut nodes = vec![Node {
        word: SignedWord::empty(),
        images: ball.vertices.clone(),
        index: root_index,
    }];
    let mut orbit: HashMap<Vertex, usize> = HashMap::from([(s.clone(), 0)]);
    let mut out = StabilizerImage {
        group: PermGroup::trivial(nleaves),
        full_order,
        generators: Vec::new(),
        word_length: 0,
        nodes: 1,
        capped: false,
    };
    let mut level = vec![0usize];
    while !level.is_empty() {
        let mut next = Vec::new();
        for &pi in &level {
            for (letter, x) in &letters {
                let q = x.apply(&nodes[pi].images[0]);
                match orbit.get(&q).copied() {
                    None => {
                        if nodes.len() >= params.node_cap
                            || nodes[pi].word.len() + 1 > params.word_budget.div_ceil(2)
                        {
                            out.capped = true;
                            continue;
                        }
                        let images: Vec<Vertex> = nodes[pi].images.iter().map(|v| x.apply(v)).collect();
                        let index = images
                            .iter()
                            .enumerate()
                            .map(|(i, v)| (v.clone(), i as u32))
                            .collect();
                        let word = SignedWord(vec![*letter]).mul(&nodes[pi].word);
                        orbit.insert(q, nodes.len());
                        next.push(nodes.len());
                        nodes.push(Node { word, images, index });
                    }
                    Some(qi) => {
                        let w = nodes[qi]
                            .word
                            .inverse()
                            .mul(&SignedWord(vec![*letter]))
                            .mul(&nodes[pi].word);
                        if w.is_empty() {
                            continue;
                        }
                        if w.len() > params.word_budget {
                            out.capped = true;
                            continue;
                        }
                        out.word_length = out.word_length.max(w.len());
                        let perm: Vec<u32> = nodes[pi].images[leaf_off..]
                            .iter()
                            .map(|v| nodes[qi].index[&x.apply(v)] - leaf_off as u32)
                            .collect();
                        if out.group.extend(perm) {
                            out.generators.push(w);
                            if out.is_full() {
                                out.nodes = nodes.len();
                                return Ok(out);
                            }
                        }
                    }
                }
            }
        }
        level = next;
    }
    out.nodes = nodes.len();
    Ok(out)
}

/// Certifies density to finite depth at `s`: the stabilizer image is the
/// full ball group and the tuple contains a hyperbolic element.
pub fn density_probe(t: &GenTuple, s: &Vertex, params: DensityParams) -> Result<DensityOutcome> {
    let image = stabilizer_image(t, s, params)?;
    let hyperbolic = hyperbolic_word(t);
    if let (true, Some(h)) = (image.is_full(), &hyperbolic) {
        return Ok(DensityOutcome::Certified(DensityCertificate {
            s: s.clone(),
            depth: params.depth.max(1),
            target: target_of(t),
            hyperbolic: h.clone(),
            generators: image.generators,
            word_length: image.word_length,
            nodes: image.nodes,
        }));
    }
    let reason = if hyperbolic.is_none() {
        "no hyperbolic element among entries and pairwise products"
    } else if image.capped {
        "budget exhausted before the ball group was generated"
    } else {
        "orbit exhausted without generating the ball group"
    };
    Ok(DensityOutcome::NotCertified {
        reason: reason.to_string(),
        order: image.group.order().to_string(),
        full_order: image.full_order.to_string(),
        word_length: image.word_length,
        nodes: image.nodes,
    })
}

/// Re-checks a density certificate against the tuple.
pub fn verify_density_certificate(t: &GenTuple, cert: &DensityCertificate) -> Result<bool> {
    let shape = ball_shape(t.params(), cert.depth)?;
    let mut group = PermGroup::trivial(shape.leaf_count());
    for w in &cert.generators {
        let g = t.eval(w)?;
        if g.apply(&cert.s) != cert.s {
            return Ok(false);
        }
        group.extend(g.ball_action(&cert.s, cert.depth)?.leaf_permutation());
    }
    let hyperbolic = classify_exact(&t.eval(&cert.hyperbolic)?).is_hyperbolic();
    Ok(hyperbolic && group.order() == shape.aut_order() && target_of(t) == cert.target)
}

/// Visits nonempty reduced words of length `1..=max_len` (shorter first)
/// together with the image of `t0`.
fn for_each_word(
    t: &GenTuple,
    max_len: usize,
    mut visit: impl FnMut(&SignedWord, &Vertex) -> ControlFlow<()>,
) {
    let letters = all_letters(t);
    let mut level: Vec<(SignedWord, Vertex)> = vec![(SignedWord::empty(), Vertex::root())];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * letters.len());
        for (w, img) in &level {
            for (l, x) in &letters {
                if w.letters().first() == Some(&l.inv()) {
                    continue;
                }
                let mut word = Vec::with_capacity(w.len() + 1);
                word.push(*l);
                word.extend_from_slice(w.letters());
                let word = SignedWord(word);
                let img = x.apply(img);
                if visit(&word, &img).is_break() {
                    return;
                }
                next.push((word, img));
            }
        }
        level = next;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FreenessOutcome {
    NoRelationFound { words_checked: usize },
    Relation { word: SignedWord },
}

/// Looks for a nontrivial reduced word of length at most `max_len` acting
/// trivially on `B(t0, depth)`.
pub fn freeness_probe(t: &GenTuple, max_len: usize, depth: usize) -> Result<FreenessOutcome> {
    let identity = Aut::identity(t.params());
    let mut found = None;
    let mut checked = 0;
    let mut err = None;
    for_each_word(t, max_len, |w, img| {
        checked += 1;
        if !img.is_root() {
            return ControlFlow::Continue(());
        }
        match t.eval(w) {
            Ok(g) if g.agree_to_depth(&identity, depth) => {
                found = Some(w.clone());
                ControlFlow::Break(())
            }
            Ok(_) => ControlFlow::Continue(()),
            Err(e) => {
                err = Some(e);
                ControlFlow::Break(())
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(match found {
        Some(word) => FreenessOutcome::Relation { word },
        None => FreenessOutcome::NoRelationFound {
            words_checked: checked,
        },
    })
}

/// The first nonempty reduced word of length at most `max_len` fixing `t0`.
pub fn short_stabilizer_word(t: &GenTuple, max_len: usize) -> Option<SignedWord> {
    let mut found = None;
    for_each_word(t, max_len, |w, img| {
        if img.is_root() {
            found = Some(w.clone());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found
}

/// Budgets of the pointwise-stabilizer search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerSearch {
    pub word_budget: usize,
    pub node_cap: usize,
    /// A witness must move some vertex of `B(t0, check_radius)`.
    pub check_radius: usize,
}

impl Default for StabilizerSearch {
    fn default() -> Self {
        StabilizerSearch {
            word_budget: 24,
            node_cap: 20_000,
            check_radius: 4,
        }
    }
}

/// A word fixing every vertex of `ys` but moving some vertex of
/// `B(t0, check_radius)`, found among Schreier generators of the pointwise
/// stabilizer of `ys`.
pub fn stabilizer_witness(t: &GenTuple, ys: &[Vertex], search: StabilizerSearch) -> Option<SignedWord> {
    let letters = all_letters(t);
    let probe = t.params().ball(&Vertex::root(), search.check_radius);
    let mut words: Vec<SignedWord> = vec![SignedWord::empty()];
    let mut points: Vec<Vec<Vertex>> = vec![ys.to_vec()];
    let mut orbit: HashMap<Vec<Vertex>, usize> = HashMap::from([(ys.to_vec(), 0)]);
    let mut level = vec![0usize];
    while !level.is_empty() {
        let mut next = Vec::new();
        for &pi in &level {
            for (letter, x) in &letters {
                let q: Vec<Vertex> = points[pi].iter().map(|v| x.apply(v)).collect();
                match orbit.get(&q).copied() {
                    None => {
                        if words.len() >= search.node_cap || words[pi].len() + 1 > search.word_budget {
                            continue;
                        }
                        orbit.insert(q.clone(), words.len());
                        next.push(words.len());
                        words.push(SignedWord(vec![*letter]).mul(&words[pi]));
                        points.push(q);
                    }
                    Some(qi) => {
                        let w = words[qi]
                            .inverse()
                            .mul(&SignedWord(vec![*letter]))
                            .mul(&words[pi]);
                        if w.is_empty() || w.len() > search.word_budget {
                            continue;
                        }
                        let g = t.eval(&w).expect("letters index the tuple");
                        if probe.iter().any(|v| &g.apply(v) != v) {
                            return Some(w);
                        }
                    }
                }
            }
        }
        level = next;
    }
    None
}
