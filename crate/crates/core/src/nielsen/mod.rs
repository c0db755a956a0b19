//! Generating tuples, Nielsen moves, reduction and the trichotomy.
//!
//! Products follow function composition: the word `a b` is `a ∘ b`, so
//! `R(i,j,+)` replaces `a_i` by `a_i ∘ a_j`.

mod probe;
mod trichotomy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::automorphism::Aut;
use crate::classify::{classify_exact, displacement, schottky_check, Classification, SchottkyOutcome, WindowPolicy};
use crate::error::{Error, Result};
use crate::tree::{Edge, TreeParams, Vertex};

pub use probe::{
    density_probe, freeness_probe, short_stabilizer_word, stabilizer_image, stabilizer_witness,
    verify_density_certificate, DensityCertificate, DensityOutcome, DensityParams, FreenessOutcome, StabilizerImage,
    StabilizerSearch, Target,
};
pub(crate) use probe::hyperbolic_word;
pub use trichotomy::{trichotomy, verify_verdict, TrichotomyConfig, Verdict, VerdictKind};

/// One letter of a word in the tuple entries: entry `index` (0-based) or
/// its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(index: usize, inverse: bool) -> Self {
        Letter { index, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            index: self.index,
            inverse: !self.inverse,
        }
    }
}

/// A word in the entries of a tuple, printed as 1-based signed indices
/// (`"1 2 -1"`). The empty word prints as the empty string.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedWord(pub Vec<Letter>);

impl SignedWord {
    pub fn empty() -> Self {
        SignedWord(Vec::new())
    }

    pub fn letter(index: usize) -> Self {
        SignedWord(vec![Letter::new(index, false)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Free reduction.
    pub fn reduced(&self) -> SignedWord {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &x in &self.0 {
            if out.last() == Some(&x.inv()) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        SignedWord(out)
    }

    /// The reduced product `self · other`.
    pub fn mul(&self, other: &SignedWord) -> SignedWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        SignedWord(v).reduced()
    }

    pub fn inverse(&self) -> SignedWord {
        SignedWord(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Replaces every letter by the corresponding word of `images`.
    pub fn substitute(&self, images: &[SignedWord]) -> SignedWord {
        let mut out = SignedWord::empty();
        for l in &self.0 {
            let w = &images[l.index];
            out = out.mul(&if l.inverse { w.inverse() } else { w.clone() });
        }
        out
    }
}

impl fmt::Display for SignedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| {
                let i = l.index as i64 + 1;
                (if l.inverse { -i } else { i }).to_string()
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for SignedWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.split_whitespace()
            .map(|tok| {
                let x: i64 = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad word letter {tok:?}")))?;
                if x == 0 {
                    return Err(Error::Parse("word letters are 1-based".into()));
                }
                Ok(Letter::new(x.unsigned_abs() as usize - 1, x < 0))
            })
            .collect::<Result<Vec<_>>>()
            .map(SignedWord)
    }
}

impl Serialize for SignedWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignedWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered tuple of automorphisms of one tree.
#[derive(Clone, Debug)]
pub struct GenTuple {
    entries: Vec<Aut>,
}

impl GenTuple {
    pub fn new(entries: Vec<Aut>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(Error::ShapeMismatch("a tuple needs at least one entry".into()));
        };
        let k = first.params().k();
        if let Some(g) = entries.iter().find(|g| g.params().k() != k) {
            return Err(Error::DegreeMismatch(k, g.params().k()));
        }
        Ok(GenTuple { entries })
    }

    pub fn params(&self) -> TreeParams {
        self.entries[0].params()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Aut] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &Aut {
        &self.entries[i]
    }

    pub fn letter(&self, l: Letter) -> Aut {
        if l.inverse {
            self.entries[l.index].inverse()
        } else {
            self.entries[l.index].clone()
        }
    }

    pub fn eval(&self, w: &SignedWord) -> Result<Aut> {
        let mut out = Aut::identity(self.params());
        for &l in w.letters() {
            if l.index >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: l.index + 1,
                    len: self.len(),
                });
            }
            out = out.compose(&self.letter(l));
        }
        Ok(out)
    }

    pub fn classifications(&self) -> Vec<Classification> {
        self.entries.iter().map(classify_exact).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// An elementary Nielsen move. Indices are 0-based internally and 1-based
/// when printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NielsenMove {
    /// `a_i ← a_i a_j^{±1}`.
    R(usize, usize, Sign),
    /// `a_i ← a_j^{±1} a_i`.
    L(usize, usize, Sign),
    Swap(usize, usize),
}

impl NielsenMove {
    pub fn inverse(self) -> Self {
        match self {
            NielsenMove::R(i, j, s) => NielsenMove::R(i, j, s.flip()),
            NielsenMove::L(i, j, s) => NielsenMove::L(i, j, s.flip()),
            NielsenMove::Swap(i, j) => NielsenMove::Swap(i, j),
        }
    }

    fn indices(self) -> (usize, usize) {
        match self {
            NielsenMove::R(i, j, _) | NielsenMove::L(i, j, _) | NielsenMove::Swap(i, j) => (i, j),
        }
    }

    /// Every move on a tuple of length `n`, in a fixed order.
    pub fn all(n: usize) -> Vec<NielsenMove> {
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for s in [Sign::Plus, Sign::Minus] {
                    out.push(NielsenMove::R(i, j, s));
                    out.push(NielsenMove::L(i, j, s));
                }
                if i < j {
                    out.push(NielsenMove::Swap(i, j));
                }
            }
        }
        out
    }
}

impl fmt::Display for NielsenMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NielsenMove::R(i, j, s) => write!(f, "R({},{},{})", i + 1, j + 1, s.symbol()),
            NielsenMove::L(i, j, s) => write!(f, "L({},{},{})", i + 1, j + 1, s.symbol()),
            NielsenMove::Swap(i, j) => write!(f, "Swap({},{})", i + 1, j + 1),
        }
    }
}

impl FromStr for NielsenMove {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad Nielsen move {s:?}"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let body = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        let index = |p: &str| -> Result<usize> {
            match p.parse::<usize>() {
                Ok(x) if x >= 1 => Ok(x - 1),
                _ => Err(bad()),
            }
        };
        let sign = |p: &str| match p {
            "+" => Ok(Sign::Plus),
            "-" => Ok(Sign::Minus),
            _ => Err(bad()),
        };
        let m = match (&s[..open], parts.as_slice()) {
            ("R", [i, j, g]) => NielsenMove::R(index(i)?, index(j)?, sign(g)?),
            ("L", [i, j, g]) => NielsenMove::L(index(i)?, index(j)?, sign(g)?),
            ("Swap", [i, j]) => NielsenMove::Swap(index(i)?, index(j)?),
            _ => return Err(bad()),
        };
        let (i, j) = m.indices();
        if i == j {
            return Err(bad());
        }
        Ok(m)
    }
}

impl Serialize for NielsenMove {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NielsenMove {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_move(n: usize, m: NielsenMove) -> Result<()> {
    let (i, j) = m.indices();
    for x in [i, j] {
        if x >= n {
            return Err(Error::IndexOutOfRange { index: x + 1, len: n });
        }
    }
    if i == j {
        return Err(Error::Parse(format!("move {m} repeats an index")));
    }
    Ok(())
}

/// Generic Nielsen action on any tuple with a product and an inverse.
fn act<T: Clone>(
    xs: &mut [T],
    m: NielsenMove,
    mul: impl Fn(&T, &T) -> T,
    inv: impl Fn(&T) -> T,
) {
    match m {
        NielsenMove::R(i, j, s) => {
            let y = if s == Sign::Plus { xs[j].clone() } else { inv(&xs[j]) };
            xs[i] = mul(&xs[i], &y);
        }
        NielsenMove::L(i, j, s) => {
            let y = if s == Sign::Plus { xs[j].clone() } else { inv(&xs[j]) };
            xs[i] = mul(&y, &xs[i]);
        }
        NielsenMove::Swap(i, j) => xs.swap(i, j),
    }
}

pub fn apply_move(t: &GenTuple, m: NielsenMove) -> Result<GenTuple> {
    check_move(t.len(), m)?;
    let mut entries = t.entries.clone();
    act(&mut entries, m, |a, b| a.compose(b), Aut::inverse);
    Ok(GenTuple { entries })
}

/// A tuple together with the words expressing its entries in the entries of
/// an original tuple.
#[derive(Clone, Debug)]
pub struct Tracked {
    pub tuple: GenTuple,
    pub words: Vec<SignedWord>,
    pub moves: Vec<NielsenMove>,
}

impl Tracked {
    pub fn new(tuple: GenTuple) -> Self {
        let words = (0..tuple.len()).map(SignedWord::letter).collect();
        Tracked {
            tuple,
            words,
            moves: Vec::new(),
        }
    }

    pub fn apply(&self, m: NielsenMove) -> Result<Tracked> {
        let tuple = apply_move(&self.tuple, m)?;
        let mut words = self.words.clone();
        act(&mut words, m, SignedWord::mul, SignedWord::inverse);
        let mut moves = self.moves.clone();
        moves.push(m);
        Ok(Tracked { tuple, words, moves })
    }
}

/// Hyperbolic flag, translation length, displacement of `t0`.
type Key = (usize, usize, usize);

/// Per-entry contribution to the reduction key.
fn entry_key(g: &Aut) -> Key {
    let c = classify_exact(g);
    (
        usize::from(c.is_hyperbolic()),
        c.translation_length(),
        displacement(g, &Vertex::root()),
    )
}

fn sum_keys(keys: &[Key]) -> Key {
    keys.iter()
        .fold((0, 0, 0), |a, k| (a.0 + k.0, a.1 + k.1, a.2 + k.2))
}

#[derive(Clone, Debug)]
pub enum ReduceOutcome {
    /// Entry `index` of the tuple is elliptic or an inversion.
    Ellipticized { tracked: Tracked, index: usize },
    /// The tuple satisfies the Schottky condition.
    Schottky { tracked: Tracked },
    /// No improving move, or the budget ran out.
    Exhausted { tracked: Tracked },
}

impl ReduceOutcome {
    pub fn tracked(&self) -> &Tracked {
        match self {
            ReduceOutcome::Ellipticized { tracked, .. }
            | ReduceOutcome::Schottky { tracked }
            | ReduceOutcome::Exhausted { tracked } => tracked,
        }
    }
}

/// Greedy Nielsen reduction: repeatedly applies the single move that most
/// decreases (hyperbolic entries, Σ translation length, Σ displacement at
/// `t0`), stopping at an elliptic-like entry or a Schottky tuple.
pub fn reduce(start: Tracked, budget: usize, policy: WindowPolicy) -> ReduceOutcome {
    let mut cur = start;
    let mut keys: Vec<_> = cur.tuple.entries().iter().map(entry_key).collect();
    let moves: Vec<NielsenMove> = NielsenMove::all(cur.tuple.len())
        .into_iter()
        .filter(|m| !matches!(m, NielsenMove::Swap(..)))
        .collect();
    let mut steps = 0;
    loop {
        if let Some(index) = keys.iter().position(|k| k.0 == 0) {
            return ReduceOutcome::Ellipticized { tracked: cur, index };
        }
        if schottky_check(cur.tuple.entries(), policy) == SchottkyOutcome::Satisfied {
            return ReduceOutcome::Schottky { tracked: cur };
        }
        if steps >= budget {
            return ReduceOutcome::Exhausted { tracked: cur };
        }
        let current = sum_keys(&keys);
        let mut best: Option<(Key, NielsenMove, Key)> = None;
        for &m in &moves {
            let (i, _) = m.indices();
            let mut scratch = cur.tuple.entries.clone();
            act(&mut scratch, m, |a, b| a.compose(b), Aut::inverse);
            let ki = entry_key(&scratch[i]);
            let mut trial = keys.clone();
            trial[i] = ki;
            let total = sum_keys(&trial);
            if total < current && best.as_ref().is_none_or(|b| total < b.0) {
                best = Some((total, m, ki));
            }
        }
        let Some((_, m, ki)) = best else {
            return ReduceOutcome::Exhausted { tracked: cur };
        };
        cur = cur.apply(m).expect("moves are in range");
        keys[m.indices().0] = ki;
        steps += 1;
    }
}

/// A fixed vertex or an inverted-or-fixed geometric edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedWitness {
    Vertex(Vertex),
    Edge(Edge),
}

impl FixedWitness {
    /// Whether `g` fixes the vertex, or maps the edge to itself.
    pub fn is_fixed_by(&self, g: &Aut) -> bool {
        match self {
            FixedWitness::Vertex(v) => &g.apply(v) == v,
            FixedWitness::Edge(e) => {
                let (a, b) = e.endpoints();
                let (ga, gb) = (g.apply(a), g.apply(b));
                (&ga == a && &gb == b) || (&ga == b && &gb == a)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PrecompactOutcome {
    Yes { witness: FixedWitness },
    No { witness: SignedWord },
}

/// Whether the tuple generates a precompact group: every entry and every
/// pairwise product must fix a vertex or an edge.
pub fn precompact_check(t: &GenTuple) -> PrecompactOutcome {
    let n = t.len();
    for i in 0..n {
        if classify_exact(t.entry(i)).is_hyperbolic() {
            return PrecompactOutcome::No {
                witness: SignedWord::letter(i),
            };
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if classify_exact(&t.entry(i).compose(t.entry(j))).is_hyperbolic() {
                return PrecompactOutcome::No {
                    witness: SignedWord(vec![Letter::new(i, false), Letter::new(j, false)]),
                };
            }
        }
    }
    PrecompactOutcome::Yes {
        witness: common_fixed(t),
    }
}

/// Common fixed vertex or edge of a precompact tuple, by descent on the
/// convex function `x ↦ max_i d(x, a_i x)`.
fn common_fixed(t: &GenTuple) -> FixedWitness {
    let f = |x: &Vertex| {
        t.entries()
            .iter()
            .map(|g| displacement(g, x))
            .max()
            .unwrap_or(0)
    };
    let mut x = Vertex::root();
    let mut fx = f(&x);
    loop {
        let mut best: Option<(usize, Vertex)> = None;
        for y in t.params().neighbors(&x) {
            let fy = f(&y);
            if fy < fx && best.as_ref().is_none_or(|(b, bv)| fy < *b || (fy == *b && y < *bv)) {
                best = Some((fy, y));
            }
        }
        match best {
            Some((fy, y)) => {
                x = y;
                fx = fy;
            }
            None => break,
        }
    }
    if fx == 0 {
        return FixedWitness::Vertex(x);
    }
    for y in t.params().neighbors(&x) {
        let e = Edge::new(x.clone(), y).expect("neighbours are adjacent");
        let w = FixedWitness::Edge(e);
        if t.entries().iter().all(|g| w.is_fixed_by(g)) {
            return w;
        }
    }
    unreachable!("a group whose elements and pairwise products are elliptic fixes a vertex or an edge")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn p() -> TreeParams {
        TreeParams::default()
    }

    fn lm(w: &str) -> Aut {
        Aut::left_mult_str(p(), w).unwrap()
    }

    #[test]
    fn words_print_and_parse() {
        let w: SignedWord = "1 2 -1".parse().unwrap();
        assert_eq!(w.to_string(), "1 2 -1");
        assert_eq!(w.inverse().to_string(), "1 -2 -1");
        assert!(w.mul(&w.inverse()).is_empty());
        assert!("0".parse::<SignedWord>().is_err());
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"1 2 -1\"");
    }

    #[test]
    fn moves_print_and_parse() {
        let m = NielsenMove::R(0, 1, Sign::Plus);
        assert_eq!(m.to_string(), "R(1,2,+)");
        assert_eq!("R(1,2,+)".parse::<NielsenMove>().unwrap(), m);
        assert_eq!("Swap(2,1)".parse::<NielsenMove>().unwrap(), NielsenMove::Swap(1, 0));
        assert!("R(1,1,+)".parse::<NielsenMove>().is_err());
        assert!("Q(1,2)".parse::<NielsenMove>().is_err());
        assert_eq!(NielsenMove::all(2).len(), 9);
    }

    #[test]
    fn moves_act_by_the_formulas() {
        let a = Aut::random_stabilizer(p(), 3);
        let b = lm("01");
        let t = GenTuple::new(vec![a.clone(), b.clone()]).unwrap();
        let r = apply_move(&t, NielsenMove::R(0, 1, Sign::Plus)).unwrap();
        assert!(r.entry(0).agree_to_depth(&a.compose(&b), 4));
        let s = apply_move(&t, NielsenMove::Swap(0, 1)).unwrap();
        assert!(s.entry(0).agree_to_depth(&b, 4));
        for m in NielsenMove::all(2) {
            let back = apply_move(&apply_move(&t, m).unwrap(), m.inverse()).unwrap();
            for i in 0..2 {
                assert!(back.entry(i).agree_to_depth(t.entry(i), 4), "{m}");
            }
        }
        assert!(apply_move(&t, NielsenMove::R(0, 2, Sign::Plus)).is_err());
    }

    #[test]
    fn tracked_words_match_entries() {
        let t = GenTuple::new(vec![Aut::random_stabilizer(p(), 1), lm("01"), lm("2")]).unwrap();
        let mut tr = Tracked::new(t.clone());
        for m in ["R(1,2,+)", "L(3,1,-)", "Swap(1,3)", "R(2,3,-)"] {
            tr = tr.apply(m.parse().unwrap()).unwrap();
        }
        for (e, w) in tr.tuple.entries().iter().zip(&tr.words) {
            assert!(e.agree_to_depth(&t.eval(w).unwrap(), 4));
        }
    }

    #[test]
    fn reduction_outcomes() {
        let pol = WindowPolicy::default();
        let b = lm("01");
        let a = (0..)
            .map(|seed| Aut::random_stabilizer(p(), seed))
            .find(|a| classify_exact(&a.compose(&b)).is_hyperbolic())
            .unwrap();
        let t = GenTuple::new(vec![b.clone(), a.compose(&b)]).unwrap();
        match reduce(Tracked::new(t), 500, pol) {
            ReduceOutcome::Ellipticized { tracked, index } => {
                assert!(classify_exact(tracked.tuple.entry(index)).is_elliptic_like());
                assert!(!tracked.moves.is_empty());
            }
            other => panic!("{other:?}"),
        }
        let t = GenTuple::new(vec![lm("01"), lm("21")]).unwrap();
        assert!(matches!(reduce(Tracked::new(t), 500, pol), ReduceOutcome::Schottky { .. }));
        let t = GenTuple::new(vec![a.clone(), Aut::random_stabilizer(p(), 6)]).unwrap();
        match reduce(Tracked::new(t), 500, pol) {
            ReduceOutcome::Ellipticized { tracked, index } => {
                assert_eq!(index, 0);
                assert!(tracked.moves.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precompactness() {
        let t = GenTuple::new(vec![Aut::random_stabilizer(p(), 1), Aut::random_stabilizer(p(), 2)]).unwrap();
        assert_eq!(
            precompact_check(&t),
            PrecompactOutcome::Yes {
                witness: FixedWitness::Vertex(Vertex::root())
            }
        );
        let t = GenTuple::new(vec![lm("0"), lm("1")]).unwrap();
        assert_eq!(
            precompact_check(&t),
            PrecompactOutcome::No {
                witness: "1 2".parse().unwrap()
            }
        );
        // Root swap fixes the edge {ε, 0} pointwise; lm(0) inverts it.
        let swap = Aut::finite_portrait(
            p(),
            Vertex::root(),
            BTreeMap::from([(Vertex::root(), vec![0, 2, 1])]),
            1,
        )
        .unwrap();
        let t = GenTuple::new(vec![swap, lm("0")]).unwrap();
        let prod = classify_exact(&t.entry(0).compose(t.entry(1)));
        match precompact_check(&t) {
            PrecompactOutcome::Yes { witness } => {
                assert!(prod.is_elliptic_like());
                assert!(t.entries().iter().all(|g| witness.is_fixed_by(g)));
            }
            PrecompactOutcome::No { .. } => assert!(prod.is_hyperbolic()),
        }
    }
}
