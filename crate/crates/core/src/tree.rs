//! The k-regular tree, modelled as the Cayley graph of the free product of
//! `k` copies of Z/2.
//!
//! A vertex is a reduced word over the letters `0..k`: no two consecutive
//! letters are equal. The empty word is the base vertex `t0`. Each vertex has
//! exactly one incident edge of every colour `c`, leading to the word with `c`
//! appended (or the last letter removed, when it already equals `c`).

use std::borrow::Borrow;
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Letters are printed as single decimal digits.
pub const MAX_DEGREE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeParams {
    k: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { k: 3 }
    }
}

impl TreeParams {
    pub fn new(k: usize) -> Result<Self> {
        if !(3..=MAX_DEGREE).contains(&k) {
            return Err(Error::InvalidDegree(k));
        }
        Ok(TreeParams { k })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Checks that every letter of `v` is a valid colour.
    pub fn check(&self, v: &Vertex) -> Result<()> {
        match v.0.iter().find(|&&c| c as usize >= self.k) {
            Some(&letter) => Err(Error::InvalidLetter { letter, k: self.k }),
            None => Ok(()),
        }
    }

    pub fn parse_vertex(&self, s: &str) -> Result<Vertex> {
        let v: Vertex = s.parse()?;
        self.check(&v)?;
        Ok(v)
    }

    /// The `k` neighbours of `v`, in colour order.
    pub fn neighbors(&self, v: &Vertex) -> Vec<Vertex> {
        (0..self.k as u8).map(|c| v.step(c)).collect()
    }

    /// All vertices within distance `r` of `t`, in breadth-first order with
    /// colours visited in increasing order.
    pub fn ball(&self, t: &Vertex, r: usize) -> Vec<Vertex> {
        let mut out = vec![t.clone()];
        let mut frontier: Vec<(Vertex, Option<u8>)> = vec![(t.clone(), None)];
        for _ in 0..r {
            let mut next = Vec::with_capacity(frontier.len() * (self.k - 1));
            for (v, back) in &frontier {
                for c in 0..self.k as u8 {
                    if Some(c) != *back {
                        let w = v.step(c);
                        out.push(w.clone());
                        next.push((w, Some(c)));
                    }
                }
            }
            frontier = next;
        }
        out
    }

    /// Closed-form size of a ball of radius `r`.
    pub fn ball_size(&self, r: usize) -> usize {
        1 + (1..=r).map(|d| self.sphere_size(d)).sum::<usize>()
    }

    pub fn sphere_size(&self, d: usize) -> usize {
        if d == 0 {
            1
        } else {
            self.k * (self.k - 1).pow(d as u32 - 1)
        }
    }

    /// Breadth-first search distance along the adjacency relation. Only used
    /// to cross-check the prefix formula.
    pub fn bfs_distance(&self, u: &Vertex, v: &Vertex) -> usize {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([(u.clone(), 0usize)]);
        seen.insert(u.clone());
        while let Some((x, d)) = queue.pop_front() {
            if &x == v {
                return d;
            }
            for y in self.neighbors(&x) {
                if seen.insert(y.clone()) {
                    queue.push_back((y, d + 1));
                }
            }
        }
        unreachable!("the tree is connected")
    }
}

/// A vertex of the tree: a reduced word over the colours.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(Vec<u8>);

impl Vertex {
    pub const fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn from_letters(letters: Vec<u8>) -> Result<Self> {
        if letters.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::NotReduced(Vertex(letters).to_string()));
        }
        Ok(Vertex(letters))
    }

    /// Reduces an arbitrary word by cancelling equal neighbours.
    pub fn reduce(letters: &[u8]) -> Self {
        let mut v = Vertex::root();
        for &c in letters {
            v.push_step(c);
        }
        v
    }

    #[inline]
    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// The root is the empty word.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.is_root() {
            None
        } else {
            Some(Vertex(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// The neighbour across the edge of colour `c`.
    pub fn step(&self, c: u8) -> Vertex {
        let mut v = self.clone();
        v.push_step(c);
        v
    }

    #[inline]
    pub fn push_step(&mut self, c: u8) {
        if self.0.last() == Some(&c) {
            self.0.pop();
        } else {
            self.0.push(c);
        }
    }

    /// Free-product multiplication `self · other`, reduced.
    pub fn mul(&self, other: &Vertex) -> Vertex {
        let c = self
            .0
            .iter()
            .rev()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count();
        let mut letters = Vec::with_capacity(self.len() + other.len() - 2 * c);
        letters.extend_from_slice(&self.0[..self.len() - c]);
        letters.extend_from_slice(&other.0[c..]);
        Vertex(letters)
    }

    /// The inverse group element: the reversed word.
    pub fn reversed(&self) -> Vertex {
        Vertex(self.0.iter().rev().copied().collect())
    }

    pub fn common_prefix_len(&self, other: &Vertex) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn parity(&self) -> Parity {
        if self.len().is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_adjacent(&self, other: &Vertex) -> bool {
        distance(self, other) == 1
    }
}

impl Borrow<[u8]> for Vertex {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            f.write_str("ε")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

impl std::str::FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::Parse(format!("invalid vertex letter {ch:?} in {s:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Vertex::from_letters(letters)
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

pub fn parity(v: &Vertex) -> Parity {
    v.parity()
}

/// A geometric edge: an unordered pair of adjacent vertices, stored with the
/// smaller word first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[Vertex; 2]", into = "[Vertex; 2]")]
pub struct Edge {
    lo: Vertex,
    hi: Vertex,
}

impl Edge {
    pub fn new(u: Vertex, v: Vertex) -> Result<Self> {
        if !u.is_adjacent(&v) {
            return Err(Error::NotAdjacent(u, v));
        }
        Ok(if u < v { Edge { lo: u, hi: v } } else { Edge { lo: v, hi: u } })
    }

    pub fn endpoints(&self) -> (&Vertex, &Vertex) {
        (&self.lo, &self.hi)
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        &self.lo == v || &self.hi == v
    }
}

impl TryFrom<[Vertex; 2]> for Edge {
    type Error = Error;

    fn try_from([u, v]: [Vertex; 2]) -> Result<Self> {
        Edge::new(u, v)
    }
}

impl From<Edge> for [Vertex; 2] {
    fn from(e: Edge) -> Self {
        [e.lo, e.hi]
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{:?}, {:?}}}", self.lo, self.hi)
    }
}

/// The simple path between two vertices, endpoints included.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSegment(Vec<Vertex>);

impl PathSegment {
    /// Checks that `vertices` form a simple path.
    pub fn from_vertices(vertices: Vec<Vertex>) -> Result<Self> {
        for w in vertices.windows(2) {
            if !w[0].is_adjacent(&w[1]) {
                return Err(Error::NotAdjacent(w[0].clone(), w[1].clone()));
            }
        }
        for w in vertices.windows(3) {
            if w[0] == w[2] {
                return Err(Error::Parse(format!("path backtracks at {}", w[1])));
            }
        }
        Ok(PathSegment(vertices))
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }

    /// Number of edges.
    pub fn length(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
}

impl Deref for PathSegment {
    type Target = [Vertex];

    fn deref(&self) -> &[Vertex] {
        &self.0
    }
}

/// Graph distance: `|u| + |v| - 2·lcp(u, v)`.
#[inline]
pub fn distance(u: &Vertex, v: &Vertex) -> usize {
    u.len() + v.len() - 2 * u.common_prefix_len(v)
}

/// Edge colours read along the path from `u` to `v`.
pub fn path_colors(u: &Vertex, v: &Vertex) -> Vec<u8> {
    let c = u.common_prefix_len(v);
    u.0[c..]
        .iter()
        .rev()
        .chain(v.0[c..].iter())
        .copied()
        .collect()
}

pub fn path(u: &Vertex, v: &Vertex) -> PathSegment {
    let mut out = Vec::with_capacity(distance(u, v) + 1);
    let mut x = u.clone();
    out.push(x.clone());
    for c in path_colors(u, v) {
        x.push_step(c);
        out.push(x.clone());
    }
    PathSegment(out)
}

/// Whether `t` lies in the shadow of the directed edge `x → y`, i.e. the path
/// from `x` to `t` passes through `y`.
pub fn in_shadow(x: &Vertex, y: &Vertex, t: &Vertex) -> Result<bool> {
    if !x.is_adjacent(y) {
        return Err(Error::NotAdjacent(x.clone(), y.clone()));
    }
    Ok(distance(x, t) == 1 + distance(y, t))
}

/// Distance from `x` to the geodesic segment `[a, b]`.
#[inline]
pub fn distance_to_segment(x: &Vertex, a: &Vertex, b: &Vertex) -> usize {
    (distance(x, a) + distance(x, b) - distance(a, b)) / 2
}
