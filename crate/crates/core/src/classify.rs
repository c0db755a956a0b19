//! Geometric classification: elliptic, inversion or hyperbolic.
//!
//! Classification descends the displacement function `x ↦ d(x, gx)` from
//! `t0`. The function is convex on the tree, so a local minimum is global.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automorphism::Aut;
use crate::error::{Error, Result};
use crate::tree::{distance, distance_to_segment, path, Edge, PathSegment, Vertex};

pub fn displacement(g: &Aut, x: &Vertex) -> usize {
    distance(x, &g.apply(x))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Elliptic { witness: Vertex },
    Inversion { edge: Edge },
    Hyperbolic { l: usize, anchor: Vertex },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Elliptic,
    Inversion,
    Hyperbolic,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Elliptic => "elliptic",
            Kind::Inversion => "inversion",
            Kind::Hyperbolic => "hyperbolic",
        })
    }
}

impl Classification {
    pub fn kind(&self) -> Kind {
        match self {
            Classification::Elliptic { .. } => Kind::Elliptic,
            Classification::Inversion { .. } => Kind::Inversion,
            Classification::Hyperbolic { .. } => Kind::Hyperbolic,
        }
    }

    /// Elliptic or inversion: fixes a vertex or a geometric edge.
    pub fn is_elliptic_like(&self) -> bool {
        !self.is_hyperbolic()
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, Classification::Hyperbolic { .. })
    }

    /// Minimal displacement over all vertices.
    pub fn min_displacement(&self) -> usize {
        match self {
            Classification::Elliptic { .. } => 0,
            Classification::Inversion { .. } => 1,
            Classification::Hyperbolic { l, .. } => *l,
        }
    }

    /// Translation length; zero unless hyperbolic.
    pub fn translation_length(&self) -> usize {
        match self {
            Classification::Hyperbolic { l, .. } => *l,
            _ => 0,
        }
    }
}

/// Classifies `g`, failing if descent needs more than `max_steps` moves.
pub fn classify(g: &Aut, max_steps: usize) -> Result<Classification> {
    let mut x = Vertex::root();
    let mut d = displacement(g, &x);
    let budget_needed = d;
    let mut steps = 0;
    loop {
        let mut best: Option<(usize, Vertex)> = None;
        for y in g.params().neighbors(&x) {
            let dy = displacement(g, &y);
            let better = match &best {
                None => dy < d,
                Some((bd, bv)) => dy < *bd || (dy == *bd && y < *bv),
            };
            if better {
                best = Some((dy, y));
            }
        }
        let Some((dy, y)) = best else { break };
        steps += 1;
        if steps > max_steps {
            return Err(Error::BudgetExceeded(max_steps));
        }
        x = y;
        d = dy;
    }
    debug_assert!(steps <= budget_needed);
    if d == 0 {
        return Ok(Classification::Elliptic { witness: x });
    }
    let gx = g.apply(&x);
    if distance(&x, &g.apply(&gx)) == 2 * d {
        return Ok(Classification::Hyperbolic { l: d, anchor: x });
    }
    let p = path(&x, &gx);
    let mid = (d - 1) / 2;
    let edge = Edge::new(p[mid].clone(), p[mid + 1].clone())?;
    Ok(Classification::Inversion { edge })
}

/// [`classify`] with the budget set to the initial displacement, which
/// always suffices.
pub fn classify_exact(g: &Aut) -> Classification {
    let d0 = displacement(g, &Vertex::root());
    classify(g, d0).expect("descent needs at most the initial displacement")
}

/// A finite piece of the axis of a hyperbolic automorphism.
#[derive(Clone, Debug)]
pub struct AxisWindow {
    owner: Aut,
    l: usize,
    half_width: usize,
    vertices: Vec<Vertex>,
}

impl AxisWindow {
    /// The geodesic from `g^{-N}(anchor)` to `g^N(anchor)`.
    pub fn new(g: &Aut, n: usize) -> Result<Self> {
        let Classification::Hyperbolic { l, anchor } = classify_exact(g) else {
            return Err(Error::NotHyperbolic);
        };
        Ok(AxisWindow::from_anchor(g, l, &anchor, n))
    }

    fn from_anchor(g: &Aut, l: usize, anchor: &Vertex, n: usize) -> Self {
        let n = n.max(1);
        let total = 2 * n * l + 1;
        let mid = n * l;
        let mut vertices = vec![Vertex::root(); total];
        for (j, v) in path(anchor, &g.apply(anchor)).iter().enumerate() {
            vertices[mid + j] = v.clone();
        }
        for idx in mid + l + 1..total {
            vertices[idx] = g.apply(&vertices[idx - l]);
        }
        let ginv = g.inverse();
        for idx in (0..mid).rev() {
            vertices[idx] = ginv.apply(&vertices[idx + l]);
        }
        AxisWindow {
            owner: g.clone(),
            l,
            half_width: n,
            vertices,
        }
    }

    /// The same axis with half-width `n`.
    pub fn resized(&self, n: usize) -> Self {
        AxisWindow::from_anchor(&self.owner, self.l, self.anchor(), n)
    }

    pub fn owner(&self) -> &Aut {
        &self.owner
    }

    pub fn translation_length(&self) -> usize {
        self.l
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn anchor(&self) -> &Vertex {
        &self.vertices[self.anchor_index()]
    }

    pub fn anchor_index(&self) -> usize {
        self.half_width * self.l
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn segment(&self) -> PathSegment {
        PathSegment::from_vertices(self.vertices.clone()).expect("axis windows are geodesics")
    }

    /// Signed position along the axis relative to the anchor.
    pub fn position(&self, index: usize) -> isize {
        index as isize - self.anchor_index() as isize
    }

    fn ends(&self) -> (&Vertex, &Vertex) {
        (&self.vertices[0], &self.vertices[self.vertices.len() - 1])
    }
}

pub fn axis_window(g: &Aut, n: usize) -> Result<AxisWindow> {
    AxisWindow::new(g, n)
}

/// Vertices of `B(t, r)` fixed by `g`.
pub fn fixed_set_in_ball(g: &Aut, t: &Vertex, r: usize) -> BTreeSet<Vertex> {
    g.params()
        .ball(t, r)
        .into_iter()
        .filter(|x| &g.apply(x) == x)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectionResult {
    pub segment: PathSegment,
    pub stable: bool,
    /// Positions of the segment ends along the target axis, relative to its
    /// anchor.
    pub range: (isize, isize),
    /// Distance between the two axes as seen in the final windows.
    pub distance: usize,
}

/// Half-width policy for axis windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPolicy {
    pub initial: usize,
    pub cap: usize,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy { initial: 2, cap: 64 }
    }
}

impl WindowPolicy {
    pub fn doubled(self) -> Self {
        WindowPolicy {
            initial: self.initial,
            cap: self.cap * 2,
        }
    }
}

/// Indices of `a` minimising the distance to the segment `b`, as a range,
/// with the minimal distance.
fn nearest_range(a: &AxisWindow, b: &AxisWindow) -> (usize, usize, usize) {
    let (p, q) = b.ends();
    let mut best = usize::MAX;
    let (mut lo, mut hi) = (0, 0);
    for (i, x) in a.vertices.iter().enumerate() {
        let d = distance_to_segment(x, p, q);
        if d < best {
            best = d;
            lo = i;
            hi = i;
        } else if d == best {
            hi = i;
        }
    }
    (lo, hi, best)
}

fn interior(w: &AxisWindow, lo: usize, hi: usize) -> bool {
    lo >= w.l && hi + w.l < w.vertices.len()
}

/// `Proj_{X(g)} X(h)` on finite windows.
///
/// Windows double from `policy.initial` until both nearest-point sets avoid
/// the outer period of their windows (`stable`), or the cap is reached.
pub fn project_axes(g: &Aut, h: &Aut, policy: WindowPolicy) -> Result<ProjectionResult> {
    let mut wg = AxisWindow::new(g, policy.initial)?;
    let mut wh = AxisWindow::new(h, policy.initial)?;
    loop {
        let (lo, hi, dist) = nearest_range(&wg, &wh);
        let (hlo, hhi, _) = nearest_range(&wh, &wg);
        let stable = interior(&wg, lo, hi) && interior(&wh, hlo, hhi);
        let at_cap = wg.half_width >= policy.cap && wh.half_width >= policy.cap;
        if stable || at_cap {
            let segment = PathSegment::from_vertices(wg.vertices[lo..=hi].to_vec())
                .expect("sub-path of a geodesic");
            return Ok(ProjectionResult {
                segment,
                stable,
                range: (wg.position(lo), wg.position(hi)),
                distance: dist,
            });
        }
        wg = wg.resized((wg.half_width * 2).min(policy.cap.max(1)));
        wh = wh.resized((wh.half_width * 2).min(policy.cap.max(1)));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchottkyOutcome {
    Satisfied,
    Violated,
    Inconclusive,
}

impl fmt::Display for SchottkyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchottkyOutcome::Satisfied => "SATISFIED",
            SchottkyOutcome::Violated => "VIOLATED",
            SchottkyOutcome::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// The Schottky condition: for each `i`, the projections of the other axes
/// onto the axis of `h_i` fit in a geodesic of length at most `l(h_i) − 1`.
pub fn schottky_check(tuple: &[Aut], policy: WindowPolicy) -> SchottkyOutcome {
    let mut lengths = Vec::with_capacity(tuple.len());
    for g in tuple {
        match classify_exact(g) {
            Classification::Hyperbolic { l, .. } => lengths.push(l),
            _ => return SchottkyOutcome::Violated,
        }
    }
    let mut inconclusive = false;
    for (i, gi) in tuple.iter().enumerate() {
        let li = lengths[i] as isize;
        let mut span: Option<(isize, isize)> = None;
        for (j, gj) in tuple.iter().enumerate() {
            if i == j {
                continue;
            }
            let proj = project_axes(gi, gj, policy).expect("entries are hyperbolic");
            let (a, b) = proj.range;
            if !proj.stable {
                // Overlap seen inside the windows is part of the true
                // intersection; anything else is unreliable.
                if proj.distance == 0 && b - a >= li {
                    return SchottkyOutcome::Violated;
                }
                inconclusive = true;
                continue;
            }
            span = Some(match span {
                None => (a, b),
                Some((x, y)) => (x.min(a), y.max(b)),
            });
        }
        if let Some((a, b)) = span {
            if b - a > li - 1 {
                return SchottkyOutcome::Violated;
            }
        }
    }
    if inconclusive {
        SchottkyOutcome::Inconclusive
    } else {
        SchottkyOutcome::Satisfied
    }
}
