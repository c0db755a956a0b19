//! The compact / discrete-free / dense classifier for generating tuples.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::probe::{density_probe, verify_density_certificate, DensityCertificate, DensityOutcome, DensityParams, Target};
use super::{precompact_check, reduce, FixedWitness, GenTuple, NielsenMove, PrecompactOutcome, ReduceOutcome, Sign, SignedWord, Tracked};
use crate::classify::{classify_exact, schottky_check, Classification, SchottkyOutcome, WindowPolicy};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrichotomyConfig {
    /// Maximal number of Nielsen moves in the reduction.
    pub reduce_budget: usize,
    pub window: WindowPolicy,
    pub density: DensityParams,
}

impl Default for TrichotomyConfig {
    fn default() -> Self {
        TrichotomyConfig {
            reduce_budget: 500,
            window: WindowPolicy::default(),
            density: DensityParams::default(),
        }
    }
}

impl TrichotomyConfig {
    /// Every budget doubled; the ball depth is unchanged.
    pub fn doubled(self) -> Self {
        TrichotomyConfig {
            reduce_budget: self.reduce_budget * 2,
            window: self.window.doubled(),
            density: DensityParams {
                depth: self.density.depth,
                word_budget: self.density.word_budget * 2,
                node_cap: self.density.node_cap * 2,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Compact {
        witness: FixedWitness,
    },
    DiscreteFree {
        /// Moves taking the input to a Schottky tuple.
        moves: Vec<NielsenMove>,
        /// That tuple, as words in the input entries.
        words: Vec<SignedWord>,
    },
    DenseToDepth {
        n: usize,
        target: Target,
        /// Words are in the input entries.
        certificate: DensityCertificate,
    },
    Undecided {
        reason: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    Compact,
    DiscreteFree,
    DenseToDepth,
    Undecided,
}

impl VerdictKind {
    pub const ALL: [VerdictKind; 4] = [
        VerdictKind::Compact,
        VerdictKind::DiscreteFree,
        VerdictKind::DenseToDepth,
        VerdictKind::Undecided,
    ];

    pub fn is_decisive(self) -> bool {
        self != VerdictKind::Undecided
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Compact => "COMPACT",
            VerdictKind::DiscreteFree => "DISCRETE_FREE",
            VerdictKind::DenseToDepth => "DENSE_TO_DEPTH",
            VerdictKind::Undecided => "UNDECIDED",
        })
    }
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Compact { .. } => VerdictKind::Compact,
            Verdict::DiscreteFree { .. } => VerdictKind::DiscreteFree,
            Verdict::DenseToDepth { .. } => VerdictKind::DenseToDepth,
            Verdict::Undecided { .. } => VerdictKind::Undecided,
        }
    }

    pub fn is_decisive(&self) -> bool {
        self.kind().is_decisive()
    }
}

fn undecided(reason: impl Into<String>) -> Verdict {
    Verdict::Undecided { reason: reason.into() }
}

/// Classifies the group generated by `t`.
///
/// 1. Precompact (all entries and pairwise products elliptic-like): COMPACT.
/// 2. All entries hyperbolic: greedy Nielsen reduction; a Schottky tuple
///    gives DISCRETE_FREE.
/// 3. Otherwise a hyperbolic entry is ensured (a product move if needed)
///    and density is probed at its anchor.
pub fn trichotomy(t: &GenTuple, config: &TrichotomyConfig) -> Result<Verdict> {
    if let PrecompactOutcome::Yes { witness } = precompact_check(t) {
        return Ok(Verdict::Compact { witness });
    }
    let mut tracked = Tracked::new(t.clone());
    if t.classifications().iter().all(Classification::is_hyperbolic) {
        tracked = match reduce(tracked, config.reduce_budget, config.window) {
            ReduceOutcome::Schottky { tracked } => {
                return Ok(Verdict::DiscreteFree {
                    moves: tracked.moves,
                    words: tracked.words,
                })
            }
            ReduceOutcome::Ellipticized { tracked, .. } | ReduceOutcome::Exhausted { tracked } => tracked,
        };
    }
    let classes = tracked.tuple.classifications();
    if !classes.iter().any(Classification::is_hyperbolic) {
        let n = tracked.tuple.len();
        let pair = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| {
                classify_exact(&tracked.tuple.entry(i).compose(tracked.tuple.entry(j))).is_hyperbolic()
            });
        let Some((i, j)) = pair else {
            return Ok(undecided("no hyperbolic entry or pairwise product after reduction"));
        };
        tracked = tracked.apply(NielsenMove::R(i, j, Sign::Plus))?;
    }
    let anchor = tracked
        .tuple
        .classifications()
        .into_iter()
        .find_map(|c| match c {
            Classification::Hyperbolic { anchor, .. } => Some(anchor),
            _ => None,
        })
        .expect("a hyperbolic entry was ensured");
    match density_probe(&tracked.tuple, &anchor, config.density)? {
        DensityOutcome::Certified(mut cert) => {
            cert.hyperbolic = cert.hyperbolic.substitute(&tracked.words);
            cert.generators = cert
                .generators
                .iter()
                .map(|w| w.substitute(&tracked.words))
                .collect();
            Ok(Verdict::DenseToDepth {
                n: cert.depth,
                target: cert.target,
                certificate: cert,
            })
        }
        DensityOutcome::NotCertified { reason, order, full_order, .. } => Ok(undecided(format!(
            "density probe at {anchor:?}: {reason} (ball group order {order} of {full_order})"
        ))),
    }
}

/// Re-checks the certificate carried by a verdict.
pub fn verify_verdict(t: &GenTuple, verdict: &Verdict) -> Result<bool> {
    match verdict {
        Verdict::Compact { witness } => Ok(t.entries().iter().all(|g| witness.is_fixed_by(g))),
        Verdict::DiscreteFree { moves, words } => {
            let mut tracked = Tracked::new(t.clone());
            for &m in moves {
                tracked = tracked.apply(m)?;
            }
            if &tracked.words != words {
                return Ok(false);
            }
            let entries = words.iter().map(|w| t.eval(w)).collect::<Result<Vec<_>>>()?;
            Ok(schottky_check(&entries, WindowPolicy::default()) == SchottkyOutcome::Satisfied)
        }
        Verdict::DenseToDepth { n, target, certificate } => Ok(*n == certificate.depth
            && *target == certificate.target
            && verify_density_certificate(t, certificate)?),
        Verdict::Undecided { .. } => Ok(true),
    }
}
