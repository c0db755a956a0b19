//! Exact computation with automorphisms of the k-regular tree.
//!
//! Vertices are reduced words over `0..k`, automorphisms are lazily
//! evaluated composition words, and the finite machinery (rooted portraits,
//! permutation groups) supports generation checks on balls. On top sit the
//! geometric classifier, Schottky certificates, Nielsen reduction, the
//! trichotomy pipeline and the statistical experiments.

pub mod automorphism;
pub mod classify;
pub mod error;
pub mod experiments;
pub mod nielsen;
pub mod par;
pub mod rooted;
pub mod stats;
pub mod tree;

pub use automorphism::Aut;
pub use error::{Error, Result};
pub use rooted::{RootedAut, RootedShape};
pub use tree::{Edge, PathSegment, TreeParams, Vertex};
