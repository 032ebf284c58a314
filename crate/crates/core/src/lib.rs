//! Mapping classes of locally finite graphs.
//!
//! The crate works with graphs presented as unfoldings of finite automata
//! and provides classification invariants, free-group machinery over
//! Stallings graphs, finitely supported representatives of proper maps with
//! a decision procedure for proper homotopy to the identity, and
//! constructions realizing finite groups of mapping classes by simplicial
//! actions.

pub mod end_space;
pub mod error;
pub mod graph_model;
pub mod mapclass;
pub mod nielsen;
pub mod stallings;
pub mod group;
mod union_find;
pub mod word;

pub use error::ParseError;
pub use group::FiniteGroup;
pub use graph_model::{Automaton, FiniteGraph, VertexPath};
pub use word::{FWord, Letter, Word};
