//! Realizing finite groups of mapping classes by simplicial actions.
//!
//! Three pipelines are provided. For core graphs, a control function
//! chops the graph into overlapping bands whose free factor systems are
//! averaged over the group and assembled into a tree of groups, which is
//! then realized piece by piece ([`realize_core_case`]). For trees, the end
//! space is partitioned by an invariant metric and the mapping telescope of
//! the partitions carries the action ([`realize_tree_case`]). In general,
//! telescopes are attached to an already simplicial core along Nielsen
//! rays ([`realize_general_case`]).

mod action;
mod core_case;
mod cover;
mod general;
mod graphs;
mod tree_case;
mod trees;

pub use action::{ActionSpec, ElementSource, FiniteGroupAction};
pub use core_case::{realize_core_case, CoreCaseReport};
pub use cover::{
    f_prime, f_star, f_star_groups, ffs_of_interval, interval_groups, verify_displacement_bound, CoreModel, Interval,
    IntervalCover,
};
pub use general::{
    good_filter, nielsen_ray, realize_general_case, GeneralCaseParams, GeneralCaseReport, GoodBlock, MixedReport, NielsenRay,
};
pub use graphs::{realize_finite_out, realize_relative, GraphMap, RealizedGraph, SearchBounds};
pub use tree_case::{fixed_point_in_finite_tree, realize_tree_case, FixedPoint, TreeCaseReport};
pub use trees::{build_tree_of_groups, fold_ia, fold_to_t, pull_iia, replay, Move, TreeEdge, TreeKind, TreeOfGroups, TreeVertex};

use thiserror::Error;

use crate::end_space::EndSpaceError;
use crate::error::ParseError;
use crate::graph_model::VertexPath;
use crate::group::GroupError;
use crate::mapclass::MapError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NielsenError {
    #[error("the graph has vertices that lead to no loops")]
    NotCoreGraph,
    #[error("invalid interval cover: {0}")]
    InvalidCover(String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("representative of element {0} moves some annulus too far")]
    DisplacementBound(usize),
    #[error("averaged free factor system is not invariant: {0}")]
    InvarianceFailed(String),
    #[error("averaged free factor system escapes its bounds: {0}")]
    SandwichFailed(String),
    #[error("tree of groups violates {0}")]
    StructureViolation(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("no fold script found: {0}")]
    NoScriptFound(String),
    #[error("no realization within the search bounds: {0}")]
    NotFoundWithinBound(String),
    #[error("final check failed: {0}")]
    FinalCheckFailed(String),
    #[error("lifted orbit reaches the boundary of the radius-{0} ball")]
    RadiusTooSmall(usize),
    #[error("no good partition level covers the end at {0}")]
    NoGoodLevel(VertexPath),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    EndSpace(#[from] EndSpaceError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
