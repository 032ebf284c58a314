//! Finitely supported representatives of proper self-maps of an unfolded
//! graph, and the invariants that decide their proper homotopy classes.
//!
//! The fundamental group of the unfolding, based at the root, is free on
//! the loops `x = γ_v ℓ γ̄_v`, one for every loop edge `ℓ` at a vertex `v`,
//! where `γ_v` is the tree geodesic from the root. A map is stored through
//! its action on vertices, the *mark* `m(v) = γ_{f(root)} f(γ_v) γ̄_{f(v)}`
//! of every vertex, and the images of the based loops, all up to a support
//! depth. Beyond the support the map either translates subtrees (with
//! marks inherited from the frontier) or follows a finite banded rule.

mod clopen;
mod extend;
mod identity;
mod rep;
mod rfunction;

pub use clopen::{distinct_cosets, uk_membership, Subgraph};
pub use extend::extend_over_trees;
pub use identity::{
    end_action_of, is_properly_homotopic_to_identity, outer_action_of, verify_proper_pair, IdentityVerdict,
    OuterAction, Witness,
};
pub use rep::{MapData, Outside, ProperMapRep};
pub use rfunction::{c_of, phi_t, r_cocycle_check, r_compose, realize_r_function, RFunction};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ParseError;
use crate::graph_model::VertexPath;
use crate::word::{Letter, Word};

/// The based loop running down to `at`, around its loop number `index`,
/// and back.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LoopGen {
    pub at: VertexPath,
    pub index: u32,
}

impl LoopGen {
    pub fn new(at: VertexPath, index: u32) -> Self {
        LoopGen { at, index }
    }

    pub fn word(&self) -> LoopWord {
        Word::gen(self.clone())
    }
}

pub type LoopWord = Word<LoopGen>;

impl fmt::Display for LoopGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.at, self.index)
    }
}

impl fmt::Display for Word<LoopGen> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .letters()
            .iter()
            .map(|l| if l.inverse { format!("~{}", l.gen) } else { l.gen.to_string() })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn parse_gen(token: &str) -> Result<LoopGen, String> {
    let (path, index) = token.rsplit_once(':').ok_or_else(|| format!("expected <path>:<index>, got {token:?}"))?;
    let at: VertexPath = path.parse().map_err(|e: ParseError| e.message)?;
    let index = index.parse().map_err(|_| format!("bad loop index in {token:?}"))?;
    Ok(LoopGen { at, index })
}

/// Space-separated tokens `<path>:<index>`, `~` for inverses, `1` for the
/// identity.
pub fn parse_loop_word(s: &str) -> Result<LoopWord, String> {
    let mut letters = Vec::new();
    for token in s.split_whitespace() {
        if token == "1" {
            continue;
        }
        let (inverse, body) = match token.strip_prefix('~') {
            Some(rest) => (true, rest),
            None => (false, token),
        };
        letters.push(Letter::new(parse_gen(body)?, inverse));
    }
    Ok(Word::from_letters(letters))
}

/// A loop at an ancestor of the current vertex: `offset` levels up
/// (`offset ≤ 0`), loop number `index`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleToken {
    pub offset: i32,
    pub index: u32,
}

pub type RuleWord = Word<RuleToken>;

impl fmt::Display for Word<RuleToken> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .letters()
            .iter()
            .map(|l| format!("{}@{}:{}", if l.inverse { "~" } else { "" }, l.gen.offset, l.gen.index))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Tokens `@<offset>:<index>`, optionally prefixed by `~`.
pub fn parse_rule_word(s: &str) -> Result<RuleWord, String> {
    let mut letters = Vec::new();
    for token in s.split_whitespace() {
        if token == "1" {
            continue;
        }
        let (inverse, body) = match token.strip_prefix('~') {
            Some(rest) => (true, rest),
            None => (false, token),
        };
        let body = body.strip_prefix('@').ok_or_else(|| format!("rule tokens start with @, got {token:?}"))?;
        let (off, idx) = body.split_once(':').ok_or_else(|| format!("expected @<offset>:<index>, got {token:?}"))?;
        let offset: i32 = off.parse().map_err(|_| format!("bad offset in {token:?}"))?;
        if offset > 0 {
            return Err(format!("rule offsets point to ancestors, got {offset}"));
        }
        let index = idx.parse().map_err(|_| format!("bad loop index in {token:?}"))?;
        letters.push(Letter::new(RuleToken { offset, index }, inverse));
    }
    Ok(Word::from_letters(letters))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("frontier data is inconsistent: {0}")]
    InconsistentFrontier(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("maps live on different graphs")]
    AmbientMismatch,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("invalid function on ends: {0}")]
    InvalidRFunction(String),
    #[error("value on the block at {0} is not supported near the genus ends it accumulates on")]
    R2Violation(VertexPath),
    #[error("value on the block at {0} cannot be realized with finite support")]
    NotFinitelySupported(VertexPath),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
