//! Free groups through Stallings graphs: folding, fiber products, free
//! factor systems and automorphisms.

mod automorphism;
mod graph;

pub use automorphism::Automorphism;
pub use graph::{LabeledGraph, Subgroup};

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ParseError;
use crate::word::{parse_basis_word, FWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StallingsError {
    #[error("the given images do not define an automorphism")]
    NotAnAutomorphism,
}

/// Conjugacy classes of finitely generated subgroups, each stored as a
/// folded core graph in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreeFactorSystem {
    pub components: Vec<LabeledGraph>,
}

fn normalize_component(g: &LabeledGraph) -> Option<LabeledGraph> {
    let mut g = g.fold();
    g.basepoint = None;
    let c = g.core();
    (c.vertex_count > 0 && c.rank() > 0).then(|| c.canonical())
}

impl FreeFactorSystem {
    pub fn empty() -> Self {
        FreeFactorSystem { components: Vec::new() }
    }

    /// Folds, takes cores, drops trivial classes and sorts.
    pub fn new(components: Vec<LabeledGraph>) -> Self {
        let mut out: Vec<LabeledGraph> = components
            .iter()
            .flat_map(|g| g.fold().components())
            .filter_map(|g| normalize_component(&g))
            .collect();
        out.sort_by_key(|g| g.canonical_code());
        FreeFactorSystem { components: out }
    }

    pub fn from_generators(lists: &[Vec<FWord>]) -> Self {
        Self::new(lists.iter().map(|ws| Subgroup::from_generators(ws).graph).collect())
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.rank()).collect()
    }

    /// A based representative of each class, based at canonical vertex 0.
    pub fn representatives(&self) -> Vec<Subgroup> {
        self.components
            .iter()
            .map(|c| {
                let mut g = c.clone();
                g.basepoint = Some(0);
                Subgroup { graph: g }
            })
            .collect()
    }

    /// Every component is a rose and no two share a letter, so the system
    /// is visibly carried by disjoint subgraphs of the standard rose.
    pub fn has_subgraph_certificate(&self) -> bool {
        let mut used = BTreeSet::new();
        self.components.iter().all(|c| c.vertex_count == 1 && c.edges.iter().all(|e| used.insert(e.1)))
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lists: Vec<Vec<FWord>> = vec![Vec::new()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            if line == "---" {
                lists.push(Vec::new());
                continue;
            }
            let w = parse_basis_word(line).map_err(|e| ParseError::at(lineno + 1, e))?;
            lists.last_mut().unwrap().push(w);
        }
        lists.retain(|l| !l.is_empty());
        Ok(Self::from_generators(&lists))
    }

    pub fn to_text(&self) -> String {
        let blocks: Vec<String> = self
            .representatives()
            .iter()
            .map(|s| s.basis().iter().map(|w| format!("{w}\n")).collect::<String>())
            .collect();
        blocks.join("---\n")
    }
}

/// Pairwise pullbacks of components, with contractible pieces discarded.
pub fn intersect_ffs(f1: &FreeFactorSystem, f2: &FreeFactorSystem) -> FreeFactorSystem {
    let pairs: Vec<(usize, usize)> =
        (0..f1.len()).flat_map(|i| (0..f2.len()).map(move |j| (i, j))).collect();
    let pieces: Vec<LabeledGraph> = pairs
        .par_iter()
        .flat_map_iter(|&(i, j)| LabeledGraph::pullback(&f1.components[i], &f2.components[j]).components())
        .collect();
    FreeFactorSystem::new(pieces)
}

/// Every component of `f` conjugates into some component of `g`.
pub fn contained_in(f: &FreeFactorSystem, g: &FreeFactorSystem) -> bool {
    f.components.iter().all(|c| g.components.iter().any(|d| c.immerses_into(d)))
}

/// Pushes every component forward along `phi`.
pub fn apply_automorphism(phi: &Automorphism, f: &FreeFactorSystem) -> Result<FreeFactorSystem, StallingsError> {
    phi.inverse().ok_or(StallingsError::NotAnAutomorphism)?;
    Ok(push_forward(phi, f))
}

/// `apply_automorphism` without the invertibility check.
pub(crate) fn push_forward(phi: &Automorphism, f: &FreeFactorSystem) -> FreeFactorSystem {
    let images: Vec<LabeledGraph> = f
        .representatives()
        .iter()
        .map(|s| {
            let gens: Vec<FWord> = s.basis().iter().map(|w| phi.apply(w)).collect();
            Subgroup::from_generators(&gens).graph
        })
        .collect();
    FreeFactorSystem::new(images)
}
