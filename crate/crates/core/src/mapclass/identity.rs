use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{LoopGen, LoopWord, MapError, Outside, ProperMapRep, RuleWord};
use crate::graph_model::{states_reaching_loops, states_with_ends, states_with_free_ends, VertexPath};
use crate::word::find_conjugator;

/// Evidence that a map is not properly homotopic to the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Witness {
    /// A cylinder of ends moved off itself.
    End { cylinder: VertexPath, image: VertexPath },
    /// A based loop whose conjugacy class moved.
    Loop { generator: LoopGen, image: LoopWord },
    /// A product of loops whose conjugacy class moved.
    Curve { word: LoopWord, image: LoopWord },
    /// No single conjugator matches all loops, although each class is fixed.
    NoCommonConjugator { generators: Vec<LoopGen> },
    /// The line through the root from the end cylinder `from` to `to`, with
    /// `core` inserted at the root, is sent to the line with core `image`.
    Line { from: VertexPath, core: LoopWord, to: VertexPath, image: LoopWord },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::End { cylinder, image } => write!(f, "end cylinder {cylinder} moves to {image}"),
            Witness::Loop { generator, image } => write!(f, "loop {generator} maps to {image}"),
            Witness::Curve { word, image } => write!(f, "curve {word} maps to {image}"),
            Witness::NoCommonConjugator { generators } => {
                let names: Vec<String> = generators.iter().map(|g| g.to_string()).collect();
                write!(f, "loops {} have no common conjugator", names.join(", "))
            }
            Witness::Line { from, core, to, image } => write!(f, "line {from} [{core}] {to} maps to core {image}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IdentityVerdict {
    /// Every loop and every line between free ends is preserved; for maps
    /// that are the identity below the support this is complete.
    CertifiedYes { depth: usize },
    No(Witness),
    /// All checks passed, but a banded map cannot be certified beyond them.
    Unknown { depth: usize },
}

impl IdentityVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, IdentityVerdict::CertifiedYes { .. })
    }
}

/// The loop action, as images of the support loops plus the rule below.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OuterAction {
    pub images: BTreeMap<LoopGen, LoopWord>,
    pub rule: Option<(usize, BTreeMap<u32, RuleWord>)>,
}

pub fn outer_action_of(f: &ProperMapRep) -> OuterAction {
    let images = f.generators().into_iter().map(|x| {
        let w = f.image_of_gen(&x);
        (x, w)
    });
    let rule = match f.outside() {
        Outside::Identity => None,
        Outside::Banded { band, rule } => Some((*band, rule.clone())),
    };
    OuterAction { images: images.collect(), rule }
}

/// The permutation of the end cylinders at the support depth.
pub fn end_action_of(f: &ProperMapRep) -> Result<BTreeMap<VertexPath, VertexPath>, MapError> {
    let cylinders = end_cylinders(f);
    let set: BTreeSet<&VertexPath> = cylinders.iter().collect();
    let mut out = BTreeMap::new();
    let mut hit = BTreeSet::new();
    for z in &cylinders {
        let img = f.vertex_image(z);
        if !set.contains(&img) || !hit.insert(img.clone()) {
            return Err(MapError::InconsistentFrontier(format!("end cylinders are not permuted: {z} -> {img}")));
        }
        out.insert(z.clone(), img);
    }
    Ok(out)
}

/// Frontier vertices with ends below them.
pub(crate) fn end_cylinders(f: &ProperMapRep) -> Vec<VertexPath> {
    let ends = states_with_ends(f.ambient());
    f.frontier().into_iter().filter(|p| ends[f.ambient().state_at(p).unwrap()]).collect()
}

/// Frontier vertices with ends below them that are not accumulated by genus.
pub(crate) fn free_cylinders(f: &ProperMapRep) -> Vec<VertexPath> {
    let free = states_with_free_ends(f.ambient());
    f.frontier().into_iter().filter(|p| free[f.ambient().state_at(p).unwrap()]).collect()
}

/// Up to two loops below each frontier vertex, nearest first. Below a
/// frontier vertex all loops transform alike, and two distinct loops pin a
/// conjugator, so these stand in for the infinitely many loops beyond the
/// support.
pub(crate) fn probes(f: &ProperMapRep) -> Vec<LoopGen> {
    let a = f.ambient();
    let reaches = states_reaching_loops(a);
    let limit = 2 * a.len() + 2;
    let mut out = Vec::new();
    for z in f.frontier() {
        let mut found = 0;
        let mut queue = VecDeque::new();
        let s = a.state_at(&z).unwrap();
        for (i, &c) in a.children(s).iter().enumerate() {
            if reaches[c] {
                queue.push_back((z.child(i as u32), c));
            }
        }
        while let Some((p, s)) = queue.pop_front() {
            if found >= 2 || p.depth() > z.depth() + limit {
                break;
            }
            for k in 0..a.loops(s) {
                if found < 2 {
                    out.push(LoopGen::new(p.clone(), k));
                    found += 1;
                }
            }
            for (i, &c) in a.children(s).iter().enumerate() {
                if reaches[c] {
                    queue.push_back((p.child(i as u32), c));
                }
            }
        }
    }
    out
}

/// Support loops and probes with their images.
pub(crate) fn loop_pairs(f: &ProperMapRep) -> Vec<(LoopGen, LoopWord)> {
    f.generators()
        .into_iter()
        .chain(probes(f))
        .map(|x| {
            let w = f.image_of_gen(&x);
            (x, w)
        })
        .collect()
}

/// Searches products of two loops for a moved conjugacy class.
fn curve_witness(pairs: &[(LoopGen, LoopWord)]) -> Witness {
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            for inv in [false, true] {
                let (xi, xj) = (pairs[i].0.word(), pairs[j].0.word());
                let (yi, yj) = (&pairs[i].1, &pairs[j].1);
                let (w, img) = if inv {
                    (xi.mul(&xj.inverse()), yi.mul(&yj.inverse()))
                } else {
                    (xi.mul(&xj), yi.mul(yj))
                };
                if !img.is_conjugate(&w) {
                    return Witness::Curve { word: w, image: img };
                }
            }
        }
    }
    Witness::NoCommonConjugator { generators: pairs.iter().map(|p| p.0.clone()).collect() }
}

/// Decides whether `f` is properly homotopic to the identity by checking
/// that it fixes the ends, preserves the class of every loop, and (when
/// there are ends outside the genus closure) preserves every line between
/// them.
pub fn is_properly_homotopic_to_identity(f: &ProperMapRep) -> IdentityVerdict {
    for z in end_cylinders(f) {
        let img = f.vertex_image(&z);
        if img != z {
            return IdentityVerdict::No(Witness::End { cylinder: z, image: img });
        }
    }
    let pairs = loop_pairs(f);
    for (x, img) in &pairs {
        if !img.is_conjugate(&x.word()) {
            return IdentityVerdict::No(Witness::Loop { generator: x.clone(), image: img.clone() });
        }
    }
    let free = free_cylinders(f);
    if let Some(v0) = free.first() {
        // lines from the base end back to itself pin the conjugator
        let c = f.mark(v0);
        let ci = c.inverse();
        for (x, img) in &pairs {
            if *img != x.word().conjugate_by(&c) {
                let image = ci.mul(img).mul(&c);
                return IdentityVerdict::No(Witness::Line {
                    from: v0.clone(),
                    core: x.word(),
                    to: v0.clone(),
                    image,
                });
            }
        }
        for z in &free {
            let m = f.mark(z);
            if m != c {
                return IdentityVerdict::No(Witness::Line {
                    from: v0.clone(),
                    core: LoopWord::identity(),
                    to: z.clone(),
                    image: ci.mul(&m),
                });
            }
        }
    } else {
        let words: Vec<(LoopWord, LoopWord)> = pairs.iter().map(|(x, w)| (x.word(), w.clone())).collect();
        if find_conjugator(&words).is_none() {
            return IdentityVerdict::No(curve_witness(&pairs));
        }
    }
    match f.outside() {
        Outside::Identity => IdentityVerdict::CertifiedYes { depth: f.support() },
        Outside::Banded { .. } => IdentityVerdict::Unknown { depth: f.support() },
    }
}

/// Both composites are certified to be properly homotopic to the identity.
pub fn verify_proper_pair(f: &ProperMapRep, g: &ProperMapRep) -> bool {
    let certified = |a: &ProperMapRep, b: &ProperMapRep| {
        a.compose(b).map(|c| is_properly_homotopic_to_identity(&c).is_yes()).unwrap_or(false)
    };
    certified(g, f) && certified(f, g)
}
