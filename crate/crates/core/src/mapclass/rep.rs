use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use super::{parse_loop_word, parse_rule_word, LoopGen, LoopWord, MapError, RuleToken, RuleWord};
use crate::error::ParseError;
use crate::graph_model::{states_with_ends, unfold, Automaton, Truncation, VertexPath};
use crate::stallings::Automorphism;
use crate::word::{FWord, Letter, Word};

/// How a representative continues below its support depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outside {
    /// Subtrees below frontier vertices are carried isomorphically onto the
    /// subtrees below their images.
    Identity,
    /// As `Identity` on vertices, but loop number `k` at a vertex `w` below
    /// the support is sent to `rule[k]`, read at the ancestors of the image
    /// of `w`. Tokens reach at most `band` levels up.
    Banded { band: usize, rule: BTreeMap<u32, RuleWord> },
}

/// Partial description of a map; anything left out defaults to the identity
/// on vertices, trivial marks, and loops carried to the matching loop at
/// the image vertex.
#[derive(Clone, Debug, Default)]
pub struct MapData {
    pub vmap: BTreeMap<VertexPath, VertexPath>,
    pub marks: BTreeMap<VertexPath, LoopWord>,
    pub loops: BTreeMap<LoopGen, LoopWord>,
    pub endmap: Option<BTreeMap<VertexPath, VertexPath>>,
    pub outside: Option<Outside>,
}

/// A proper self-map of the unfolding of `ambient`, known exactly down to
/// `support` and continued below it according to `outside`.
#[derive(Clone, Debug)]
pub struct ProperMapRep {
    ambient: Automaton,
    support: usize,
    truncation: Truncation,
    vmap: BTreeMap<VertexPath, VertexPath>,
    marks: BTreeMap<VertexPath, LoopWord>,
    loop_images: BTreeMap<LoopGen, LoopWord>,
    outside: Outside,
}

impl PartialEq for ProperMapRep {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient
            && self.support == other.support
            && self.vmap == other.vmap
            && self.marks == other.marks
            && self.loop_images == other.loop_images
            && self.outside == other.outside
    }
}

/// Resolves `token` at the image `w` of a vertex below the support.
fn resolve_token(w: &VertexPath, t: &RuleToken) -> Option<LoopGen> {
    let depth = w.depth() as i64 + t.offset as i64;
    (depth >= 0).then(|| LoopGen::new(w.prefix(depth as usize), t.index))
}

fn rule_word(rule: &BTreeMap<u32, RuleWord>, k: u32) -> RuleWord {
    rule.get(&k).cloned().unwrap_or_else(|| Word::gen(RuleToken { offset: 0, index: k }))
}

impl ProperMapRep {
    pub fn identity(ambient: &Automaton, support: usize) -> Self {
        Self::new(ambient, support, MapData::default()).expect("identity data is consistent")
    }

    pub fn new(ambient: &Automaton, support: usize, data: MapData) -> Result<Self, MapError> {
        let truncation = unfold(ambient, support);
        let in_t = |p: &VertexPath| truncation.index_of(p).is_some();
        let mut vmap = BTreeMap::new();
        for tv in &truncation.vertices {
            vmap.insert(tv.path.clone(), tv.path.clone());
        }
        for (a, b) in &data.vmap {
            if !in_t(a) || !in_t(b) {
                return Err(MapError::InvalidMap(format!("vertex map {a} -> {b} leaves the support")));
            }
            vmap.insert(a.clone(), b.clone());
        }
        for &z in &truncation.frontier {
            let zp = &truncation.vertices[z].path;
            let img = &vmap[zp];
            let j = truncation.index_of(img).unwrap();
            if !truncation.frontier.contains(&j) || truncation.vertices[j].state != truncation.vertices[z].state {
                return Err(MapError::InconsistentFrontier(format!(
                    "frontier vertex {zp} maps to {img}, which does not continue the same way"
                )));
            }
        }
        let gen_ok = |x: &LoopGen| {
            x.at.depth() <= support && ambient.state_at(&x.at).is_some_and(|s| ambient.loops(s) > x.index)
        };
        let word_ok = |w: &LoopWord| w.generators().all(gen_ok);
        let mut marks = BTreeMap::new();
        for tv in &truncation.vertices {
            marks.insert(tv.path.clone(), LoopWord::identity());
        }
        for (p, w) in &data.marks {
            if !in_t(p) || !word_ok(w) {
                return Err(MapError::InvalidMap(format!("mark at {p} uses loops outside the support")));
            }
            marks.insert(p.clone(), w.clone());
        }
        if !marks[&VertexPath::root()].is_identity() {
            return Err(MapError::InvalidMap("the root carries the trivial mark by definition".into()));
        }
        let mut loop_images = BTreeMap::new();
        for &(v, k) in &truncation.loop_edges {
            let x = LoopGen::new(truncation.vertices[v].path.clone(), k);
            let img = match data.loops.get(&x) {
                Some(w) => w.clone(),
                None => {
                    let target = LoopGen::new(vmap[&x.at].clone(), k);
                    if !gen_ok(&target) {
                        return Err(MapError::InvalidMap(format!("no image given for loop {x}")));
                    }
                    target.word().conjugate_by(&marks[&x.at])
                }
            };
            if !word_ok(&img) {
                return Err(MapError::InvalidMap(format!("image of {x} uses loops outside the support")));
            }
            loop_images.insert(x, img);
        }
        if let Some(x) = data.loops.keys().find(|x| !loop_images.contains_key(*x)) {
            return Err(MapError::InvalidMap(format!("{x} is not a loop of the support")));
        }
        let outside = data.outside.unwrap_or(Outside::Identity);
        let rep = ProperMapRep { ambient: ambient.clone(), support, truncation, vmap, marks, loop_images, outside };
        if let Some(endmap) = &data.endmap {
            let ends = states_with_ends(ambient);
            for (a, b) in endmap {
                let is_cylinder = a.depth() == support && ambient.state_at(a).is_some_and(|s| ends[s]);
                if !is_cylinder {
                    return Err(MapError::InconsistentFrontier(format!("{a} is not a cylinder at the support depth")));
                }
                if rep.vmap[a] != *b {
                    return Err(MapError::InconsistentFrontier(format!(
                        "end map sends {a} to {b} but the vertex map sends it to {}",
                        rep.vmap[a]
                    )));
                }
            }
        }
        rep.check_rule()?;
        Ok(rep)
    }

    /// Checks band widths and that rule tokens name existing loops a few
    /// levels below the support.
    fn check_rule(&self) -> Result<(), MapError> {
        let Outside::Banded { band, rule } = &self.outside else {
            return Ok(());
        };
        for (k, w) in rule {
            if let Some(t) = w.generators().find(|t| (-t.offset) as usize > *band) {
                return Err(MapError::InvalidMap(format!("rule for loop {k} reaches {} levels up", -t.offset)));
            }
        }
        let mut level: Vec<VertexPath> = Vec::new();
        for z in self.frontier() {
            let s = self.ambient.state_at(&z).unwrap();
            level.extend((0..self.ambient.children(s).len() as u32).map(|i| z.child(i)));
        }
        for _ in 0..=*band {
            let mut next = Vec::new();
            for p in &level {
                let s = self.ambient.state_at(p).unwrap();
                for k in 0..self.ambient.loops(s) {
                    let img = self.vertex_image(p);
                    for t in rule_word(rule, k).generators() {
                        let ok = resolve_token(&img, t).is_some_and(|x| self.gen_exists(&x));
                        if !ok {
                            return Err(MapError::InvalidMap(format!("rule for loop {k} has no target at {p}")));
                        }
                    }
                }
                next.extend((0..self.ambient.children(s).len() as u32).map(|i| p.child(i)));
                if next.len() > 64 {
                    break;
                }
            }
            level = next;
        }
        Ok(())
    }

    pub fn ambient(&self) -> &Automaton {
        &self.ambient
    }

    pub fn support(&self) -> usize {
        self.support
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn outside(&self) -> &Outside {
        &self.outside
    }

    pub fn is_identity_outside(&self) -> bool {
        self.outside == Outside::Identity
    }

    pub fn band(&self) -> usize {
        match &self.outside {
            Outside::Identity => 0,
            Outside::Banded { band, .. } => *band,
        }
    }

    pub fn gen_exists(&self, x: &LoopGen) -> bool {
        self.ambient.state_at(&x.at).is_some_and(|s| self.ambient.loops(s) > x.index)
    }

    /// Based loops of the support, in vertex order.
    pub fn generators(&self) -> Vec<LoopGen> {
        self.loop_images.keys().cloned().collect()
    }

    pub fn frontier(&self) -> Vec<VertexPath> {
        self.truncation.frontier.iter().map(|&z| self.truncation.vertices[z].path.clone()).collect()
    }

    /// Image of any vertex of the unfolding.
    pub fn vertex_image(&self, p: &VertexPath) -> VertexPath {
        if p.depth() <= self.support {
            return self.vmap[p].clone();
        }
        let head = p.prefix(self.support);
        let mut out = self.vmap[&head].clone();
        out.0.extend_from_slice(&p.0[self.support..]);
        out
    }

    /// Mark of any vertex of the unfolding.
    pub fn mark(&self, p: &VertexPath) -> LoopWord {
        let head = if p.depth() <= self.support { p.clone() } else { p.prefix(self.support) };
        self.marks[&head].clone()
    }

    /// Image of any based loop of the unfolding.
    pub fn image_of_gen(&self, x: &LoopGen) -> LoopWord {
        if x.at.depth() <= self.support {
            return self.loop_images[x].clone();
        }
        let img = self.vertex_image(&x.at);
        let core = match &self.outside {
            Outside::Identity => LoopGen::new(img, x.index).word(),
            Outside::Banded { rule, .. } => rule_word(rule, x.index)
                .substitute(|t| resolve_token(&img, t).expect("rule tokens stay below the root").word()),
        };
        core.conjugate_by(&self.mark(&x.at))
    }

    /// The induced map on the fundamental group based at the root.
    pub fn push(&self, w: &LoopWord) -> LoopWord {
        w.substitute(|x| self.image_of_gen(x))
    }

    /// The same map described down to a deeper level.
    pub fn extend_support(&self, depth: usize) -> ProperMapRep {
        if depth <= self.support {
            return self.clone();
        }
        let t = unfold(&self.ambient, depth);
        let mut data = MapData { outside: Some(self.outside.clone()), ..MapData::default() };
        for tv in &t.vertices {
            data.vmap.insert(tv.path.clone(), self.vertex_image(&tv.path));
            data.marks.insert(tv.path.clone(), self.mark(&tv.path));
        }
        for &(v, k) in &t.loop_edges {
            let x = LoopGen::new(t.vertices[v].path.clone(), k);
            let img = self.image_of_gen(&x);
            data.loops.insert(x, img);
        }
        ProperMapRep::new(&self.ambient, depth, data).expect("extension of a valid map is valid")
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &ProperMapRep) -> Result<ProperMapRep, MapError> {
        if self.ambient != other.ambient {
            return Err(MapError::AmbientMismatch);
        }
        let (g, f) = (self, other);
        let depth = g.support.max(f.support) + f.band();
        let t = unfold(&f.ambient, depth);
        let fr = f.vertex_image(&VertexPath::root());
        let base = g.mark(&fr);
        let base_inv = base.inverse();
        let mut data = MapData::default();
        for tv in &t.vertices {
            let fv = f.vertex_image(&tv.path);
            data.vmap.insert(tv.path.clone(), g.vertex_image(&fv));
            let m = base_inv.mul(&g.push(&f.mark(&tv.path))).mul(&g.mark(&fv));
            data.marks.insert(tv.path.clone(), m);
        }
        for &(v, k) in &t.loop_edges {
            let x = LoopGen::new(t.vertices[v].path.clone(), k);
            let img = g.push(&f.image_of_gen(&x)).conjugate_by(&base_inv);
            data.loops.insert(x, img);
        }
        data.outside = Some(compose_outside(&g.outside, &f.outside));
        ProperMapRep::new(&f.ambient, depth, data)
    }

    /// A candidate homotopy inverse: the inverse of the induced automorphism
    /// of the support group, the inverse permutation on the frontier, and
    /// marks undoing the frontier marks. `None` when the support data is not
    /// invertible or the map is banded.
    pub fn inverse_candidate(&self) -> Option<ProperMapRep> {
        if !self.is_identity_outside() {
            return None;
        }
        let (gens, phi) = self.support_automorphism()?;
        let psi = phi.inverse()?;
        let index: BTreeMap<&LoopGen, u32> = gens.iter().enumerate().map(|(i, x)| (x, i as u32)).collect();
        let to_f = |w: &LoopWord| w.substitute(|x| FWord::gen(index[x]));
        let from_f = |w: &FWord| w.substitute(|&i| gens[i as usize].word());
        let g_push = |w: &LoopWord| from_f(&psi.apply(&to_f(w)));
        let mut data = MapData::default();
        let frontier = self.frontier();
        let mut seen = BTreeSet::new();
        for z in &frontier {
            let img = self.vertex_image(z);
            if !seen.insert(img.clone()) {
                return None;
            }
            data.vmap.insert(img.clone(), z.clone());
            data.marks.insert(img, g_push(&self.mark(z)).inverse());
        }
        for (i, x) in gens.iter().enumerate() {
            data.loops.insert(x.clone(), from_f(&psi.images[i]));
        }
        ProperMapRep::new(&self.ambient, self.support, data).ok()
    }

    /// The induced endomorphism of the free group on the support loops,
    /// with letters numbered in the order of `generators()`.
    pub fn support_automorphism(&self) -> Option<(Vec<LoopGen>, Automorphism)> {
        let gens = self.generators();
        let index: BTreeMap<&LoopGen, u32> = gens.iter().enumerate().map(|(i, x)| (x, i as u32)).collect();
        let mut images = Vec::with_capacity(gens.len());
        for x in &gens {
            let w = &self.loop_images[x];
            let letters: Option<Vec<Letter<u32>>> =
                w.letters().iter().map(|l| index.get(&l.gen).map(|&i| Letter::new(i, l.inverse))).collect();
            images.push(Word::from_letters(letters?));
        }
        Some((gens, Automorphism::new(images)))
    }

    /// Parses a map file whose ambient graph is given separately.
    pub fn parse_with_ambient(ambient: &Automaton, text: &str) -> Result<Self, MapError> {
        let mut support = None;
        let mut data = MapData::default();
        let mut band_rule: Option<(usize, BTreeMap<u32, RuleWord>)> = None;
        let mut rules = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| MapError::Parse(ParseError::at(lineno + 1, m));
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let arrow = || rest.split_once("->").map(|(a, b)| (a.trim(), b.trim())).ok_or_else(|| err("expected `->`".into()));
            let path = |s: &str| s.parse::<VertexPath>().map_err(|e| err(e.message));
            match key {
                "root" | "state" => {}
                "support" => support = Some(rest.parse::<usize>().map_err(|_| err("support needs a depth".into()))?),
                "vmap" => {
                    let (a, b) = arrow()?;
                    data.vmap.insert(path(a)?, path(b)?);
                }
                "mark" => {
                    let (a, b) = arrow()?;
                    data.marks.insert(path(a)?, parse_loop_word(b).map_err(err)?);
                }
                "loop" => {
                    let (a, b) = arrow()?;
                    let x = parse_loop_word(a).map_err(err)?;
                    let [l] = x.letters() else { return Err(err("left side must be one loop".into())) };
                    if l.inverse {
                        return Err(err("left side must be a loop, not its inverse".into()));
                    }
                    data.loops.insert(l.gen.clone(), parse_loop_word(b).map_err(err)?);
                }
                "endmap" => {
                    let (a, b) = arrow()?;
                    data.endmap.get_or_insert_with(BTreeMap::new).insert(path(a)?, path(b)?);
                }
                "outside" => {
                    let mut parts = rest.split_whitespace();
                    match (parts.next(), parts.next()) {
                        (Some("identity"), None) => band_rule = None,
                        (Some("banded"), Some(b)) => {
                            let band = b.parse().map_err(|_| err("band must be a nonnegative integer".into()))?;
                            band_rule = Some((band, BTreeMap::new()));
                        }
                        _ => return Err(err("expected `outside identity` or `outside banded <b>`".into())),
                    }
                }
                "rule" => {
                    let (a, b) = arrow()?;
                    let k: u32 = a.parse().map_err(|_| err("rule needs a loop index".into()))?;
                    rules.insert(k, parse_rule_word(b).map_err(err)?);
                }
                other => return Err(err(format!("unknown record {other:?}"))),
            }
        }
        let support = support.ok_or_else(|| MapError::Parse(ParseError::new("missing support line")))?;
        data.outside = Some(match band_rule {
            None if rules.is_empty() => Outside::Identity,
            None => return Err(MapError::Parse(ParseError::new("rule lines need `outside banded <b>`"))),
            Some((band, _)) => Outside::Banded { band, rule: rules },
        });
        ProperMapRep::new(ambient, support, data)
    }

    /// Map file text with the ambient graph inlined; only entries that
    /// differ from the defaults are written.
    pub fn to_text(&self) -> String {
        let mut out = self.ambient.to_text();
        writeln!(out, "support {}", self.support).unwrap();
        for (a, b) in &self.vmap {
            if a != b {
                writeln!(out, "vmap {a} -> {b}").unwrap();
            }
        }
        for (p, w) in &self.marks {
            if !w.is_identity() {
                writeln!(out, "mark {p} -> {w}").unwrap();
            }
        }
        for (x, w) in &self.loop_images {
            let default = LoopGen::new(self.vmap[&x.at].clone(), x.index);
            if !self.gen_exists(&default) || *w != default.word().conjugate_by(&self.marks[&x.at]) {
                writeln!(out, "loop {x} -> {w}").unwrap();
            }
        }
        match &self.outside {
            Outside::Identity => writeln!(out, "outside identity").unwrap(),
            Outside::Banded { band, rule } => {
                writeln!(out, "outside banded {band}").unwrap();
                for (k, w) in rule {
                    writeln!(out, "rule {k} -> {w}").unwrap();
                }
            }
        }
        out
    }
}

/// Reads the ambient graph from the `root`/`state` lines of the file.
impl FromStr for ProperMapRep {
    type Err = MapError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let ambient_text: String = text
            .lines()
            .filter(|l| {
                let t = l.trim_start();
                t.starts_with("root ") || t.starts_with("state ")
            })
            .map(|l| format!("{l}\n"))
            .collect();
        let ambient: Automaton = ambient_text.parse()?;
        Self::parse_with_ambient(&ambient, text)
    }
}

/// Rule of `g ∘ f` below both supports.
fn compose_outside(g: &Outside, f: &Outside) -> Outside {
    let empty = BTreeMap::new();
    let rg = match g {
        Outside::Identity => &empty,
        Outside::Banded { rule, .. } => rule,
    };
    let rf = match f {
        Outside::Identity => &empty,
        Outside::Banded { rule, .. } => rule,
    };
    let keys: BTreeSet<u32> = rg.keys().chain(rf.keys()).copied().collect();
    let mut rule = BTreeMap::new();
    for k in keys {
        let w = rule_word(rf, k).substitute(|t| {
            rule_word(rg, t.index).substitute(|s| Word::gen(RuleToken { offset: s.offset + t.offset, index: s.index }))
        });
        if w != rule_word(&empty, k) {
            rule.insert(k, w);
        }
    }
    if rule.is_empty() {
        Outside::Identity
    } else {
        let band = rule.values().flat_map(|w| w.generators().map(|t| (-t.offset) as usize)).max().unwrap_or(0);
        Outside::Banded { band, rule }
    }
}
