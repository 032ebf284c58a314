use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

/// A position in the unfolding: the sequence of child indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexPath(pub Vec<u32>);

impl VertexPath {
    pub fn root() -> Self {
        VertexPath(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, i: u32) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        VertexPath(v)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(VertexPath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn prefix(&self, len: usize) -> Self {
        VertexPath(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Self) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn common_prefix_len(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    /// Replaces the leading `from` prefix by `to`.
    pub fn rebase(&self, from: &Self, to: &Self) -> Option<Self> {
        if !from.is_prefix_of(self) {
            return None;
        }
        let mut v = to.0.clone();
        v.extend_from_slice(&self.0[from.0.len()..]);
        Some(VertexPath(v))
    }
}

impl fmt::Display for VertexPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, ".");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("/"))
    }
}

impl FromStr for VertexPath {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "." {
            return Ok(VertexPath::root());
        }
        s.split('/')
            .map(|p| p.trim().parse::<u32>().map_err(|_| ParseError::new(format!("bad vertex path {s:?}"))))
            .collect::<Result<Vec<_>, _>>()
            .map(VertexPath)
    }
}

/// Finite generator of a rooted tree with one-edge loops.
///
/// States are kept sorted by name, so state indices follow the lexicographic
/// order of their ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Automaton {
    names: Vec<String>,
    children: Vec<Vec<usize>>,
    loops: Vec<u32>,
    root: usize,
}

impl Automaton {
    /// Builds an automaton from named states; unreachable states are dropped.
    pub fn from_named(
        root: &str,
        states: &[(&str, u32, Vec<&str>)],
    ) -> Result<Self, ParseError> {
        let owned: Vec<(String, u32, Vec<String>)> = states
            .iter()
            .map(|(n, l, c)| (n.to_string(), *l, c.iter().map(|s| s.to_string()).collect()))
            .collect();
        Self::build(root.to_string(), owned)
    }

    fn build(root: String, states: Vec<(String, u32, Vec<String>)>) -> Result<Self, ParseError> {
        let mut table: BTreeMap<String, (u32, Vec<String>)> = BTreeMap::new();
        for (name, loops, ch) in states {
            if table.insert(name.clone(), (loops, ch)).is_some() {
                return Err(ParseError::new(format!("state {name} declared twice")));
            }
        }
        if !table.contains_key(&root) {
            return Err(ParseError::new(format!("root state {root} is not declared")));
        }
        for (name, (_, ch)) in &table {
            for c in ch {
                if !table.contains_key(c) {
                    return Err(ParseError::new(format!("state {name} has undeclared child {c}")));
                }
            }
        }
        // keep only reachable states
        let mut reach = std::collections::BTreeSet::new();
        let mut queue = VecDeque::from([root.clone()]);
        while let Some(s) = queue.pop_front() {
            if reach.insert(s.clone()) {
                for c in &table[&s].1 {
                    queue.push_back(c.clone());
                }
            }
        }
        let names: Vec<String> = reach.into_iter().collect();
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let children = names
            .iter()
            .map(|n| table[n].1.iter().map(|c| index[c.as_str()]).collect())
            .collect();
        let loops = names.iter().map(|n| table[n].0).collect();
        let root = index[root.as_str()];
        Ok(Automaton { names, children, loops, root })
    }

    /// Builds from index-based data; states are named `s0`, `s1`, ...
    pub(crate) fn from_indexed(root: usize, rows: Vec<(u32, Vec<usize>)>) -> Self {
        let width = rows.len().saturating_sub(1).to_string().len();
        let name = |i: usize| format!("s{i:0width$}");
        let states = rows
            .iter()
            .enumerate()
            .map(|(i, (l, ch))| (name(i), *l, ch.iter().map(|&c| name(c)).collect()))
            .collect();
        Self::build(name(root), states).expect("indexed automaton is well formed")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn children(&self, s: usize) -> &[usize] {
        &self.children[s]
    }

    pub fn loops(&self, s: usize) -> u32 {
        self.loops[s]
    }

    /// State reached by following `path` from the root.
    pub fn state_at(&self, path: &VertexPath) -> Option<usize> {
        let mut s = self.root;
        for &i in &path.0 {
            s = *self.children[s].get(i as usize)?;
        }
        Some(s)
    }

    /// `reach[s][t]` iff `t` is reachable from `s` by a path of length ≥ 0.
    pub(crate) fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut out = vec![vec![false; n]; n];
        for (s, row) in out.iter_mut().enumerate() {
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                if !row[x] {
                    row[x] = true;
                    queue.extend(self.children[x].iter().copied());
                }
            }
        }
        out
    }

    /// `s` lies on a directed cycle.
    pub(crate) fn on_cycle(&self, reach: &[Vec<bool>]) -> Vec<bool> {
        (0..self.len()).map(|s| self.children[s].iter().any(|&c| reach[c][s])).collect()
    }

    /// Restriction to the states satisfying `keep`, rooted at the root.
    pub(crate) fn restrict(&self, keep: &[bool]) -> Option<Automaton> {
        if !keep[self.root] {
            return None;
        }
        let states = (0..self.len())
            .filter(|&s| keep[s])
            .map(|s| {
                let ch = self.children[s].iter().filter(|&&c| keep[c]).map(|&c| self.names[c].clone()).collect();
                (self.names[s].clone(), self.loops[s], ch)
            })
            .collect();
        Some(Self::build(self.names[self.root].clone(), states).expect("restriction is well formed"))
    }

    /// Merges bisimilar states and renames states in breadth-first order, so
    /// automata with isomorphic unfoldings become equal.
    pub fn canonical(&self) -> Automaton {
        let n = self.len();
        let mut class: Vec<usize> = {
            let mut keys: Vec<u32> = self.loops.clone();
            keys.sort();
            keys.dedup();
            self.loops.iter().map(|l| keys.binary_search(l).unwrap()).collect()
        };
        loop {
            let sig: Vec<(usize, Vec<usize>)> =
                (0..n).map(|s| (class[s], self.children[s].iter().map(|&c| class[c]).collect())).collect();
            let mut keys = sig.clone();
            keys.sort();
            keys.dedup();
            let next: Vec<usize> = sig.iter().map(|k| keys.binary_search(k).unwrap()).collect();
            let count = keys.len();
            let old_count = {
                let mut c = class.clone();
                c.sort();
                c.dedup();
                c.len()
            };
            class = next;
            if count == old_count {
                break;
            }
        }
        // BFS numbering of classes
        let mut order: BTreeMap<usize, usize> = BTreeMap::new();
        let mut rows: Vec<(u32, Vec<usize>)> = Vec::new();
        let mut queue = VecDeque::from([self.root]);
        let mut rep: Vec<usize> = Vec::new();
        order.insert(class[self.root], 0);
        rep.push(self.root);
        while let Some(s) = queue.pop_front() {
            for &c in &self.children[s] {
                if let std::collections::btree_map::Entry::Vacant(e) = order.entry(class[c]) {
                    e.insert(rep.len());
                    rep.push(c);
                    queue.push_back(c);
                }
            }
        }
        for &s in &rep {
            rows.push((self.loops[s], self.children[s].iter().map(|&c| order[&class[c]]).collect()));
        }
        Automaton::from_indexed(0, rows)
    }

    /// One state, itself as only child, `loops` loops per vertex.
    pub fn loop_ray(loops: u32) -> Automaton {
        Automaton::from_indexed(0, vec![(loops, vec![0])])
    }

    /// Full `branching`-ary tree with `loops` loops at every vertex.
    pub fn regular_tree(branching: usize, loops: u32) -> Automaton {
        Automaton::from_indexed(0, vec![(loops, vec![0; branching])])
    }

    /// Binary Cantor tree without loops.
    pub fn cantor() -> Automaton {
        Self::regular_tree(2, 0)
    }

    /// Single ray without loops.
    pub fn ray() -> Automaton {
        Self::loop_ray(0)
    }

    /// Text format: `state <id> loops=<n> children=<id>,...` and `root <id>`.
    pub fn to_text(&self) -> String {
        let mut out = format!("root {}\n", self.names[self.root]);
        for s in 0..self.len() {
            let ch: Vec<&str> = self.children[s].iter().map(|&c| self.names[c].as_str()).collect();
            out.push_str(&format!("state {} loops={} children={}\n", self.names[s], self.loops[s], ch.join(",")));
        }
        out
    }
}

impl FromStr for Automaton {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut root = None;
        let mut states = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| ParseError::at(lineno + 1, m);
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("root") => {
                    let id = parts.next().ok_or_else(|| err("root needs a state id"))?;
                    root = Some(id.to_string());
                }
                Some("state") => {
                    let id = parts.next().ok_or_else(|| err("state needs an id"))?.to_string();
                    let mut loops = 0;
                    let mut children = Vec::new();
                    for field in parts {
                        if let Some(v) = field.strip_prefix("loops=") {
                            loops = v.parse().map_err(|_| err("loops must be a nonnegative integer"))?;
                        } else if let Some(v) = field.strip_prefix("children=") {
                            children = v.split(',').filter(|c| !c.is_empty()).map(str::to_string).collect();
                        } else {
                            return Err(err(&format!("unknown field {field:?}")));
                        }
                    }
                    states.push((id, loops, children));
                }
                Some(other) => return Err(err(&format!("unknown record {other:?}"))),
                None => {}
            }
        }
        let root = root.ok_or_else(|| ParseError::new("missing root line"))?;
        Automaton::build(root, states)
    }
}
