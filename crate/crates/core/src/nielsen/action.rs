use std::collections::BTreeMap;

use super::NielsenError;
use crate::end_space::{CylinderAction, CylinderSpace};
use crate::error::ParseError;
use crate::graph_model::Automaton;
use crate::group::FiniteGroup;
use crate::mapclass::{is_properly_homotopic_to_identity, ProperMapRep};

/// A finite group together with a representative map for every element,
/// certified to multiply like the group up to proper homotopy.
#[derive(Clone, Debug)]
pub struct FiniteGroupAction {
    pub group: FiniteGroup,
    pub reps: Vec<ProperMapRep>,
}

/// `f ≃ k`, certified through the candidate inverse of `k`.
fn homotopic(f: &ProperMapRep, k: &ProperMapRep) -> bool {
    let Some(ki) = k.inverse_candidate() else {
        return false;
    };
    ki.compose(f).map(|q| is_properly_homotopic_to_identity(&q).is_yes()).unwrap_or(false)
}

impl FiniteGroupAction {
    pub fn new(group: FiniteGroup, reps: Vec<ProperMapRep>) -> Result<Self, NielsenError> {
        if reps.len() != group.order() {
            return Err(NielsenError::InvalidAction(format!(
                "{} representatives for a group of order {}",
                reps.len(),
                group.order()
            )));
        }
        if reps.iter().any(|r| r.ambient() != reps[0].ambient()) {
            return Err(NielsenError::InvalidAction("representatives live on different graphs".into()));
        }
        if !is_properly_homotopic_to_identity(&reps[0]).is_yes() {
            return Err(NielsenError::InvalidAction("the identity element is not represented by the identity".into()));
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = reps[g].compose(&reps[h])?;
                if !homotopic(&gh, &reps[group.mul(g, h)]) {
                    return Err(NielsenError::InvalidAction(format!(
                        "representatives of {g} and {h} do not compose to the representative of {}",
                        group.mul(g, h)
                    )));
                }
            }
        }
        Ok(FiniteGroupAction { group, reps })
    }

    /// The trivial group acting by the identity.
    pub fn trivial(ambient: &Automaton) -> Self {
        FiniteGroupAction { group: FiniteGroup::trivial(), reps: vec![ProperMapRep::identity(ambient, 0)] }
    }

    pub fn ambient(&self) -> &Automaton {
        self.reps[0].ambient()
    }

    /// The permutations of the depth-`D` cylinders of `space`.
    pub fn on_cylinders(&self, space: &CylinderSpace) -> Result<CylinderAction, NielsenError> {
        Ok(CylinderAction::from_fn(space, self.group.clone(), |h, p| self.reps[h].vertex_image(p))?)
    }

    /// Deepest support among the representatives.
    pub fn depth(&self) -> usize {
        self.reps.iter().map(|r| r.support()).max().unwrap_or(0)
    }
}

/// Where the representative of an element comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementSource {
    MapFile(String),
    Identity,
}

/// An action file before its map files are loaded:
///
/// ```text
/// group Z2 order 2
/// elem e: identity
/// elem s: mapfile=flip.map
/// mult e e = e
/// mult e s = s
/// mult s e = s
/// mult s s = e
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSpec {
    pub name: String,
    pub elements: Vec<(String, ElementSource)>,
    pub products: BTreeMap<(String, String), String>,
}

impl ActionSpec {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut header: Option<(String, usize)> = None;
        let mut elements = Vec::new();
        let mut products = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            match words[0] {
                "group" => match words.as_slice() {
                    [_, name, "order", k] => {
                        let k = k.parse().map_err(|_| ParseError::at(lineno, "bad group order"))?;
                        header = Some((name.to_string(), k));
                    }
                    _ => return Err(ParseError::at(lineno, "expected `group <name> order <k>`")),
                },
                "elem" => {
                    let rest = line["elem".len()..].trim();
                    let (name, source) =
                        rest.split_once(':').ok_or_else(|| ParseError::at(lineno, "expected `elem <g>: ...`"))?;
                    let source = source.trim();
                    let source = if source == "identity" {
                        ElementSource::Identity
                    } else if let Some(path) = source.strip_prefix("mapfile=") {
                        ElementSource::MapFile(path.trim().to_string())
                    } else {
                        return Err(ParseError::at(lineno, "expected `mapfile=<path>` or `identity`"));
                    };
                    elements.push((name.trim().to_string(), source));
                }
                "mult" => match words.as_slice() {
                    [_, g, h, "=", k] => {
                        products.insert((g.to_string(), h.to_string()), k.to_string());
                    }
                    _ => return Err(ParseError::at(lineno, "expected `mult <g> <h> = <k>`")),
                },
                other => return Err(ParseError::at(lineno, format!("unknown directive {other:?}"))),
            }
        }
        let (name, order) = header.ok_or_else(|| ParseError::new("missing `group` line"))?;
        if elements.len() != order {
            return Err(ParseError::new(format!("group of order {order} lists {} elements", elements.len())));
        }
        Ok(ActionSpec { name, elements, products })
    }

    /// The multiplication table, with the identity moved to the front.
    /// Returns the group and the element names in table order.
    pub fn group(&self) -> Result<(FiniteGroup, Vec<String>), NielsenError> {
        let names: Vec<&String> = self.elements.iter().map(|(n, _)| n).collect();
        let product = |a: &String, b: &String| -> Result<usize, NielsenError> {
            let k = self
                .products
                .get(&(a.clone(), b.clone()))
                .ok_or_else(|| NielsenError::InvalidAction(format!("missing product {a} {b}")))?;
            names
                .iter()
                .position(|n| *n == k)
                .ok_or_else(|| NielsenError::InvalidAction(format!("unknown element {k}")))
        };
        let mut e = None;
        for (i, a) in names.iter().enumerate() {
            let mut left = true;
            for (j, b) in names.iter().enumerate() {
                left &= product(a, b)? == j;
            }
            if left {
                e = Some(i);
                break;
            }
        }
        let e = e.ok_or_else(|| NielsenError::InvalidAction("no identity element".into()))?;
        let mut order: Vec<usize> = vec![e];
        order.extend((0..names.len()).filter(|&i| i != e));
        let pos: Vec<usize> = {
            let mut p = vec![0; names.len()];
            for (k, &i) in order.iter().enumerate() {
                p[i] = k;
            }
            p
        };
        let mut table = vec![vec![0; names.len()]; names.len()];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                table[a][b] = pos[product(names[i], names[j])?];
            }
        }
        let group = FiniteGroup::from_table(self.name.clone(), table)?;
        Ok((group, order.iter().map(|&i| names[i].clone()).collect()))
    }

    /// Assembles the action once every map file has been read into `maps`,
    /// keyed by element name.
    pub fn build(
        &self,
        ambient: &Automaton,
        maps: &BTreeMap<String, ProperMapRep>,
    ) -> Result<FiniteGroupAction, NielsenError> {
        let (group, names) = self.group()?;
        let mut reps = Vec::with_capacity(names.len());
        for n in &names {
            let source = &self.elements.iter().find(|(m, _)| m == n).unwrap().1;
            reps.push(match source {
                ElementSource::Identity => ProperMapRep::identity(ambient, 0),
                ElementSource::MapFile(_) => maps
                    .get(n)
                    .cloned()
                    .ok_or_else(|| NielsenError::InvalidAction(format!("no map loaded for {n}")))?,
            });
        }
        FiniteGroupAction::new(group, reps)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::mapclass::{LoopGen, MapData};

    pub(crate) fn inversion(a: &Automaton, depth: usize) -> ProperMapRep {
        let mut data = MapData::default();
        for x in ProperMapRep::identity(a, depth).generators() {
            data.loops.insert(x.clone(), x.word().inverse());
        }
        ProperMapRep::new(a, depth, data).unwrap()
    }

    #[test]
    fn parse_and_build_z2() {
        let text = "group Z2 order 2\nelem s: mapfile=s.map\nelem e: identity\n\
                    mult e e = e\nmult e s = s\nmult s e = s\nmult s s = e\n";
        let spec = ActionSpec::parse(text).unwrap();
        let (g, names) = spec.group().unwrap();
        assert_eq!(names, vec!["e".to_string(), "s".to_string()]);
        assert_eq!(g.mul(1, 1), 0);
        let a = Automaton::loop_ray(1);
        let maps = BTreeMap::from([("s".to_string(), inversion(&a, 3))]);
        let action = spec.build(&a, &maps).unwrap();
        assert_eq!(action.depth(), 3);
        assert!(ActionSpec::parse("group Z2 order 2\nelem e: identity\n").is_err());
    }

    #[test]
    fn rejects_non_homomorphisms() {
        let a = Automaton::loop_ray(2);
        let mut data = MapData::default();
        let x = LoopGen::new(crate::graph_model::VertexPath::root(), 0);
        data.loops.insert(x.clone(), x.word().mul(&LoopGen::new(crate::graph_model::VertexPath::root(), 1).word()));
        let t = ProperMapRep::new(&a, 0, data).unwrap();
        let err = FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 0), t]);
        assert!(matches!(err, Err(NielsenError::InvalidAction(_))));
        assert!(FiniteGroupAction::new(FiniteGroup::cyclic(2), vec![ProperMapRep::identity(&a, 0), inversion(&a, 2)])
            .is_ok());
    }
}
