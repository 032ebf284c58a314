use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use propermaps::end_space::CylinderSpace;
use propermaps::graph_model::{characteristic_pair, classify_equivalent, Automaton};
use propermaps::mapclass::{is_properly_homotopic_to_identity, IdentityVerdict, MapError, ProperMapRep};
use propermaps::nielsen::{
    f_star, realize_core_case, realize_general_case, realize_tree_case, ActionSpec, CoreModel, ElementSource,
    FiniteGroupAction, GeneralCaseParams, GeneralCaseReport, Interval, IntervalCover, NielsenError, SearchBounds,
};
use propermaps::stallings::{intersect_ffs, FreeFactorSystem};
use propermaps::ParseError;

use crate::{Config, Kind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub stage: &'static str,
    pub message: String,
}

impl Failure {
    pub const VERIFICATION: u8 = 2;
    pub const BOUND: u8 = 3;
    pub const PARSE: u8 = 4;

    pub fn input(stage: &'static str, message: impl Into<String>) -> Self {
        Failure { code: Self::PARSE, stage, message: message.into() }
    }

    fn parse(stage: &'static str, path: &Path, e: impl std::fmt::Display) -> Self {
        Self::input(stage, format!("{}: {e}", path.display()))
    }

    fn nielsen(stage: &'static str, e: NielsenError) -> Self {
        let code = match &e {
            NielsenError::Parse(_) | NielsenError::Map(MapError::Parse(_)) => Self::PARSE,
            NielsenError::NotFoundWithinBound(_)
            | NielsenError::NoScriptFound(_)
            | NielsenError::RadiusTooSmall(_)
            | NielsenError::NoGoodLevel(_) => Self::BOUND,
            _ => Self::VERIFICATION,
        };
        Failure { code, stage, message: e.to_string() }
    }
}

fn read(stage: &'static str, path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::parse(stage, path, e))
}

fn automaton(path: &Path) -> Result<Automaton, Failure> {
    read("parse", path)?.parse().map_err(|e: ParseError| Failure::parse("parse", path, e))
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: &'a str,
    config: &'a Config,
    result: Value,
}

/// A closed pipe on stdout is not an error for a report writer.
fn print_line(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

/// Writes the report and any DOT files under `--out`, or prints the report.
fn emit(command: &str, config: &Config, result: Value, files: &[(String, String)]) -> Result<(), Failure> {
    let report = Report { schema_version: SCHEMA_VERSION, command, config, result };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    match &config.out {
        None => print_line(&text),
        Some(dir) => {
            let write = |name: &str, body: &str| {
                fs::write(dir.join(name), body).map_err(|e| Failure::input("output", format!("{}: {e}", dir.display())))
            };
            fs::create_dir_all(dir).map_err(|e| Failure::input("output", format!("{}: {e}", dir.display())))?;
            write("report.json", &text)?;
            for (name, body) in files {
                write(name, body)?;
            }
            print_line(&format!("wrote {}", dir.join("report.json").display()));
        }
    }
    Ok(())
}

pub fn classify(x: &Path, y: &Path, config: &Config) -> Result<(), Failure> {
    let (a, b) = (automaton(x)?, automaton(y)?);
    let result = json!({
        "answer": classify_equivalent(&a, &b),
        "x": characteristic_pair(&a),
        "y": characteristic_pair(&b),
    });
    emit("classify", config, result, &[])
}

pub fn intersect(first: &Path, second: &Path, config: &Config) -> Result<(), Failure> {
    let load = |p: &Path| -> Result<FreeFactorSystem, Failure> {
        FreeFactorSystem::parse(&read("parse", p)?).map_err(|e| Failure::parse("parse", p, e))
    };
    let meet = intersect_ffs(&load(first)?, &load(second)?);
    let text = meet.to_text();
    let result = json!({ "components": meet.len(), "ranks": meet.ranks(), "ffs": text });
    emit("intersect", config, result, &[("intersection.ffs".into(), text)])
}

pub fn check_id(map: &Path, config: &Config) -> Result<(), Failure> {
    let f: ProperMapRep = read("parse", map)?.parse().map_err(|e: MapError| Failure::parse("parse", map, e))?;
    let verdict = is_properly_homotopic_to_identity(&f);
    let summary = match &verdict {
        IdentityVerdict::CertifiedYes { depth } => format!("CERTIFIED_YES at depth {depth}"),
        IdentityVerdict::No(w) => format!("NO: {w}"),
        IdentityVerdict::Unknown { depth } => format!("UNKNOWN beyond depth {depth}"),
    };
    emit("check-id", config, json!({ "verdict": verdict, "summary": summary }), &[])
}

/// Reads an action file; map files are resolved next to it.
fn load_action(ambient: &Automaton, path: &Path) -> Result<FiniteGroupAction, Failure> {
    let spec = ActionSpec::parse(&read("parse", path)?).map_err(|e| Failure::parse("parse", path, e))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut maps = BTreeMap::new();
    for (name, source) in &spec.elements {
        if let ElementSource::MapFile(file) = source {
            let p: PathBuf = dir.join(file);
            let f = ProperMapRep::parse_with_ambient(ambient, &read("parse", &p)?)
                .map_err(|e| match e {
                    MapError::Parse(e) => Failure::parse("parse", &p, e),
                    e => Failure { code: Failure::VERIFICATION, stage: "action", message: format!("{}: {e}", p.display()) },
                })?;
            maps.insert(name.clone(), f);
        }
    }
    spec.build(ambient, &maps).map_err(|e| Failure::nielsen("action", e))
}

fn parse_cover(text: &str) -> Result<Vec<Interval>, Failure> {
    text.split(',')
        .map(|part| {
            let (a, b) = part.trim().split_once('-').ok_or_else(|| Failure::input("config", format!("bad interval {part:?}")))?;
            let num = |s: &str| s.trim().parse::<usize>().map_err(|_| Failure::input("config", format!("bad interval {part:?}")));
            Ok(Interval::new(num(a)?, num(b)?))
        })
        .collect()
}

/// Three bands meeting in overlaps of length 22 unless `--cover` is given.
fn cover(config: &Config) -> Result<IntervalCover, Failure> {
    let intervals = match &config.cover {
        Some(text) => parse_cover(text)?,
        None => {
            let top = config.depth;
            if top < 50 {
                return Err(Failure::input("config", "the default core cover needs --depth of at least 50, or pass --cover"));
            }
            vec![Interval::new(0, 24), Interval::new(2, top - 2), Interval::new(26, top)]
        }
    };
    let top = intervals.iter().map(|j| j.b).max().unwrap_or(0);
    IntervalCover::unit(top, intervals).map_err(|e| Failure::nielsen("cover", e))
}

fn bounds(config: &Config) -> SearchBounds {
    SearchBounds { max_edges: config.max_edges, rank_bound: config.rank_bound }
}

fn ffs_ranks(action: &FiniteGroupAction, cover: &IntervalCover) -> Result<Value, Failure> {
    let model = CoreModel::new(action, cover.clone()).map_err(|e| Failure::nielsen("core case", e))?;
    let mut rows = Vec::new();
    for &j in &cover.intervals {
        let fs = f_star(&model, j).map_err(|e| Failure::nielsen("core case", e))?;
        rows.push(json!({ "interval": j.to_string(), "ranks": fs.ranks() }));
    }
    Ok(Value::Array(rows))
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn realize(kind: Kind, graph: &Path, action_path: &Path, config: &Config) -> Result<(), Failure> {
    let ambient = automaton(graph)?;
    let action = load_action(&ambient, action_path)?;
    let mut files = Vec::new();
    let result = match kind {
        Kind::Tree => {
            let space = CylinderSpace::new(&ambient, config.depth).map_err(|e| Failure::nielsen("tree case", e.into()))?;
            let cyl = action.on_cylinders(&space).map_err(|e| Failure::nielsen("tree case", e))?;
            let r = realize_tree_case(&space, &cyl, config.levels, config.eps_base)
                .map_err(|e| Failure::nielsen("tree case", e))?;
            let dot = r.telescope.to_dot();
            files.push(("telescope.dot".into(), dot.clone()));
            json!({ "kind": "tree", "action": r.action.perms, "levels": r.levels, "telescope_dot": dot })
        }
        Kind::Core => {
            let cover = cover(config)?;
            let ranks = ffs_ranks(&action, &cover)?;
            let r = realize_core_case(&action, cover, bounds(config)).map_err(|e| Failure::nielsen("core case", e))?;
            let dot = r.graph.to_finite_graph().to_dot("Y");
            files.push(("graph.dot".into(), dot.clone()));
            files.push(("tstar.dot".into(), r.tstar.to_dot()));
            files.push(("t.dot".into(), r.t.to_dot()));
            json!({
                "kind": "core",
                "cover": to_value(&r.cover),
                "ffs_ranks": ranks,
                "tstar_shape": r.tstar.shape(),
                "t_shape": r.t.shape(),
                "script": to_value(&r.script),
                "action": to_value(&r.graph.action),
                "graph_dot": dot,
                "verdicts": to_value(&r.verdicts),
            })
        }
        Kind::General => {
            let params = GeneralCaseParams {
                depth: config.depth,
                levels: config.levels,
                eps_base: config.eps_base,
                radius: config.radius,
                cover: config.cover.as_ref().map(|_| cover(config)).transpose()?,
                bounds: bounds(config),
            };
            let r = realize_general_case(&action, &params).map_err(|e| Failure::nielsen("general case", e))?;
            let dot = match &r {
                GeneralCaseReport::Tree(t) => t.telescope.to_dot(),
                GeneralCaseReport::Core(c) => c.graph.to_finite_graph().to_dot("Y"),
                GeneralCaseReport::Mixed(m) => m.graph.to_finite_graph().to_dot("Y"),
            };
            files.push(("graph.dot".into(), dot.clone()));
            json!({ "kind": "general", "report": to_value(&r), "graph_dot": dot })
        }
    };
    emit("realize", config, result, &files)
}
