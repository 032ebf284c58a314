use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod run;

use run::Failure;

#[derive(Parser, Debug)]
#[command(name = "propermaps", version, about = "Mapping classes of locally finite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: Config,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct Config {
    /// Cylinder depth for end spaces; the top radius of the default cover.
    #[arg(long, global = true, default_value_t = 4)]
    pub depth: usize,
    /// Scales are ε_n = base^-n.
    #[arg(long, global = true, default_value_t = 2)]
    pub eps_base: i128,
    /// Number of partitions in the telescope.
    #[arg(long, global = true, default_value_t = 4)]
    pub levels: usize,
    /// Edge budget of the graph searches.
    #[arg(long, global = true, default_value_t = 6)]
    pub max_edges: usize,
    /// Largest rank searched exhaustively.
    #[arg(long, global = true, default_value_t = 3)]
    pub rank_bound: usize,
    /// Longest path allowed in the universal cover when choosing rays.
    #[arg(long, global = true, default_value_t = 16)]
    pub radius: usize,
    /// Interval cover of the core as `a-b,c-d,...`.
    #[arg(long, global = true)]
    pub cover: Option<String>,
    /// Recorded in the report; the commands themselves are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the report and DOT files; the report goes to stdout
    /// otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare two graphs up to proper homotopy equivalence.
    Classify { x: PathBuf, y: PathBuf },
    /// Intersect two free factor systems.
    Intersect { first: PathBuf, second: PathBuf },
    /// Decide whether a map is properly homotopic to the identity.
    CheckId { map: PathBuf },
    /// Realize a finite group of mapping classes by graph automorphisms.
    Realize {
        #[arg(value_enum)]
        kind: Kind,
        graph: PathBuf,
        action: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Tree,
    Core,
    General,
}

fn set_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("PROPERMAPS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::input("config", format!("PROPERMAPS_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::input("config", e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(Failure::PARSE);
        }
    };
    let result = set_threads().and_then(|()| match &cli.command {
        Command::Classify { x, y } => run::classify(x, y, &cli.config),
        Command::Intersect { first, second } => run::intersect(first, second, &cli.config),
        Command::CheckId { map } => run::check_id(map, &cli.config),
        Command::Realize { kind, graph, action } => run::realize(*kind, graph, action, &cli.config),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error in {}: {}", f.stage, f.message);
            ExitCode::from(f.code)
        }
    }
}
