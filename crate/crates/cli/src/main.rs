mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Finite-scale experiments on relatively hyperbolic graphs.
#[derive(Debug, Parser)]
#[command(name = "relhyp", version)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Generate a corpus graph (and its peripheral family, if any).
    Gen(GenArgs),
    /// Cone off a peripheral family.
    Electrify(ElectrifyArgs),
    /// Four-point hyperbolicity constant.
    Delta(DeltaArgs),
    /// Check the projection axioms for a peripheral family.
    Axioms(AxiomsArgs),
    /// Build the quasi-tree of metric spaces.
    Quasitree(QuasitreeArgs),
    /// Fit quasi-isometry constants of the product embedding.
    Embed(EmbedArgs),
    /// Enlarge canonical geodesics of the electrification.
    Enlarge(EnlargeArgs),
    /// Build or recheck a cover at one scale.
    Cover(CoverArgs),
    /// Cover multiplicity across several scales.
    Profile(ProfileArgs),
    /// Bounded-penetration probe on an electrified graph.
    Penetration(PenetrationArgs),
    /// Closed-form dimension bounds for a surface.
    Bounds(BoundsArgs),
    /// Summarize JSON reports as one markdown table.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
struct GenArgs {
    /// path, cycle, grid, tree, tree-of-rings, farey or tower
    kind: String,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    width: Option<u64>,
    #[arg(long)]
    height: Option<u64>,
    #[arg(long)]
    depth: Option<u64>,
    #[arg(long)]
    valence: Option<u64>,
    #[arg(long)]
    ring_len: Option<u64>,
    #[arg(long)]
    radius: Option<u64>,
    #[arg(long)]
    levels: Option<u64>,
    /// Graph JSON output; the family goes next to it as `<stem>.family.json`.
    #[arg(short, long)]
    out: PathBuf,
    /// Also write Graphviz DOT next to the JSON.
    #[arg(long)]
    dot: bool,
}

#[derive(Debug, Args, Serialize)]
struct ElectrifyArgs {
    graph: PathBuf,
    family: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct DeltaArgs {
    graph: PathBuf,
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AxiomsArgs {
    graph: PathBuf,
    family: PathBuf,
    #[arg(long, default_value = "auto")]
    theta: String,
    #[arg(long, default_value_t = 5000)]
    triples: usize,
    #[arg(long, default_value_t = 3)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct QuasitreeArgs {
    graph: PathBuf,
    family: PathBuf,
    #[arg(long, default_value = "auto")]
    theta: String,
    #[arg(long, default_value = "projection")]
    rule: String,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Where to write the comparison with the other edge rule
    /// (default: `<out stem>.diff.json`).
    #[arg(long)]
    diff: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EmbedArgs {
    graph: PathBuf,
    family: PathBuf,
    #[arg(long, default_value_t = 0)]
    basepoint: u32,
    #[arg(long, default_value = "auto")]
    theta: String,
    #[arg(long, default_value = "projection")]
    rule: String,
    /// Use a prebuilt quasi-tree instead of building one.
    #[arg(long)]
    y: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pairs: usize,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EnlargeArgs {
    graph: PathBuf,
    family: PathBuf,
    /// Enlarge one geodesic; without `--from/--to` every ordered pair is
    /// enumerated.
    #[arg(long, requires = "to")]
    from: Option<u32>,
    #[arg(long, requires = "from")]
    to: Option<u32>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CoverArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 1)]
    scale: u32,
    #[arg(long, default_value = "net_voronoi")]
    strategy: String,
    #[arg(long, default_value_t = 2)]
    net_factor: u32,
    /// Recheck an existing cover file instead of building one.
    #[arg(long)]
    check: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ProfileArgs {
    graph: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    scales: Vec<u32>,
    #[arg(long, default_value = "net_voronoi")]
    strategy: String,
    #[arg(long, default_value_t = 2)]
    net_factor: u32,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct PenetrationArgs {
    eg: PathBuf,
    #[arg(long = "L", default_value_t = 2.0)]
    l: f64,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    depth_threshold: u32,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct BoundsArgs {
    #[arg(long, allow_negative_numbers = true)]
    genus: i64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    punctures: i64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ReportArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(64) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(64);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
