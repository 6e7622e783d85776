//! Command-line front end. Exit codes: 0 success, 1 a checked property or
//! protocol run failed, 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamic_graph::{load_dynamic_graph, save_dynamic_graph, DynamicGraph};
use crate::explorer::{
    check_conjecture1, property_suite, search_counterexample, ConjectureStatus, ConjectureVerdict,
    SearchBudget, SearchMode,
};
use crate::generators::{Family, GeneratorSpec, StaticShape};
use crate::influence::all_metrics;
use crate::local_windows::{periodic_respecting_schedule, CoverNetwork};
use crate::protocols::{run_sync, summarize, ProtocolInstance, SimError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "dynet", version, about = "Dynamic-network influence lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a schedule JSON for a named family.
    Generate(GenerateArgs),
    /// Compute oit, iit, moi, ct, edge period and dynamic diameter.
    Metrics(MetricsArgs),
    /// Run a counting or consistency protocol and print a JSON summary.
    Simulate(SimulateArgs),
    /// Run the structural property suite on a schedule.
    Check(CheckArgs),
    /// Check the unit-oit spreading conjecture on a schedule, or search for
    /// a counterexample.
    Explore(ExploreArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Soifer,
    AlternatingRing,
    OitIitGap,
    SplitHalves,
    Static,
    RandomOit1,
    /// Periodic respecting schedule of the cover network given by `--net`.
    Respecting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Complete,
    Path,
    Cycle,
    Star,
    Empty,
}

impl From<ShapeArg> for StaticShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Complete => StaticShape::Complete,
            ShapeArg::Path => StaticShape::Path,
            ShapeArg::Cycle => StaticShape::Cycle,
            ShapeArg::Star => StaticShape::Star,
            ShapeArg::Empty => StaticShape::Empty,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Node count (ignored for `respecting`).
    #[arg(long)]
    pub n: Option<usize>,
    /// Influence-time parameter of `oit-iit-gap`.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Horizon of `random-oit1`.
    #[arg(long, default_value_t = 16)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shape of `static`.
    #[arg(long, value_enum, default_value_t = ShapeArg::Complete)]
    pub shape: ShapeArg,
    /// Cover network JSON for `respecting`.
    #[arg(long)]
    pub net: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Largest metric value searched for; defaults to 4n.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProtoArg {
    CoverCount,
    OitCount,
    CtCount,
    Consistency,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub proto: ProtoArg,
    #[arg(long)]
    pub graph: PathBuf,
    /// Cover network JSON (`cover-count`, `consistency`).
    #[arg(long)]
    pub net: Option<PathBuf>,
    /// `k` for `oit-count`, `T` for `ct-count`.
    #[arg(long)]
    pub param: Option<usize>,
    /// Defaults to the protocol's liveness bound.
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Write the per-round trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Defaults to 4n.
    #[arg(long)]
    pub kmax: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Randomized,
}

#[derive(Args, Debug)]
pub struct ExploreArgs {
    /// Check this schedule instead of searching.
    #[arg(long = "in", conflicts_with_all = ["n", "mode"])]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub horizon: usize,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disable pruning in exhaustive mode.
    #[arg(long)]
    pub no_prune: bool,
}

/// Parses `argv` and runs the command, writing JSON to `out`. Returns the
/// process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

/// `Ok(false)` means the command ran but a checked property failed.
fn dispatch(command: Command, out: &mut dyn Write) -> anyhow::Result<bool> {
    match command {
        Command::Generate(a) => generate(a, out),
        Command::Metrics(a) => metrics(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Check(a) => check(a, out),
        Command::Explore(a) => explore(a, out),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_graph(path: &Path) -> anyhow::Result<DynamicGraph> {
    load_dynamic_graph(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_net(path: &Path) -> anyhow::Result<CoverNetwork> {
    CoverNetwork::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn emit(text: &str, dest: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<()> {
    match dest {
        Some(path) => {
            fs::write(path, format!("{text}\n"))
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let g = if a.family == FamilyArg::Respecting {
        let Some(net) = &a.net else {
            bail!("--net is required for --family respecting");
        };
        periodic_respecting_schedule(&load_net(net)?)?
    } else {
        let Some(n) = a.n else {
            bail!("--n is required for --family {:?}", a.family);
        };
        let family = match a.family {
            FamilyArg::Soifer => Family::Soifer,
            FamilyArg::AlternatingRing => Family::AlternatingRing,
            FamilyArg::OitIitGap => Family::OitIitGap { k: a.k },
            FamilyArg::SplitHalves => Family::SplitHalves,
            FamilyArg::Static => Family::Static(a.shape.into()),
            FamilyArg::RandomOit1 => Family::RandomOit1 {
                horizon: a.horizon,
                seed: a.seed,
            },
            FamilyArg::Respecting => unreachable!(),
        };
        GeneratorSpec { family, n }.build()?
    };
    emit(&save_dynamic_graph(&g), a.out.as_deref(), out)?;
    Ok(true)
}

fn k_max_for(g: &DynamicGraph, kmax: Option<usize>) -> anyhow::Result<usize> {
    match kmax {
        Some(0) => bail!("--kmax must be at least 1"),
        Some(k) => Ok(k),
        None => Ok(4 * g.n()),
    }
}

fn metrics(a: MetricsArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let g = load_graph(&a.input)?;
    let k_max = k_max_for(&g, a.kmax)?;
    let m = all_metrics(&g, k_max);
    emit(&m.to_json().to_string(), a.out.as_deref(), out)?;
    Ok(true)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let g = load_graph(&a.graph)?;
    let need_net = || -> anyhow::Result<CoverNetwork> {
        let Some(path) = &a.net else {
            bail!("--net is required for --proto {:?}", a.proto);
        };
        load_net(path)
    };
    let need_param = |name: &str| -> anyhow::Result<usize> {
        a.param
            .with_context(|| format!("--param {name} is required for --proto {:?}", a.proto))
    };
    let proto = match a.proto {
        ProtoArg::CoverCount => ProtocolInstance::CoverCount(need_net()?),
        ProtoArg::Consistency => ProtocolInstance::Consistency(need_net()?),
        ProtoArg::OitCount => ProtocolInstance::OitCount {
            k: need_param("k")?,
        },
        ProtoArg::CtCount => ProtocolInstance::CtCount {
            bound: need_param("T")?,
        },
    };
    let (trace, finished) = match run_sync(&g, &proto, a.max_rounds) {
        Ok(trace) => (trace, true),
        Err(e @ (SimError::Timeout { .. } | SimError::ModelViolation { .. })) => {
            eprintln!("error: {e}");
            let trace = e.trace().cloned().unwrap_or_default();
            (trace, false)
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &a.trace {
        let file =
            fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        trace.write_csv(io::BufWriter::new(file))?;
    }
    let summary = summarize(&trace, &proto);
    writeln!(out, "{}", serde_json::to_string(&summary)?)?;
    Ok(finished && summary.all_correct)
}

fn check(a: CheckArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let g = load_graph(&a.input)?;
    let k_max = k_max_for(&g, a.kmax)?;
    let report = property_suite(&g, k_max);
    writeln!(out, "{}", serde_json::to_string(&report)?)?;
    Ok(report.passed())
}

fn explore(a: ExploreArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let verdict = match (&a.input, a.n) {
        (Some(path), _) => check_conjecture1(&load_graph(path)?),
        (None, Some(n)) => {
            let mode = match a.mode.unwrap_or(ModeArg::Randomized) {
                ModeArg::Exhaustive => SearchMode::Exhaustive,
                ModeArg::Randomized => SearchMode::Randomized {
                    trials: a.trials,
                    seed: a.seed,
                },
            };
            let budget = SearchBudget {
                n,
                horizon: a.horizon,
                mode,
                prune: !a.no_prune,
            };
            let found = search_counterexample(&budget)?;
            let last = a.horizon.saturating_sub(n / 2);
            match found {
                Some(c) => ConjectureVerdict {
                    status: ConjectureStatus::CounterexampleFound {
                        t: c.t,
                        graph: c.graph,
                    },
                    scanned: Some((0, c.t)),
                    scoped: true,
                },
                None => ConjectureVerdict {
                    status: ConjectureStatus::Holds,
                    scanned: Some((0, last)),
                    scoped: true,
                },
            }
        }
        (None, None) => bail!("explore needs either --in or --n"),
    };
    writeln!(out, "{}", verdict.to_json())?;
    Ok(!matches!(
        verdict.status,
        ConjectureStatus::CounterexampleFound { .. }
    ))
}
