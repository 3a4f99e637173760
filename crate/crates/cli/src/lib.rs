//! The `rankforge` command line.
//!
//! [`run`] parses arguments, executes one subcommand and returns the exit
//! status together with everything that would be written to stdout and
//! stderr, so the binary is a thin wrapper and tests need no subprocess.

mod render;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::IsTerminal;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rankforge_core::analysis::{compare_methods, equivalence_pair};
use rankforge_core::dataset::{self, load_event_path};
use rankforge_core::sim::{simulate_qualification, SimConfig, SimSystem, SpecialistProfile};
use rankforge_core::standings::StandingsEntry;
use rankforge_core::tables::{generate_table, read_points_table};
use rankforge_core::tiebreak::TieOutcome;
use rankforge_core::{
    rank_field, Error, EventField, Method, ScoreFunction, ScoringSystem, Standings, TieBreakChain, WeightVector,
};

use render::{csv_line, text_table, Align, Style};

pub const NO_COLOR_ENV: &str = "RANKFORGE_NO_COLOR";

const METHOD_NAMES: &str = "sum, product, log, sqrt, power:<p>, table:<path>";

/// Exit status and captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "rankforge", version, about = "Scoring and analysis for ranking-based multi-discipline events")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank an event under one scoring method.
    Score(ScoreArgs),
    /// Compare the standings produced by two methods.
    Compare(CompareArgs),
    /// Generate an integer points table.
    Table(TableArgs),
    /// Find the adjacent pair of ranks worth as much as first plus last.
    Equiv(EquivArgs),
    /// Check event files; with no source, checks every embedded dataset.
    Validate(SourceArgs),
    /// Estimate qualification chances by Monte Carlo simulation.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Embedded dataset (men-prelims, men-finals, women-prelims, women-finals).
    #[arg(long, conflicts_with = "input")]
    dataset: Option<String>,
    /// Event CSV file.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value = "product", value_parser = parse_method)]
    method: MethodSpec,
    #[arg(long, value_parser = parse_weights)]
    weights: Option<WeightVector>,
    /// Comma-separated policies: head2head, countback, stage, stage:<i>, shared.
    #[arg(long, value_parser = parse_chain)]
    tiebreak: Option<TieBreakChain>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Give exactly twice: method A, then method B.
    #[arg(long, value_parser = parse_method)]
    method: Vec<MethodSpec>,
    #[arg(long, value_parser = parse_weights)]
    weights: Option<WeightVector>,
    #[arg(long, value_parser = parse_chain)]
    tiebreak: Option<TieBreakChain>,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long, value_parser = parse_method)]
    method: MethodSpec,
    #[arg(long, default_value_t = 20)]
    n: u32,
    #[arg(long, default_value_t = 100.0, allow_negative_numbers = true)]
    scale: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    offset: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct EquivArgs {
    #[arg(long, value_parser = parse_method)]
    method: MethodSpec,
    #[arg(long, default_value_t = 20)]
    n: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Repeatable; defaults to product, sum and sqrt.
    #[arg(long, value_parser = parse_method)]
    method: Vec<MethodSpec>,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    stages: usize,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 2020)]
    seed: u64,
    /// Forced placements of the subject as stage:place pairs (1-based), e.g. 1:1,2:18,3:20.
    #[arg(long, value_parser = parse_profile)]
    force: Option<SpecialistProfile>,
    #[arg(long, value_parser = parse_weights)]
    weights: Option<WeightVector>,
    #[arg(long, value_parser = parse_chain, default_value = "head2head,shared")]
    tiebreak: TieBreakChain,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Debug, PartialEq)]
enum MethodSpec {
    Sum,
    Product,
    Log,
    Sqrt,
    Power(f64),
    Table(PathBuf),
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Sum => write!(f, "sum"),
            MethodSpec::Product => write!(f, "product"),
            MethodSpec::Log => write!(f, "log"),
            MethodSpec::Sqrt => write!(f, "sqrt"),
            MethodSpec::Power(p) => write!(f, "power:{p}"),
            MethodSpec::Table(path) => write!(f, "table:{}", path.display()),
        }
    }
}

impl MethodSpec {
    fn method(&self) -> Result<Method, Error> {
        Ok(match self {
            MethodSpec::Sum => Method::sum(),
            MethodSpec::Product => Method::Product,
            MethodSpec::Log => Method::log(),
            MethodSpec::Sqrt => Method::sqrt(),
            MethodSpec::Power(p) => Method::Additive(ScoreFunction::power(*p)?),
            MethodSpec::Table(path) => {
                let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                Method::Additive(read_points_table(file)?)
            }
        })
    }

    fn function(&self) -> Result<ScoreFunction, Error> {
        Ok(self.method()?.score_function())
    }
}

fn parse_method(s: &str) -> Result<MethodSpec, String> {
    let unknown = || format!("unknown method {s:?}; expected one of {METHOD_NAMES}");
    match s {
        "sum" => Ok(MethodSpec::Sum),
        "product" => Ok(MethodSpec::Product),
        "log" => Ok(MethodSpec::Log),
        "sqrt" => Ok(MethodSpec::Sqrt),
        _ => {
            if let Some(p) = s.strip_prefix("power:") {
                let p: f64 = p.parse().map_err(|_| unknown())?;
                ScoreFunction::power(p).map_err(|e| e.to_string())?;
                Ok(MethodSpec::Power(p))
            } else if let Some(path) = s.strip_prefix("table:").filter(|p| !p.is_empty()) {
                Ok(MethodSpec::Table(PathBuf::from(path)))
            } else {
                Err(unknown())
            }
        }
    }
}

fn parse_weights(s: &str) -> Result<WeightVector, String> {
    let weights = s
        .split(',')
        .map(|w| w.trim().parse::<f64>().map_err(|_| format!("invalid weight {w:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    WeightVector::new(weights).map_err(|e| e.to_string())
}

fn parse_chain(s: &str) -> Result<TieBreakChain, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_profile(s: &str) -> Result<SpecialistProfile, String> {
    let mut forced = BTreeMap::new();
    for pair in s.split(',').filter(|p| !p.trim().is_empty()) {
        let bad = || format!("invalid placement {pair:?}; expected stage:place");
        let (stage, place) = pair.trim().split_once(':').ok_or_else(bad)?;
        let stage: usize = stage.parse().ok().filter(|&s| s >= 1).ok_or_else(bad)?;
        let place: u32 = place.parse().map_err(|_| bad())?;
        if forced.insert(stage - 1, place).is_some() {
            return Err(format!("stage {stage} is forced twice"));
        }
    }
    Ok(SpecialistProfile::new(forced))
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CmdResult = Result<String, Failure>;

/// Runs with styling enabled when stdout is a terminal and
/// `RANKFORGE_NO_COLOR` is unset.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let color = std::env::var_os(NO_COLOR_ENV).is_none() && std::io::stdout().is_terminal();
    run_with(argv, color)
}

pub fn run_with<I, T>(argv: I, color: bool) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: 2, stdout: String::new(), stderr: text },
            };
        }
    };
    let style = Style { color };
    let result = match cli.command {
        Command::Score(args) => score(args, style),
        Command::Compare(args) => compare(args, style),
        Command::Table(args) => table(args, style),
        Command::Equiv(args) => equiv(args, style),
        Command::Validate(args) => validate(args),
        Command::Simulate(args) => simulate(args, style),
    };
    match result {
        Ok(stdout) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(Failure::Usage(msg)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Core(e)) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

/// An event and the label used in report headings.
struct Event {
    label: String,
    notes: Vec<String>,
    field: EventField,
}

fn unknown_dataset(name: &str) -> Failure {
    Failure::Usage(format!(
        "unknown dataset {name:?}; expected one of {}",
        dataset::embedded_names().join(", ")
    ))
}

fn load_source(source: &SourceArgs) -> Result<Option<Event>, Failure> {
    match (&source.dataset, &source.input) {
        (Some(name), _) => {
            let d = dataset::embedded(name).ok_or_else(|| unknown_dataset(name))?;
            Ok(Some(Event {
                label: d.title.to_string(),
                notes: d.notes.iter().map(|n| n.to_string()).collect(),
                field: d.field.clone(),
            }))
        }
        (None, Some(path)) => Ok(Some(Event {
            label: path.display().to_string(),
            notes: Vec::new(),
            field: load_event_path(path)?,
        })),
        (None, None) => Ok(None),
    }
}

fn require_source(source: &SourceArgs) -> Result<Event, Failure> {
    load_source(source)?.ok_or_else(|| {
        Failure::Usage(format!(
            "one of --dataset or --input is required; datasets: {}",
            dataset::embedded_names().join(", ")
        ))
    })
}

fn build_system(
    spec: &MethodSpec,
    weights: &Option<WeightVector>,
    chain: &Option<TieBreakChain>,
    field: &EventField,
) -> Result<ScoringSystem, Failure> {
    let chain = chain.clone().unwrap_or_else(|| TieBreakChain::olympic(field.reference().is_some()));
    let mut system = ScoringSystem::new(spec.method()?).with_chain(chain);
    if let Some(w) = weights {
        system = system.with_weights(w.clone());
    }
    Ok(system)
}

fn rank_cell(entry: &StandingsEntry, standings: &Standings) -> String {
    let shared = standings.entries().iter().filter(|e| e.tie_group == entry.tie_group).count() > 1;
    if shared {
        format!("{}=", entry.rank)
    } else {
        entry.rank.to_string()
    }
}

fn describe_resolutions(standings: &Standings) -> String {
    let mut out = String::new();
    for record in standings.resolutions() {
        let outcome = match &record.outcome {
            TieOutcome::Resolved(groups) => {
                let parts: Vec<String> = groups.iter().map(|g| g.join(" = ")).collect();
                parts.join(" > ")
            }
            TieOutcome::PassThrough => "not separated".into(),
            TieOutcome::NotApplicable => "not applicable".into(),
            TieOutcome::Shared => "left shared".into(),
        };
        out.push_str(&format!("  {} [{}]: {outcome}\n", record.members.join(", "), record.policy));
    }
    out
}

fn score(args: ScoreArgs, style: Style) -> CmdResult {
    let event = require_source(&args.source)?;
    let system = build_system(&args.method, &args.weights, &args.tiebreak, &event.field)?;
    let standings = rank_field(&event.field, &system)?;
    let stages = event.field.stage_names();
    match args.format {
        Format::Csv => {
            let mut header = vec!["rank".to_string(), "name".to_string()];
            header.extend(stages.iter().cloned());
            header.push("score".into());
            let mut out = csv_line(&header);
            for e in standings.entries() {
                let mut row = vec![e.rank.to_string(), e.name.clone()];
                row.extend(e.ranks.iter().map(|r| r.to_string()));
                row.push(e.score.to_string());
                out.push_str(&csv_line(&row));
            }
            Ok(out)
        }
        Format::Text => {
            let mut header = vec!["rank".to_string(), "name".to_string()];
            header.extend(stages.iter().cloned());
            header.push("score".into());
            let mut align = vec![Align::Right, Align::Left];
            align.extend(std::iter::repeat_n(Align::Right, stages.len() + 1));
            let rows: Vec<Vec<String>> = standings
                .entries()
                .iter()
                .map(|e| {
                    let mut row = vec![rank_cell(e, &standings), e.name.clone()];
                    row.extend(e.ranks.iter().map(|r| r.to_string()));
                    row.push(e.score.to_string());
                    row
                })
                .collect();
            let mut out = format!("{}\n", style.bold(&event.label));
            out.push_str(&style.dim(&format!("method {}, tie-break {}\n", args.method, system.chain)));
            out.push('\n');
            out.push_str(&text_table(&header, &align, &rows, style));
            if !standings.resolutions().is_empty() {
                out.push_str("\ntie-breaks:\n");
                out.push_str(&describe_resolutions(&standings));
            }
            for note in &event.notes {
                out.push_str(&style.dim(&format!("note: {note}\n")));
            }
            Ok(out)
        }
    }
}

fn compare(args: CompareArgs, style: Style) -> CmdResult {
    let [a, b] = <[MethodSpec; 2]>::try_from(args.method.clone()).map_err(|given| {
        Failure::Usage(format!(
            "compare needs --method exactly twice, got {}; methods: {METHOD_NAMES}",
            given.len()
        ))
    })?;
    let event = require_source(&args.source)?;
    let system_a = build_system(&a, &args.weights, &args.tiebreak, &event.field)?;
    let system_b = build_system(&b, &args.weights, &args.tiebreak, &event.field)?;
    let report = compare_methods(&event.field, &system_a, &system_b, args.k)?;
    match args.format {
        Format::Csv => {
            let mut out = csv_line(&["name".into(), "rank_a".into(), "rank_b".into(), "delta".into()]);
            for row in &report.rows {
                out.push_str(&csv_line(&[
                    row.name.clone(),
                    row.rank_a.to_string(),
                    row.rank_b.to_string(),
                    row.delta.to_string(),
                ]));
            }
            Ok(out)
        }
        Format::Text => {
            let header = ["name".to_string(), format!("A: {a}"), format!("B: {b}"), "delta".into()];
            let align = [Align::Left, Align::Right, Align::Right, Align::Right];
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    let delta = if r.delta > 0 { format!("+{}", r.delta) } else { r.delta.to_string() };
                    vec![r.name.clone(), r.rank_a.to_string(), r.rank_b.to_string(), delta]
                })
                .collect();
            let list = |names: &[String]| if names.is_empty() { "-".to_string() } else { names.join(", ") };
            let mut out = format!("{}\n", style.bold(&event.label));
            out.push_str(&style.dim(&format!("tie-break {}\n", system_a.chain)));
            out.push('\n');
            out.push_str(&text_table(&header, &align, &rows, style));
            out.push('\n');
            out.push_str(&format!("top {} under {a} only: {}\n", report.k, list(&report.top_k_a_not_b)));
            out.push_str(&format!("top {} under {b} only: {}\n", report.k, list(&report.top_k_b_not_a)));
            out.push_str(&format!("Kendall tau distance: {}", report.distance.distance));
            if report.distance.approximate {
                out.push_str(" (remaining ties ordered by name)");
            }
            out.push('\n');
            if report.cut_splits_tie {
                out.push_str(&format!("note: a tie group straddles the top-{} cut\n", report.k));
            }
            Ok(out)
        }
    }
}

fn table(args: TableArgs, style: Style) -> CmdResult {
    let f = args.method.function()?;
    let table = generate_table(&f, args.n, args.scale, args.offset)?;
    match args.format {
        Format::Csv => Ok(table.to_csv()),
        Format::Text => {
            let rows: Vec<Vec<String>> = table.entries().map(|(r, p)| vec![r.to_string(), p.to_string()]).collect();
            let mut out = style.dim(&format!(
                "round({} * {} + {}), n = {}\n",
                args.scale, args.method, args.offset, args.n
            ));
            out.push_str(&text_table(&["rank".into(), "points".into()], &[Align::Right, Align::Right], &rows, style));
            Ok(out)
        }
    }
}

fn equiv(args: EquivArgs, style: Style) -> CmdResult {
    let f = args.method.function()?;
    let pair = equivalence_pair(&f, args.n)?;
    let (lo, hi) = pair.pair;
    match args.format {
        Format::Csv => Ok(format!(
            "method,n,a,b,residual\n{},{},{lo},{hi},{}\n",
            csv_line(&[args.method.to_string()]).trim_end(),
            args.n,
            pair.residual
        )),
        Format::Text => Ok(format!(
            "{} n = {}: pair ({lo}, {hi}), residual {:.3}\n",
            style.bold(&format!("{}", args.method)),
            args.n,
            pair.residual
        )),
    }
}

fn describe_field(label: &str, field: &EventField) -> String {
    format!(
        "ok {label}: {} competitors, {} stages ({}){}\n",
        field.len(),
        field.stage_count(),
        field.stage_names().join(", "),
        if field.reference().is_some() { ", with reference standings" } else { "" }
    )
}

fn validate(args: SourceArgs) -> CmdResult {
    match (&args.dataset, &args.input) {
        (None, None) => Ok(dataset::embedded_datasets()
            .iter()
            .map(|d| describe_field(d.name, &d.field))
            .collect()),
        (Some(name), _) => {
            let d = dataset::embedded(name).ok_or_else(|| unknown_dataset(name))?;
            Ok(describe_field(d.name, &d.field))
        }
        (None, Some(path)) => {
            let label = path.display().to_string();
            let field = load_event_path(path).map_err(|e| Failure::Core(Error::Validation(format!("{label}: {e}"))))?;
            Ok(describe_field(&label, &field))
        }
    }
}

fn simulate(args: SimulateArgs, style: Style) -> CmdResult {
    let specs = if args.method.is_empty() {
        vec![MethodSpec::Product, MethodSpec::Sum, MethodSpec::Sqrt]
    } else {
        args.method.clone()
    };
    let mut systems = Vec::with_capacity(specs.len());
    for spec in &specs {
        let mut system = ScoringSystem::new(spec.method()?).with_chain(args.tiebreak.clone());
        if let Some(w) = &args.weights {
            system = system.with_weights(w.clone());
        }
        systems.push(SimSystem { label: spec.to_string(), system });
    }
    let config = SimConfig {
        n: args.n,
        stages: args.stages,
        k: args.k,
        trials: args.trials,
        seed: args.seed,
        systems,
        threads: None,
    };
    let profile = args.force.clone().unwrap_or_default();
    let result = simulate_qualification(&config, &profile)?;
    match args.format {
        Format::Csv => Ok(result.to_csv()),
        Format::Text => {
            let forced: Vec<String> = profile.forced().iter().map(|(s, p)| format!("{}:{p}", s + 1)).collect();
            let mut out = style.dim(&format!(
                "n = {}, stages = {}, k = {}, trials = {}, seed = {}, forced = {}\n",
                args.n,
                args.stages,
                args.k,
                result.trials,
                result.seed,
                if forced.is_empty() { "none".to_string() } else { forced.join(",") }
            ));
            let rows: Vec<Vec<String>> = result
                .estimates
                .iter()
                .map(|e| vec![e.label.clone(), format!("{:.4}", e.estimate), format!("{:.4}", e.std_error)])
                .collect();
            out.push_str(&text_table(
                &["method".into(), "P(qualify)".into(), "stderr".into()],
                &[Align::Left, Align::Right, Align::Right],
                &rows,
                style,
            ));
            Ok(out)
        }
    }
}
