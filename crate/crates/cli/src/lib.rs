//! `edf-exact` command-line toolkit.
//!
//! Exit codes: 0 success or schedulable, 1 deadline miss, 2 bad input or usage.

pub mod fixtures;
pub mod gantt;
pub mod generate;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use edf_exact_core::io::{
    parse_task_set, parse_trace, report_to_json, task_set_to_json, trace_to_json,
};
use edf_exact_core::oracle::oracle_analysis;
use edf_exact_core::{
    analyze, leung_test, simulate, AnalysisError, ExactAnalysis, ExecutionModel, PriorityPolicy,
    TaskSystem, TestMode, Ticks, Verdict,
};
use rayon::prelude::*;

use generate::{DeadlineMode, GeneratorSpec, Utilization};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "edf-exact",
    version,
    about = "Exact global-EDF schedulability analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the exact test on a task-set file.
    Analyze(AnalyzeArgs),
    /// Simulate a task set and export the schedule trace.
    Simulate(SimulateArgs),
    /// Render a trace file as ASCII or SVG.
    Gantt(GanttArgs),
    /// Generate random task sets from a seed.
    Generate(GenerateArgs),
    /// Emit or analyze a built-in counterexample.
    Counterexample(CounterexampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    /// Simulate through t_up instead of stopping at the first steady match.
    #[arg(long)]
    pub no_early_exit: bool,
    /// Cross-check with the reference simulator (slow).
    #[arg(long, hide = true)]
    pub use_oracle: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Edf,
    Llf,
}

impl From<PolicyArg> for PriorityPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Edf => PriorityPolicy::Edf,
            PolicyArg::Llf => PriorityPolicy::Llf,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub input: PathBuf,
    #[arg(
        long,
        conflicts_with = "to_steady",
        required_unless_present = "to_steady"
    )]
    pub horizon: Option<Ticks>,
    /// Run until the steady phase is detected (or t_up).
    #[arg(long)]
    pub to_steady: bool,
    #[arg(long, value_enum, default_value_t = PolicyArg::Edf)]
    pub policy: PolicyArg,
    /// Trace output file; stdout when omitted.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GanttFormat {
    Ascii,
    Svg,
}

#[derive(Debug, Args)]
pub struct GanttArgs {
    pub trace: PathBuf,
    #[arg(long, value_enum, default_value_t = GanttFormat::Ascii)]
    pub format: GanttFormat,
    #[arg(long)]
    pub from: Option<Ticks>,
    #[arg(long)]
    pub to: Option<Ticks>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeadlineArg {
    Implicit,
    Constrained,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub tasks: usize,
    #[arg(long)]
    pub cpus: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,6")]
    pub periods: Vec<Ticks>,
    #[arg(long, default_value_t = 0)]
    pub max_offset: Ticks,
    /// Total utilization, as `p/q`, an integer or a decimal.
    #[arg(long)]
    pub utilization: Utilization,
    #[arg(long, value_enum, default_value_t = DeadlineArg::Implicit)]
    pub deadlines: DeadlineArg,
    /// Number of consecutive seeds starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// Output file, or directory when `--count` is above 1.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run the exact test on every generated system and summarize.
    #[arg(long)]
    pub analyze: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Action {
    Emit,
    Run,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Fixture name (`ce1` or `ce2`).
    pub name: String,
    #[arg(value_enum)]
    pub action: Action,
    /// Output file for `emit`; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure that maps to an exit code and a message on stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let color = report::color_from_env();
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, color, out),
        Command::Simulate(a) => cmd_simulate(&a, out, err),
        Command::Gantt(a) => cmd_gantt(&a, out),
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Counterexample(a) => cmd_counterexample(&a, color, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "edf-exact: {}", f.message);
            f.code
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("cannot write output: {e}"))),
    }
}

fn load_system(path: &Path) -> Result<TaskSystem, Failure> {
    let text = read_file(path)?;
    parse_task_set(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn analysis_failure(e: AnalysisError) -> Failure {
    Failure::input(format!("analysis failed: {e}"))
}

fn verdict_code(v: &Verdict) -> i32 {
    if v.is_schedulable() {
        EXIT_OK
    } else {
        EXIT_MISS
    }
}

fn cmd_analyze(args: &AnalyzeArgs, color: bool, out: &mut dyn Write) -> Outcome {
    let system = load_system(&args.input)?;
    let analysis = if args.use_oracle {
        oracle_analysis(&system)
    } else {
        let mode = if args.no_early_exit {
            TestMode::Literal
        } else {
            TestMode::EarlyExit
        };
        analyze(&system, mode)
    }
    .map_err(analysis_failure)?;
    let text = match args.report {
        ReportFormat::Json => report_to_json(&analysis),
        ReportFormat::Text => report::analysis_text(&analysis, color),
    };
    write_output(None, &text, out)?;
    Ok(verdict_code(&analysis.verdict))
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let system = load_system(&args.input)?;
    let policy = PriorityPolicy::from(args.policy);
    let (trace, miss) = match args.horizon {
        Some(h) => simulate(&system, policy, &ExecutionModel::Wcet, h, true)
            .map_err(|e| Failure::input(format!("simulation failed: {e}")))?,
        None => {
            let run = edf_exact_core::analysis::run_to_steady(&system, policy)
                .map_err(analysis_failure)?;
            let trace = run.trace.expect("trace was recorded");
            (trace, run.miss)
        }
    };
    write_output(args.trace.as_deref(), &trace_to_json(&trace), out)?;
    match miss {
        Some(m) => {
            let _ = writeln!(
                err,
                "deadline miss: task {} job {} at t={}; trace stops there",
                m.job.task + 1,
                m.job.job,
                m.at
            );
            Ok(EXIT_MISS)
        }
        None => Ok(EXIT_OK),
    }
}

fn cmd_gantt(args: &GanttArgs, out: &mut dyn Write) -> Outcome {
    let text = read_file(&args.trace)?;
    let trace =
        parse_trace(&text).map_err(|e| Failure::input(format!("{}: {e}", args.trace.display())))?;
    let (from, to) =
        gantt::window(&trace, args.from, args.to).map_err(|e| Failure::input(e.to_string()))?;
    let rendered = match args.format {
        GanttFormat::Ascii => gantt::render_ascii(&trace, from, to),
        GanttFormat::Svg if from == to => String::new(),
        GanttFormat::Svg => gantt::render_svg(&trace, from, to),
    };
    write_output(args.out.as_deref(), &rendered, out)?;
    Ok(EXIT_OK)
}

/// Outcome of analyzing one generated system in a campaign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignRow {
    pub seed: u64,
    pub c_tau: Ticks,
    pub verdict: Verdict,
}

impl CampaignRow {
    /// Whether the steady phase was found no later than `c_tau + 1` hyperperiods in.
    pub fn within_bound(&self) -> bool {
        self.verdict.steady_k().is_none_or(|k| k <= self.c_tau + 1)
    }
}

/// Analyzes seeds `seed..seed + count` in parallel; rows come back in seed order.
pub fn campaign(base: &GeneratorSpec, count: u64) -> Result<Vec<CampaignRow>, String> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let spec = GeneratorSpec {
                seed: base.seed.wrapping_add(i),
                ..base.clone()
            };
            let system = generate::generate(&spec).map_err(|e| e.to_string())?;
            let a = analyze(&system, TestMode::EarlyExit)
                .map_err(|e| format!("seed {}: {e}", spec.seed))?;
            Ok(CampaignRow {
                seed: spec.seed,
                c_tau: a.c_tau,
                verdict: a.verdict,
            })
        })
        .collect()
}

fn campaign_summary(rows: &[CampaignRow]) -> String {
    use std::collections::BTreeMap;
    use std::fmt::Write as _;
    let mut histogram: BTreeMap<u64, usize> = BTreeMap::new();
    let mut misses = 0;
    for r in rows {
        match r.verdict.steady_k() {
            Some(k) => *histogram.entry(k).or_default() += 1,
            None => misses += 1,
        }
    }
    let violations: Vec<u64> = rows
        .iter()
        .filter(|r| !r.within_bound())
        .map(|r| r.seed)
        .collect();
    let mut s = String::new();
    let _ = writeln!(s, "systems: {}", rows.len());
    let _ = writeln!(s, "schedulable: {}", rows.len() - misses);
    let _ = writeln!(s, "deadline miss: {misses}");
    let _ = writeln!(s, "steady_k histogram:");
    for (k, n) in &histogram {
        let _ = writeln!(s, "  k={k:<6} {n}");
    }
    let _ = writeln!(s, "steady_k above c_tau + 1: {}", violations.len());
    for seed in violations {
        let _ = writeln!(s, "  seed {seed}");
    }
    s
}

fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Outcome {
    let spec = GeneratorSpec {
        seed: args.seed,
        task_count: args.tasks,
        cpu_count: args.cpus,
        period_pool: args.periods.clone(),
        max_offset: args.max_offset,
        utilization_target: args.utilization,
        deadline_mode: match args.deadlines {
            DeadlineArg::Implicit => DeadlineMode::Implicit,
            DeadlineArg::Constrained => DeadlineMode::Constrained,
        },
    };
    spec.check()
        .map_err(|e| Failure::input(format!("infeasible generator spec: {e}")))?;
    if args.count == 0 {
        return Err(Failure::input("--count must be at least 1"));
    }

    if args.analyze {
        let rows = campaign(&spec, args.count).map_err(Failure::input)?;
        write_output(args.out.as_deref(), &campaign_summary(&rows), out)?;
        return Ok(if rows.iter().all(CampaignRow::within_bound) {
            EXIT_OK
        } else {
            EXIT_MISS
        });
    }

    if args.count == 1 {
        let system = generate::generate(&spec).map_err(|e| Failure::input(e.to_string()))?;
        write_output(args.out.as_deref(), &task_set_to_json(&system), out)?;
        return Ok(EXIT_OK);
    }

    let dir = args
        .out
        .as_deref()
        .ok_or_else(|| Failure::input("--count above 1 needs --out DIR"))?;
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
    for i in 0..args.count {
        let seed = spec.seed.wrapping_add(i);
        let system = generate::generate(&GeneratorSpec {
            seed,
            ..spec.clone()
        })
        .map_err(|e| Failure::input(e.to_string()))?;
        let path = dir.join(format!("system-{seed}.json"));
        write_output(Some(&path), &task_set_to_json(&system), out)?;
    }
    Ok(EXIT_OK)
}

/// Text for `counterexample NAME run`: the exact report followed by the Leung line.
pub fn counterexample_report(
    system: &TaskSystem,
    color: bool,
) -> Result<(ExactAnalysis, String), AnalysisError> {
    let analysis = analyze(system, TestMode::EarlyExit)?;
    let leung = leung_test(system)?;
    let mut text = report::analysis_text(&analysis, color);
    text.push_str(&report::leung_text(&leung, color));
    Ok((analysis, text))
}

fn cmd_counterexample(args: &CounterexampleArgs, color: bool, out: &mut dyn Write) -> Outcome {
    let system = fixtures::by_name(&args.name).ok_or_else(|| {
        Failure::input(format!(
            "unknown counterexample `{}` (known: {})",
            args.name,
            fixtures::NAMES.join(", ")
        ))
    })?;
    match args.action {
        Action::Emit => {
            write_output(args.out.as_deref(), &task_set_to_json(&system), out)?;
            Ok(EXIT_OK)
        }
        Action::Run => {
            let (analysis, text) =
                counterexample_report(&system, color).map_err(analysis_failure)?;
            write_output(args.out.as_deref(), &text, out)?;
            Ok(verdict_code(&analysis.verdict))
        }
    }
}
