use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use tpath_core::generators::{chain, fixture_fig1, gen_mks, gen_random, MksInput, RandomParams};
use tpath_core::io::{from_json, to_json};
use tpath_core::lset::{check_bounds, compute_lsets, DEFAULT_LSET_CAP};
use tpath_core::model::Normalized;
use tpath_core::oracle::{is_tie_free, solve_exact, verify_plan, ExactOptions, TIE_FREE_EXHAUSTIVE_MAX_ARCS};
use tpath_core::sim::{simulate, simulate_all, DEFAULT_BRANCH_CAP};
use tpath_core::treedecomp::decompose;
use tpath_core::tw::{dp_solve, TwOptions};
use tpath_core::vc::{solve_vc, VcOptions};
use tpath_core::{EditPlan, Error, Instance, Rational, Semantics, VertexId};

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_CRITICAL: u8 = 3;
const EXIT_LIMIT: u8 = 4;
const EXIT_DISCREPANCY: u8 = 5;

#[derive(Parser)]
#[command(name = "tpath", version, about = "Edit a weighted DAG so a present-biased agent walks through critical arcs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check instance invariants and that every critical arc lies on an s-t path.
    Validate { instance: PathBuf },
    /// Restrict to vertices on s-t paths of G+A.
    Normalize {
        instance: PathBuf,
        /// Also print the maps from new to original ids.
        #[arg(long)]
        with_maps: bool,
    },
    /// Walk the agent on the base graph or on an edited graph.
    Simulate {
        instance: PathBuf,
        /// Plan JSON with `deletions` and `additions`.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// List every tie resolution instead of the lowest-rank walk.
        #[arg(long)]
        all: bool,
    },
    /// Find a minimum-cost edit plan.
    Solve(SolveArgs),
    /// Per-vertex path-cost sets and their bounds.
    Lset {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LSET_CAP)]
        cap: usize,
    },
    /// Nice tree decomposition of the skeleton of G+A.
    Decompose { instance: PathBuf },
    /// Write a generated instance.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output file; stdout when absent.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Verify a plan against an instance.
    CheckPlan {
        instance: PathBuf,
        plan: PathBuf,
        #[arg(long, value_enum, default_value_t = SemanticsArg::Lex)]
        semantics: SemanticsArg,
    },
    /// Run engines over a directory of instances and print CSV.
    Bench {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![Algo::Exact, Algo::Vc, Algo::Tw])]
        algos: Vec<Algo>,
        #[arg(long, default_value_t = 60_000)]
        timeout_ms: u64,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// The eight-vertex worked example.
    Fig1,
    /// Reduction instance from a Modified k-Sum input.
    Mks {
        /// Sets separated by `;`, elements by `,`, e.g. "1,2;3,5".
        #[arg(long)]
        sets: String,
        #[arg(long)]
        target: i64,
        #[arg(long, default_value = "1/100")]
        eps: Rational,
    },
    /// Seeded random DAG.
    Random(RandomArgs),
    /// Path of `p` arcs of weight `w`.
    Chain {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        w: i64,
    },
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    arcs: usize,
    #[arg(long, default_value_t = 0)]
    wmin: i64,
    #[arg(long, default_value_t = 9)]
    wmax: i64,
    #[arg(long, default_value_t = 2)]
    addable: usize,
    #[arg(long, default_value_t = 1)]
    critical: usize,
    #[arg(long, default_value = "1/2")]
    beta: Rational,
    #[arg(long)]
    r: Option<Rational>,
    #[arg(long)]
    tie_free: bool,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    algo: Algo,
    /// Defaults to lex for exact and vc, robust for tw.
    #[arg(long, value_enum)]
    semantics: Option<SemanticsArg>,
    /// Largest plan cost the exact engine tries.
    #[arg(long)]
    budget: Option<usize>,
    /// Vertex cover of the skeleton, e.g. "0,3,5".
    #[arg(long, value_delimiter = ',')]
    cover_hint: Option<Vec<VertexId>>,
    #[arg(long, default_value_t = DEFAULT_LSET_CAP)]
    lset_cap: usize,
    #[arg(long)]
    stats: bool,
    #[arg(long)]
    timeout_ms: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Exact,
    Vc,
    Tw,
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algo::Exact => "exact",
            Algo::Vc => "vc",
            Algo::Tw => "tw",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SemanticsArg {
    Lex,
    Robust,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Lex => Semantics::Lexicographic,
            SemanticsArg::Robust => Semantics::Robust,
        }
    }
}

/// A message for stderr and the process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INVALID, message: message.into() }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CriticalArcUnreachable(_) => EXIT_CRITICAL,
        Error::LSetExplosion(_)
        | Error::ExplosionGuard(_)
        | Error::BudgetExceeded { .. }
        | Error::TooLarge(_)
        | Error::Timeout => EXIT_LIMIT,
        _ => EXIT_INVALID,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let mut message = e.to_string();
        if matches!(e, Error::LSetExplosion(_)) {
            message.push_str("; try --algo vc or --algo exact, or raise --lset-cap");
        }
        Failure { code: exit_code(&e), message }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Validate { instance } => cmd_validate(&instance),
        Command::Normalize { instance, with_maps } => cmd_normalize(&instance, with_maps),
        Command::Simulate { instance, plan, all } => cmd_simulate(&instance, plan.as_deref(), all),
        Command::Solve(args) => cmd_solve(&args),
        Command::Lset { instance, cap } => cmd_lset(&instance, cap),
        Command::Decompose { instance } => cmd_decompose(&instance),
        Command::Gen { kind, output } => cmd_gen(kind, output.as_deref()),
        Command::CheckPlan { instance, plan, semantics } => cmd_check_plan(&instance, &plan, semantics.into()),
        Command::Bench { dir, algos, timeout_ms } => cmd_bench(&dir, &algos, Duration::from_millis(timeout_ms)),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    Ok(from_json(&read_text(path)?)?)
}

fn read_plan(path: &Path) -> Result<EditPlan, Failure> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn print_json(v: &impl Serialize) {
    println!("{}", serde_json::to_string(v).expect("serializable"));
}

fn cmd_validate(path: &Path) -> CmdResult {
    let inst = read_instance(path)?;
    let violations = inst.validate();
    if !violations.is_empty() {
        let messages: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        print_json(&json!({ "valid": false, "violations": violations, "messages": messages }));
        return Ok(EXIT_INVALID);
    }
    match inst.normalize() {
        Ok(norm) => {
            print_json(&json!({
                "valid": true,
                "n": inst.n,
                "m": inst.m(),
                "pruned_vertices": inst.n - norm.instance.n,
                "pruned_arcs": inst.m() - norm.instance.m(),
            }));
            Ok(0)
        }
        Err(e @ Error::CriticalArcUnreachable(_)) => {
            print_json(&json!({ "valid": false, "messages": [e.to_string()] }));
            Ok(EXIT_CRITICAL)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_normalize(path: &Path, with_maps: bool) -> CmdResult {
    let norm = read_instance(path)?.normalize()?;
    if with_maps {
        let inst: Value = serde_json::from_str(&to_json(&norm.instance)).expect("canonical JSON");
        print_json(&json!({ "instance": inst, "vertex_map": norm.vertex_map, "arc_map": norm.arc_map }));
    } else {
        print!("{}", to_json(&norm.instance));
    }
    Ok(0)
}

fn cmd_simulate(path: &Path, plan: Option<&Path>, all: bool) -> CmdResult {
    let inst = read_instance(path)?;
    inst.ensure_valid()?;
    let plan = plan.map(read_plan).transpose()?.unwrap_or_default();
    let view = inst.apply(&plan)?;
    if all {
        print_json(&json!({ "outcomes": simulate_all(&view, DEFAULT_BRANCH_CAP)? }));
    } else {
        print_json(&simulate(&view));
    }
    Ok(0)
}

/// Maps a hint in original vertex ids onto the normalized instance; pruned
/// vertices carry no skeleton edges and are dropped.
fn map_cover(norm: &Normalized, hint: &[VertexId]) -> Vec<VertexId> {
    let back: BTreeMap<VertexId, VertexId> = norm.vertex_map.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    hint.iter().filter_map(|v| back.get(v).copied()).collect()
}

#[derive(Serialize)]
struct SolveReport {
    cost: usize,
    deletions: Vec<usize>,
    additions: Vec<usize>,
    algo: String,
    semantics: Semantics,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<Value>,
}

/// Result of one engine run on the normalized instance, lifted back to the
/// original ids.
struct EngineRun {
    plan: Option<EditPlan>,
    stats: Value,
}

fn run_engine(
    inst: &Instance,
    algo: Algo,
    semantics: Semantics,
    budget: Option<usize>,
    cover_hint: Option<&[VertexId]>,
    lset_cap: usize,
    deadline: Option<Instant>,
) -> Result<EngineRun, Error> {
    let norm = inst.normalize()?;
    let ni = &norm.instance;
    let start = Instant::now();
    let (plan, mut stats) = match algo {
        Algo::Exact => {
            let sol = solve_exact(ni, semantics, &ExactOptions { budget, deadline })?;
            (sol.map(|s| s.plan), json!({}))
        }
        Algo::Vc => {
            let opts = VcOptions { cover_hint: cover_hint.map(|h| map_cover(&norm, h)), deadline, ..VcOptions::default() };
            let (sol, stats) = solve_vc(ni, &opts)?;
            (sol.map(|s| s.plan), serde_json::to_value(stats).expect("serializable"))
        }
        Algo::Tw => {
            let opts = TwOptions { lset_cap, deadline, ..TwOptions::default() };
            let (sol, stats) = dp_solve(ni, &opts)?;
            (sol.map(|s| s.plan), serde_json::to_value(stats).expect("serializable"))
        }
    };
    stats["wall_ms"] = json!(start.elapsed().as_millis());
    Ok(EngineRun { plan: plan.map(|p| norm.lift_plan(&p)), stats })
}

fn engine_semantics(algo: Algo, requested: Option<SemanticsArg>) -> Result<Semantics, Failure> {
    let native = match algo {
        Algo::Exact => None,
        Algo::Vc => Some(Semantics::Lexicographic),
        Algo::Tw => Some(Semantics::Robust),
    };
    match (native, requested.map(Semantics::from)) {
        (None, r) => Ok(r.unwrap_or(Semantics::Lexicographic)),
        (Some(n), None) => Ok(n),
        (Some(n), Some(r)) if n == r => Ok(n),
        (Some(n), Some(r)) => Err(Failure::invalid(format!("--algo {algo} solves under {n} semantics, not {r}"))),
    }
}

fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let inst = read_instance(&args.instance)?;
    let semantics = engine_semantics(args.algo, args.semantics)?;
    if args.budget.is_some() && args.algo != Algo::Exact {
        return Err(Failure::invalid("--budget applies to --algo exact only"));
    }
    let deadline = args.timeout_ms.map(|ms| Instant::now() + Duration::from_millis(ms));
    let run = match run_engine(&inst, args.algo, semantics, args.budget, args.cover_hint.as_deref(), args.lset_cap, deadline) {
        Ok(run) => run,
        Err(e @ Error::BudgetExceeded { .. }) => {
            print_json(&json!({ "feasible": false, "reason": e.to_string() }));
            return Ok(EXIT_LIMIT);
        }
        Err(e) => return Err(e.into()),
    };
    let stats = args.stats.then_some(run.stats);
    match run.plan {
        Some(plan) => {
            print_json(&SolveReport {
                cost: plan.cost(),
                deletions: plan.deletions.into_iter().collect(),
                additions: plan.additions.into_iter().collect(),
                algo: args.algo.to_string(),
                semantics,
                stats,
            });
            Ok(0)
        }
        None => {
            let mut out = json!({ "feasible": false, "algo": args.algo.to_string(), "semantics": semantics });
            if let Some(s) = stats {
                out["stats"] = s;
            }
            print_json(&out);
            Ok(EXIT_INFEASIBLE)
        }
    }
}

fn cmd_lset(path: &Path, cap: usize) -> CmdResult {
    let inst = read_instance(path)?;
    inst.ensure_valid()?;
    let lsets = compute_lsets(&inst, cap)?;
    let per_vertex: BTreeMap<String, Vec<Rational>> =
        (0..inst.n).map(|v| (v.to_string(), lsets.vertex_rationals(v))).collect();
    print_json(&json!({
        "per_vertex": per_vertex,
        "union": lsets.union_rationals(),
        "bounds": check_bounds(&inst, &lsets),
    }));
    Ok(0)
}

fn cmd_decompose(path: &Path) -> CmdResult {
    let inst = read_instance(path)?;
    inst.ensure_valid()?;
    print_json(&decompose(&inst));
    Ok(0)
}

fn parse_sets(text: &str) -> Result<Vec<Vec<i64>>, Failure> {
    text.split(';')
        .map(|set| {
            set.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| Failure::invalid(format!("bad set element {x:?}"))))
                .collect()
        })
        .collect()
}

fn cmd_gen(kind: GenKind, output: Option<&Path>) -> CmdResult {
    let inst = match kind {
        GenKind::Fig1 => fixture_fig1(),
        GenKind::Mks { sets, target, eps } => {
            gen_mks(&MksInput { sets: parse_sets(&sets)?, target, epsilon: eps })?.instance
        }
        GenKind::Random(a) => gen_random(&RandomParams {
            seed: a.seed,
            n: a.n,
            target_arcs: a.arcs,
            weight_range: (a.wmin, a.wmax),
            addable: a.addable,
            critical: a.critical,
            beta: a.beta,
            r: a.r,
            tie_free: a.tie_free,
        })?,
        GenKind::Chain { p, w } => chain(p, w),
    };
    let text = to_json(&inst);
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::invalid(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_check_plan(path: &Path, plan: &Path, semantics: Semantics) -> CmdResult {
    let inst = read_instance(path)?;
    inst.ensure_valid()?;
    let report = verify_plan(&inst, &read_plan(plan)?, semantics)?;
    print_json(&report);
    Ok(if report.feasible { 0 } else { EXIT_INFEASIBLE })
}

#[derive(Debug, Clone, Default, Serialize)]
struct BenchRow {
    instance: String,
    algo: String,
    semantics: String,
    /// `true`, `false`, `timeout`, `limit`, `error`, or the cost list of a
    /// discrepancy row.
    feasible: String,
    cost: String,
    #[serde(rename = "wallMs")]
    wall_ms: String,
    width: String,
    #[serde(rename = "lsetSize")]
    lset_size: String,
    states: String,
}

fn bench_instance(path: &Path, algos: &[Algo], timeout: Duration) -> Vec<BenchRow> {
    let name = path.file_name().map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
    let inst = match read_instance(path).and_then(|i| i.ensure_valid().map(|_| i).map_err(Failure::from)) {
        Ok(i) => i,
        Err(f) => {
            return vec![BenchRow { instance: name, algo: "-".into(), feasible: format!("error: {}", f.message), ..BenchRow::default() }]
        }
    };
    let mut rows = Vec::new();
    let mut costs: Vec<(Algo, Option<usize>)> = Vec::new();
    for &algo in algos {
        let semantics = engine_semantics(algo, None).expect("native semantics");
        let start = Instant::now();
        let result = run_engine(&inst, algo, semantics, None, None, DEFAULT_LSET_CAP, Some(start + timeout));
        let mut row = BenchRow {
            instance: name.clone(),
            algo: algo.to_string(),
            semantics: semantics.to_string(),
            wall_ms: start.elapsed().as_millis().to_string(),
            ..BenchRow::default()
        };
        match result {
            Ok(run) => {
                let cost = run.plan.as_ref().map(EditPlan::cost);
                costs.push((algo, cost));
                row.feasible = cost.is_some().to_string();
                row.cost = cost.map(|c| c.to_string()).unwrap_or_default();
                let field = |k: &str| run.stats.get(k).map(|v| v.to_string()).unwrap_or_default();
                row.width = field("width");
                row.lset_size = field("lset_size");
                row.states = field("states");
            }
            Err(Error::Timeout) => row.feasible = "timeout".into(),
            Err(e) if exit_code(&e) == EXIT_LIMIT => row.feasible = format!("limit: {e}"),
            Err(e) => row.feasible = format!("error: {e}"),
        }
        rows.push(row);
    }
    let tie_free = || inst.m() <= TIE_FREE_EXHAUSTIVE_MAX_ARCS && is_tie_free(&inst);
    rows.extend(discrepancy_row(&name, &costs, tie_free));
    rows
}

/// Flags engines that disagree on a tie-free instance, where every
/// semantics has the same optimum. `tie_free` runs only on disagreement.
fn discrepancy_row(name: &str, costs: &[(Algo, Option<usize>)], tie_free: impl FnOnce() -> bool) -> Option<BenchRow> {
    let disagree = costs.windows(2).any(|w| w[0].1 != w[1].1);
    if !disagree || !tie_free() {
        return None;
    }
    let listing: Vec<String> = costs
        .iter()
        .map(|(a, c)| format!("{a}={}", c.map_or("infeasible".to_string(), |c| c.to_string())))
        .collect();
    Some(BenchRow { instance: name.into(), algo: "DISCREPANCY".into(), feasible: listing.join(" "), ..BenchRow::default() })
}

fn worker_count() -> usize {
    std::env::var("TPATH_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn cmd_bench(dir: &Path, algos: &[Algo], timeout: Duration) -> CmdResult {
    let entries = fs::read_dir(dir).map_err(|e| Failure::invalid(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Vec<BenchRow>)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..worker_count().min(files.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                let rows = bench_instance(path, algos, timeout);
                results.lock().unwrap().push((i, rows));
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(i, _)| *i);
    let mut writer = csv::Writer::from_writer(std::io::stdout());
    let mut discrepancy = false;
    let mut wrote = false;
    for row in results.into_iter().flat_map(|(_, rows)| rows) {
        discrepancy |= row.algo == "DISCREPANCY";
        writer.serialize(&row).map_err(|e| Failure::invalid(e.to_string()))?;
        wrote = true;
    }
    if !wrote {
        writer
            .write_record(["instance", "algo", "semantics", "feasible", "cost", "wallMs", "width", "lsetSize", "states"])
            .map_err(|e| Failure::invalid(e.to_string()))?;
    }
    writer.flush().map_err(|e| Failure::invalid(e.to_string()))?;
    Ok(if discrepancy { EXIT_DISCREPANCY } else { 0 })
}
