//! Command-line surface: instance generation and I/O, single solves,
//! oracle checks, batch benchmarking, diagram export, and the difficulty
//! score. Exit codes: 0 solved to optimality, 2 stopped at a limit,
//! 1 any error.

mod dot;
mod io;
mod table;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use diagcut::batch::{run_batch, BatchJob};
use diagcut::difficulty::difficulty_report;
use diagcut::domain::{Payload, PricingInstance, SolveResult, SolveStatus};
use diagcut::driver::{self, Method, MethodConfig, SolveMode};
use diagcut::generators::{generate_kip, generate_kpp, generate_maxsspp, generate_minscpp};
use diagcut::milp::Limits;
use diagcut::oracle::{brute_force_cpp, brute_force_kip};

use io::{instance_id, CliError, CliResult, InstanceFile, Provenance};
use table::{summarize, Row, HEADER};

/// Enumeration budget for the oracle before it refuses the instance.
const ORACLE_CAP: usize = 1_000_000;

#[derive(Parser)]
#[command(name = "diagcut", version, about = "Pricing and interdiction solver built on diagram reformulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded random instance files.
    Generate(GenerateArgs),
    /// Solve one instance and print a result row.
    Solve(SolveArgs),
    /// Solve one instance by brute-force enumeration.
    Oracle(OracleArgs),
    /// Run a method matrix over many instances.
    Bench(BenchArgs),
    /// Export an instance's diagram as DOT text.
    Diagram(DiagramArgs),
    /// Print the difficulty score and its components.
    Difficulty(DifficultyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemKind {
    Kpp,
    Maxsspp,
    Minscpp,
    Kip,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodName {
    Vf,
    Sd,
    Dd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeName {
    /// Lazy cuts inside one branch-and-bound run.
    Callback,
    /// Re-solve the master after every cut round.
    Iterative,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MethodName::Vf)]
    method: MethodName,
    /// Sampled solution pairs seeding a selection diagram.
    #[arg(long, default_value_t = 2)]
    pairs: usize,
    /// Sampled trajectories seeding a decision diagram.
    #[arg(long, default_value_t = 2)]
    width: usize,
    /// Decision-diagram layer count (item groups); one item per layer if absent.
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeName::Callback)]
    mode: ModeName,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Follower-value comparison tolerance.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
}

#[derive(Args)]
struct LimitArgs {
    /// Wall-clock limit in seconds.
    #[arg(long, env = "DIAGCUT_TIME_LIMIT")]
    time_limit: Option<f64>,
    /// Branch-and-bound node limit.
    #[arg(long, env = "DIAGCUT_NODE_LIMIT")]
    node_limit: Option<u64>,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            time: self.time_limit,
            nodes: self.node_limit,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    problem: ProblemKind,
    /// Item count (set count for minscpp).
    #[arg(long)]
    n: usize,
    /// Toll ratio (kpp), edge density (maxsspp), or weight ratio (minscpp);
    /// kip ignores it.
    #[arg(long, default_value_t = 0.5)]
    param: f64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    limits: LimitArgs,
    /// Also write the row (with header) to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the tolls and response after the row.
    #[arg(long)]
    dump_solution: bool,
}

#[derive(Args)]
struct OracleArgs {
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files (shell-expanded glob).
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Method spec, repeatable: vf | sd[:N] | dd[:W[:m]]; bare sd/dd take
    /// --pairs/--width/--layers.
    #[arg(long = "method", default_value = "vf")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pairs: usize,
    #[arg(long, default_value_t = 2)]
    width: usize,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeName::Callback)]
    mode: ModeName,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[command(flatten)]
    limits: LimitArgs,
    /// Write rows here instead of stdout (summary stays on stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagramArgs {
    file: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    /// Export the diagram left by the cut loop instead of the initial one.
    #[arg(long = "final")]
    final_diagram: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DifficultyArgs {
    file: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Diagram(args) => cmd_diagram(args),
        Command::Difficulty(args) => cmd_difficulty(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> CliResult<ExitCode> {
    fs::create_dir_all(&args.out_dir)?;
    let name = match args.problem {
        ProblemKind::Kpp => "kpp",
        ProblemKind::Maxsspp => "maxsspp",
        ProblemKind::Minscpp => "minscpp",
        ProblemKind::Kip => "kip",
    };
    for k in 0..args.count {
        let seed = args.seed + k as u64;
        let inst = match args.problem {
            ProblemKind::Kpp => generate_kpp(args.n, args.param, seed),
            ProblemKind::Maxsspp => generate_maxsspp(args.n, args.param, seed),
            ProblemKind::Minscpp => generate_minscpp(args.n, args.param, seed),
            ProblemKind::Kip => generate_kip(args.n, seed),
        };
        let file = InstanceFile::from_instance(
            &inst,
            Some(Provenance {
                generator: name.to_string(),
                params: serde_json::json!({ "n": args.n, "param": args.param }),
                seed,
            }),
        );
        let path = args
            .out_dir
            .join(format!("{name}_n{}_s{seed}.json", args.n));
        io::save(&path, &file)?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

/// Translates the method flags into a solver configuration plus the row
/// labels (method name and `N/W/m` column).
fn method_of(name: MethodName, pairs: usize, width: usize, layers: Option<usize>) -> Method {
    match name {
        MethodName::Vf => Method::ValueFunction,
        MethodName::Sd => Method::Selection { samples: pairs },
        MethodName::Dd => Method::Decision {
            samples: width,
            groups: layers,
        },
    }
}

fn method_labels(method: Method) -> (&'static str, String) {
    match method {
        Method::ValueFunction => ("vf", "-/-/-".to_string()),
        Method::Selection { samples } => ("sd", format!("{samples}/-/-")),
        Method::Decision { samples, groups } => (
            "dd",
            match groups {
                Some(m) => format!("-/{samples}/{m}"),
                None => format!("-/{samples}/-"),
            },
        ),
    }
}

fn config_of(method: Method, mode: ModeName, seed: u64, eps: f64, limits: Limits) -> MethodConfig {
    let mut config = MethodConfig::new(method);
    config.mode = match mode {
        ModeName::Callback => SolveMode::NativeCallback,
        ModeName::Iterative => SolveMode::IterativeResolve,
    };
    config.seed = seed;
    config.eps = eps;
    config.limits = limits;
    config
}

fn solve_any(inst: &PricingInstance, config: &MethodConfig) -> diagcut::error::Result<SolveResult> {
    match inst.payload {
        Payload::Interdiction(_) => driver::solve_kip(inst, config),
        _ => driver::solve_cpp(inst, config),
    }
}

fn status_code(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Optimal => ExitCode::SUCCESS,
        SolveStatus::Limit => ExitCode::from(2),
    }
}

fn cmd_solve(args: SolveArgs) -> CliResult<ExitCode> {
    let (_, inst) = io::load(&args.file)?;
    let m = &args.method;
    let method = method_of(m.method, m.pairs, m.width, m.layers);
    let config = config_of(method, m.mode, m.seed, m.eps, args.limits.limits());
    let res = solve_any(&inst, &config)?;
    let (label, nwm) = method_labels(method);
    let row = Row::from_result(
        instance_id(&args.file),
        label.to_string(),
        nwm,
        m.seed.to_string(),
        &res,
    );
    println!("{HEADER}");
    println!("{}", row.to_csv());
    if args.dump_solution {
        let tolls: Vec<String> = (0..inst.n).map(|i| format!("{}", res.tolls.get(i))).collect();
        let items: Vec<String> = res.response.items().iter().map(usize::to_string).collect();
        println!("# tolls {}", tolls.join(","));
        println!("# response {}", items.join(","));
    }
    if let Some(out) = &args.out {
        fs::write(out, format!("{HEADER}\n{}\n", row.to_csv()))?;
    }
    Ok(status_code(res.status))
}

fn cmd_oracle(args: OracleArgs) -> CliResult<ExitCode> {
    let (_, inst) = io::load(&args.file)?;
    let res = match inst.payload {
        Payload::Interdiction(_) => brute_force_kip(&inst)?,
        _ => brute_force_cpp(&inst, None, ORACLE_CAP)?,
    };
    let row = Row::from_result(
        instance_id(&args.file),
        "oracle".to_string(),
        "-/-/-".to_string(),
        "-".to_string(),
        &res,
    );
    println!("{HEADER}");
    println!("{}", row.to_csv());
    if let Some(out) = &args.out {
        fs::write(out, format!("{HEADER}\n{}\n", row.to_csv()))?;
    }
    Ok(ExitCode::SUCCESS)
}

/// `vf | sd[:N] | dd[:W[:m]]`, with the flag values as defaults.
fn parse_method_spec(
    spec: &str,
    pairs: usize,
    width: usize,
    layers: Option<usize>,
) -> CliResult<Method> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || -> CliError { format!("bad method spec {spec:?}").into() };
    let num = |s: &str| -> CliResult<usize> { s.parse().map_err(|_| bad()) };
    match parts.as_slice() {
        ["vf"] => Ok(Method::ValueFunction),
        ["sd"] => Ok(Method::Selection { samples: pairs }),
        ["sd", n] => Ok(Method::Selection { samples: num(n)? }),
        ["dd"] => Ok(Method::Decision {
            samples: width,
            groups: layers,
        }),
        ["dd", w] => Ok(Method::Decision {
            samples: num(w)?,
            groups: None,
        }),
        ["dd", w, m] => Ok(Method::Decision {
            samples: num(w)?,
            groups: Some(num(m)?),
        }),
        _ => Err(bad()),
    }
}

fn cmd_bench(args: BenchArgs) -> CliResult<ExitCode> {
    let methods: Vec<Method> = args
        .methods
        .iter()
        .map(|s| parse_method_spec(s, args.pairs, args.width, args.layers))
        .collect::<CliResult<_>>()?;
    let mut jobs = Vec::new();
    let mut labels = Vec::new();
    for path in &args.files {
        let (_, inst) = io::load(path)?;
        for &method in &methods {
            let config = config_of(method, args.mode, args.seed, args.eps, args.limits.limits());
            let (label, nwm) = method_labels(method);
            labels.push((instance_id(path), label.to_string(), nwm));
            jobs.push(BatchJob {
                instance: inst.clone(),
                config,
            });
        }
    }
    let outcomes = run_batch(&jobs);
    let mut rows = Vec::with_capacity(jobs.len());
    for ((instance, method, nwm), outcome) in labels.into_iter().zip(&outcomes) {
        match outcome {
            Ok(res) => rows.push(Row::from_result(
                instance,
                method,
                nwm,
                args.seed.to_string(),
                res,
            )),
            Err(e) => {
                eprintln!("error: {instance} {method}: {e}");
                rows.push(Row::failed(instance, method, nwm, args.seed.to_string()));
            }
        }
    }
    let mut table = String::from(HEADER);
    for row in &rows {
        table.push('\n');
        table.push_str(&row.to_csv());
    }
    table.push('\n');
    match &args.out {
        Some(out) => fs::write(out, &table)?,
        None => print!("{table}"),
    }
    for line in summarize(&rows) {
        println!("{line}");
    }
    if rows.iter().any(|r| r.status == "error") {
        Ok(ExitCode::FAILURE)
    } else if rows.iter().any(|r| r.status == "limit") {
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_diagram(args: DiagramArgs) -> CliResult<ExitCode> {
    let (_, inst) = io::load(&args.file)?;
    let m = &args.method;
    let method = method_of(m.method, m.pairs, m.width, m.layers);
    let config = config_of(method, m.mode, m.seed, m.eps, Limits::default());
    let diag = if args.final_diagram {
        match inst.payload {
            Payload::Interdiction(_) => driver::solve_kip_with_diagram(&inst, &config)?.1,
            _ => driver::solve_cpp_with_diagram(&inst, &config)?.1,
        }
    } else {
        driver::initial_diagram(&inst, &config)?
    };
    let text = dot::to_dot(&diag);
    match &args.out {
        Some(out) => fs::write(out, text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_difficulty(args: DifficultyArgs) -> CliResult<ExitCode> {
    let (_, inst) = io::load(&args.file)?;
    let report = difficulty_report(&inst, ORACLE_CAP)?;
    println!("untolled_value {}", report.untolled_value);
    println!("toll_free_value {}", report.toll_free_value);
    println!("leader_optimum {}", report.leader_optimum);
    println!("score {}", report.score);
    Ok(ExitCode::SUCCESS)
}
