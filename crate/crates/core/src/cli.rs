//! Command-line front end. Machine output goes to stdout, diagnostics to
//! stderr. Exit status: 0 success, 1 violation or failed check, 2 usage or
//! format error.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::coverfree::{construct_family, reduction_schedule, verify_coverfree};
use crate::engine::graph::{build_graph, GraphFile, GraphSpec, Shape};
use crate::engine::{identity_inputs, Graph, Trace};
use crate::registry::NamedAlgorithm;
use crate::schedulers::{format_scheduling, make_scheduling, parse_scheduling, Property, SchedulerSpec, SearchConfig, Scheduling};
use crate::verify::{reproduce_table, run_checks, Table};
use crate::wsb::{self, Toy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "asynclocal", version, about = "Asynchronous LOCAL simulator, wait-free colorings and checkers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute an algorithm and write its trace.
    Run(RunArgs),
    /// Run checkers over a recorded trace.
    Verify(VerifyArgs),
    /// Look for a scheduling that violates a property.
    Search(SearchArgs),
    /// Reproduce a golden execution (table1 or table2).
    Repro { table: String },
    /// Build and check a cover-free family, or print a reduction schedule.
    Coverfree(CoverfreeArgs),
    /// Signed counts, equivalence classes and input families.
    #[command(subcommand)]
    Wsb(WsbCommand),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Shape (cycle:N, path:N, clique:N, circulant:N,K, tree:N,D[,SEED]) or a graph JSON file.
    #[arg(long)]
    pub graph: String,
    /// Identifiers in construction order, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ids: Option<Vec<u64>>,
    /// Identifier bound N.
    #[arg(long)]
    pub bound: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub algo: String,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Degree bound; defaults to the maximum degree.
    #[arg(long)]
    pub delta: Option<u64>,
    /// sync | random:seed=S,p=P,crash=R[,kill=V@T] | replay:FILE
    #[arg(long, default_value = "sync")]
    pub sched: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    /// Trace output; without it the trace goes to stdout.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Checks to run on the result, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub check: Vec<String>,
    /// Overrides the seed of a random scheduler.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// proper, palette, termination, parity; comma separated.
    #[arg(long, value_delimiter = ',', default_value = "proper,palette,termination")]
    pub check: Vec<String>,
    /// Also re-execute the recorded scheduling and compare, running invariant monitors.
    #[arg(long)]
    pub replay: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub algo: String,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub delta: Option<u64>,
    /// proper | palette | termination | livelock
    #[arg(long, default_value = "proper")]
    pub property: String,
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub crash: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_steps: u64,
    /// Writes the violating scheduling in replay format.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoverfreeArgs {
    #[arg(long, requires = "m")]
    pub k: Option<u64>,
    #[arg(long, requires = "k")]
    pub m: Option<u64>,
    /// Print every set of the family.
    #[arg(long)]
    pub dump: bool,
    /// Print the reduction schedule for this identifier bound instead.
    #[arg(long, conflicts_with_all = ["k", "m"], requires = "delta")]
    pub bound: Option<u64>,
    #[arg(long)]
    pub delta: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum WsbCommand {
    /// Univalued signed count of a toy algorithm by exhaustive enumeration.
    Count {
        #[arg(long)]
        algo: String,
        #[arg(long)]
        n: usize,
        /// Count the trimmed algorithm instead.
        #[arg(long)]
        trim: bool,
        #[arg(long, default_value_t = wsb::DEFAULT_STEP_BOUND)]
        step_bound: usize,
        /// Acknowledges a step bound above the default.
        #[arg(long)]
        allow_deep: bool,
    },
    /// Equivalence class of an execution, with the first member of an input family.
    Class {
        #[arg(long)]
        n: usize,
        /// Blocks as JSON, e.g. [[1,2],[3]].
        #[arg(long)]
        blocks: String,
        #[arg(long, default_value = "cycle")]
        family: String,
    },
    /// Divisibility and order-invariance of an input family.
    Family {
        /// cycle | exactly:K | leader
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
    },
    /// C(n, m) = 0 mod n for prime n.
    Binom {
        #[arg(long)]
        n: u64,
    },
}

/// Error with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure { code: EXIT_USAGE, message: message.to_string() }
}

type Outcome = Result<i32, Failure>;

/// Parses `argv` and runs; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Search(a) => cmd_search(a),
        Command::Repro { table } => cmd_repro(&table),
        Command::Coverfree(a) => cmd_coverfree(a),
        Command::Wsb(c) => cmd_wsb(c),
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable"));
}

pub fn load_graph(args: &GraphArgs) -> Result<Graph, Failure> {
    let shape = if Path::new(&args.graph).is_file() {
        let text = fs::read_to_string(&args.graph).map_err(|e| usage(format!("{}: {e}", args.graph)))?;
        let file: GraphFile = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", args.graph)))?;
        Shape::Explicit(file)
    } else {
        args.graph.parse::<Shape>().map_err(usage)?
    };
    let mut spec = GraphSpec::new(shape);
    if let Some(ids) = &args.ids {
        spec = spec.with_ids(ids.clone());
    }
    if let Some(b) = args.bound {
        spec = spec.with_bound(b);
    }
    build_graph(&spec).map_err(usage)
}

fn load_scheduling(text: &str, seed: Option<u64>, graph: &Graph) -> Result<(Scheduling, String), Failure> {
    let spec = if let Some(path) = text.strip_prefix("replay:") {
        let doc = fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
        let (blocks, crashed) = parse_scheduling(&doc).map_err(usage)?;
        SchedulerSpec::Replay { blocks, crashed }
    } else {
        match (text.parse::<SchedulerSpec>().map_err(usage)?, seed) {
            (SchedulerSpec::Random { p, crash_rate, kills, .. }, Some(seed)) => {
                SchedulerSpec::Random { seed, p, crash_rate, kills }
            }
            (spec, _) => spec,
        }
    };
    Ok((make_scheduling(&spec, graph).map_err(usage)?, spec.to_string()))
}

fn report_verdicts(verdicts: &[crate::verify::Verdict]) -> i32 {
    for v in verdicts {
        println!("{v}");
    }
    if verdicts.iter().all(|v| v.pass) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn cmd_run(a: RunArgs) -> Outcome {
    let graph = load_graph(&a.graph)?;
    let algo = NamedAlgorithm::for_graph(&a.algo, &graph, a.delta).map_err(usage)?;
    let (sched, described) = load_scheduling(&a.sched, a.seed, &graph)?;
    let trace = algo
        .execute(&graph, &identity_inputs(&graph), &sched, a.max_steps)
        .map_err(|e| Failure { code: EXIT_VIOLATION, message: e.to_string() })?;
    match &a.trace {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let mut out = std::io::BufWriter::new(file);
            trace.write_jsonl(&mut out).and_then(|_| out.flush()).map_err(|e| usage(e.to_string()))?;
            print_json(&serde_json::json!({
                "algorithm": trace.header.algorithm,
                "scheduler": described,
                "stop": trace.end.stop,
                "decisions": trace.decisions(),
                "max_runtime": trace.max_runtime(),
                "complete": trace.is_complete(),
            }));
        }
        None => print!("{}", trace.to_jsonl_string()),
    }
    if a.check.is_empty() {
        return Ok(EXIT_OK);
    }
    let names: Vec<&str> = a.check.iter().map(String::as_str).collect();
    let verdicts = run_checks(&trace, &names).map_err(usage)?;
    for v in &verdicts {
        eprintln!("{v}");
    }
    Ok(if verdicts.iter().all(|v| v.pass) { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let file = fs::File::open(&a.trace).map_err(|e| usage(format!("{}: {e}", a.trace.display())))?;
    let trace = Trace::<serde_json::Value>::read_jsonl(BufReader::new(file)).map_err(usage)?;
    let names: Vec<&str> = a.check.iter().map(String::as_str).collect();
    let mut verdicts = run_checks(&trace, &names).map_err(usage)?;
    if a.replay {
        let graph = trace.graph().clone();
        let algo = NamedAlgorithm::for_graph(&trace.header.algorithm, &graph, trace.header.delta).map_err(usage)?;
        let sched = Scheduling::replay_of(&trace);
        let steps = trace.steps.len() as u64;
        let again = algo
            .execute(&graph, &trace.header.inputs, &sched, steps.max(1))
            .map_err(|e| Failure { code: EXIT_VIOLATION, message: e.to_string() })?;
        let same = again.decisions() == trace.decisions() && again.steps == trace.steps;
        let v = crate::verify::Verdict::pass("replay");
        verdicts.push(if same {
            v
        } else {
            crate::verify::Verdict::fail(
                "replay",
                crate::verify::Witness::Message { text: "re-execution differs from the recorded trace".into() },
            )
        });
        verdicts.extend(
            algo.monitors(&graph, &trace.header.inputs, &sched, steps.max(1))
                .map_err(|e| Failure { code: EXIT_VIOLATION, message: e.to_string() })?,
        );
    }
    Ok(report_verdicts(&verdicts))
}

fn cmd_search(a: SearchArgs) -> Outcome {
    let graph = load_graph(&a.graph)?;
    let algo = NamedAlgorithm::for_graph(&a.algo, &graph, a.delta).map_err(usage)?;
    let property = Property::parse(&a.property, Some(algo.palette(&graph)))
        .ok_or_else(|| usage(format!("unknown property `{}`", a.property)))?;
    let config = SearchConfig {
        budget: a.budget,
        seed: a.seed,
        p: a.p,
        crash_rate: a.crash,
        max_steps: a.max_steps,
        ..Default::default()
    };
    let inputs = identity_inputs(&graph);
    let found = algo
        .search(&graph, &inputs, property, &config)
        .map_err(|e| Failure { code: EXIT_VIOLATION, message: e.to_string() })?;
    match found {
        None => {
            print_json(&serde_json::json!({ "property": a.property, "violation": null, "budget": a.budget }));
            Ok(EXIT_OK)
        }
        Some(v) => {
            print_json(&v);
            if let Some(path) = &a.out {
                // A livelock is replayed as its prefix followed by two periods.
                let mut blocks = v.scheduling.clone();
                for _ in 0..2 {
                    blocks.extend(v.period.iter().cloned());
                }
                fs::write(path, format_scheduling(&blocks)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
            Ok(EXIT_VIOLATION)
        }
    }
}

fn cmd_repro(table: &str) -> Outcome {
    let which: Table = table.parse().map_err(usage)?;
    let report = reproduce_table(which).map_err(|e| Failure { code: EXIT_VIOLATION, message: e.to_string() })?;
    print_json(&report);
    eprintln!("{}", report.verdict);
    Ok(if report.verdict.pass { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_coverfree(a: CoverfreeArgs) -> Outcome {
    if let (Some(n), Some(delta)) = (a.bound, a.delta) {
        print_json(&reduction_schedule(n, delta).summary());
        return Ok(EXIT_OK);
    }
    let (Some(k), Some(m)) = (a.k, a.m) else {
        return Err(usage("give --k and --m, or --bound and --delta"));
    };
    let fam = construct_family(k, m).map_err(usage)?;
    let ok = verify_coverfree(&fam);
    println!("{fam} size={} coverfree={ok}", fam.len());
    if a.dump {
        print!("{}", fam.dump());
    }
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn parse_family(name: &str, n: usize) -> Result<Vec<wsb::InputFunction>, Failure> {
    match name {
        "cycle" => Ok(wsb::cycle_family(n)),
        "leader" => Ok(wsb::leader_family(n)),
        _ => match name.strip_prefix("exactly:").map(str::parse::<usize>) {
            Some(Ok(k)) if k <= n => Ok(wsb::exactly_k_family(n, k)),
            _ => Err(usage(format!("unknown input family `{name}` (cycle, exactly:K, leader)"))),
        },
    }
}

fn cmd_wsb(c: WsbCommand) -> Outcome {
    let allow_large = crate::guard_override_from_env();
    match c {
        WsbCommand::Count { algo, n, trim, step_bound, allow_deep } => {
            if step_bound > wsb::DEFAULT_STEP_BOUND && !allow_deep {
                return Err(usage(format!("step bound above {} needs --allow-deep", wsb::DEFAULT_STEP_BOUND)));
            }
            let toy: Toy = algo.parse().map_err(usage)?;
            let report = if trim {
                wsb::univalued_signed_count(&wsb::trim(toy, n), n, step_bound, allow_large)
            } else {
                wsb::univalued_signed_count(&toy, n, step_bound, allow_large)
            };
            match report {
                Ok(r) => {
                    println!("{r}");
                    Ok(EXIT_OK)
                }
                Err(e @ wsb::WsbError::Guard { .. }) => Err(usage(e)),
                Err(e) => Err(Failure { code: EXIT_VIOLATION, message: e.to_string() }),
            }
        }
        WsbCommand::Class { n, blocks, family } => {
            let blocks: Vec<Vec<u64>> = serde_json::from_str(&blocks).map_err(|e| usage(format!("--blocks: {e}")))?;
            if blocks.iter().flatten().any(|&p| p == 0 || p > n as u64) || blocks.iter().any(Vec::is_empty) {
                return Err(usage("blocks must be nonempty subsets of 1..=n"));
            }
            let sigma = parse_family(&family, n)?
                .into_iter()
                .next()
                .ok_or_else(|| usage("input family is empty"))?;
            let exec = wsb::ExecutionRecord { n, blocks, complete: true, decisions: Default::default() };
            let class = wsb::equivalence_class(&exec, &sigma).map_err(usage)?;
            let sim = exec.classify().sim;
            for (b, s) in &class {
                print_json(&serde_json::json!({ "blocks": b, "input": s }));
            }
            let expected = binomial(n as u64, sim.len() as u64);
            eprintln!("class size {} with |SIM| = {}, C(n, |SIM|) = {expected}", class.len(), sim.len());
            Ok(if class.len() as u64 == expected { EXIT_OK } else { EXIT_VIOLATION })
        }
        WsbCommand::Family { family, n } => {
            let members = parse_family(&family, n)?;
            let report = wsb::check_input_family(&members, n).map_err(usage)?;
            print_json(&report);
            Ok(if report.pass { EXIT_OK } else { EXIT_VIOLATION })
        }
        WsbCommand::Binom { n } => {
            let verdict = wsb::binom_divisibility(n).map_err(usage)?;
            Ok(report_verdicts(&[verdict]))
        }
    }
}

/// Exact binomial coefficient for small arguments.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
