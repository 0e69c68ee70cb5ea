use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use xfersched::bench::{sweep, write_csv, write_json, Workload};
use xfersched::exact::{
    brute_force_free_order, brute_force_same_order, export_milp, FREE_ORDER_LIMIT, SAME_ORDER_LIMIT,
};
use xfersched::generators::{
    builtin_instance, gen_3partition, gen_synthetic, BuiltinInstance, Profile, ThreePartitionInput,
};
use xfersched::heuristics::ratio_to;
use xfersched::johnson::omim;
use xfersched::trace_io::{batched_omim, read_trace, schedule_in_batches, write_trace};
use xfersched::{
    min_capacity, run_heuristic, validate_schedule, workload_bounds, Error, HeuristicId, Instance, Schedule,
    ScheduleEntry, Task, TaskId,
};

const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Parser)]
#[command(name = "xfersched", version, about = "Order data transfers and computations under a memory capacity")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Schedule one trace with one heuristic.
    Run(RunArgs),
    /// Run heuristics over the capacity grid of several traces.
    Sweep(SweepArgs),
    /// Write a synthetic trace or a 3-Partition gadget.
    Gen(GenArgs),
    /// Exact optimum of a small instance.
    Oracle(OracleArgs),
    /// Write the MILP model in CPLEX-LP format.
    ExportMilp(ExportArgs),
    /// Check a schedule against a trace and capacity.
    Validate(ValidateArgs),
    /// Print workload totals, bounds and the minimum capacity.
    Characterize(CharacterizeArgs),
}

#[derive(Args)]
struct TraceCapacity {
    /// Trace CSV file, or a built-in instance such as builtin:order-gap.
    #[arg(long)]
    trace: String,
    /// Memory capacity; built-in instances default to their own.
    #[arg(long)]
    capacity: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: TraceCapacity,
    #[arg(long)]
    heuristic: HeuristicId,
    /// Schedule in consecutive batches of this many tasks.
    #[arg(long)]
    batch: Option<usize>,
    /// Write the schedule as JSON to this file ("-" for standard output).
    #[arg(long)]
    schedule: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, num_args = 1.., required = true)]
    trace: Vec<String>,
    /// Comma-separated heuristic names, or "all".
    #[arg(long)]
    heuristics: String,
    #[arg(long)]
    batch: Option<usize>,
    /// Directory receiving sweep.csv and sweep.json.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, required_unless_present = "gadget_3par", conflicts_with = "gadget_3par")]
    profile: Option<Profile>,
    #[arg(long, required_unless_present = "gadget_3par")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target ratio of total transfer time to total computation time.
    #[arg(long, default_value_t = 1.0)]
    bias: f64,
    /// Build the 3-Partition gadget from --a and --m instead.
    #[arg(long = "gadget-3par", requires_all = ["a", "m"])]
    gadget_3par: bool,
    #[arg(long, value_delimiter = ',')]
    a: Vec<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: TraceCapacity,
    /// Allow different transfer and computation orders.
    #[arg(long)]
    free_order: bool,
    /// Largest task count to attempt.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    schedule: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: TraceCapacity,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: TraceCapacity,
    /// Schedule JSON: an array of {id, comm_start, comp_start}.
    #[arg(long)]
    schedule: PathBuf,
}

#[derive(Args)]
struct CharacterizeArgs {
    #[arg(long)]
    trace: String,
}

/// Failure of the requested computation itself, as opposed to bad usage.
#[derive(Debug)]
struct Rejected(String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

fn load(trace: &str) -> anyhow::Result<(Vec<Task>, Option<f64>, String)> {
    if let Some(name) = trace.strip_prefix(BUILTIN_PREFIX) {
        let which: BuiltinInstance = name.parse()?;
        let inst = builtin_instance(which);
        return Ok((inst.tasks().to_vec(), Some(inst.capacity()), which.name().to_string()));
    }
    let file = File::open(trace).with_context(|| format!("cannot open trace {trace}"))?;
    let tasks = read_trace(BufReader::new(file)).with_context(|| format!("reading {trace}"))?;
    let id = Path::new(trace).file_stem().map_or_else(|| trace.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((tasks, None, id))
}

fn instance(input: &TraceCapacity) -> anyhow::Result<Instance> {
    let (tasks, builtin_capacity, _) = load(&input.trace)?;
    let Some(capacity) = input.capacity.or(builtin_capacity) else {
        bail!("--capacity is required for trace files");
    };
    let inst = Instance::new(tasks, capacity)?;
    if let Err(e) = inst.ensure_feasible() {
        return Err(Rejected(e.to_string()).into());
    }
    Ok(inst)
}

fn write_schedule(path: &Path, schedule: &Schedule) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(&schedule.entries())? + "\n";
    if path.as_os_str() == "-" {
        io::stdout().write_all(text.as_bytes())?;
    } else {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn order_text(order: &[TaskId]) -> String {
    order.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let inst = instance(&args.input)?;
    let (schedule, lower) = match args.batch {
        Some(size) => (schedule_in_batches(&inst, args.heuristic, size)?, batched_omim(inst.tasks(), size)?),
        None => (run_heuristic(&inst, args.heuristic)?.schedule, omim(inst.tasks())),
    };
    let makespan = schedule.makespan();
    println!("heuristic {}", args.heuristic);
    println!("makespan {makespan}");
    println!("omim {lower}");
    println!("ratio {}", ratio_to(makespan, lower));
    if let Some(path) = &args.schedule {
        write_schedule(path, &schedule)?;
    }
    Ok(())
}

fn parse_heuristics(list: &str) -> anyhow::Result<Vec<HeuristicId>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(HeuristicId::all());
    }
    list.split(',').filter(|s| !s.trim().is_empty()).map(|s| Ok(s.parse()?)).collect()
}

fn run_sweep(args: SweepArgs) -> anyhow::Result<()> {
    if args.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let heuristics = parse_heuristics(&args.heuristics)?;
    let mut workloads = Vec::new();
    for trace in &args.trace {
        let (tasks, _, id) = load(trace)?;
        workloads.push(Workload { id, tasks });
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;
    let rows = pool.install(|| sweep(&workloads, &heuristics, args.batch))?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let csv_path = args.out.join("sweep.csv");
    write_csv(&rows, BufWriter::new(File::create(&csv_path)?))?;
    let json_path = args.out.join("sweep.json");
    write_json(&rows, BufWriter::new(File::create(&json_path)?))?;
    println!("rows {}", rows.len());
    println!("csv {}", csv_path.display());
    println!("json {}", json_path.display());
    Ok(())
}

fn gen(args: GenArgs) -> anyhow::Result<()> {
    let tasks = if args.gadget_3par {
        let input = ThreePartitionInput::new(args.a.clone(), args.m.expect("required by clap"))?;
        let (inst, target) = gen_3partition(&input)?;
        println!("capacity {}", inst.capacity());
        println!("target {target}");
        inst.tasks().to_vec()
    } else {
        let profile = args.profile.expect("required by clap");
        gen_synthetic(profile, args.n.expect("required by clap"), args.seed, args.bias)?
    };
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_trace(&tasks, BufWriter::new(file))?;
    println!("tasks {}", tasks.len());
    Ok(())
}

fn oracle(args: OracleArgs) -> anyhow::Result<()> {
    let inst = instance(&args.input)?;
    let schedule = if args.free_order {
        let found = brute_force_free_order(&inst, args.limit.unwrap_or(FREE_ORDER_LIMIT))?;
        println!("makespan {}", found.makespan);
        println!("comm_order {}", order_text(&found.comm_order));
        println!("comp_order {}", order_text(&found.comp_order));
        found.schedule
    } else {
        let found = brute_force_same_order(&inst, args.limit.unwrap_or(SAME_ORDER_LIMIT))?;
        println!("makespan {}", found.makespan);
        println!("order {}", order_text(&found.order));
        found.schedule
    };
    if let Some(path) = &args.schedule {
        write_schedule(path, &schedule)?;
    }
    Ok(())
}

fn export(args: ExportArgs) -> anyhow::Result<()> {
    let inst = instance(&args.input)?;
    fs::write(&args.out, export_milp(&inst)).with_context(|| format!("writing {}", args.out.display()))?;
    println!("lp {}", args.out.display());
    Ok(())
}

fn validate(args: ValidateArgs) -> anyhow::Result<()> {
    let inst = instance(&args.input)?;
    let text = fs::read_to_string(&args.schedule).with_context(|| format!("reading {}", args.schedule.display()))?;
    let entries: Vec<ScheduleEntry> = serde_json::from_str(&text).context("parsing schedule JSON")?;
    let schedule = Schedule::from_entries(inst.tasks(), &entries)?;
    let report = validate_schedule(&inst, &schedule)?;
    println!("makespan {}", schedule.makespan());
    if report.feasible {
        println!("feasible");
        return Ok(());
    }
    for v in &report.violations {
        println!("violation {v}");
    }
    Err(Rejected(format!("{} violation(s)", report.violations.len())).into())
}

fn characterize(args: CharacterizeArgs) -> anyhow::Result<()> {
    let (tasks, _, _) = load(&args.trace)?;
    let b = workload_bounds(&tasks);
    println!("tasks {}", tasks.len());
    println!("sum_comm {}", b.sum_comm);
    println!("sum_comp {}", b.sum_comp);
    println!("lower {}", b.lower);
    println!("upper {}", b.upper);
    println!("omim {}", omim(&tasks));
    println!("min_capacity {}", min_capacity(&tasks)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run(a) => run(a),
        Cmd::Sweep(a) => run_sweep(a),
        Cmd::Gen(a) => gen(a),
        Cmd::Oracle(a) => oracle(a),
        Cmd::ExportMilp(a) => export(a),
        Cmd::Validate(a) => validate(a),
        Cmd::Characterize(a) => characterize(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let rejected = e.is::<Rejected>() || matches!(e.downcast_ref::<Error>(), Some(Error::Infeasible { .. }));
            ExitCode::from(if rejected { 1 } else { 2 })
        }
    }
}
