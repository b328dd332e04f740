use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pickroute::bench::{bench, Algo, BenchConfig};
use pickroute::dp::{solve_dp_with, DpConfig, DpError};
use pickroute::graph::{build_steiner_graph, metric_closure, SteinerGraph};
use pickroute::instance_io::{generate_file, parse, serialize, InstanceClass, InstanceFile};
use pickroute::milp::{
    assignment_from_tour, build_formulation, complete_auxiliaries, emit_lp, feasibility_check, format_assignment,
    parse_assignment, parse_lp, Formulation,
};
use pickroute::oracle::{held_karp_forced, Witness, HELD_KARP_CAP};
use pickroute::preprocess::{one_spanner, reduce_plain, reduce_with_constraints};
use pickroute::render::render_svg;
use pickroute::milp::cut_sets;

#[derive(Parser)]
#[command(name = "pickroute", version, about = "Exact picker routing in rectangular warehouses")]
struct Cli {
    /// Base seed for generated instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; more than one enables parallel layer expansion.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Largest number of cross-aisles the DP accepts.
    #[arg(long, global = true, default_value_t = 9)]
    max_h: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Draw instances of a class.
    Generate(GenerateArgs),
    /// Reduce an instance and write the result.
    Preprocess(PreprocessArgs),
    /// Solve an instance exactly.
    Solve(SolveArgs),
    /// Write a MILP model in LP format.
    ExportMilp(ExportArgs),
    /// Check a solution against an LP model.
    Validate(ValidateArgs),
    /// Time the solvers on generated instances.
    Bench(BenchArgs),
    /// Draw an instance as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Class as `v,h,n,policy,depot` or `scholz,v,n`.
    #[arg(long)]
    class: InstanceClass,
    /// Number of instances, with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output file, or directory when `count > 1`. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Keep the extremes of both sides of each largest gap, with forced arcs.
    Constraints,
    /// Drop products that leave the largest gap in place.
    Plain,
    /// Keep a distance-preserving subset of edges.
    Spanner,
    /// `constraints` followed by `spanner`.
    All,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::All)]
    mode: Mode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveAlgo {
    Dp,
    Oracle,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveAlgo::Dp)]
    algo: SolveAlgo,
    /// Print solver statistics.
    #[arg(long)]
    stats: bool,
    /// Memory ceiling of the DP state tables in MiB.
    #[arg(long)]
    max_table_mb: Option<u64>,
    /// Write the optimal tour as an integer MILP solution (`name value` lines).
    #[arg(long)]
    solution_out: Option<PathBuf>,
    /// Model the solution file is written for.
    #[arg(long, default_value = "scfs")]
    formulation: Formulation,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, default_value = "scfs+")]
    formulation: Formulation,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    /// Do not require integrality.
    #[arg(long)]
    relaxed: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Classes separated by `;`. Overrides `--preset`.
    #[arg(long)]
    classes: Option<String>,
    #[arg(long, value_enum, default_value_t = Preset::Small)]
    preset: Preset,
    /// Seeds per class, starting at `--seed`.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Comma-separated list of `dp` and `oracle`.
    #[arg(long, default_value = "dp")]
    algos: String,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Also write the CSV report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// v in {5, 15}, h in {3, 6}, n in {15, 60}.
    Small,
    /// v in {5, 15, 30}, h in {3, 6, 11}, n in {15, 60, 240}, without h = 11 with n = 240.
    Grid,
    /// Two cross-aisles, up to 30 aisles and 90 products.
    Scholz,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Overlay the optimal DP tour.
    #[arg(long)]
    tour: bool,
    /// Overlay the cut sets of the graph.
    #[arg(long)]
    cuts: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error carrying a process exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

const VALIDATION_FAILURE: u8 = 2;
const RESOURCE_CAP: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 1 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global().ok();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Exit>() {
                Some(Exit(code, _)) => ExitCode::from(*code),
                None => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(cli, args),
        Command::Preprocess(args) => cmd_preprocess(cli, args),
        Command::Solve(args) => cmd_solve(cli, args),
        Command::ExportMilp(args) => cmd_export(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Bench(args) => cmd_bench(cli, args),
        Command::Render(args) => cmd_render(cli, args),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).map_err(|e| Exit(VALIDATION_FAILURE, format!("{}: {e}", path.display())).into())
}

fn dp_config(cli: &Cli, max_table_mb: Option<u64>) -> DpConfig {
    DpConfig {
        max_h: cli.max_h,
        max_table_bytes: max_table_mb.map(|mb| mb << 20),
        parallel: cli.threads > 1,
        ..DpConfig::default()
    }
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    if args.count > 1 {
        let dir = args.out.as_deref().context("--out <dir> is required when --count > 1")?;
        fs::create_dir_all(dir)?;
        for seed in cli.seed..cli.seed + args.count {
            let file = generate_file(&args.class, seed)?;
            fs::write(dir.join(format!("{}_{seed}.json", args.class.name())), serialize(&file))?;
        }
        return Ok(());
    }
    let file = generate_file(&args.class, cli.seed)?;
    write_output(args.out.as_deref(), &serialize(&file))
}

fn cmd_preprocess(cli: &Cli, args: &PreprocessArgs) -> Result<()> {
    let file = read_instance(&args.input)?;
    let original = build_steiner_graph(&file.instance);
    let mut out = InstanceFile { meta: file.meta.clone(), ..InstanceFile::new(file.instance.clone()) };
    let spanner_edges = |g: &SteinerGraph| {
        one_spanner(g).edges().iter().map(|e| (e.u, e.v)).collect::<Vec<_>>()
    };
    match args.mode {
        Mode::Plain => out.instance = reduce_plain(&file.instance),
        Mode::Spanner => out.spanner_edges = Some(spanner_edges(&original)),
        Mode::Constraints | Mode::All => {
            let reduced = reduce_with_constraints(&file.instance);
            out.forced_arc_pairs = reduced.forced_locations();
            if args.mode == Mode::All {
                out.spanner_edges = Some(spanner_edges(&reduced.graph));
            }
            out.instance = reduced.instance;
        }
    }
    let arcs_after = 2 * out.spanner_edges.as_ref().map_or(build_steiner_graph(&out.instance).edges().len(), Vec::len);
    let products = (file.instance.n(), out.instance.n());
    let arcs = (original.arc_count(), arcs_after);
    let summary = match cli.format {
        Format::Csv => format!(
            "productsBefore,productsAfter,arcsBefore,arcsAfter,forcedPairs\n{},{},{},{},{}\n",
            products.0,
            products.1,
            arcs.0,
            arcs.1,
            out.forced_arc_pairs.len()
        ),
        Format::Table => format!(
            "products {} -> {}, arcs {} -> {}, forced pairs {}\n",
            products.0,
            products.1,
            arcs.0,
            arcs.1,
            out.forced_arc_pairs.len()
        ),
    };
    match &args.out {
        Some(path) => {
            fs::write(path, serialize(&out))?;
            print!("{summary}");
        }
        None => {
            print!("{}", serialize(&out));
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_solve(cli: &Cli, args: &SolveArgs) -> Result<()> {
    let file = read_instance(&args.input)?;
    let instance = &file.instance;
    match args.algo {
        SolveAlgo::Dp => {
            if !file.forced_arc_pairs.is_empty() {
                bail!(Exit(
                    VALIDATION_FAILURE,
                    "the DP does not honour forced arc pairs; solve the unreduced instance or use --algo oracle".into()
                ));
            }
            let result = match solve_dp_with(instance, &dp_config(cli, args.max_table_mb)) {
                Ok(r) => r,
                Err(e @ DpError::ResourceCapExceeded { .. }) => {
                    let DpError::ResourceCapExceeded { stats, .. } = &e;
                    if args.stats {
                        eprintln!("{}", serde_json::to_string(stats)?);
                    }
                    bail!(Exit(RESOURCE_CAP, e.to_string()));
                }
            };
            let walk: Vec<String> = result.tour.walk.iter().map(|v| v.to_string()).collect();
            match cli.format {
                Format::Csv => {
                    println!("cost,layers,peakStates,expansions,elapsedMs");
                    let s = &result.stats;
                    println!("{},{},{},{},{:.3}", result.cost, s.layers, s.peak_states, s.expansions, s.elapsed_ms);
                }
                Format::Table => {
                    println!("cost {}", result.cost);
                    println!("tour {}", walk.join(" "));
                    if args.stats {
                        let s = &result.stats;
                        println!(
                            "layers {} peak states {} expansions {} time {:.3} ms",
                            s.layers, s.peak_states, s.expansions, s.elapsed_ms
                        );
                    }
                }
            }
            if let Some(path) = &args.solution_out {
                let (model, reduced) = build_formulation(instance, args.formulation);
                let mut assignment = match (&reduced, args.formulation) {
                    (Some(r), _) => assignment_from_tour(&r.graph, &result.solution.to_tour_subgraph(&r.graph)),
                    (None, Formulation::Scf) => bail!("solutions can be written for scfs and scfs+ only"),
                    (None, _) => assignment_from_tour(&result.graph, &result.tour_subgraph),
                };
                complete_auxiliaries(&model, &mut assignment);
                fs::write(path, format_assignment(&assignment))?;
            }
        }
        SolveAlgo::Oracle => {
            let graph = build_steiner_graph(instance);
            let closure = metric_closure(&graph);
            let pairs: Vec<(usize, usize)> = file
                .forced_arc_pairs
                .iter()
                .map(|&(a, b)| (graph.product_vertex(a).unwrap_or(0), graph.product_vertex(b).unwrap_or(0)))
                .collect();
            let result = held_karp_forced(&closure, &pairs, HELD_KARP_CAP)
                .map_err(|e| Exit(RESOURCE_CAP, e.to_string()))?;
            let order = match &result.witness {
                Witness::VisitOrder(o) => o.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
                Witness::Subgraph(_) => String::new(),
            };
            match cli.format {
                Format::Csv => println!("cost\n{}", result.cost),
                Format::Table => {
                    println!("cost {}", result.cost);
                    println!("order {order}");
                }
            }
        }
    }
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> Result<()> {
    let file = read_instance(&args.input)?;
    let (model, _) = build_formulation(&file.instance, args.formulation);
    write_output(args.out.as_deref(), &emit_lp(&model))
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let model_text = fs::read_to_string(&args.model).with_context(|| format!("cannot read {}", args.model.display()))?;
    let model = parse_lp(&model_text).map_err(|e| Exit(VALIDATION_FAILURE, format!("{}: {e}", args.model.display())))?;
    let solution_text =
        fs::read_to_string(&args.solution).with_context(|| format!("cannot read {}", args.solution.display()))?;
    let assignment = parse_assignment(&solution_text)
        .map_err(|e| Exit(VALIDATION_FAILURE, format!("{}: {e}", args.solution.display())))?;
    let check = feasibility_check(&model, &assignment, args.relaxed);
    println!("objective {}", check.objective);
    for name in &check.unknown {
        eprintln!("warning: `{name}` is not a model variable");
    }
    if check.is_feasible() {
        println!("feasible");
        Ok(())
    } else {
        for v in &check.violations {
            println!("violated {v}");
        }
        bail!(Exit(VALIDATION_FAILURE, format!("{} violated constraints or bounds", check.violations.len())))
    }
}

fn preset_classes(preset: Preset) -> Vec<InstanceClass> {
    match preset {
        Preset::Small => InstanceClass::grid().into_iter().filter(|c| c.v <= 15 && c.h <= 6 && c.n <= 60).collect(),
        Preset::Grid => InstanceClass::grid().into_iter().filter(|c| !(c.h == 11 && c.n == 240)).collect(),
        Preset::Scholz => InstanceClass::scholz_grid(),
    }
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<()> {
    let classes = match &args.classes {
        Some(list) => list
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<InstanceClass>().map_err(anyhow::Error::msg))
            .collect::<Result<Vec<_>>>()?,
        None => preset_classes(args.preset),
    };
    let algos = args
        .algos
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<Algo>().map_err(anyhow::Error::msg))
        .collect::<Result<Vec<_>>>()?;
    let config = BenchConfig {
        classes,
        seeds: (cli.seed..cli.seed + args.seeds).collect(),
        algos,
        repeats: args.repeats.max(1),
        warmup: true,
        dp: DpConfig { max_table_bytes: Some(1 << 30), ..dp_config(cli, None) },
        parallel: cli.threads > 1,
    };
    let report = bench(&config);
    if let Some(path) = &args.out {
        fs::write(path, report.to_csv())?;
    }
    match cli.format {
        Format::Csv => print!("{}", report.to_csv()),
        Format::Table => print!("{}", report.to_table()),
    }
    if !report.costs_agree() {
        bail!(Exit(VALIDATION_FAILURE, "algorithms disagree on some instance".into()));
    }
    Ok(())
}

fn cmd_render(cli: &Cli, args: &RenderArgs) -> Result<()> {
    let file = read_instance(&args.input)?;
    let tour = if args.tour {
        match solve_dp_with(&file.instance, &dp_config(cli, None)) {
            Ok(r) => Some(r.tour_subgraph),
            Err(e) => bail!(Exit(RESOURCE_CAP, e.to_string())),
        }
    } else {
        None
    };
    let cuts = if args.cuts { cut_sets(&build_steiner_graph(&file.instance)) } else { Vec::new() };
    write_output(args.out.as_deref(), &render_svg(&file.instance, tour.as_ref(), &cuts))
}
