//! Command-line front end: scenario generation, clustering, solving,
//! and experiment sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dbsnet::channel::coverage_radius;
use dbsnet::clustering::{linkage_to_csv, run_hc, HcParams};
use dbsnet::dnp::{
    build_graph, exact_sampler, graph_from_str, graph_to_string, run_ga, GaSetting,
};
use dbsnet::harness::{
    run_experiment, summarize_files, ExperimentConfig, TableParams, EXACT_TAG,
};
use dbsnet::scenario::{generate_pcp_scenario, load_scenario, save_scenario};
use dbsnet::{Error, Result};

#[derive(Parser)]
#[command(name = "plan", about = "Drone network planning toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a clustered-point-process scenario file.
    Gen(GenArgs),
    /// Run the constrained clustering on a scenario.
    Cluster(ClusterArgs),
    /// Solve the backhaul design problem on a saved graph.
    Solve(SolveArgs),
    /// Run a configured experiment sweep.
    Experiment(ExperimentArgs),
    /// Aggregate one or more metrics files.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Experiment config supplying the scenario knobs; defaults apply
    /// when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output scenario file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    /// Scenario file produced by `plan gen`.
    #[arg(long)]
    scenario: PathBuf,
    /// Maximum backhaul link distance, m.
    #[arg(long, default_value_t = 3000.0)]
    d_max: f64,
    /// Protected neighbor count.
    #[arg(long, default_value_t = 1)]
    n_b: usize,
    /// Coverage radius override, m; derived from pl_max when omitted.
    #[arg(long)]
    r_a: Option<f64>,
    /// Maximum tolerable access path loss, dB.
    #[arg(long, default_value_t = 110.0)]
    pl_max: f64,
    /// Output directory for the linkage log and the backhaul graph.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Graph file produced by `plan cluster`.
    #[arg(long)]
    graph: PathBuf,
    /// Solver setting tag (ENP, EVP, EEP, NNP, NVP, NEP, or EXACT).
    #[arg(long, default_value = "NVP")]
    setting: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluation budget when the setting is EXACT.
    #[arg(long, default_value_t = 100_000)]
    n_exact: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Base seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker thread count; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Metrics CSV files.
    files: Vec<PathBuf>,
    /// Emit JSON instead of the text table.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Toml(_) | Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => {
            let mut config = match &args.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = args.seed {
                config.scenario.seed = seed;
            }
            config.scenario.load_per_gn = config.params.r_n;
            config.scenario.mbs_count = config.params.b;
            let scenario = generate_pcp_scenario(&config.scenario)?;
            save_scenario(&scenario, &args.out)?;
            println!(
                "wrote {} ({} ground nodes, {} gateways)",
                args.out.display(),
                scenario.nodes.len(),
                scenario.gateways.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Cluster(args) => {
            let scenario = load_scenario(&args.scenario)?;
            let access = TableParams::default().access(args.pl_max);
            let r_a = match args.r_a {
                Some(r) => r,
                None => {
                    let diagonal = scenario.config.area_side * std::f64::consts::SQRT_2;
                    coverage_radius(&access, diagonal)?.radius
                }
            };
            let params = HcParams::new(args.d_max, args.n_b, r_a, access.h);
            let hc = run_hc(&scenario.gn_positions(), &params)?;
            std::fs::create_dir_all(&args.out_dir)
                .map_err(|e| Error::io(args.out_dir.display().to_string(), e))?;
            let linkage_path = args.out_dir.join("linkage.csv");
            std::fs::write(&linkage_path, linkage_to_csv(&hc.linkage))
                .map_err(|e| Error::io(linkage_path.display().to_string(), e))?;
            let fso = TableParams::default().fso(args.d_max, true);
            let graph = build_graph(&hc.placement, &scenario.gateways, &fso, &scenario.gn_loads())?;
            let graph_path = args.out_dir.join("graph.txt");
            std::fs::write(&graph_path, graph_to_string(&graph))
                .map_err(|e| Error::io(graph_path.display().to_string(), e))?;
            println!(
                "placed {} drones (r_a {:.1} m); wrote {} and {}",
                hc.placement.dbs_count(),
                r_a,
                linkage_path.display(),
                graph_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => {
            let text = std::fs::read_to_string(&args.graph)
                .map_err(|e| Error::io(args.graph.display().to_string(), e))?;
            let graph = graph_from_str(&text)?;
            let best = if args.setting == EXACT_TAG {
                exact_sampler(&graph, args.n_exact, args.seed).best
            } else {
                let setting = GaSetting::from_tag(&args.setting).ok_or_else(|| {
                    Error::Config(format!("unknown solver setting `{}`", args.setting))
                })?;
                let config = TableParams::default().ga(setting, args.seed);
                run_ga(&graph, &config)?.best
            };
            match best {
                Some(solution) => {
                    print!("{}", solution.render());
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("no valid design found");
                    Ok(ExitCode::from(3))
                }
            }
        }
        Command::Experiment(args) => {
            let mut config = ExperimentConfig::load(&args.config)?;
            if let Some(seed) = args.seed {
                config.base_seed = seed;
            }
            if let Some(dir) = args.out_dir {
                config.out_dir = dir.display().to_string();
            }
            if let Some(jobs) = args.jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build_global()
                    .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            }
            let out = run_experiment(&config)?;
            println!(
                "{} rows -> {} ({} instance failures)",
                out.rows.len(),
                out.metrics_path.display(),
                out.failures
            );
            if out.failures > 0 {
                Ok(ExitCode::from(3))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Summarize(args) => {
            let report = summarize_files(&args.files)?;
            if args.json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render_text());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
