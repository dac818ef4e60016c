//! Command-line front end. Exit codes: 0 success, 1 infeasible instance or
//! failed validation, 2 usage or input error. Set `HEATE_LOG` (e.g.
//! `HEATE_LOG=debug`) for progress logs on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use heate_core::experiment::{placement_seed, run_experiment, ExperimentSpec};
use heate_core::fixtures;
use heate_core::heate::{run, Algorithm, HeateError};
use heate_core::milp::{
    brute_force_optimal_with, evaluate_objective, export_lp_with, validate_certificate, OracleError, Regime,
    SolutionCertificate, LP_MAX_WEIGHT,
};
use heate_core::topology::Topology;
use heate_core::traffic::{generate_matrix, GeneratorParams, TrafficMatrix};
use heate_core::weight_search::SearchConfig;

#[derive(Parser)]
#[command(name = "heate", version, about = "Energy-aware traffic engineering for hybrid SDN/IP networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded traffic matrix for a topology.
    GenTm {
        #[command(flatten)]
        topology: TopologyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        sigma_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm on one instance and print a summary.
    Run {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value = "heate")]
        algorithm: Algorithm,
        #[command(flatten)]
        search: SearchArgs,
        /// Place this many SDN switches (seeded by --seed) instead of using
        /// the node kinds from the topology file.
        #[arg(long)]
        sdn_count: Option<usize>,
        /// Write the final state as a JSON solution certificate.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Sweep SDN counts x seeded matrices and write CSV.
    Sweep {
        #[command(flatten)]
        topology: TopologyArg,
        /// Comma-separated algorithms, or `all`.
        #[arg(long, default_value = "heate", value_parser = parse_algorithms)]
        algorithm: AlgorithmList,
        #[command(flatten)]
        search: SearchArgs,
        /// A count, a list (`0,2,6`), an inclusive range (`0-23`) or a mix.
        #[arg(long, default_value = "6", value_parser = parse_counts)]
        sdn_count: CountList,
        #[arg(long, default_value_t = 50)]
        matrices: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        sigma_max: f64,
        /// Record per-row wall time (output is then no longer reproducible).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution certificate against the exact model.
    Validate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        beta: f64,
        #[arg(long, default_value = "strict")]
        regime: Regime,
        /// Only report these constraints, e.g. `2,3,4,5,11`.
        #[arg(long, value_delimiter = ',')]
        constraints: Vec<u8>,
    },
    /// Write the exact model in CPLEX LP format.
    ExportLp {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 0.8)]
        beta: f64,
        #[arg(long, default_value_t = LP_MAX_WEIGHT)]
        max_weight: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive optimum of a toy instance.
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 0.8)]
        beta: f64,
        /// Candidate link weights.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        weights: Vec<f64>,
        #[arg(long, default_value = "strict")]
        regime: Regime,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TopologyArg {
    /// Topology file, or one of the bundled names: geant, sprintlink, fig3,
    /// triangle.
    #[arg(long)]
    topology: String,
}

#[derive(Args)]
struct InstanceArgs {
    #[command(flatten)]
    topology: TopologyArg,
    /// Demand file; without it a matrix is generated from --seed.
    #[arg(long)]
    demands: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    sigma_max: f64,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 0.8)]
    beta: f64,
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    /// Keep pruning with the next least-utilized link after a rejection.
    #[arg(long)]
    try_next: bool,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            try_next_on_failure: self.try_next,
            ..SearchConfig::with_beta(self.beta).iterations(self.iterations)
        }
    }
}

#[derive(Clone)]
struct AlgorithmList(Vec<Algorithm>);

#[derive(Clone)]
struct CountList(Vec<usize>);

fn parse_algorithms(s: &str) -> Result<AlgorithmList, String> {
    if s == "all" {
        return Ok(AlgorithmList(Algorithm::ALL.to_vec()));
    }
    s.split(',').map(|a| a.trim().parse()).collect::<Result<_, _>>().map(AlgorithmList)
}

fn parse_counts(s: &str) -> Result<CountList, String> {
    let number = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("invalid count `{x}`"));
    let mut counts = Vec::new();
    for part in s.split(',') {
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (number(lo)?, number(hi)?);
                if lo > hi {
                    return Err(format!("empty range `{part}`"));
                }
                counts.extend(lo..=hi);
            }
            None => counts.push(number(part)?),
        }
    }
    Ok(CountList(counts))
}

/// Failure with its exit code.
enum Failure {
    Infeasible(String),
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load_topology(arg: &TopologyArg) -> Result<Topology, Failure> {
    let path = Path::new(&arg.topology);
    if !path.exists() {
        let bundled = match arg.topology.as_str() {
            "geant" => Some(fixtures::geant()),
            "sprintlink" => Some(fixtures::sprintlink()),
            "fig3" => Some(fixtures::fig3().0),
            "triangle" => Some(fixtures::triangle()),
            _ => None,
        };
        if let Some(topo) = bundled {
            return Ok(topo);
        }
    }
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Topology::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_instance(args: &InstanceArgs) -> Result<(Topology, TrafficMatrix), Failure> {
    let topo = load_topology(&args.topology)?;
    let tm = match &args.demands {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            TrafficMatrix::parse(&text, &topo).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => generate_matrix(&topo, &GeneratorParams { sigma_max: args.sigma_max, seed: args.seed })?,
    };
    Ok((topo, tm))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::GenTm { topology, seed, sigma_max, out } => {
            let topo = load_topology(&topology)?;
            let tm = generate_matrix(&topo, &GeneratorParams { sigma_max, seed })?;
            emit(out.as_deref(), &tm.to_text(&topo))
        }
        Command::Run { instance, algorithm, search, sdn_count, certificate } => {
            let (mut topo, tm) = load_instance(&instance)?;
            if let Some(k) = sdn_count {
                topo.place_sdn(k, placement_seed(instance.seed, k))?;
            }
            let result = match run(&topo, &tm, &search.config(), algorithm) {
                Ok(result) => result,
                Err(e @ HeateError::InitialInfeasible(_)) => return Err(Failure::Infeasible(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            let sdn: Vec<&str> = topo.sdn_nodes().map(|v| topo.node(v).name.as_str()).collect();
            let removed: Vec<String> = result.removed.iter().map(|p| topo.link_label(p.forward())).collect();
            println!("algorithm          {}", result.algorithm);
            println!("sdn switches       {}", if sdn.is_empty() { "-".to_string() } else { sdn.join(" ") });
            println!("links off          {}", if removed.is_empty() { "-".to_string() } else { removed.join(" ") });
            println!(
                "active links       {}/{}",
                result.topology.active_physical_links().count(),
                topo.physical_link_count()
            );
            println!("energy saving      {}", result.energy_saving_ratio);
            println!("max utilization    {}", result.max_utilization);
            println!("rounds             {}", result.rounds);
            println!("sdn allocations    {}", result.allocations.len());
            if let Some(path) = certificate {
                emit(Some(&path), &SolutionCertificate::from_result(&result).to_json())?;
            }
            Ok(())
        }
        Command::Sweep { topology, algorithm, search, sdn_count, matrices, seed, sigma_max, timing, out } => {
            let spec = ExperimentSpec {
                algorithms: algorithm.0,
                config: search.config(),
                sdn_counts: sdn_count.0,
                matrices,
                base_seed: seed,
                sigma_max,
                timing,
                ..ExperimentSpec::new(load_topology(&topology)?)
            };
            emit(out.as_deref(), &run_experiment(&spec)?.to_csv())
        }
        Command::Validate { instance, certificate, beta, regime, constraints } => {
            let (topo, tm) = load_instance(&instance)?;
            let text = fs::read_to_string(&certificate)
                .map_err(|e| Failure::Usage(format!("{}: {e}", certificate.display())))?;
            let cert = SolutionCertificate::from_json(&text)?;
            let mut report = validate_certificate(&topo, &tm, &cert, beta, regime)?;
            if !constraints.is_empty() {
                report = report.only(&constraints);
            }
            println!("objective {}", evaluate_objective(&cert));
            for v in &report.violations {
                println!("violated {v}");
            }
            if report.is_empty() {
                println!("no violations");
                Ok(())
            } else {
                Err(Failure::Infeasible(format!("{} violated constraint rows", report.len())))
            }
        }
        Command::ExportLp { instance, beta, max_weight, out } => {
            let (topo, tm) = load_instance(&instance)?;
            emit(out.as_deref(), &export_lp_with(&topo, &tm, beta, max_weight))
        }
        Command::Oracle { instance, beta, weights, regime, certificate } => {
            let (topo, tm) = load_instance(&instance)?;
            let result = match brute_force_optimal_with(&topo, &tm, beta, &weights, regime) {
                Ok(result) => result,
                Err(e @ OracleError::Infeasible) => return Err(Failure::Infeasible(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            let active: Vec<String> = result.active.iter().map(|p| topo.link_label(p.forward())).collect();
            println!("active directed links  {}", result.objective);
            println!("active physical links  {}", active.join(" "));
            println!("weights                {:?}", result.weights);
            if let Some(path) = certificate {
                emit(Some(&path), &result.certificate.to_json())?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("HEATE_LOG")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible(message)) => {
            eprintln!("heate: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(message)) => {
            eprintln!("heate: {message}");
            ExitCode::from(2)
        }
    }
}
