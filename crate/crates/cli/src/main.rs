//! Command-line harness: generate margin-verified instances, run the
//! recovery algorithms, compare them across seeds, and verify margins.
//!
//! Exit codes: 0 success, 1 contract/margin/algorithm failure, 2 usage or
//! parse failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use recur_core::instances::{
    gen_adversarial_kmeans_perturbed, gen_ellipsoidal, gen_lb_hypercube, gen_lb_sphere,
    load_instance, save_instance, InstanceError,
};
use recur_core::oracle::{LatentInstance, SimulatedOracle};
use recur_core::recur::{
    clustering_error, recur, RecoveredClustering, RecurConfig, RunTrace, SamplingMode,
};
use recur_core::report::{progressive_errors, write_compare_csv, write_round_csv, CompareRow};
use recur_core::{scq_kmeans, BaselineConfig, SameClusterOracle};

#[derive(Parser)]
#[command(name = "recur", version, about = "Exact latent-cluster recovery from same-cluster queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a margin-verified instance and write it as JSON.
    Gen {
        #[command(subcommand)]
        generator: Generator,
    },
    /// Run one algorithm on an instance and report error, queries and time.
    Run(RunArgs),
    /// Run both algorithms across seeds and emit a long-format CSV.
    Compare(CompareArgs),
    /// Recompute per-cluster margins and check them against the declared gamma.
    Verify {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Subcommand)]
enum Generator {
    /// Ellipsoidal clusters with prescribed condition number.
    Ellipsoidal {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-cluster instance on which the binary-search baseline fails.
    Adversarial {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        gamma: f64,
        /// Optional displacement radius; 0 keeps coincident points.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sphere-packing instance with a hidden singleton pair.
    LbSphere {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Binary-hypercube instance with a hidden singleton.
    LbHypercube {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Recur,
    #[value(name = "scq-kmeans")]
    ScqKmeans,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Quota,
    Batch,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    instance: PathBuf,
    /// Margin handed to the algorithm (need not match the instance's).
    #[arg(long)]
    gamma_fed: f64,
    /// Residual fraction allowed to stay unlabeled (0 = exact recovery).
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Mode::Quota)]
    mode: Mode,
    /// Batch size for --mode batch; defaults to 10·k.
    #[arg(long)]
    batch_m: Option<usize>,
    /// Quota constant for --mode quota.
    #[arg(long, default_value_t = 1.0)]
    b_const: f64,
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    hull_expansion: bool,
    #[arg(long, default_value_t = 1e-3)]
    mvee_epsilon: f64,
    /// Phase-1 sample size for scq-kmeans; defaults to min(n, ⌈k·ln k/γ⁴⌉, 10k).
    #[arg(long)]
    phase1_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-round CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Oracle transcript CSV output path.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Tessellation debug dump (JSON, recur only).
    #[arg(long)]
    tess_dump: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    seeds: Vec<u64>,
    #[arg(long)]
    csv: PathBuf,
    /// Margin handed to both algorithms; defaults to the instance's gamma.
    #[arg(long)]
    gamma_fed: Option<f64>,
    /// Batch size for the recovery loop; defaults to 10·k.
    #[arg(long)]
    batch_m: Option<usize>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    hull_expansion: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Gen { generator } => cmd_gen(generator),
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Verify { instance } => cmd_verify(&instance),
    };
    match code {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Parse-level failures exit with 2, everything else with 1.
fn load_or_exit(path: &Path) -> Result<LatentInstance, ExitCode> {
    match load_instance(path) {
        Ok(i) => Ok(i),
        Err(e @ (InstanceError::ParseError(_) | InstanceError::Io(_))) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(2))
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(1))
        }
    }
}

fn print_margins(instance: &LatentInstance) -> Result<()> {
    match instance.margins()? {
        Some(margins) => {
            for (c, m) in margins.iter().enumerate() {
                println!("cluster {c} margin {m}");
            }
        }
        None => println!("unverifiable: instance carries no metrics"),
    }
    Ok(())
}

fn cmd_gen(generator: Generator) -> Result<ExitCode> {
    let (instance, out) = match generator {
        Generator::Ellipsoidal { n, k, d, gamma, kappa, seed, out } => {
            (gen_ellipsoidal(n, k, d, gamma, kappa, seed)?, out)
        }
        Generator::Adversarial { n, p, gamma, perturb, seed, out } => {
            (gen_adversarial_kmeans_perturbed(n, p, gamma, perturb, seed)?, out)
        }
        Generator::LbSphere { d, gamma, seed, out } => {
            let (instance, hidden) = gen_lb_sphere(d, gamma, seed)?;
            println!("hidden point id {hidden}");
            (instance, out)
        }
        Generator::LbHypercube { d, gamma, n, seed, out } => {
            let (instance, hidden) = gen_lb_hypercube(d, gamma, n, seed)?;
            println!("hidden point id {hidden}");
            (instance, out)
        }
    };
    print_margins(&instance)?;
    save_instance(&instance, &out)?;
    println!("written {}", out.display());
    Ok(ExitCode::SUCCESS)
}

struct RunOutcome {
    result: RecoveredClustering,
    per_round: Vec<(usize, Vec<usize>)>,
    tess_dumps: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn run_recur(
    instance: &LatentInstance,
    oracle: &mut SimulatedOracle,
    gamma_fed: f64,
    epsilon: f64,
    mode: SamplingMode,
    hull_expansion: bool,
    mvee_epsilon: f64,
    seed: u64,
) -> Result<RunOutcome> {
    let config = RecurConfig {
        epsilon,
        sampling_mode: mode,
        use_hull_expansion: hull_expansion,
        mvee_epsilon,
        rng_seed: seed,
    };
    let mut trace = RunTrace::default();
    let result =
        recur(&instance.points, instance.k, gamma_fed, &config, oracle, Some(&mut trace))?;
    let per_round: Vec<(usize, Vec<usize>)> =
        trace.rounds.iter().map(|r| (r.local_id, r.assigned.clone())).collect();
    let tess_dumps = trace
        .rounds
        .iter()
        .flat_map(|r| r.tess.iter().map(|t| t.to_debug_json()))
        .collect();
    Ok(RunOutcome { result, per_round, tess_dumps })
}

fn run_baseline(
    instance: &LatentInstance,
    oracle: &mut SimulatedOracle,
    gamma_fed: f64,
    phase1_samples: Option<usize>,
    seed: u64,
) -> Result<RunOutcome> {
    let config = match phase1_samples {
        Some(samples) => BaselineConfig { phase1_samples: samples, rng_seed: seed },
        None => BaselineConfig::with_default_samples(instance.n(), instance.k, gamma_fed, seed),
    };
    let mut per_round = Vec::new();
    let result = scq_kmeans(
        &instance.points,
        instance.k,
        gamma_fed,
        &config,
        oracle,
        Some(&mut per_round),
    )?;
    Ok(RunOutcome { result, per_round, tess_dumps: Vec::new() })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let instance = match load_or_exit(&args.instance) {
        Ok(i) => i,
        Err(code) => return Ok(code),
    };
    let mut oracle = if args.transcript.is_some() {
        SimulatedOracle::with_transcript(&instance)
    } else {
        SimulatedOracle::new(&instance)
    };
    let t0 = Instant::now();
    let outcome = match args.algo {
        Algo::Recur => {
            let mode = match args.mode {
                Mode::Quota => SamplingMode::Quota { b_const: args.b_const },
                Mode::Batch => {
                    SamplingMode::Batch { m: args.batch_m.unwrap_or(10 * instance.k) }
                }
            };
            run_recur(
                &instance,
                &mut oracle,
                args.gamma_fed,
                args.epsilon,
                mode,
                args.hull_expansion,
                args.mvee_epsilon,
                args.seed,
            )?
        }
        Algo::ScqKmeans => run_baseline(
            &instance,
            &mut oracle,
            args.gamma_fed,
            args.phase1_samples,
            args.seed,
        )?,
    };
    let wall = t0.elapsed().as_secs_f64();

    let error = clustering_error(&outcome.result.assignment, &instance.labels, instance.k);
    println!("error {error}");
    println!("queries {}", oracle.queries());
    println!("rounds {}", outcome.result.rounds.len());
    println!("wall_time_s {wall}");

    if let Some(path) = &args.csv {
        let errors =
            progressive_errors(instance.n(), &outcome.per_round, &instance.labels, instance.k);
        let mut out = BufWriter::new(File::create(path).context("creating csv")?);
        write_round_csv(&mut out, &outcome.result.rounds, &errors)?;
    }
    if let Some(path) = &args.transcript {
        let mut out = BufWriter::new(File::create(path).context("creating transcript")?);
        oracle.ledger().write_transcript_csv(&mut out)?;
    }
    if let Some(path) = &args.tess_dump {
        let mut out = BufWriter::new(File::create(path).context("creating tessellation dump")?);
        writeln!(out, "[")?;
        for (i, dump) in outcome.tess_dumps.iter().enumerate() {
            let sep = if i + 1 == outcome.tess_dumps.len() { "" } else { "," };
            writeln!(out, "{dump}{sep}")?;
        }
        writeln!(out, "]")?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let instance = match load_or_exit(&args.instance) {
        Ok(i) => i,
        Err(code) => return Ok(code),
    };
    let gamma_fed = args.gamma_fed.unwrap_or(instance.gamma);
    let batch_m = args.batch_m.unwrap_or(10 * instance.k);
    let mut rows: Vec<CompareRow> = Vec::new();
    for &seed in &args.seeds {
        let mut oracle = SimulatedOracle::new(&instance);
        let outcome = run_recur(
            &instance,
            &mut oracle,
            gamma_fed,
            0.0,
            SamplingMode::Batch { m: batch_m },
            args.hull_expansion,
            1e-3,
            seed,
        )?;
        let errors =
            progressive_errors(instance.n(), &outcome.per_round, &instance.labels, instance.k);
        for (stats, err) in outcome.result.rounds.iter().zip(&errors) {
            rows.push(CompareRow {
                algo: "recur".into(),
                seed,
                round: stats.round,
                queries_cumulative: stats.queries_cumulative,
                error: *err,
            });
        }

        let mut oracle = SimulatedOracle::new(&instance);
        let outcome = run_baseline(&instance, &mut oracle, gamma_fed, None, seed)?;
        let errors =
            progressive_errors(instance.n(), &outcome.per_round, &instance.labels, instance.k);
        for (stats, err) in outcome.result.rounds.iter().zip(&errors) {
            rows.push(CompareRow {
                algo: "scq-kmeans".into(),
                seed,
                round: stats.round,
                queries_cumulative: stats.queries_cumulative,
                error: *err,
            });
        }
    }
    let mut out = BufWriter::new(File::create(&args.csv).context("creating csv")?);
    write_compare_csv(&mut out, &rows)?;
    println!("written {}", args.csv.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(path: &Path) -> Result<ExitCode> {
    // Report margin violations with per-cluster values and exit code 1;
    // parse failures exit with 2.
    let instance = match load_instance(path) {
        Ok(i) => i,
        Err(InstanceError::MarginMismatch(msg)) => {
            eprintln!("margin violation: {msg}");
            return Ok(ExitCode::from(1));
        }
        Err(e @ (InstanceError::ParseError(_) | InstanceError::Io(_))) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    match instance.margins()? {
        Some(margins) => {
            let mut ok = true;
            for (c, m) in margins.iter().enumerate() {
                println!("cluster {c} margin {m}");
                if *m < instance.gamma * (1.0 - 1e-9) - 1e-12 {
                    ok = false;
                }
            }
            if ok {
                println!("margin ok (gamma {})", instance.gamma);
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("margin violation: some cluster is below gamma {}", instance.gamma);
                Ok(ExitCode::from(1))
            }
        }
        None => {
            println!("unverifiable: instance carries no metrics");
            Ok(ExitCode::SUCCESS)
        }
    }
}
