//! Command-line front end.
//!
//! Precedence for every setting: command-line flag, then configuration file
//! (`--config`), then built-in defaults. Progress goes to standard error,
//! results to files and `key=value` lines on standard output.
//!
//! Exit codes: 0 success, 1 validation or tolerance failure, 2 I/O or parse error.

use std::cell::RefCell;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use itertools::Itertools;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::ga::{self, history_csv, GenerationRecord, RunOptions};
use crate::io::{read_dataset, read_truth, write_atomic, write_dataset, write_edges};
use crate::metrics::{
    default_grid, heuristic_lambda, lambda_path_with, pr_curve, PathOptions, AUPR_CONVENTION,
};
use crate::oracle::{compare_inner_solvers, exhaustive_with, write_table, MAX_EXHAUSTIVE_P};
use crate::sem::{sample_dag, sample_heteroscedastic, sample_with_noise};
use crate::solver::{InnerProblem, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sparse-dag",
    version,
    about = "Sparse DAG structure learning from observational data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random sparse DAG and a dataset from its linear Gaussian SEM.
    Generate(GenerateArgs),
    /// Learn a DAG at a single penalty with the genetic search.
    Infer(InferArgs),
    /// Rank edges along a decreasing penalty grid; score against a truth file if given.
    Path(PathArgs),
    /// Compare the genetic search and the inner solver against brute force (p <= 8).
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Key-value configuration file (TOML, dotted keys such as ga.population_size)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for fitness evaluation [default: available parallelism]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory receiving output files [default: .]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Suppress per-generation progress on standard error
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct GaArgs {
    /// Population size N [default: 5 x p]
    #[arg(long)]
    pub population_size: Option<usize>,
    /// Crossover probability p_xo [default: 0.25]
    #[arg(long)]
    pub crossover_prob: Option<f64>,
    /// Mutation probability p_m [default: 0.5]
    #[arg(long)]
    pub mutation_prob: Option<f64>,
    /// Entropy stopping tolerance [default: 1e-6]
    #[arg(long)]
    pub entropy_tol: Option<f64>,
    /// Mean-fitness plateau tolerance [default: 1e-4]
    #[arg(long)]
    pub fitness_tol: Option<f64>,
    /// Generations compared for the plateau test [default: 5]
    #[arg(long)]
    pub plateau_window: Option<usize>,
    /// Maximum generations [default: 5 x p]
    #[arg(long)]
    pub max_generations: Option<usize>,
    /// Optional cap on distinct inner solves [default: none]
    #[arg(long)]
    pub max_evaluations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Lipschitz constant L [default: (2/n) ||X^T X||_F]
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Inner-solver stopping tolerance on successive iterates [default: 1e-6]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Inner-solver iteration cap [default: 10000]
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of nodes [default: 10]
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of edges [default: 15]
    #[arg(long)]
    pub edges: Option<usize>,
    /// Number of observations [default: 1000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Noise standard deviation [default: 0.1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Smallest edge magnitude [default: 0.5]
    #[arg(long)]
    pub w_min: Option<f64>,
    /// Largest edge magnitude [default: 2]
    #[arg(long)]
    pub w_max: Option<f64>,
    /// Draw per-node noise sd uniformly in [sigma/2, 3 sigma/2] instead of a shared sd
    #[arg(long)]
    pub heteroscedastic: bool,
    /// Dataset file name, relative to --out-dir
    #[arg(long, default_value = "dataset.csv")]
    pub data_file: PathBuf,
    /// Ground-truth edge list file name, relative to --out-dir
    #[arg(long, default_value = "truth.tsv")]
    pub truth_file: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Dataset CSV
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Penalty [default: 2 sqrt(sqrt(p) log p / n)]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Output edge list of the best model, relative to --out-dir
    #[arg(long, default_value = "model.tsv")]
    pub model: PathBuf,
    /// Output GA history CSV, relative to --out-dir
    #[arg(long, default_value = "history.csv")]
    pub history: PathBuf,
    #[command(flatten)]
    pub ga: GaArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    /// Dataset CSV
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Ground-truth edge list; enables the precision/recall output
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Explicit strictly decreasing penalties, comma-separated
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Default grid size [default: 30]
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Smallest default penalty as a fraction of lambda_max [default: 0.001]
    #[arg(long)]
    pub grid_ratio: Option<f64>,
    /// Output edge ranking, relative to --out-dir
    #[arg(long, default_value = "ranking.tsv")]
    pub ranking: PathBuf,
    /// Output precision/recall curve, relative to --out-dir
    #[arg(long, default_value = "prcurve.csv")]
    pub prcurve: PathBuf,
    #[command(flatten)]
    pub ga: GaArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Dataset CSV
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Penalty [default: 2 sqrt(sqrt(p) log p / n)]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of GA seeds to try
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Seeds that must reach the exhaustive minimum
    #[arg(long, default_value_t = 9)]
    pub min_successes: u64,
    /// Allowed GA-minus-exhaustive objective gap
    #[arg(long, default_value_t = 1e-6)]
    pub gap_tol: f64,
    /// Allowed entrywise difference between the two inner solvers
    #[arg(long, default_value_t = 1e-5)]
    pub diff_tol: f64,
    /// Proximal-solver tolerance used for the inner-solver comparison
    #[arg(long, default_value_t = 1e-10)]
    pub compare_tol: f64,
    /// Optional CSV dump of the per-permutation objective table
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub ga: GaArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
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
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Infer(a) => cmd_infer(&a, out, err),
        Command::Path(a) => cmd_path(&a, out, err),
        Command::OracleCheck(a) => cmd_oracle_check(&a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn base_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, common.seed);
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    set(&mut cfg.out_dir, common.out_dir.clone());
    Ok(cfg)
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn apply_ga(cfg: &mut RunConfig, a: &GaArgs) {
    if a.population_size.is_some() {
        cfg.population_size = a.population_size;
    }
    set(&mut cfg.crossover_prob, a.crossover_prob);
    set(&mut cfg.mutation_prob, a.mutation_prob);
    set(&mut cfg.entropy_tol, a.entropy_tol);
    set(&mut cfg.fitness_tol, a.fitness_tol);
    set(&mut cfg.plateau_window, a.plateau_window);
    if a.max_generations.is_some() {
        cfg.max_generations = a.max_generations;
    }
    if a.max_evaluations.is_some() {
        cfg.max_evaluations = a.max_evaluations;
    }
}

fn apply_solver(cfg: &mut RunConfig, a: &SolverArgs) {
    if a.lipschitz.is_some() {
        cfg.lipschitz = a.lipschitz;
    }
    set(&mut cfg.solver_tol, a.tol);
    set(&mut cfg.solver_max_iter, a.max_iter);
}

fn data_path(cfg: &RunConfig, flag: &Option<PathBuf>) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| cfg.data.clone())
        .ok_or_else(|| Error::InvalidConfig("no dataset given (use --data or files.data)".into()))
}

fn progress<'a>(
    err: &'a RefCell<&mut dyn Write>,
    quiet: bool,
) -> Option<Box<dyn Fn(&GenerationRecord) + 'a>> {
    (!quiet).then(|| {
        Box::new(move |r: &GenerationRecord| {
            let _ = writeln!(
                err.borrow_mut(),
                "generation {} mean_fitness {:.6e} best_fitness {:.6e} entropy {:.4} evals {}",
                r.generation,
                r.mean_fitness,
                r.best_fitness,
                r.entropy,
                r.evals
            );
        }) as Box<dyn Fn(&GenerationRecord) + 'a>
    })
}

pub fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = base_config(&a.common)?;
    set(&mut cfg.p, a.p);
    set(&mut cfg.n_edges, a.edges);
    set(&mut cfg.n, a.n);
    set(&mut cfg.sigma, a.sigma);
    set(&mut cfg.w_min, a.w_min);
    set(&mut cfg.w_max, a.w_max);
    cfg.heteroscedastic |= a.heteroscedastic;

    let spec = cfg.graph_spec();
    let truth = sample_dag(&spec)?;
    let data_seed = cfg.seed.wrapping_add(1);
    let sample = if cfg.heteroscedastic {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
        let sds: Vec<f64> = (0..cfg.p)
            .map(|_| cfg.sigma * rng.random_range(0.5..=1.5))
            .collect();
        sample_heteroscedastic(&truth, cfg.n, &sds, data_seed)?
    } else {
        sample_with_noise(&truth, cfg.n, cfg.sigma, data_seed)?
    };

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let data_path = cfg.out_dir.join(&a.data_file);
    let truth_path = cfg.out_dir.join(&a.truth_file);
    write_dataset(&sample.data, &data_path)?;
    write_edges(&truth.dag.edges(), &truth_path)?;
    emit(out, "seed", cfg.seed)?;
    emit(out, "data", data_path.display())?;
    emit(out, "truth", truth_path.display())?;
    emit(out, "edges", truth.dag.n_edges())?;
    Ok(EXIT_OK)
}

pub fn cmd_infer(a: &InferArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut cfg = base_config(&a.common)?;
    apply_ga(&mut cfg, &a.ga);
    apply_solver(&mut cfg, &a.solver);
    let ds = read_dataset(&data_path(&cfg, &a.data)?)?;
    let problem = InnerProblem::new(ds.x());
    let lambda = a
        .lambda
        .or(cfg.lambda)
        .unwrap_or_else(|| heuristic_lambda(ds.n(), ds.p()));
    let ga_cfg = cfg.ga_config(ds.p());

    let err = RefCell::new(err);
    let cb = progress(&err, a.common.quiet);
    let report = ga::run_with(
        &problem,
        lambda,
        &ga_cfg,
        RunOptions {
            lipschitz: cfg.lipschitz,
            solver_tol: Some(cfg.solver_tol),
            solver_max_iter: Some(cfg.solver_max_iter),
            on_generation: cb.as_deref(),
            ..RunOptions::default()
        },
    )?;

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let dag = report.best_dag();
    write_edges(&dag.edges(), &cfg.out_dir.join(&a.model))?;
    write_atomic(
        &cfg.out_dir.join(&a.history),
        history_csv(&report.history).as_bytes(),
    )?;

    emit(out, "lambda", lambda)?;
    emit(out, "objective", report.best_fitness())?;
    emit(out, "generations", report.generations)?;
    emit(out, "stop_reason", report.stop_reason)?;
    emit(out, "evaluations", report.evaluations)?;
    emit(out, "edges", dag.n_edges())?;
    emit(
        out,
        "permutation",
        report.best.perm.to_one_based().iter().join(" "),
    )?;
    emit(out, "converged", report.best_converged)?;
    Ok(EXIT_OK)
}

pub fn cmd_path(a: &PathArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut cfg = base_config(&a.common)?;
    apply_ga(&mut cfg, &a.ga);
    apply_solver(&mut cfg, &a.solver);
    set(&mut cfg.grid_size, a.grid_size);
    set(&mut cfg.grid_ratio, a.grid_ratio);
    let ds = read_dataset(&data_path(&cfg, &a.data)?)?;
    let truth_file = a.truth.clone().or_else(|| cfg.truth.clone());
    let truth = truth_file
        .as_deref()
        .map(|t| read_truth(t, ds.p()))
        .transpose()?;

    let problem = InnerProblem::new(ds.x());
    let grid = match &a.lambdas {
        Some(list) => list.clone(),
        None => default_grid(&problem, cfg.grid_size, cfg.grid_ratio)?,
    };
    let err = RefCell::new(err);
    let cb = progress(&err, a.common.quiet);
    let path = lambda_path_with(
        &problem,
        &grid,
        &cfg.ga_config(ds.p()),
        PathOptions {
            solver_tol: Some(cfg.solver_tol),
            solver_max_iter: Some(cfg.solver_max_iter),
            lipschitz: cfg.lipschitz,
            on_generation: cb.as_deref(),
        },
    )?;

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    path.ranked.write(&cfg.out_dir.join(&a.ranking))?;
    emit(out, "lambda_max", problem.lambda_max())?;
    emit(out, "grid_points", grid.len())?;
    emit(out, "edges_ranked", path.ranked.len())?;
    if let Some(truth) = truth {
        let curve = pr_curve(&path.ranked, &truth)?;
        curve.write(&cfg.out_dir.join(&a.prcurve))?;
        emit(out, "aupr_convention", AUPR_CONVENTION)?;
        emit(out, "aupr", curve.aupr)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_oracle_check(a: &OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut cfg = base_config(&a.common)?;
    apply_ga(&mut cfg, &a.ga);
    apply_solver(&mut cfg, &a.solver);
    let ds = read_dataset(&data_path(&cfg, &a.data)?)?;
    if ds.p() > MAX_EXHAUSTIVE_P {
        return Err(Error::ExplicitRefusal {
            p: ds.p(),
            count: (1..=ds.p() as u64).product(),
            limit: MAX_EXHAUSTIVE_P,
        });
    }
    let problem = InnerProblem::new(ds.x());
    let lambda = a
        .lambda
        .or(cfg.lambda)
        .unwrap_or_else(|| heuristic_lambda(ds.n(), ds.p()));
    let lipschitz = match cfg.lipschitz {
        Some(l) => l,
        None => problem.lipschitz_bound()?,
    };
    let solver = SolverConfig {
        lambda,
        lipschitz,
        tol: cfg.solver_tol,
        max_iter: cfg.solver_max_iter,
    };
    let oracle = exhaustive_with(&problem, lambda, &solver, a.table.is_some())?;
    if let (Some(path), Some(table)) = (&a.table, &oracle.table) {
        write_table(table, &cfg.out_dir.join(path))?;
    }
    emit(out, "oracle_objective", oracle.best_objective)?;
    emit(
        out,
        "oracle_permutation",
        oracle.best_perm.to_one_based().iter().join(" "),
    )?;

    let err = RefCell::new(err);
    let cb = progress(&err, a.common.quiet);
    let mut successes = 0;
    let mut max_gap = f64::NEG_INFINITY;
    for s in 0..a.seeds {
        let ga_cfg = cfg.ga_config(ds.p()).with_seed(cfg.seed.wrapping_add(s));
        let report = ga::run_with(
            &problem,
            lambda,
            &ga_cfg,
            RunOptions {
                lipschitz: Some(lipschitz),
                solver_tol: Some(cfg.solver_tol),
                solver_max_iter: Some(cfg.solver_max_iter),
                on_generation: cb.as_deref(),
                ..RunOptions::default()
            },
        )?;
        let gap = report.best_fitness() - oracle.best_objective;
        max_gap = max_gap.max(gap);
        if gap <= a.gap_tol {
            successes += 1;
        }
        writeln!(
            out,
            "seed={} ga_objective={} gap={}",
            ga_cfg.seed,
            report.best_fitness(),
            gap
        )
        .map_err(|e| Error::io("<stdout>", e))?;
    }

    let cmp = compare_inner_solvers(ds.x(), &oracle.best_perm, &solver.with_tol(a.compare_tol))?;
    emit(out, "successes", format!("{successes}/{}", a.seeds))?;
    emit(out, "max_gap", max_gap)?;
    emit(out, "inner_max_diff", cmp.max_abs_diff)?;
    emit(out, "inner_objective_gap", cmp.objective_gap)?;
    let pass = successes >= a.min_successes && cmp.max_abs_diff <= a.diff_tol;
    emit(out, "status", if pass { "pass" } else { "fail" })?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILURE })
}

fn emit(out: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{key}={value}").map_err(|e| Error::io(Path::new("<stdout>"), e))
}
