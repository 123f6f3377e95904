//! Run configuration: built-in defaults, overridden by a TOML file with flat
//! dotted keys, overridden by command-line flags.
//!
//! ```toml
//! seed = 7
//! ga.population_size = 40
//! ga.crossover_prob = 0.25
//! solver.tol = 1e-7
//! files.data = "dataset.csv"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ga::GaConfig;
use crate::metrics::{DEFAULT_GRID_RATIO, DEFAULT_GRID_SIZE};
use crate::sem::GraphSpec;
use crate::solver::SolverConfig;

/// Every key accepted in a configuration file.
pub const KEYS: &[&str] = &[
    "seed",
    "threads",
    "ga.population_size",
    "ga.crossover_prob",
    "ga.mutation_prob",
    "ga.entropy_tol",
    "ga.fitness_tol",
    "ga.plateau_window",
    "ga.max_generations",
    "ga.max_evaluations",
    "solver.lambda",
    "solver.lipschitz",
    "solver.tol",
    "solver.max_iter",
    "graph.p",
    "graph.edges",
    "graph.w_min",
    "graph.w_max",
    "graph.sigma",
    "graph.n",
    "graph.heteroscedastic",
    "path.grid_size",
    "path.grid_ratio",
    "files.data",
    "files.truth",
    "files.out_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,

    /// `None` means `5 p`.
    pub population_size: Option<usize>,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub entropy_tol: f64,
    pub fitness_tol: f64,
    pub plateau_window: usize,
    /// `None` means `5 p`.
    pub max_generations: Option<usize>,
    pub max_evaluations: Option<usize>,

    /// `None` selects the data-driven default of each command.
    pub lambda: Option<f64>,
    /// `None` means `(2/n) ||XᵀX||_F`.
    pub lipschitz: Option<f64>,
    pub solver_tol: f64,
    pub solver_max_iter: usize,

    pub p: usize,
    pub n_edges: usize,
    pub w_min: f64,
    pub w_max: f64,
    pub sigma: f64,
    pub n: usize,
    pub heteroscedastic: bool,

    pub grid_size: usize,
    pub grid_ratio: f64,

    pub data: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: None,
            population_size: None,
            crossover_prob: GaConfig::CROSSOVER_PROB,
            mutation_prob: GaConfig::MUTATION_PROB,
            entropy_tol: GaConfig::ENTROPY_TOL,
            fitness_tol: GaConfig::FITNESS_TOL,
            plateau_window: GaConfig::PLATEAU_WINDOW,
            max_generations: None,
            max_evaluations: None,
            lambda: None,
            lipschitz: None,
            solver_tol: SolverConfig::DEFAULT_TOL,
            solver_max_iter: SolverConfig::DEFAULT_MAX_ITER,
            p: 10,
            n_edges: 15,
            w_min: 0.5,
            w_max: 2.0,
            sigma: 0.1,
            n: 1000,
            heteroscedastic: false,
            grid_size: DEFAULT_GRID_SIZE,
            grid_ratio: DEFAULT_GRID_RATIO,
            data: None,
            truth: None,
            out_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_file(path)?;
        Ok(cfg)
    }

    /// Applies every key of a configuration file on top of `self`.
    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.merge_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn merge_str(&mut self, text: &str) -> std::result::Result<(), String> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        let mut flat = Vec::new();
        flatten("", &toml::Value::Table(table), &mut flat);
        for (key, value) in flat {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &toml::Value) -> std::result::Result<(), String> {
        let wrong = |what: &str| format!("key {key}: expected {what}, found {v}");
        let uint = || -> std::result::Result<usize, String> {
            v.as_integer()
                .and_then(|i| usize::try_from(i).ok())
                .ok_or_else(|| wrong("a non-negative integer"))
        };
        let float = || -> std::result::Result<f64, String> {
            v.as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .ok_or_else(|| wrong("a number"))
        };
        let path = || -> std::result::Result<PathBuf, String> {
            v.as_str()
                .map(PathBuf::from)
                .ok_or_else(|| wrong("a string"))
        };
        match key {
            "seed" => {
                self.seed = v
                    .as_integer()
                    .and_then(|i| u64::try_from(i).ok())
                    .ok_or_else(|| wrong("a non-negative integer"))?
            }
            "threads" => self.threads = Some(uint()?),
            "ga.population_size" => self.population_size = Some(uint()?),
            "ga.crossover_prob" => self.crossover_prob = float()?,
            "ga.mutation_prob" => self.mutation_prob = float()?,
            "ga.entropy_tol" => self.entropy_tol = float()?,
            "ga.fitness_tol" => self.fitness_tol = float()?,
            "ga.plateau_window" => self.plateau_window = uint()?,
            "ga.max_generations" => self.max_generations = Some(uint()?),
            "ga.max_evaluations" => self.max_evaluations = Some(uint()?),
            "solver.lambda" => self.lambda = Some(float()?),
            "solver.lipschitz" => self.lipschitz = Some(float()?),
            "solver.tol" => self.solver_tol = float()?,
            "solver.max_iter" => self.solver_max_iter = uint()?,
            "graph.p" => self.p = uint()?,
            "graph.edges" => self.n_edges = uint()?,
            "graph.w_min" => self.w_min = float()?,
            "graph.w_max" => self.w_max = float()?,
            "graph.sigma" => self.sigma = float()?,
            "graph.n" => self.n = uint()?,
            "graph.heteroscedastic" => {
                self.heteroscedastic = v.as_bool().ok_or_else(|| wrong("a boolean"))?
            }
            "path.grid_size" => self.grid_size = uint()?,
            "path.grid_ratio" => self.grid_ratio = float()?,
            "files.data" => self.data = Some(path()?),
            "files.truth" => self.truth = Some(path()?),
            "files.out_dir" => self.out_dir = path()?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// GA settings for a `p`-node dataset.
    pub fn ga_config(&self, p: usize) -> GaConfig {
        GaConfig {
            population_size: self.population_size.unwrap_or(5 * p),
            crossover_prob: self.crossover_prob,
            mutation_prob: self.mutation_prob,
            entropy_tol: self.entropy_tol,
            fitness_tol: self.fitness_tol,
            plateau_window: self.plateau_window,
            max_generations: self.max_generations.unwrap_or(5 * p),
            max_evaluations: self.max_evaluations,
            seed: self.seed,
            threads: self.threads,
        }
    }

    pub fn graph_spec(&self) -> GraphSpec {
        GraphSpec {
            p: self.p,
            n_edges: self.n_edges,
            weight_range: (self.w_min, self.w_max),
            noise_sd: self.sigma,
            seed: self.seed,
        }
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<(String, toml::Value)>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        other => out.push((prefix.to_owned(), other.clone())),
    }
}
