//! Genetic search over node orderings.
//!
//! Each individual is a [`Permutation`]; its fitness is the penalized
//! objective at the inner solver's optimum for that ordering. A generation
//! applies proportional selection, picks an even crossover subset, pairs it
//! at random, recombines with order-based crossover, mutates each child by
//! an adjacent swap, evaluates the children and puts them in place of their
//! parents. The search stops once the population's positional entropy or
//! the movement of its mean fitness falls below tolerance, or after
//! `max_generations` generations.
//!
//! All randomness comes from one seeded stream consumed only by the
//! operators. Evaluation is a deterministic parallel map, so results do not
//! depend on the number of threads.

pub mod operators;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{compose, Permutation, StrictLowerTriangular, WeightedDag};
use crate::solver::{InnerProblem, SolverConfig};

pub use operators::{
    crossover, crossover_with, entropy, mutate, mutate_at, select, select_indices,
    selection_probabilities,
};

/// Inner solutions keyed by ordering, used to warm-start later solves.
pub type WarmStarts = HashMap<Permutation, Arc<StrictLowerTriangular>>;

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub entropy_tol: f64,
    pub fitness_tol: f64,
    /// Number of past generations compared against when measuring mean-fitness movement.
    pub plateau_window: usize,
    /// Generations produced after the initial population.
    pub max_generations: usize,
    /// Optional cap on distinct inner solves.
    pub max_evaluations: Option<usize>,
    pub seed: u64,
    /// Worker threads for evaluation; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl GaConfig {
    pub const CROSSOVER_PROB: f64 = 0.25;
    pub const MUTATION_PROB: f64 = 0.5;
    pub const ENTROPY_TOL: f64 = 1e-6;
    pub const FITNESS_TOL: f64 = 1e-4;
    pub const PLATEAU_WINDOW: usize = 5;

    /// Defaults for a `p`-node problem: population and generation cap both `5 p`.
    pub fn for_nodes(p: usize) -> Self {
        Self {
            population_size: 5 * p,
            crossover_prob: Self::CROSSOVER_PROB,
            mutation_prob: Self::MUTATION_PROB,
            entropy_tol: Self::ENTROPY_TOL,
            fitness_tol: Self::FITNESS_TOL,
            plateau_window: Self::PLATEAU_WINDOW,
            max_generations: 5 * p,
            max_evaluations: None,
            seed: 0,
            threads: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size < 2 {
            return bad(format!(
                "population size must be >= 2, got {}",
                self.population_size
            ));
        }
        for (name, v) in [
            ("crossover", self.crossover_prob),
            ("mutation", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} probability must lie in [0, 1], got {v}"));
            }
        }
        if !(self.entropy_tol > 0.0 && self.fitness_tol > 0.0) {
            return bad("stopping tolerances must be > 0".into());
        }
        if self.plateau_window < 1 {
            return bad("plateau window must be >= 1".into());
        }
        if self.threads == Some(0) {
            return bad("thread count must be >= 1".into());
        }
        Ok(())
    }
}

/// An ordering with its cached inner solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub perm: Permutation,
    pub fitness: Option<f64>,
    pub t_star: Option<Arc<StrictLowerTriangular>>,
}

impl Individual {
    pub fn new(perm: Permutation) -> Self {
        Self {
            perm,
            fitness: None,
            t_star: None,
        }
    }

    /// The composed weight matrix of an evaluated individual.
    pub fn dag(&self) -> Option<WeightedDag> {
        self.t_star
            .as_ref()
            .map(|t| compose(&self.perm, t).expect("dimensions match"))
    }
}

/// Solves the inner problem for `ind.perm` and caches `(t_star, fitness)`.
pub fn evaluate(ind: Individual, problem: &InnerProblem, cfg: &SolverConfig) -> Result<Individual> {
    let rep = problem.solve(&ind.perm, cfg, None)?;
    Ok(Individual {
        perm: ind.perm,
        fitness: Some(rep.objective),
        t_star: Some(Arc::new(rep.t_star)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Entropy,
    FitnessPlateau,
    MaxGenerations,
    MaxEvaluations,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Entropy => "entropy",
            StopReason::FitnessPlateau => "fitness_plateau",
            StopReason::MaxGenerations => "max_generations",
            StopReason::MaxEvaluations => "max_evaluations",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    /// 1 for the initial population.
    pub generation: usize,
    pub mean_fitness: f64,
    /// Best fitness seen so far.
    pub best_fitness: f64,
    pub entropy: f64,
    /// Distinct inner solves so far.
    pub evals: usize,
}

#[derive(Debug, Clone)]
pub struct GaReport {
    pub best: Individual,
    pub best_converged: bool,
    pub generations: usize,
    pub stop_reason: StopReason,
    pub history: Vec<GenerationRecord>,
    pub evaluations: usize,
    /// Every inner solution computed during the run.
    pub solutions: WarmStarts,
}

impl GaReport {
    pub fn best_fitness(&self) -> f64 {
        self.best.fitness.expect("best individual is evaluated")
    }

    pub fn best_dag(&self) -> WeightedDag {
        self.best.dag().expect("best individual is evaluated")
    }
}

/// Renders the history as `generation,mean_fitness,best_fitness,entropy,evals`.
pub fn history_csv(history: &[GenerationRecord]) -> String {
    let mut out = String::from("generation,mean_fitness,best_fitness,entropy,evals\n");
    for r in history {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{}\n",
            r.generation, r.mean_fitness, r.best_fitness, r.entropy, r.evals
        ));
    }
    out
}

/// Optional inputs to [`run_with`].
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Overrides the `(2/n) ||XᵀX||_F` bound.
    pub lipschitz: Option<f64>,
    pub solver_tol: Option<f64>,
    pub solver_max_iter: Option<usize>,
    /// Replaces the random initial population; must hold `population_size` orderings.
    pub initial_population: Option<Vec<Permutation>>,
    /// Written over the first slots of the random initial population.
    pub injected: Vec<Permutation>,
    pub warm_starts: Option<&'a WarmStarts>,
    pub on_generation: Option<&'a dyn Fn(&GenerationRecord)>,
}

pub fn run(x: &Array2<f64>, lambda: f64, cfg: &GaConfig) -> Result<GaReport> {
    run_with(&InnerProblem::new(x), lambda, cfg, RunOptions::default())
}

#[derive(Clone)]
struct Solved {
    t_star: Arc<StrictLowerTriangular>,
    fitness: f64,
    converged: bool,
}

struct Evaluator<'a> {
    problem: &'a InnerProblem,
    solver: SolverConfig,
    warm: Option<&'a WarmStarts>,
    pool: Option<rayon::ThreadPool>,
    cache: HashMap<Permutation, Solved>,
}

impl Evaluator<'_> {
    fn solve_one(&self, perm: &Permutation) -> Result<Solved> {
        let init = self.warm.and_then(|w| w.get(perm)).map(|t| t.as_ref());
        let rep = self.problem.solve(perm, &self.solver, init)?;
        Ok(Solved {
            t_star: Arc::new(rep.t_star),
            fitness: rep.objective,
            converged: rep.converged,
        })
    }

    /// Fills in every unevaluated individual; returns the number of new solves.
    fn evaluate_all(&mut self, pop: &mut [Individual]) -> Result<usize> {
        let mut seen = HashSet::new();
        let missing: Vec<Permutation> = pop
            .iter()
            .filter(|ind| ind.fitness.is_none() && !self.cache.contains_key(&ind.perm))
            .filter(|ind| seen.insert(ind.perm.clone()))
            .map(|ind| ind.perm.clone())
            .collect();

        let solve_all = || {
            missing
                .par_iter()
                .map(|perm| self.solve_one(perm))
                .collect::<Result<Vec<_>>>()
        };
        let solved = match &self.pool {
            Some(pool) => pool.install(solve_all)?,
            None => solve_all()?,
        };
        let fresh = missing.len();
        for (perm, s) in missing.into_iter().zip(solved) {
            self.cache.insert(perm, s);
        }
        for ind in pop.iter_mut().filter(|ind| ind.fitness.is_none()) {
            let s = &self.cache[&ind.perm];
            ind.fitness = Some(s.fitness);
            ind.t_star = Some(Arc::clone(&s.t_star));
        }
        Ok(fresh)
    }
}

/// Runs the genetic search on a prepared problem.
pub fn run_with(
    problem: &InnerProblem,
    lambda: f64,
    cfg: &GaConfig,
    opts: RunOptions<'_>,
) -> Result<GaReport> {
    cfg.validate()?;
    let p = problem.p();
    if p < 2 {
        return Err(Error::InvalidDataset(format!(
            "need at least 2 nodes, got {p}"
        )));
    }
    let lipschitz = match opts.lipschitz {
        Some(l) => l,
        None => problem.lipschitz_bound()?,
    };
    let solver = SolverConfig {
        lambda,
        lipschitz,
        tol: opts.solver_tol.unwrap_or(SolverConfig::DEFAULT_TOL),
        max_iter: opts
            .solver_max_iter
            .unwrap_or(SolverConfig::DEFAULT_MAX_ITER),
    };
    solver.validate()?;
    let pool = match cfg.threads {
        Some(t) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?,
        ),
        None => None,
    };
    let mut eval = Evaluator {
        problem,
        solver,
        warm: opts.warm_starts,
        pool,
        cache: HashMap::new(),
    };

    let size = cfg.population_size;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut perms = match opts.initial_population {
        Some(init) => {
            if init.len() != size {
                return Err(Error::InvalidConfig(format!(
                    "initial population has {} individuals, expected {size}",
                    init.len()
                )));
            }
            init
        }
        None => (0..size)
            .map(|_| {
                let mut r: Vec<usize> = (0..p).collect();
                r.shuffle(&mut rng);
                Permutation::new(r).expect("shuffled range")
            })
            .collect(),
    };
    for (slot, inj) in opts.injected.into_iter().take(size).enumerate() {
        perms[slot] = inj;
    }
    if let Some(bad) = perms.iter().find(|q| q.len() != p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: bad.len(),
        });
    }

    let mut pop: Vec<Individual> = perms.into_iter().map(Individual::new).collect();
    let mut evaluations = eval.evaluate_all(&mut pop)?;

    let mut best = pop[0].clone();
    let mut generation = 1;
    let first = observe(&pop, generation, evaluations, &mut best);
    let mut entropy_now = first.entropy;
    let mut means = vec![first.mean_fitness];
    if let Some(cb) = opts.on_generation {
        cb(&first);
    }
    let mut history = vec![first];

    let stop_reason = loop {
        let e_j = plateau_measure(&means, cfg.plateau_window);
        if entropy_now <= cfg.entropy_tol {
            break StopReason::Entropy;
        }
        if e_j <= cfg.fitness_tol {
            break StopReason::FitnessPlateau;
        }
        if generation > cfg.max_generations {
            break StopReason::MaxGenerations;
        }
        if cfg.max_evaluations.is_some_and(|m| evaluations >= m) {
            break StopReason::MaxEvaluations;
        }

        let mut next = select(&pop, &mut rng)?;
        let mut subset: Vec<usize> = (0..size)
            .filter(|_| rng.random_bool(cfg.crossover_prob))
            .collect();
        if subset.len() % 2 == 1 {
            subset.remove(rng.random_range(0..subset.len()));
        }
        subset.shuffle(&mut rng);
        for pair in subset.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            let (c1, c2) = crossover(&next[a].perm, &next[b].perm, &mut rng);
            for (slot, child) in [(a, c1), (b, c2)] {
                let child = if rng.random_bool(cfg.mutation_prob) {
                    mutate(&child, &mut rng)
                } else {
                    child
                };
                next[slot] = Individual::new(child);
            }
        }
        evaluations += eval.evaluate_all(&mut next)?;
        pop = next;
        generation += 1;
        let rec = observe(&pop, generation, evaluations, &mut best);
        entropy_now = rec.entropy;
        means.push(rec.mean_fitness);
        if let Some(cb) = opts.on_generation {
            cb(&rec);
        }
        history.push(rec);
    };

    let best_converged = eval.cache[&best.perm].converged;
    let solutions = eval.cache.into_iter().map(|(k, s)| (k, s.t_star)).collect();
    Ok(GaReport {
        best,
        best_converged,
        generations: history.len(),
        stop_reason,
        history,
        evaluations,
        solutions,
    })
}

/// Updates the best-so-far individual and summarizes one population.
fn observe(
    pop: &[Individual],
    generation: usize,
    evals: usize,
    best: &mut Individual,
) -> GenerationRecord {
    let fitness = |i: &Individual| i.fitness.expect("population is evaluated");
    for ind in pop {
        if fitness(ind) < fitness(best) {
            *best = ind.clone();
        }
    }
    let mean_fitness = pop.iter().map(fitness).sum::<f64>() / pop.len() as f64;
    let (entropy, _) = entropy(pop.iter().map(|i| &i.perm));
    GenerationRecord {
        generation,
        mean_fitness,
        best_fitness: fitness(best),
        entropy,
        evals,
    }
}

/// Largest absolute change between the latest mean fitness and each of the
/// previous `window` means; infinite until one comparison exists.
fn plateau_measure(means: &[f64], window: usize) -> f64 {
    let Some((&current, past)) = means.split_last() else {
        return f64::INFINITY;
    };
    if past.is_empty() {
        return f64::INFINITY;
    }
    let start = past.len().saturating_sub(window);
    past[start..]
        .iter()
        .map(|m| (current - m).abs())
        .fold(0.0, f64::max)
}
