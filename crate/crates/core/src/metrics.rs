//! Edge rankings, confusion counts and precision/recall curves.
//!
//! Rankings come either from the regularization path ([`lambda_path`]),
//! where an edge's score is the largest penalty at which it first enters
//! the best model, or from external tools via [`ingest_external_ranking`].
//! The area under the P/R curve uses right-step integration over recall,
//! anchored at recall 0 with the first point's precision.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::ga::{self, GaConfig, GenerationRecord, RunOptions, StopReason};
use crate::io::{read_edges, write_atomic};
use crate::model::{Permutation, WeightedDag};
use crate::solver::InnerProblem;

/// Integration convention recorded alongside AUPR values.
pub const AUPR_CONVENTION: &str = "right-step";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredEdge {
    pub source: usize,
    pub target: usize,
    /// Larger means more confident.
    pub score: f64,
}

/// Edges in non-increasing score order, without self-loops or repeated pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedEdges {
    edges: Vec<ScoredEdge>,
}

impl RankedEdges {
    /// Validates and stably sorts by descending score.
    pub fn new(mut edges: Vec<ScoredEdge>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &edges {
            if e.source == e.target {
                return Err(Error::InvalidConfig(format!(
                    "self-loop on node {}",
                    e.source + 1
                )));
            }
            if !seen.insert((e.source, e.target)) {
                return Err(Error::InvalidConfig(format!(
                    "edge {} -> {} ranked twice",
                    e.source + 1,
                    e.target + 1
                )));
            }
            if e.score.is_nan() {
                return Err(Error::InvalidConfig("NaN score".into()));
            }
        }
        edges.sort_by(|a, b| b.score.total_cmp(&a.score));
        Ok(Self { edges })
    }

    pub fn edges(&self) -> &[ScoredEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `source<TAB>target<TAB>score`, 1-based.
    pub fn to_tsv(&self) -> String {
        self.edges
            .iter()
            .map(|e| format!("{}\t{}\t{}\n", e.source + 1, e.target + 1, e.score))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_tsv().as_bytes())
    }
}

/// Reads a `source<TAB>target<TAB>score` file produced by another method.
pub fn ingest_external_ranking(path: &Path, p: Option<usize>) -> Result<RankedEdges> {
    let edges = read_edges(path, p)?;
    RankedEdges::new(
        edges
            .into_iter()
            .map(|e| ScoredEdge {
                source: e.source,
                target: e.target,
                score: e.weight,
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Directed comparison over the `p(p-1)` ordered pairs of distinct nodes.
pub fn confusion(pred: &[(usize, usize)], truth: &WeightedDag) -> Result<Confusion> {
    let p = truth.p();
    let mut predicted = HashSet::new();
    for &(s, t) in pred {
        if s >= p || t >= p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: s.max(t) + 1,
            });
        }
        if s == t {
            return Err(Error::InvalidConfig(format!("self-loop on node {}", s + 1)));
        }
        predicted.insert((s, t));
    }
    let w = truth.weights();
    let positives = truth.n_edges();
    let tp = predicted.iter().filter(|&&(s, t)| w[[s, t]] != 0.0).count();
    let fp = predicted.len() - tp;
    let fn_ = positives - tp;
    let tn = p * (p - 1) - tp - fp - fn_;
    Ok(Confusion { tp, fp, fn_, tn })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    /// Edges introduced so far.
    pub rank: usize,
    /// Score of the block that produced this point.
    pub score: f64,
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub aupr: f64,
}

impl PrCurve {
    /// `rank,lambda,recall,precision`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,lambda,recall,precision\n");
        for pt in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                pt.rank, pt.score, pt.recall, pt.precision
            );
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Introduces edges in rank order, equal scores as one block, recording
/// `(recall, precision)` after each block.
pub fn pr_curve(ranked: &RankedEdges, truth: &WeightedDag) -> Result<PrCurve> {
    let p = truth.p();
    let w = truth.weights();
    let positives = truth.n_edges();
    let mut points = Vec::new();
    let mut tp = 0;
    let edges = ranked.edges();
    let mut i = 0;
    while i < edges.len() {
        let score = edges[i].score;
        while i < edges.len() && edges[i].score == score {
            let e = edges[i];
            if e.source >= p || e.target >= p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: e.source.max(e.target) + 1,
                });
            }
            if w[[e.source, e.target]] != 0.0 {
                tp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            rank: i,
            score,
            recall: ratio(tp, positives),
            precision: ratio(tp, i),
        });
    }
    let mut aupr = 0.0;
    let mut prev_recall = 0.0;
    for pt in &points {
        aupr += (pt.recall - prev_recall) * pt.precision;
        prev_recall = pt.recall;
    }
    Ok(PrCurve { points, aupr })
}

/// Number of penalty values in the default path.
pub const DEFAULT_GRID_SIZE: usize = 30;
/// Smallest default penalty as a fraction of `lambda_max`.
pub const DEFAULT_GRID_RATIO: f64 = 1e-3;

/// `size` log-spaced values from `lambda_max` down to `lambda_max * ratio`.
pub fn default_grid(problem: &InnerProblem, size: usize, ratio: f64) -> Result<Vec<f64>> {
    let top = problem.lambda_max();
    if size == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(top > 0.0) {
        return Err(Error::InvalidGrid(
            "data have no off-diagonal covariance".into(),
        ));
    }
    if !(ratio > 0.0 && ratio < 1.0) && size > 1 {
        return Err(Error::InvalidGrid(format!(
            "ratio must lie in (0, 1), got {ratio}"
        )));
    }
    if size == 1 {
        return Ok(vec![top]);
    }
    Ok((0..size)
        .map(|i| top * ratio.powf(i as f64 / (size - 1) as f64))
        .collect())
}

/// Single-penalty heuristic `2 sqrt(s log p / n)` with `s = sqrt(p)`.
pub fn heuristic_lambda(n: usize, p: usize) -> f64 {
    let s = (p as f64).sqrt();
    2.0 * (s * (p as f64).ln() / n as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct PathStep {
    pub lambda: f64,
    pub best_perm: Permutation,
    pub objective: f64,
    pub n_edges: usize,
    pub generations: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone)]
pub struct LambdaPath {
    pub ranked: RankedEdges,
    pub steps: Vec<PathStep>,
}

#[derive(Default)]
pub struct PathOptions<'a> {
    pub solver_tol: Option<f64>,
    pub solver_max_iter: Option<usize>,
    pub lipschitz: Option<f64>,
    pub on_generation: Option<&'a dyn Fn(&GenerationRecord)>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(v) = grid.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidGrid(format!(
            "penalty {v} is not a finite value >= 0"
        )));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] >= w[0]) {
        return Err(Error::InvalidGrid(format!(
            "grid must be strictly decreasing, found {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

pub fn lambda_path(x: &Array2<f64>, grid: &[f64], cfg: &GaConfig) -> Result<LambdaPath> {
    lambda_path_with(&InnerProblem::new(x), grid, cfg, PathOptions::default())
}

/// Runs the genetic search at each penalty from largest to smallest. Each
/// run starts with the previous best ordering injected into its population
/// and warm-starts inner solves from the previous run's solutions. Edges are
/// scored by the penalty at which they first appear in a best model; ties
/// are listed by first-entry magnitude, then by node indices.
pub fn lambda_path_with(
    problem: &InnerProblem,
    grid: &[f64],
    cfg: &GaConfig,
    opts: PathOptions<'_>,
) -> Result<LambdaPath> {
    check_grid(grid)?;
    let mut first_entry: HashMap<(usize, usize), (f64, f64)> = HashMap::new();
    let mut steps = Vec::with_capacity(grid.len());
    let mut previous: Option<ga::GaReport> = None;

    for (i, &lambda) in grid.iter().enumerate() {
        let step_cfg = GaConfig {
            seed: cfg.seed.wrapping_add(i as u64),
            ..cfg.clone()
        };
        let run_opts = RunOptions {
            lipschitz: opts.lipschitz,
            solver_tol: opts.solver_tol,
            solver_max_iter: opts.solver_max_iter,
            initial_population: None,
            injected: previous.iter().map(|r| r.best.perm.clone()).collect(),
            warm_starts: previous.as_ref().map(|r| &r.solutions),
            on_generation: opts.on_generation,
        };
        let report = ga::run_with(problem, lambda, &step_cfg, run_opts)?;
        let dag = report.best_dag();
        for e in dag.edges() {
            first_entry
                .entry((e.source, e.target))
                .or_insert((lambda, e.weight.abs()));
        }
        steps.push(PathStep {
            lambda,
            best_perm: report.best.perm.clone(),
            objective: report.best_fitness(),
            n_edges: dag.n_edges(),
            generations: report.generations,
            stop_reason: report.stop_reason,
        });
        previous = Some(report);
    }

    let mut entries: Vec<((usize, usize), (f64, f64))> = first_entry.into_iter().collect();
    entries.sort_by(|a, b| {
        b.1 .0
            .total_cmp(&a.1 .0)
            .then(b.1 .1.total_cmp(&a.1 .1))
            .then(a.0.cmp(&b.0))
    });
    let ranked = RankedEdges::new(
        entries
            .into_iter()
            .map(|((source, target), (score, _))| ScoredEdge {
                source,
                target,
                score,
            })
            .collect(),
    )?;
    Ok(LambdaPath { ranked, steps })
}
