//! Brute-force check of the genetic search on a small graph: every ordering
//! is solved and the global minimum compared with several GA runs.
//!
//! ```bash
//! cargo run --release --example oracle_check
//! ```

use sparse_dag::ga::{self, GaConfig, RunOptions};
use sparse_dag::oracle::exhaustive_with;
use sparse_dag::sem::{sample_dag, sample_data};
use sparse_dag::{GraphSpec, InnerProblem, SolverConfig};

fn main() -> sparse_dag::Result<()> {
    let truth = sample_dag(&GraphSpec {
        p: 6,
        n_edges: 6,
        weight_range: (0.5, 2.0),
        noise_sd: 0.1,
        seed: 5,
    })?;
    let data = sample_data(&truth, 400, 0.1, 6)?;
    let problem = InnerProblem::new(data.x());
    let lambda = 0.005;
    let max_iter = 200_000;
    let cfg = SolverConfig::new(lambda, problem.lipschitz_bound()?).with_max_iter(max_iter);

    let oracle = exhaustive_with(&problem, lambda, &cfg, true)?;
    let table = oracle.table.as_deref().unwrap_or_default();
    let converged = table.iter().filter(|s| s.converged).count();
    println!("{} orderings solved, {converged} converged", table.len());
    println!(
        "global minimum {:.6} at {}",
        oracle.best_objective, oracle.best_perm
    );

    for seed in 0..5 {
        let report = ga::run_with(
            &problem,
            lambda,
            &GaConfig::for_nodes(6).with_seed(seed),
            RunOptions {
                solver_max_iter: Some(max_iter),
                ..RunOptions::default()
            },
        )?;
        let gap = report.best_fitness() - oracle.best_objective;
        println!(
            "seed {seed}: {:.6} at {}  gap {gap:.2e}  ({} solves)",
            report.best_fitness(),
            report.best.perm,
            report.evaluations
        );
    }
    Ok(())
}
