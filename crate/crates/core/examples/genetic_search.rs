//! Searches node orderings with the genetic algorithm at a single penalty
//! and prints per-generation progress.
//!
//! ```bash
//! cargo run --release --example genetic_search
//! ```

use sparse_dag::ga::{self, GaConfig, GenerationRecord, RunOptions};
use sparse_dag::metrics::confusion;
use sparse_dag::sem::{sample_dag, sample_data};
use sparse_dag::{GraphSpec, InnerProblem};

fn main() -> sparse_dag::Result<()> {
    let truth = sample_dag(&GraphSpec {
        p: 8,
        n_edges: 10,
        weight_range: (0.5, 2.0),
        noise_sd: 0.1,
        seed: 3,
    })?;
    let data = sample_data(&truth, 1000, 0.1, 4)?;
    let problem = InnerProblem::new(data.x());
    let lambda = 0.002;

    let cfg = GaConfig::for_nodes(8).with_seed(1);
    let progress = |r: &GenerationRecord| {
        println!(
            "gen {:>3}  mean {:.5}  best {:.5}  entropy {:.3}  solves {}",
            r.generation, r.mean_fitness, r.best_fitness, r.entropy, r.evals
        )
    };
    let report = ga::run_with(
        &problem,
        lambda,
        &cfg,
        RunOptions {
            on_generation: Some(&progress),
            ..RunOptions::default()
        },
    )?;

    let dag = report.best_dag();
    let pred: Vec<(usize, usize)> = dag.edges().iter().map(|e| (e.source, e.target)).collect();
    let c = confusion(&pred, &truth.dag)?;
    println!(
        "stopped: {} after {} generations",
        report.stop_reason, report.generations
    );
    println!(
        "best ordering {}  objective {:.6}",
        report.best.perm,
        report.best_fitness()
    );
    println!("true ordering {}", truth.perm);
    println!("precision {:.2}  recall {:.2}", c.precision(), c.recall());
    Ok(())
}
