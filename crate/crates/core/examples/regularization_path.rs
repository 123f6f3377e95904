//! Ranks candidate edges by the penalty at which they first enter the best
//! model along a decreasing grid, then scores the ranking against the truth.
//!
//! ```bash
//! cargo run --release --example regularization_path
//! ```

use sparse_dag::ga::GaConfig;
use sparse_dag::metrics::{default_grid, lambda_path_with, pr_curve, PathOptions, AUPR_CONVENTION};
use sparse_dag::sem::{sample_dag, sample_data};
use sparse_dag::{GraphSpec, InnerProblem};

fn main() -> sparse_dag::Result<()> {
    let truth = sample_dag(&GraphSpec {
        p: 7,
        n_edges: 8,
        weight_range: (0.5, 2.0),
        noise_sd: 0.1,
        seed: 12,
    })?;
    let data = sample_data(&truth, 500, 0.1, 13)?;
    let problem = InnerProblem::new(data.x());
    let grid = default_grid(&problem, 12, 1e-3)?;

    let path = lambda_path_with(
        &problem,
        &grid,
        &GaConfig::for_nodes(7),
        PathOptions::default(),
    )?;
    for step in &path.steps {
        println!(
            "lambda {:.3e}  edges {:>2}  objective {:.5}  {} ({} generations)",
            step.lambda, step.n_edges, step.objective, step.stop_reason, step.generations
        );
    }

    println!("\ntop of the ranking:");
    for e in path.ranked.edges().iter().take(10) {
        let hit = truth.dag.weights()[[e.source, e.target]] != 0.0;
        println!(
            "  {} -> {}  entered at {:.3e}  {}",
            e.source + 1,
            e.target + 1,
            e.score,
            if hit { "true" } else { "" }
        );
    }

    let curve = pr_curve(&path.ranked, &truth.dag)?;
    let baseline = truth.dag.n_edges() as f64 / (7.0 * 6.0);
    println!(
        "AUPR {:.3} ({AUPR_CONVENTION}), random baseline {baseline:.3}",
        curve.aupr
    );
    Ok(())
}
