//! Fits edge weights for a fixed node ordering with the proximal-gradient
//! solver and checks the answer against per-node coordinate-descent lasso.
//!
//! ```bash
//! cargo run --release --example inner_solver
//! ```

use sparse_dag::oracle::compare_inner_solvers;
use sparse_dag::sem::{sample_dag, sample_data};
use sparse_dag::{compose, GraphSpec, InnerProblem, SolverConfig};

fn main() -> sparse_dag::Result<()> {
    let truth = sample_dag(&GraphSpec {
        p: 6,
        n_edges: 7,
        weight_range: (0.5, 2.0),
        noise_sd: 0.1,
        seed: 7,
    })?;
    let data = sample_data(&truth, 500, 0.1, 8)?;
    let problem = InnerProblem::new(data.x());
    let lipschitz = problem.lipschitz_bound()?;
    println!(
        "L = {lipschitz:.4}, lambda_max = {:.4}",
        problem.lambda_max()
    );

    for lambda in [1e-1, 1e-2, 1e-3] {
        let cfg = SolverConfig::new(lambda, lipschitz).with_max_iter(100_000);
        let rep = problem.solve(&truth.perm, &cfg, None)?;
        let dag = compose(&truth.perm, &rep.t_star)?;
        println!(
            "lambda {lambda:<6} objective {:.6}  edges {:>2}  iterations {:>5}  converged {}",
            rep.objective,
            dag.n_edges(),
            rep.iterations,
            rep.converged
        );
    }

    let cfg = SolverConfig::new(1e-2, lipschitz)
        .with_tol(1e-10)
        .with_max_iter(1_000_000);
    let cmp = compare_inner_solvers(data.x(), &truth.perm, &cfg)?;
    println!(
        "prox vs coordinate descent: max |diff| {:.2e}, objective gap {:.2e}",
        cmp.max_abs_diff, cmp.objective_gap
    );
    Ok(())
}
