//! Brute-force references for desk-scale problems.
//!
//! [`exhaustive_best_permutation`] minimizes the penalized objective over
//! every ordering, and [`lasso_cd_column`] solves one column of the inner
//! problem by cyclic coordinate descent on the raw data, independently of
//! the Gram-based proximal iteration in [`crate::solver`].

use std::path::Path;

use itertools::Itertools;
use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::model::{Permutation, StrictLowerTriangular};
use crate::solver::{InnerProblem, SolverConfig};

pub const MAX_EXHAUSTIVE_P: usize = 8;
pub const CD_TOL: f64 = 1e-12;
pub const CD_MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct PermutationScore {
    pub perm: Permutation,
    pub objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub best_perm: Permutation,
    pub best_objective: f64,
    /// One row per ordering in lexicographic order, when requested.
    pub table: Option<Vec<PermutationScore>>,
}

/// Solves the inner problem for all `p!` orderings and keeps the best
/// converged one. Ties go to the lexicographically smallest rank vector.
pub fn exhaustive_best_permutation(
    x: &Array2<f64>,
    lambda: f64,
    cfg: &SolverConfig,
    keep_table: bool,
) -> Result<OracleReport> {
    let problem = InnerProblem::new(x);
    exhaustive_with(&problem, lambda, cfg, keep_table)
}

/// As [`exhaustive_best_permutation`] on a prepared problem. `cfg.lambda` is
/// replaced by `lambda`; tolerance, iteration cap and Lipschitz constant are kept.
pub fn exhaustive_with(
    problem: &InnerProblem,
    lambda: f64,
    cfg: &SolverConfig,
    keep_table: bool,
) -> Result<OracleReport> {
    let p = problem.p();
    if p > MAX_EXHAUSTIVE_P {
        return Err(Error::ExplicitRefusal {
            p,
            count: (1..=p as u64).product(),
            limit: MAX_EXHAUSTIVE_P,
        });
    }
    let cfg = SolverConfig { lambda, ..*cfg };
    let perms: Vec<Permutation> = (0..p)
        .permutations(p)
        .map(|r| Permutation::new(r).expect("itertools yields permutations"))
        .collect();

    let scores: Vec<PermutationScore> = perms
        .into_par_iter()
        .map(|perm| {
            let rep = problem.solve(&perm, &cfg, None)?;
            Ok(PermutationScore {
                perm,
                objective: rep.objective,
                converged: rep.converged,
            })
        })
        .collect::<Result<_>>()?;

    // sequential scan keeps the lexicographic tie-break deterministic
    let best = scores
        .iter()
        .filter(|s| s.converged)
        .fold(None::<&PermutationScore>, |best, s| match best {
            Some(b) if b.objective <= s.objective => Some(b),
            _ => Some(s),
        })
        .ok_or(Error::NoConvergedSolve)?;

    Ok(OracleReport {
        best_perm: best.perm.clone(),
        best_objective: best.objective,
        table: keep_table.then_some(scores),
    })
}

/// Writes the per-ordering table as `permutation,objective,converged`,
/// the permutation as space-separated 1-based ranks.
pub fn write_table(table: &[PermutationScore], path: &Path) -> Result<()> {
    let mut out = String::from("permutation,objective,converged\n");
    for row in table {
        let ranks = row.perm.to_one_based().iter().join(" ");
        out.push_str(&format!(
            "{ranks},{:.16e},{}\n",
            row.objective, row.converged
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// Lasso of column `j` of `y` on columns `j+1..p` by cyclic coordinate descent:
///
/// ```text
/// min_β (1/n) ||y_j - Σ_{i>j} β_i y_i||² + λ Σ |β_i|
/// ```
///
/// Sweeps until the largest coordinate change falls below [`CD_TOL`].
/// Entry `m` of the result is the coefficient of column `j + 1 + m`.
pub fn lasso_cd_column(y: &Array2<f64>, j: usize, lambda: f64) -> Vec<f64> {
    let (n, p) = y.dim();
    assert!(j < p, "column {j} out of range for {p} columns");
    let predictors: Vec<ArrayView1<f64>> = ((j + 1)..p).map(|i| y.column(i)).collect();
    let sq_norms: Vec<f64> = predictors.iter().map(|c| c.dot(c)).collect();
    let mut beta = vec![0.0; predictors.len()];
    let mut resid = y.column(j).to_owned();
    // the stationarity condition for β_i is |c_iᵀ r| <= n λ / 2
    let cut = n as f64 * lambda / 2.0;

    for _ in 0..CD_MAX_SWEEPS {
        let mut max_change = 0.0f64;
        for (i, col) in predictors.iter().enumerate() {
            if sq_norms[i] == 0.0 {
                continue;
            }
            let rho = col.dot(&resid) + sq_norms[i] * beta[i];
            let updated = rho.signum() * (rho.abs() - cut).max(0.0) / sq_norms[i];
            let delta = updated - beta[i];
            if delta != 0.0 {
                resid.scaled_add(-delta, col);
                beta[i] = updated;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change <= CD_TOL {
            break;
        }
    }
    beta
}

/// Assembles the full strictly lower-triangular solution column by column,
/// working in the permuted basis `Y = X P`.
pub fn lasso_cd_full(x: &Array2<f64>, perm: &Permutation, lambda: f64) -> StrictLowerTriangular {
    let p = x.ncols();
    let ranks = perm.ranks();
    let y = Array2::from_shape_fn(x.dim(), |(r, k)| x[[r, ranks[k]]]);
    let mut t = Array2::zeros((p, p));
    for j in 0..p {
        for (m, b) in lasso_cd_column(&y, j, lambda).into_iter().enumerate() {
            t[[j + 1 + m, j]] = b;
        }
    }
    StrictLowerTriangular::from_raw(t)
}

#[derive(Debug, Clone)]
pub struct SolverComparison {
    pub max_abs_diff: f64,
    /// Proximal objective minus coordinate-descent objective.
    pub objective_gap: f64,
    pub prox: StrictLowerTriangular,
    pub prox_objective: f64,
    pub prox_converged: bool,
    pub prox_trace: Vec<f64>,
    pub cd: StrictLowerTriangular,
    pub cd_objective: f64,
}

/// Runs both inner solvers on `(x, perm, cfg.lambda)` and diffs them.
pub fn compare_inner_solvers(
    x: &Array2<f64>,
    perm: &Permutation,
    cfg: &SolverConfig,
) -> Result<SolverComparison> {
    let problem = InnerProblem::new(x);
    let rep = problem.solve(perm, cfg, None)?;
    let cd = lasso_cd_full(x, perm, cfg.lambda);
    let cd_objective = problem.objective(perm, &cd, cfg.lambda)?;
    let max_abs_diff = rep
        .t_star
        .entries()
        .iter()
        .zip(cd.entries().iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(SolverComparison {
        max_abs_diff,
        objective_gap: rep.objective - cd_objective,
        prox: rep.t_star,
        prox_objective: rep.objective,
        prox_converged: rep.converged,
        prox_trace: rep.objective_trace,
        cd,
        cd_objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthonormal_predictors_give_projections() {
        // columns 1 and 2 are orthonormal up to a factor sqrt(n)
        let n = 4.0;
        let y = ndarray::array![
            [3.0, 1.0, 1.0],
            [1.0, 1.0, -1.0],
            [-2.0, -1.0, 1.0],
            [0.5, -1.0, -1.0],
        ];
        let beta = lasso_cd_column(&y, 0, 0.0);
        let target = y.column(0);
        for (m, b) in beta.iter().enumerate() {
            let want = y.column(m + 1).dot(&target) / n;
            assert!((b - want).abs() < 1e-12);
        }
    }

    #[test]
    fn large_lambda_zeroes_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y: Array2<f64> = Array2::from_shape_fn((30, 4), |_| rng.random_range(-1.0..1.0));
        let n = 30.0;
        let lam = (1..4)
            .map(|i| 2.0 * y.column(i).dot(&y.column(0)).abs() / n)
            .fold(0.0, f64::max);
        assert!(lasso_cd_column(&y, 0, lam).iter().all(|b| *b == 0.0));
        assert!(lasso_cd_column(&y, 3, 0.1).is_empty());
    }

    #[test]
    fn refuses_large_p() {
        let x = Array2::<f64>::ones((10, 9));
        let cfg = SolverConfig::new(0.1, 1.0);
        match exhaustive_best_permutation(&x, 0.1, &cfg, false) {
            Err(Error::ExplicitRefusal {
                p: 9,
                count: 362_880,
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn full_shrinkage_ties_every_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = Array2::from_shape_fn((25, 4), |_| rng.random_range(-1.0..1.0));
        let problem = InnerProblem::new(&x);
        let cfg = SolverConfig::new(0.0, problem.lipschitz_bound().unwrap());
        let rep = exhaustive_with(&problem, problem.lambda_max(), &cfg, true).unwrap();
        let want = x.iter().map(|v| v * v).sum::<f64>() / 25.0;
        let table = rep.table.unwrap();
        assert_eq!(table.len(), 24);
        assert!(table.iter().all(|s| s.objective == want));
        assert_eq!(rep.best_perm, Permutation::identity(4));
    }
}
