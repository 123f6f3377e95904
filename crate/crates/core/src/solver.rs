//! Proximal-gradient solver for the weights of a DAG with a fixed node order:
//!
//! ```text
//! min_T  (1/n) ||X (I - P T Pᵀ)||_F² + λ ||T||_1     over strictly lower-triangular T
//! ```
//!
//! Each iteration takes a gradient step of length `1/L`, soft-thresholds at
//! `λ/L` and projects back onto strictly lower-triangular matrices, starting
//! from `T = 0` and stopping once successive iterates are within `tol` in
//! Frobenius norm.
//!
//! With `Y = X P` the smooth term is `(1/n) ||Y (I - T)||_F²`, so iterations
//! only need the permuted Gram matrix `Yᵀ Y`, precomputed once per dataset
//! by [`InnerProblem`].

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::model::{compose, Permutation, StrictLowerTriangular};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub lipschitz: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl SolverConfig {
    pub const DEFAULT_TOL: f64 = 1e-6;
    pub const DEFAULT_MAX_ITER: usize = 10_000;

    pub fn new(lambda: f64, lipschitz: f64) -> Self {
        Self {
            lambda,
            lipschitz,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "Lipschitz constant must be > 0, got {}",
                self.lipschitz
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be > 0, got {}",
                self.tol
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub t_star: StrictLowerTriangular,
    /// Penalized objective at `t_star`, evaluated from the data matrix.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective of every iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub warm_started: bool,
}

/// A dataset prepared for repeated inner solves.
#[derive(Debug, Clone)]
pub struct InnerProblem {
    x: Array2<f64>,
    gram: Array2<f64>,
}

impl InnerProblem {
    pub fn new(x: &Array2<f64>) -> Self {
        let gram = x.t().dot(x);
        Self { x: x.clone(), gram }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    /// `Xᵀ X`.
    pub fn gram(&self) -> &Array2<f64> {
        &self.gram
    }

    /// `(2/n) ||XᵀX||_F`, an upper bound on the gradient's Lipschitz constant.
    pub fn lipschitz_bound(&self) -> Result<f64> {
        let fro = self.gram.iter().map(|v| v * v).sum::<f64>().sqrt();
        if fro == 0.0 {
            return Err(Error::ZeroData);
        }
        Ok(2.0 / self.n() as f64 * fro)
    }

    /// Smallest λ at which every ordering's solution is the empty graph:
    /// `(2/n) max_{i≠j} |(XᵀX)_ij|`.
    pub fn lambda_max(&self) -> f64 {
        let max = self
            .gram
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        2.0 / self.n() as f64 * max
    }

    pub fn objective(
        &self,
        perm: &Permutation,
        t: &StrictLowerTriangular,
        lambda: f64,
    ) -> Result<f64> {
        objective(&self.x, perm, t, lambda)
    }

    /// Runs the proximal-gradient iteration from `init`, or from zero.
    pub fn solve(
        &self,
        perm: &Permutation,
        cfg: &SolverConfig,
        init: Option<&StrictLowerTriangular>,
    ) -> Result<SolveReport> {
        cfg.validate()?;
        let p = self.p();
        check_dim(perm.len(), p)?;
        if let Some(t0) = init {
            check_dim(t0.dim(), p)?;
        }

        let ranks = perm.ranks();
        let cp = Array2::from_shape_fn((p, p), |(k, l)| self.gram[[ranks[k], ranks[l]]]);
        let scale = 2.0 / self.n() as f64;
        let threshold = cfg.lambda / cfg.lipschitz;

        let mut t = init.map_or_else(|| Array2::zeros((p, p)), |t0| t0.entries().clone());
        let mut next = Array2::zeros((p, p));
        let mut ct = Array2::zeros((p, p));
        let mut trace = Vec::new();
        let mut converged = false;
        let mut iterations = 0;

        while iterations < cfg.max_iter {
            gram_times_t(&cp, &t, &mut ct);
            trace.push(smooth_from_gram(&cp, &t, &ct) / self.n() as f64 + cfg.lambda * l1(&t));

            for l in 0..p {
                for k in (l + 1)..p {
                    let grad = -scale * (cp[[k, l]] - ct[[k, l]]);
                    let u = t[[k, l]] - grad / cfg.lipschitz;
                    if !u.is_finite() {
                        return Err(Error::NonFinite {
                            iteration: iterations + 1,
                        });
                    }
                    next[[k, l]] = soft(u, threshold);
                }
            }
            iterations += 1;
            let change = Zip::from(&next)
                .and(&t)
                .fold(0.0, |acc, a, b| acc + (a - b) * (a - b))
                .sqrt();
            std::mem::swap(&mut t, &mut next);
            if change <= cfg.tol {
                converged = true;
                break;
            }
        }

        gram_times_t(&cp, &t, &mut ct);
        trace.push(smooth_from_gram(&cp, &t, &ct) / self.n() as f64 + cfg.lambda * l1(&t));

        let t_star = StrictLowerTriangular::from_raw(t);
        let objective = self.objective(perm, &t_star, cfg.lambda)?;
        Ok(SolveReport {
            t_star,
            objective,
            iterations,
            converged,
            objective_trace: trace,
            warm_started: init.is_some(),
        })
    }
}

fn check_dim(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `ct[k, l] = Σ_m cp[k, m] t[m, l]` for `k >= l`, using the lower-triangular support of `t`.
fn gram_times_t(cp: &Array2<f64>, t: &Array2<f64>, ct: &mut Array2<f64>) {
    let p = cp.nrows();
    for l in 0..p {
        for k in l..p {
            let mut acc = 0.0;
            for m in (l + 1)..p {
                acc += cp[[k, m]] * t[[m, l]];
            }
            ct[[k, l]] = acc;
        }
    }
}

/// `||Y (I - T)||_F²` expanded column by column through the Gram matrix.
fn smooth_from_gram(cp: &Array2<f64>, t: &Array2<f64>, ct: &Array2<f64>) -> f64 {
    let p = cp.nrows();
    let mut total = 0.0;
    for l in 0..p {
        let mut quad = 0.0;
        for m in (l + 1)..p {
            quad += t[[m, l]] * ct[[m, l]];
        }
        total += cp[[l, l]] - 2.0 * ct[[l, l]] + quad;
    }
    total
}

fn l1(t: &Array2<f64>) -> f64 {
    t.iter().map(|v| v.abs()).sum()
}

fn soft(u: f64, threshold: f64) -> f64 {
    u.signum() * (u.abs() - threshold).max(0.0)
}

/// `(2/n) ||XᵀX||_F`.
pub fn lipschitz_bound(x: &Array2<f64>) -> Result<f64> {
    if x.nrows() == 0 {
        return Err(Error::ZeroData);
    }
    InnerProblem::new(x).lipschitz_bound()
}

/// `(1/n) ||X (I - P T Pᵀ)||_F² + λ ||T||_1`.
pub fn objective(
    x: &Array2<f64>,
    perm: &Permutation,
    t: &StrictLowerTriangular,
    lambda: f64,
) -> Result<f64> {
    check_dim(x.ncols(), perm.len())?;
    let g = compose(perm, t)?;
    let resid = x - &x.dot(g.weights());
    let sq: f64 = resid.iter().map(|v| v * v).sum();
    Ok(sq / x.nrows() as f64 + lambda * t.l1_norm())
}

/// Gradient of the smooth term, `-(2/n) (XP)ᵀ (X - X P T Pᵀ) P`.
pub fn gradient(
    x: &Array2<f64>,
    perm: &Permutation,
    t: &StrictLowerTriangular,
) -> Result<Array2<f64>> {
    check_dim(x.ncols(), perm.len())?;
    check_dim(t.dim(), perm.len())?;
    let pm = perm.to_matrix();
    let xp = x.dot(&pm);
    let fitted = xp.dot(t.entries()).dot(&pm.t());
    let resid = x - &fitted;
    Ok(xp.t().dot(&resid).dot(&pm) * (-2.0 / x.nrows() as f64))
}

/// Entrywise `sign(u) max(0, |u| - threshold)`.
pub fn soft_threshold(u: &Array2<f64>, threshold: f64) -> Array2<f64> {
    u.mapv(|v| soft(v, threshold))
}

/// Zeroes the upper triangle and the diagonal.
pub fn project_strict_lower(m: &Array2<f64>) -> Result<StrictLowerTriangular> {
    let (rows, cols) = m.dim();
    check_dim(cols, rows)?;
    let out = Array2::from_shape_fn((rows, cols), |(i, j)| if i > j { m[[i, j]] } else { 0.0 });
    Ok(StrictLowerTriangular::from_raw(out))
}

pub fn solve(x: &Array2<f64>, perm: &Permutation, cfg: &SolverConfig) -> Result<SolveReport> {
    InnerProblem::new(x).solve(perm, cfg, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_x(n: usize, p: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, p), |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn lipschitz_closed_forms() {
        let l = lipschitz_bound(&Array2::eye(4)).unwrap();
        assert!((l - 2.0 / 4.0 * 2.0).abs() < 1e-15);

        let c = array![[1.0, 0.0], [2.0, 0.0], [-3.0, 0.0]];
        let l = lipschitz_bound(&c).unwrap();
        assert!((l - 2.0 / 3.0 * 14.0).abs() < 1e-12);

        assert!(matches!(
            lipschitz_bound(&Array2::zeros((3, 2))),
            Err(Error::ZeroData)
        ));
    }

    #[test]
    fn lipschitz_dominates_spectral_norm() {
        let x = random_x(50, 8, 3);
        let gram = x.t().dot(&x);
        let mut v = Array2::<f64>::ones((8, 1));
        let mut eig = 0.0;
        for _ in 0..500 {
            let w = gram.dot(&v);
            eig = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            v = w / eig;
        }
        assert!(lipschitz_bound(&x).unwrap() >= 2.0 / 50.0 * eig);
    }

    #[test]
    fn soft_threshold_cases() {
        let u = array![[0.5, -0.1], [-0.7, 0.2]];
        let s = soft_threshold(&u, 0.2);
        assert!((s[[0, 0]] - 0.3).abs() < 1e-15);
        assert_eq!(s[[0, 1]], 0.0);
        assert!((s[[1, 0]] + 0.5).abs() < 1e-15);
        assert_eq!(s[[1, 1]], 0.0);
        assert_eq!(soft_threshold(&u, 0.0), u);
    }

    #[test]
    fn projection_cases() {
        let ones = Array2::<f64>::ones((3, 3));
        let t = project_strict_lower(&ones).unwrap();
        assert_eq!(
            t.entries(),
            &array![[0., 0., 0.], [1., 0., 0.], [1., 1., 0.]]
        );
        assert_eq!(project_strict_lower(t.entries()).unwrap(), t);
        assert_eq!(project_strict_lower(&Array2::eye(3)).unwrap().nnz(), 0);
    }

    #[test]
    fn objective_of_empty_graph() {
        let x = random_x(20, 4, 1);
        let perm = Permutation::from_one_based(&[2, 4, 1, 3]).unwrap();
        let j = objective(&x, &perm, &StrictLowerTriangular::zeros(4), 0.7).unwrap();
        let want = x.iter().map(|v| v * v).sum::<f64>() / 20.0;
        assert!((j - want).abs() < 1e-14);
    }

    #[test]
    fn internal_gradient_matches_formula() {
        let x = random_x(30, 5, 9);
        let perm = Permutation::from_one_based(&[3, 1, 5, 2, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = Array2::from_shape_fn((5, 5), |(i, j)| {
            if i > j {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        let t = StrictLowerTriangular::new(t).unwrap();
        let g = gradient(&x, &perm, &t).unwrap();

        let prob = InnerProblem::new(&x);
        let ranks = perm.ranks();
        let cp = Array2::from_shape_fn((5, 5), |(k, l)| prob.gram[[ranks[k], ranks[l]]]);
        let mut ct = Array2::zeros((5, 5));
        gram_times_t(&cp, t.entries(), &mut ct);
        for k in 0..5 {
            for l in 0..k {
                let internal = -2.0 / 30.0 * (cp[[k, l]] - ct[[k, l]]);
                assert!((internal - g[[k, l]]).abs() < 1e-12);
            }
        }
        let via_gram = smooth_from_gram(&cp, t.entries(), &ct) / 30.0;
        let direct = objective(&x, &perm, &t, 0.0).unwrap();
        assert!((via_gram - direct).abs() < 1e-12);
    }

    #[test]
    fn zero_data_gradient_vanishes() {
        let perm = Permutation::identity(3);
        let t = project_strict_lower(&Array2::ones((3, 3))).unwrap();
        let g = gradient(&Array2::zeros((5, 3)), &perm, &t).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn full_shrinkage_stops_at_zero() {
        let x = random_x(40, 5, 2);
        let prob = InnerProblem::new(&x);
        let cfg = SolverConfig::new(prob.lambda_max(), prob.lipschitz_bound().unwrap());
        let rep = prob.solve(&Permutation::identity(5), &cfg, None).unwrap();
        assert_eq!(rep.t_star.nnz(), 0);
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let x = random_x(10, 3, 2);
        let perm = Permutation::identity(3);
        assert!(solve(&x, &perm, &SolverConfig::new(-1.0, 1.0)).is_err());
        assert!(solve(&x, &perm, &SolverConfig::new(0.1, 0.0)).is_err());
        assert!(solve(&x, &perm, &SolverConfig::new(0.1, 1.0).with_tol(0.0)).is_err());
        assert!(solve(&x, &perm, &SolverConfig::new(0.1, 1.0).with_max_iter(0)).is_err());
    }

    #[test]
    fn step_too_long_is_non_finite() {
        let x = random_x(30, 4, 5) * 1e3;
        let cfg = SolverConfig::new(0.0, 1e-300).with_max_iter(10_000);
        assert!(matches!(
            solve(&x, &Permutation::identity(4), &cfg),
            Err(Error::NonFinite { .. })
        ));
    }
}
