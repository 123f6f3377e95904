//! Random sparse ground-truth DAGs and data from the linear Gaussian SEM
//! `X = X G0 + ε`.

use ndarray::Array2;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{compose, Dataset, Permutation, StrictLowerTriangular, WeightedDag};

/// Parameters of a random ground-truth graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    pub p: usize,
    pub n_edges: usize,
    /// Edge magnitudes are drawn uniformly from `[w_min, w_max]`, sign uniform.
    pub weight_range: (f64, f64),
    pub noise_sd: f64,
    pub seed: u64,
}

impl GraphSpec {
    pub fn max_edges(p: usize) -> usize {
        p * p.saturating_sub(1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidSpec(format!(
                "p must be at least 2, got {}",
                self.p
            )));
        }
        let max = Self::max_edges(self.p);
        if self.n_edges > max {
            return Err(Error::InvalidSpec(format!(
                "{} edges exceed the maximum p(p-1)/2 = {max} for p = {}",
                self.n_edges, self.p
            )));
        }
        let (lo, hi) = self.weight_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "weight range [{lo}, {hi}] must satisfy 0 < w_min <= w_max"
            )));
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "noise sd must be positive, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }
}

/// A sampled graph together with its ordering decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub dag: WeightedDag,
    pub perm: Permutation,
    pub tri: StrictLowerTriangular,
}

impl GroundTruth {
    pub fn new(perm: Permutation, tri: StrictLowerTriangular) -> Result<Self> {
        let dag = compose(&perm, &tri)?;
        Ok(Self { dag, perm, tri })
    }
}

/// Draws `n_edges` strictly-lower positions of `T0` without replacement, signed
/// uniform magnitudes, and a uniform ordering `P0`.
pub fn sample_dag(spec: &GraphSpec) -> Result<GroundTruth> {
    spec.validate()?;
    let p = spec.p;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut ranks: Vec<usize> = (0..p).collect();
    ranks.shuffle(&mut rng);
    let perm = Permutation::new(ranks)?;

    let slots: Vec<(usize, usize)> = (1..p).flat_map(|k| (0..k).map(move |l| (k, l))).collect();
    let (lo, hi) = spec.weight_range;
    let mut t = Array2::zeros((p, p));
    for slot in index::sample(&mut rng, slots.len(), spec.n_edges) {
        let magnitude = if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        };
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        t[[slots[slot].0, slots[slot].1]] = sign * magnitude;
    }
    GroundTruth::new(perm, StrictLowerTriangular::new(t)?)
}

/// A sampled dataset along with the noise matrix that produced it.
#[derive(Debug, Clone)]
pub struct Sample {
    pub data: Dataset,
    pub noise: Array2<f64>,
}

/// `n` i.i.d. rows of `X = ε (I - G0)^{-1}` with `ε ~ N(0, σ² I)`.
pub fn sample_data(truth: &GroundTruth, n: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    Ok(sample_with_noise(truth, n, noise_sd, seed)?.data)
}

/// As [`sample_data`], also returning `ε`.
pub fn sample_with_noise(
    truth: &GroundTruth,
    n: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<Sample> {
    let sds = vec![noise_sd; truth.dag.p()];
    sample_heteroscedastic(truth, n, &sds, seed)
}

/// Per-node noise standard deviations; the equal-variance case is [`sample_with_noise`].
pub fn sample_heteroscedastic(
    truth: &GroundTruth,
    n: usize,
    noise_sds: &[f64],
    seed: u64,
) -> Result<Sample> {
    let p = truth.dag.p();
    check_sample_args(n, noise_sds, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut noise = Array2::zeros((n, p));
    for mut row in noise.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = noise_sds[j] * std_normal.sample(&mut rng);
        }
    }
    let x = propagate(truth, &noise);
    Ok(Sample {
        data: Dataset::new(x)?,
        noise,
    })
}

/// Data whose noise has exact second moments: `εᵀε / n = σ² I`.
///
/// The Gaussian draw is orthonormalized column by column, so the sample
/// covariance of the noise carries no sampling error. Regressions in the
/// true ordering then recover `T0` exactly at `λ = 0`. Requires `n >= p`.
pub fn sample_whitened(truth: &GroundTruth, n: usize, noise_sd: f64, seed: u64) -> Result<Sample> {
    let p = truth.dag.p();
    check_sample_args(n, &vec![noise_sd; p], p)?;
    if n < p {
        return Err(Error::InvalidSpec(format!(
            "whitened noise needs n >= p, got n = {n}, p = {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut noise: Array2<f64> = Array2::from_shape_fn((n, p), |_| std_normal.sample(&mut rng));

    // modified Gram-Schmidt, run twice for orthogonality to working precision
    for _ in 0..2 {
        for j in 0..p {
            for i in 0..j {
                let proj = noise.column(i).dot(&noise.column(j));
                let qi = noise.column(i).to_owned();
                noise.column_mut(j).scaled_add(-proj, &qi);
            }
            let norm: f64 = noise.column(j).dot(&noise.column(j)).sqrt();
            noise.column_mut(j).mapv_inplace(|v| v / norm);
        }
    }
    let scale = noise_sd * (n as f64).sqrt();
    noise.mapv_inplace(|v| v * scale);
    let x = propagate(truth, &noise);
    Ok(Sample {
        data: Dataset::new(x)?,
        noise,
    })
}

fn check_sample_args(n: usize, sds: &[f64], p: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidSpec("sample size must be at least 1".into()));
    }
    if sds.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: sds.len(),
        });
    }
    if let Some(sd) = sds.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::InvalidSpec(format!(
            "noise sd must be non-negative, got {sd}"
        )));
    }
    Ok(())
}

/// Solves `x (I - G0) = ε` row by row in the ordering basis, where
/// `I - T0` is unit lower triangular.
fn propagate(truth: &GroundTruth, noise: &Array2<f64>) -> Array2<f64> {
    let (n, p) = noise.dim();
    let ranks = truth.perm.ranks();
    let t = truth.tri.entries();
    let mut x = Array2::zeros((n, p));
    let mut y = vec![0.0; p];
    for (r, e) in noise.rows().into_iter().enumerate() {
        // y_j = e_j + Σ_{i > j} y_i T[i, j], sources sit at the end of the rank vector
        for j in (0..p).rev() {
            let mut v = e[ranks[j]];
            for i in (j + 1)..p {
                v += y[i] * t[[i, j]];
            }
            y[j] = v;
        }
        for (k, &node) in ranks.iter().enumerate() {
            x[[r, node]] = y[k];
        }
    }
    x
}
