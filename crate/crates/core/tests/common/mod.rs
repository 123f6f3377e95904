#![allow(dead_code)]

use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_dag::sem::GroundTruth;
use sparse_dag::{Permutation, StrictLowerTriangular};

/// Five-node reference graph: rank vector, triangular factor and composed matrix.
pub fn reference_ranks() -> Permutation {
    Permutation::from_one_based(&[5, 3, 4, 1, 2]).unwrap()
}

pub fn reference_t() -> Array2<f64> {
    array![
        [0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0.],
        [3., 0., 0., 0., 0.],
        [5., 0., 7., 0., 0.],
        [4., 1., 6., 2., 0.],
    ]
}

pub fn reference_p() -> Array2<f64> {
    array![
        [0., 0., 0., 1., 0.],
        [0., 0., 0., 0., 1.],
        [0., 1., 0., 0., 0.],
        [0., 0., 1., 0., 0.],
        [1., 0., 0., 0., 0.],
    ]
}

pub fn reference_g() -> Array2<f64> {
    array![
        [0., 0., 0., 7., 5.],
        [2., 0., 1., 6., 4.],
        [0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 3.],
        [0., 0., 0., 0., 0.],
    ]
}

pub fn reference_truth() -> GroundTruth {
    GroundTruth::new(
        reference_ranks(),
        StrictLowerTriangular::new(reference_t()).unwrap(),
    )
    .unwrap()
}

pub fn uniform_matrix(n: usize, p: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, p), |_| rng.random_range(-1.0..1.0))
}

pub fn random_permutation(p: usize, seed: u64) -> Permutation {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r: Vec<usize> = (0..p).collect();
    r.shuffle(&mut rng);
    Permutation::new(r).unwrap()
}
