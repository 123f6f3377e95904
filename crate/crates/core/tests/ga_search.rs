mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use sparse_dag::ga::{
    self, evaluate, select_indices, selection_probabilities, GaConfig, RunOptions,
};
use sparse_dag::oracle::exhaustive_with;
use sparse_dag::sem::{sample_dag, sample_data, GroundTruth};
use sparse_dag::{
    Edge, Error, GraphSpec, Individual, InnerProblem, Permutation, SolverConfig,
    StrictLowerTriangular,
};

use common::random_permutation;

#[test]
fn selection_frequencies_pass_chi_square() {
    let fitness = [0.5, 1.0, 2.0, 4.0, 0.8];
    let probs = selection_probabilities(&fitness).unwrap();
    let draws = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut counts = [0usize; 5];
    for i in select_indices(&fitness, draws, &mut rng).unwrap() {
        counts[i] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &q)| {
            let expected = q * draws as f64;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new(4.0).unwrap().cdf(stat);
    assert!(p_value > 1e-3, "chi-square {stat}, p-value {p_value}");
}

fn two_node_truth(w: f64) -> GroundTruth {
    // node 0 -> node 1; with sinks first, node 1 takes rank position 0
    let perm = Permutation::new(vec![1, 0]).unwrap();
    let mut t = ndarray::Array2::zeros((2, 2));
    t[[1, 0]] = w;
    let truth = GroundTruth::new(perm, StrictLowerTriangular::new(t).unwrap()).unwrap();
    assert_eq!(
        truth.dag.edges(),
        vec![Edge {
            source: 0,
            target: 1,
            weight: w
        }]
    );
    truth
}

#[test]
fn correct_order_has_lower_fitness_on_two_nodes() {
    let truth = two_node_truth(1.5);
    let data = sample_data(&truth, 500, 0.1, 3).unwrap();
    let prob = InnerProblem::new(data.x());
    let l = prob.lipschitz_bound().unwrap();
    let fitness = |perm: &Permutation, lambda: f64| {
        let ind = evaluate(
            Individual::new(perm.clone()),
            &prob,
            &SolverConfig::new(lambda, l),
        )
        .unwrap();
        (ind.fitness.unwrap(), ind.dag().unwrap())
    };
    let wrong_perm = Permutation::identity(2);

    // at lambda = 0.1 the single covariance (about 0.015) is far below the
    // entry threshold, so both orders shrink to the empty graph and tie
    assert!(prob.lambda_max() < 0.1);
    let (right, _) = fitness(&truth.perm, 0.1);
    let (wrong, _) = fitness(&wrong_perm, 0.1);
    assert_eq!(right, wrong);

    let (right, dag) = fitness(&truth.perm, 1e-3);
    let (wrong, _) = fitness(&wrong_perm, 1e-3);
    assert!(right < wrong, "{right} vs {wrong}");
    assert_eq!(dag.n_edges(), 1);
    assert_eq!((dag.edges()[0].source, dag.edges()[0].target), (0, 1));
}

#[test]
fn search_matches_brute_force_on_small_graphs() {
    for (p, edges, seed) in [(3, 2, 1u64), (4, 4, 2), (5, 6, 3)] {
        let spec = GraphSpec {
            p,
            n_edges: edges,
            weight_range: (0.5, 2.0),
            noise_sd: 0.1,
            seed,
        };
        let truth = sample_dag(&spec).unwrap();
        let data = sample_data(&truth, 300, 0.1, seed + 10).unwrap();
        let prob = InnerProblem::new(data.x());
        let lambda = 0.01;
        let cfg = SolverConfig::new(lambda, prob.lipschitz_bound().unwrap()).with_max_iter(200_000);
        let oracle = exhaustive_with(&prob, lambda, &cfg, false).unwrap();
        let report = ga::run_with(
            &prob,
            lambda,
            &GaConfig::for_nodes(p).with_seed(seed),
            RunOptions {
                solver_max_iter: Some(200_000),
                ..RunOptions::default()
            },
        )
        .unwrap();
        assert!(
            report.best_fitness() <= oracle.best_objective + 1e-6,
            "p = {p}"
        );
    }
}

#[test]
fn history_is_consistent() {
    let truth = common::reference_truth();
    let data = sample_data(&truth, 200, 0.1, 5).unwrap();
    let report = ga::run(data.x(), 0.05, &GaConfig::for_nodes(5).with_seed(9)).unwrap();
    assert_eq!(report.history.len(), report.generations);
    for (k, rec) in report.history.iter().enumerate() {
        assert_eq!(rec.generation, k + 1);
        assert!(rec.best_fitness <= rec.mean_fitness + 1e-12);
        assert!(rec.entropy >= 0.0);
    }
    for w in report.history.windows(2) {
        assert!(w[1].best_fitness <= w[0].best_fitness);
        assert!(w[1].evals >= w[0].evals);
    }
    assert_eq!(
        report.history.last().unwrap().best_fitness,
        report.best_fitness()
    );
    assert_eq!(report.history.last().unwrap().evals, report.evaluations);
    // every solved ordering is a valid permutation and has a cached solution
    assert_eq!(report.solutions.len(), report.evaluations);
    for perm in report.solutions.keys() {
        assert!(Permutation::new(perm.ranks().to_vec()).is_ok());
    }
    let dag = report.best_dag();
    assert!(sparse_dag::is_dag(dag.weights()));
}

#[test]
fn thread_count_does_not_change_results() {
    let truth = sample_dag(&GraphSpec {
        p: 7,
        n_edges: 8,
        weight_range: (0.5, 2.0),
        noise_sd: 0.1,
        seed: 4,
    })
    .unwrap();
    let data = sample_data(&truth, 200, 0.1, 6).unwrap();
    let prob = InnerProblem::new(data.x());
    let run = |threads| {
        let cfg = GaConfig {
            threads,
            ..GaConfig::for_nodes(7).with_seed(12)
        };
        ga::run_with(&prob, 0.02, &cfg, RunOptions::default()).unwrap()
    };
    let serial = run(Some(1));
    for threads in [None, Some(3), Some(8)] {
        let other = run(threads);
        assert_eq!(other.best.perm, serial.best.perm);
        assert_eq!(other.history, serial.history);
        assert_eq!(other.stop_reason, serial.stop_reason);
    }
}

#[test]
fn injected_orderings_enter_the_first_generation() {
    let truth = common::reference_truth();
    let data = sample_data(&truth, 200, 0.1, 5).unwrap();
    let prob = InnerProblem::new(data.x());
    let cfg = GaConfig {
        max_generations: 0,
        ..GaConfig::for_nodes(5).with_seed(1)
    };
    let target = random_permutation(5, 99);
    let report = ga::run_with(
        &prob,
        0.05,
        &cfg,
        RunOptions {
            injected: vec![target.clone()],
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert!(report.solutions.contains_key(&target));
    assert_eq!(report.generations, 1);
}

#[test]
fn bad_configuration_is_rejected() {
    let x = common::uniform_matrix(20, 3, 1);
    let cfg = GaConfig {
        mutation_prob: -0.1,
        ..GaConfig::for_nodes(3)
    };
    assert!(matches!(
        ga::run(&x, 0.1, &cfg),
        Err(Error::InvalidConfig(_))
    ));
    let prob = InnerProblem::new(&x);
    let short = RunOptions {
        initial_population: Some(vec![Permutation::identity(3)]),
        ..RunOptions::default()
    };
    assert!(ga::run_with(&prob, 0.1, &GaConfig::for_nodes(3), short).is_err());
}
