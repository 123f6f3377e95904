//! Selection, order-based crossover, adjacent-swap mutation, and the
//! positional Shannon entropy used as a stopping signal.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Permutation;

use super::Individual;

/// Fitness values at or below this fall back to rank-based selection weights.
pub const FITNESS_FLOOR: f64 = 1e-12;

/// Selection probabilities: `(1/J_i) / Σ_m (1/J_m)`.
///
/// If some `J_i <= FITNESS_FLOOR`, individuals are ranked by fitness (ties by
/// index) and weighted by `1/rank` instead.
pub fn selection_probabilities(fitness: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = fitness.iter().find(|j| !(**j >= 0.0 && j.is_finite())) {
        return Err(Error::NonPositiveFitness(*bad));
    }
    let weights: Vec<f64> = if fitness.iter().any(|j| *j <= FITNESS_FLOOR) {
        let mut order: Vec<usize> = (0..fitness.len()).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
        let mut w = vec![0.0; fitness.len()];
        for (rank, &i) in order.iter().enumerate() {
            w[i] = 1.0 / (rank + 1) as f64;
        }
        w
    } else {
        fitness.iter().map(|j| 1.0 / j).collect()
    };
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Indices of `count` draws with replacement under [`selection_probabilities`].
pub fn select_indices<R: Rng + ?Sized>(
    fitness: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if fitness.is_empty() {
        return Ok(Vec::new());
    }
    let probs = selection_probabilities(fitness)?;
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

/// Proportional selection: `pop.len()` independent draws with replacement.
pub fn select<R: Rng + ?Sized>(pop: &[Individual], rng: &mut R) -> Result<Vec<Individual>> {
    let fitness = pop
        .iter()
        .map(|ind| ind.fitness.ok_or(Error::NonPositiveFitness(f64::NAN)))
        .collect::<Result<Vec<f64>>>()?;
    let picks = select_indices(&fitness, pop.len(), rng)?;
    Ok(picks.into_iter().map(|i| pop[i].clone()).collect())
}

/// Order-based crossover with a fixed set of retained gene values.
///
/// `keep[v]` marks value `v` as a crossover point. The first child keeps
/// the marked values at their positions in `p1` and fills the remaining
/// positions with the unmarked values in the order they appear in `p2`;
/// the second child swaps the parents' roles.
pub fn crossover_with(
    p1: &Permutation,
    p2: &Permutation,
    keep: &[bool],
) -> (Permutation, Permutation) {
    (order_child(p1, p2, keep), order_child(p2, p1, keep))
}

fn order_child(fixed: &Permutation, filler: &Permutation, keep: &[bool]) -> Permutation {
    let mut fill = filler.ranks().iter().copied().filter(|v| !keep[*v]);
    let ranks = fixed
        .ranks()
        .iter()
        .map(|&v| {
            if keep[v] {
                v
            } else {
                fill.next().expect("same value set")
            }
        })
        .collect();
    Permutation::new(ranks).expect("order-based crossover preserves the value set")
}

/// Draws `k` uniformly from `0..=p`, then `k` distinct gene values, and applies
/// [`crossover_with`].
pub fn crossover<R: Rng + ?Sized>(
    p1: &Permutation,
    p2: &Permutation,
    rng: &mut R,
) -> (Permutation, Permutation) {
    let p = p1.len();
    assert_eq!(p, p2.len(), "parents differ in length");
    let k = rng.random_range(0..=p);
    let mut keep = vec![false; p];
    for v in index::sample(rng, p, k) {
        keep[v] = true;
    }
    crossover_with(p1, p2, &keep)
}

/// Swaps the genes at positions `idx` and `idx + 1`, `idx` uniform on `0..p-1`.
pub fn mutate<R: Rng + ?Sized>(perm: &Permutation, rng: &mut R) -> Permutation {
    let p = perm.len();
    assert!(p >= 2, "mutation needs at least two genes");
    mutate_at(perm, rng.random_range(0..p - 1))
}

pub fn mutate_at(perm: &Permutation, idx: usize) -> Permutation {
    let mut out = perm.clone();
    out.swap_adjacent(idx);
    out
}

/// Shannon entropy (natural log) of the value distribution at each rank
/// position, and its sum over positions.
pub fn entropy<'a>(pop: impl IntoIterator<Item = &'a Permutation>) -> (f64, Vec<f64>) {
    let mut counts: Vec<Vec<usize>> = Vec::new();
    let mut n = 0usize;
    for perm in pop {
        if counts.is_empty() {
            counts = vec![vec![0; perm.len()]; perm.len()];
        }
        for (pos, &v) in perm.ranks().iter().enumerate() {
            counts[pos][v] += 1;
        }
        n += 1;
    }
    let per_position: Vec<f64> = counts
        .iter()
        .map(|row| {
            row.iter()
                .filter(|c| **c > 0)
                .map(|&c| {
                    let f = c as f64 / n as f64;
                    -f * f.ln()
                })
                .sum()
        })
        .collect();
    (per_position.iter().sum(), per_position)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::from_one_based(v).unwrap()
    }

    fn keep_values(p: usize, values: &[usize]) -> Vec<bool> {
        let mut keep = vec![false; p];
        for v in values {
            keep[v - 1] = true;
        }
        keep
    }

    #[test]
    fn crossover_reproduces_worked_example() {
        let p1 = perm(&[4, 3, 10, 7, 5, 9, 1, 2, 6, 8]);
        let p2 = perm(&[6, 1, 9, 4, 10, 2, 8, 3, 7, 5]);
        let (c1, c2) = crossover_with(&p1, &p2, &keep_values(10, &[4, 9, 2, 8]));
        assert_eq!(c1.to_one_based(), vec![4, 6, 1, 10, 3, 9, 7, 2, 5, 8]);
        // symmetric child: 9,4,2,8 stay where p2 has them, the rest follow p1's order
        assert_eq!(c2.to_one_based(), vec![3, 10, 9, 4, 7, 2, 8, 5, 1, 6]);
    }

    #[test]
    fn crossover_extremes_copy_a_parent() {
        let p1 = perm(&[2, 5, 1, 4, 3]);
        let p2 = perm(&[5, 4, 3, 2, 1]);
        let (c1, c2) = crossover_with(&p1, &p2, &[true; 5]);
        assert_eq!((c1.clone(), c2.clone()), (p1.clone(), p2.clone()));
        let (c1, c2) = crossover_with(&p1, &p2, &[false; 5]);
        assert_eq!((c1, c2), (p2, p1));
    }

    #[test]
    fn mutation_cases() {
        let child = perm(&[4, 6, 1, 10, 3, 9, 7, 2, 5, 8]);
        assert_eq!(
            mutate_at(&child, 2).to_one_based(),
            vec![4, 6, 10, 1, 3, 9, 7, 2, 5, 8]
        );
        assert_eq!(mutate_at(&child, 2).ranks().len(), 10);
        assert_eq!(mutate_at(&mutate_at(&child, 5), 5), child);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(mutate(&perm(&[1, 2]), &mut rng), perm(&[2, 1]));
    }

    #[test]
    fn entropy_cases() {
        let a = perm(&[1, 2, 3]);
        let (h, per) = entropy([&a, &a, &a]);
        assert_eq!(h, 0.0);
        assert!(per.iter().all(|v| *v == 0.0));

        let (h, _) = entropy([&perm(&[1, 2]), &perm(&[2, 1])]);
        assert!((h - 2.0 * 2f64.ln()).abs() < 1e-15);

        // cyclic shifts put every value once at every position
        let pop = [perm(&[1, 2, 3]), perm(&[2, 3, 1]), perm(&[3, 1, 2])];
        let (_, per) = entropy(pop.iter());
        for hj in per {
            assert!((hj - 3f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_proportional_probabilities() {
        let probs = selection_probabilities(&[1.0, 3.0]).unwrap();
        assert!((probs[0] - 0.75).abs() < 1e-15);
        assert!((probs[1] - 0.25).abs() < 1e-15);
        let probs = selection_probabilities(&[2.0; 4]).unwrap();
        assert!(probs.iter().all(|p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn degenerate_fitness_uses_ranks() {
        let probs = selection_probabilities(&[0.5, 0.0, 2.0]).unwrap();
        // ranks: index 1 first, index 0 second, index 2 third
        let total = 1.0 + 0.5 + 1.0 / 3.0;
        assert!((probs[1] - 1.0 / total).abs() < 1e-15);
        assert!((probs[0] - 0.5 / total).abs() < 1e-15);
        assert!(matches!(
            selection_probabilities(&[1.0, -0.1]),
            Err(Error::NonPositiveFitness(_))
        ));
        assert!(selection_probabilities(&[1.0, f64::NAN]).is_err());
    }
}
