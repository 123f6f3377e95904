//! Builds a DAG from a node ordering and a strictly lower-triangular weight
//! matrix, then recovers an ordering from the composed graph.
//!
//! ```bash
//! cargo run --example compose_decompose
//! ```

use ndarray::array;
use sparse_dag::{compose, decompose, is_dag, Permutation, StrictLowerTriangular};

fn main() -> sparse_dag::Result<()> {
    // rank vector: sinks first, so node 5 has no children and node 2 no parents
    let perm = Permutation::from_one_based(&[5, 3, 4, 1, 2])?;
    let tri = StrictLowerTriangular::new(array![
        [0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0.],
        [3., 0., 0., 0., 0.],
        [5., 0., 7., 0., 0.],
        [4., 1., 6., 2., 0.],
    ])?;

    println!("ordering {perm}");
    println!("permutation matrix:\n{}", perm.to_matrix());

    let dag = compose(&perm, &tri)?;
    println!("weighted adjacency (row = parent):\n{}", dag.weights());
    assert!(is_dag(dag.weights()));
    for e in dag.edges() {
        println!("  {} -> {}  {:+}", e.source + 1, e.target + 1, e.weight);
    }

    // any topological order works; ties go to the lowest node index
    let (back, tri2) = decompose(&dag)?;
    println!("recovered ordering {back}");
    assert_eq!(compose(&back, &tri2)?.weights(), dag.weights());
    Ok(())
}
