//! Scores an edge ranking produced elsewhere (tab-separated `source target
//! score`, 1-based nodes) against a ground-truth edge list.
//!
//! ```bash
//! cargo run --example external_ranking -- ranking.tsv truth.tsv 10
//! ```
//!
//! Without arguments a small demonstration ranking is written and scored.

use std::path::PathBuf;

use sparse_dag::io::read_truth;
use sparse_dag::metrics::{confusion, ingest_external_ranking, pr_curve};

fn main() -> sparse_dag::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = tempfile::tempdir().map_err(|e| sparse_dag::Error::InvalidConfig(e.to_string()))?;
    let (ranking, truth, p) = match args.as_slice() {
        [r, t, p] => (
            PathBuf::from(r),
            PathBuf::from(t),
            p.parse().expect("node count"),
        ),
        _ => {
            let r = dir.path().join("ranking.tsv");
            let t = dir.path().join("truth.tsv");
            std::fs::write(&r, "1\t2\t0.9\n2\t3\t0.7\n3\t1\t0.7\n1\t3\t0.2\n").unwrap();
            std::fs::write(&t, "1\t2\t1.5\n1\t3\t-0.8\n").unwrap();
            (r, t, 3)
        }
    };

    let truth = read_truth(&truth, p)?;
    let ranked = ingest_external_ranking(&ranking, Some(p))?;
    let curve = pr_curve(&ranked, &truth)?;
    for pt in &curve.points {
        println!(
            "top {:>3}  score {:<8}  recall {:.3}  precision {:.3}",
            pt.rank, pt.score, pt.recall, pt.precision
        );
    }
    println!("AUPR {:.4}", curve.aupr);

    let top: Vec<(usize, usize)> = ranked
        .edges()
        .iter()
        .take(truth.n_edges())
        .map(|e| (e.source, e.target))
        .collect();
    let c = confusion(&top, &truth)?;
    println!(
        "top-{}: tp {} fp {} fn {} tn {}",
        truth.n_edges(),
        c.tp,
        c.fp,
        c.fn_,
        c.tn
    );
    Ok(())
}
