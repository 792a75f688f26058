//! Empirical ROC curves, AUC, and the Gaussian optimal ROC.
//!
//! cargo run --example roc_curves

use ranktest::roc::{
    auc_from_curve, auc_pairwise, empirical_roc, gaussian_roc_star, roc_distance, RocFn, RocMetric,
};
use ranktest::synthdata::{gaussian_oracle, generate, oracle_scorer, ModelSpec};

fn main() -> ranktest::Result<()> {
    let spec = ModelSpec::l1_minus(4, 0.6)?;
    let (x, y) = generate(&spec, 5000, 5000, 11)?;

    let scorer = oracle_scorer(&spec)?;
    let pos = scorer.score_sample(&x)?;
    let neg = scorer.score_sample(&y)?;
    let curve = empirical_roc(&neg, &pos)?;
    let oracle = gaussian_oracle(&spec)?;

    println!("alpha  empirical  optimal");
    for alpha in [0.01, 0.05, 0.1, 0.25, 0.5, 0.75] {
        println!(
            "{alpha:5.2}  {:9.4}  {:7.4}",
            curve.eval(alpha),
            gaussian_roc_star(&oracle, alpha)?
        );
    }
    println!(
        "AUC empirical {:.4} (pairwise {:.4}), optimal {:.4}",
        auc_from_curve(&curve),
        auc_pairwise(&neg, &pos)?,
        oracle.auc_star()
    );
    println!(
        "sup distance to the diagonal {:.4}",
        roc_distance(&curve, RocMetric::Sup)
    );
    Ok(())
}
