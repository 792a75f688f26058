//! The two-stage ranking test: learn a scorer on one part of each sample,
//! then apply a univariate rank test to the scores of the rest.
//!
//! cargo run --release --example two_sample_test

use ranktest::ranker::{Ranker, TrainConfig};
use ranktest::rankstats::{NullTableCache, QuantileMethod, ScoreGenerator};
use ranktest::synthdata::{generate, ModelSpec};
use ranktest::twostage::{
    combined_ranking_test, default_roc_null, ranking_test, roc_space_test, RankingTest, SplitConfig,
};

fn main() -> ranktest::Result<()> {
    let cache = NullTableCache::in_memory();
    let split = SplitConfig {
        train_fraction: 0.8,
        seed: 7,
    };
    let ranker = Ranker::Linear(TrainConfig::default());

    for eps in [0.0, 0.3] {
        let spec = ModelSpec::l1_minus(6, eps)?;
        let (x, y) = generate(&spec, 500, 500, 21)?;
        println!("{spec}");

        for g in [ScoreGenerator::Mww, ScoreGenerator::rtb(0.9)?] {
            let cfg = RankingTest {
                ranker: ranker.clone(),
                generator: g,
                alpha: 0.05,
                split,
                quantile: QuantileMethod::default(),
            };
            let r = ranking_test(&x, &y, &cfg, &cache)?;
            println!(
                "  rank {g:<8} stat {:+.4} q {:.4} p {:.4} reject {} (holdout AUC {:.3})",
                r.statistic_centered,
                r.quantile,
                r.p_value,
                r.reject,
                r.holdout_auc.unwrap_or(f64::NAN)
            );
        }

        let region = default_roc_null(100, 100)?;
        let r = roc_space_test(&x, &y, &ranker, 0.05, &split, &region)?;
        println!(
            "  roc sup  dist {:.4} t {:.4} p {:.4} reject {}",
            r.statistic_centered, r.quantile, r.p_value, r.reject
        );

        let parts = [
            (ScoreGenerator::Mww, 0.025),
            (ScoreGenerator::rtb(0.8)?, 0.025),
        ];
        let c = combined_ranking_test(
            &x,
            &y,
            &ranker,
            &parts,
            0.05,
            &split,
            QuantileMethod::default(),
            &cache,
        )?;
        println!("  combined mww+rtb:0.8 reject {}", c.reject);
    }
    Ok(())
}
