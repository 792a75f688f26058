//! Training scoring functions with each bipartite ranker and comparing
//! their holdout AUC to the closed-form oracle.
//!
//! cargo run --release --example train_rankers

use ranktest::ranker::{Ranker, ScoringModel, TrainConfig};
use ranktest::rankstats::ScoreGenerator;
use ranktest::synthdata::{generate, oracle_scorer, ModelSpec};
use ranktest::twostage::{train_and_score, SplitConfig};

fn main() -> ranktest::Result<()> {
    let split = SplitConfig {
        train_fraction: 0.5,
        seed: 3,
    };
    let cfg = TrainConfig::default();
    let quadratic = TrainConfig {
        augment_quadratic: true,
        ..cfg
    };

    for spec in [ModelSpec::l1_minus(6, 0.3)?, ModelSpec::s1(6, 0.4)?] {
        let (x, y) = generate(&spec, 1000, 1000, 5)?;
        println!("{spec}");
        let rankers = [
            Ranker::Linear(cfg),
            Ranker::Mlp(cfg),
            Ranker::Boosted(quadratic),
            Ranker::SmoothedWphi(ScoreGenerator::Mww, cfg),
            Ranker::Fixed(oracle_scorer(&spec)?),
        ];
        for r in &rankers {
            let scored = train_and_score(&x, &y, r, &split)?;
            println!(
                "  {:<16} holdout AUC {:.4}",
                r.descriptor(),
                scored.holdout_auc()
            );
        }
    }

    // models round-trip through a plain text format
    let spec = ModelSpec::l1_minus(4, 0.3)?;
    let (x, y) = generate(&spec, 200, 200, 1)?;
    let model = Ranker::Linear(cfg).train(&x, &y)?.model;
    let text = model.to_text();
    assert_eq!(ScoringModel::from_text(&text)?, model);
    println!("\n{text}");
    Ok(())
}
