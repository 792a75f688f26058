//! The comparison tests: MMD, energy distance, Friedman-Rafsky and the
//! Tukey-depth rank test.
//!
//! cargo run --release --example baselines

use ranktest::baselines::{
    energy_test, fr_test, median_heuristic, mmd_test, tukey_depth_test, DepthConfig, MmdBandwidth,
    PermutationScheme,
};
use ranktest::rankstats::{NullTableCache, QuantileMethod, ScoreGenerator};
use ranktest::synthdata::{generate, ModelSpec};

fn main() -> ranktest::Result<()> {
    let scheme = PermutationScheme {
        b_perm: 500,
        seed: 1,
    };
    let cache = NullTableCache::in_memory();
    for spec in [ModelSpec::s1(4, 0.0)?, ModelSpec::s1(4, 0.6)?] {
        let (x, y) = generate(&spec, 150, 150, 2)?;
        println!("{spec}  median bandwidth {:.3}", median_heuristic(&x, &y)?);
        let reports = [
            mmd_test(&x, &y, &MmdBandwidth::Median, 0.05, &scheme)?,
            mmd_test(
                &x,
                &y,
                &MmdBandwidth::Grid(ranktest::baselines::bandwidth_grid()),
                0.05,
                &scheme,
            )?,
            energy_test(&x, &y, 0.05, &scheme)?,
            fr_test(&x, &y, 0.05, &scheme)?,
            tukey_depth_test(
                &x,
                &y,
                ScoreGenerator::Mww,
                0.05,
                &DepthConfig::default(),
                QuantileMethod::default(),
                &cache,
            )?,
        ];
        for r in reports {
            println!(
                "  {:<12} stat {:>10.4} p {:.4} reject {}",
                r.test, r.statistic_centered, r.p_value, r.reject
            );
        }
    }
    Ok(())
}
