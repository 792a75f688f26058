//! Linear rank statistics and their null tables.
//!
//! cargo run --example rank_statistics

use ranktest::rankstats::{
    linear_rank_statistic, midranks, quantile_upper_bound, NullTable, ScoreGenerator,
    DEFAULT_EXACT_BUDGET,
};

fn main() -> ranktest::Result<()> {
    let x = [2.3, 0.7, 4.1, 3.3];
    let y = [0.2, 1.5, 0.7, 2.0, -0.4];

    let pooled: Vec<f64> = x.iter().chain(&y).copied().collect();
    println!("midranks {:?}", midranks(&pooled)?.ranks);

    for g in [
        ScoreGenerator::Mww,
        ScoreGenerator::rtb(0.8)?,
        ScoreGenerator::power(2.0)?,
    ] {
        let stat = linear_rank_statistic(&x, &y, &g)?;
        let table = NullTable::exact(x.len(), y.len(), g, DEFAULT_EXACT_BUDGET)?;
        println!(
            "{g:>8}: raw {:.4} centered {:+.4} p-value {:.4} q(0.05) {:+.4}",
            stat.raw,
            stat.centered,
            table.p_value(stat.centered),
            table.quantile(0.05)?
        );
    }

    // exact enumeration against a Monte-Carlo table
    let g = ScoreGenerator::rtb(0.9)?;
    let exact = NullTable::exact(8, 8, g, DEFAULT_EXACT_BUDGET)?;
    let mc = NullTable::monte_carlo(8, 8, g, 100_000, 1)?;
    println!(
        "n=m=8 {g}: total variation exact vs MC {:.4}",
        exact.total_variation(&mc)
    );

    // the distribution-free bound is loose but valid for any (n, m)
    let q = NullTable::exact(10, 10, ScoreGenerator::Mww, DEFAULT_EXACT_BUDGET)?.quantile(0.05)?;
    let bound = quantile_upper_bound(20, 0.5, &ScoreGenerator::Mww, 0.05)?;
    println!("n=m=10 mww: q(0.05) = {q:.4}, upper bound {bound:.4}");
    Ok(())
}
