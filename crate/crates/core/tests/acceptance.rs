//! Acceptance suite: one PASS/FAIL line per criterion, each at its pinned
//! tolerance. Exits nonzero when any criterion fails.

use std::time::Instant;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use ranktest::baselines::MmdBandwidth;
use ranktest::harness::{
    run_experiment, ExperimentConfig, MethodSpec, ModelGrid, RankerKind, PAPER_N_TOTAL,
};
use ranktest::ranker::{pairwise_logistic_objective, smoothed_wphi_objective, Mlp, TrainConfig};
use ranktest::rankstats::{
    asymptotic_mean, linear_rank_statistic, mww_statistic, quantile_upper_bound, NullTable,
    QuantileMethod, ScoreGenerator, DEFAULT_EXACT_BUDGET,
};
use ranktest::rng::{derived_stream, tag};
use ranktest::roc::{auc_from_curve, empirical_roc, pair_counts, RocCurve, RocFn};
use ranktest::synthdata::{gaussian_oracle, generate, oracle_scorer, Family, ModelSpec};

/// Master seed for every criterion, fixed before any run.
const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn binomial_band(p: f64, b: usize) -> f64 {
    2.0 * (p * (1.0 - p) / b as f64).sqrt()
}

fn base_config(name: &str, family: Family, dim: usize, eps: f64) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        seed: SEED,
        n_total: 400,
        positive_fraction: 0.5,
        replications: 100,
        alphas: vec![0.05],
        train_fraction: 0.8,
        b_perm: 1000,
        depth_directions: 1000,
        quantile: QuantileMethod::default(),
        models: vec![ModelGrid {
            family,
            dim,
            epsilons: vec![eps],
        }],
        methods: Vec::new(),
        output_dir: None,
    }
}

fn rate(report: &ranktest::harness::ExperimentReport, method: &str, eps: f64) -> (f64, usize) {
    let cell = report.cell(method, eps).expect("cell present");
    (cell.rates[0].frequency, cell.failures.len())
}

fn c1_pivotality() -> Verdict {
    let gens = [
        ScoreGenerator::Mww,
        ScoreGenerator::power(2.0).unwrap(),
        ScoreGenerator::rtb(0.8).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for (n, m) in [(3, 3), (5, 5), (4, 6)] {
        for (k, g) in gens.iter().enumerate() {
            let exact = NullTable::exact(n, m, *g, DEFAULT_EXACT_BUDGET).unwrap();
            let seed = ranktest::rng::derive_seed(SEED, &[tag("c1"), n as u64, m as u64, k as u64]);
            let mc = NullTable::monte_carlo(n, m, *g, 200_000, seed).unwrap();
            let tv = exact.total_variation(&mc);
            worst = worst.max(tv);
            if tv > 0.01 {
                lines.push(format!("({n},{m},{g}) tv={tv:.4}"));
            }
        }
    }
    let detail = if lines.is_empty() {
        format!("max tv {worst:.4}")
    } else {
        format!("max tv {worst:.4}; over 0.01: {}", lines.join(", "))
    };
    verdict(worst <= 0.01, detail)
}

fn c2_affine_identity() -> Verdict {
    let mut r = derived_stream(SEED, &[tag("c2")]);
    let mut bad = 0;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = r.random_range(1..=40);
        let m = r.random_range(1..=40);
        let x: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let y: Vec<f64> = (0..m).map(|_| r.random::<f64>()).collect();
        let w = mww_statistic(&x, &y).unwrap();
        let (below, ties) = pair_counts(&y, &x).unwrap();
        assert_eq!(ties, 0, "continuous draws are tie-free");
        let rhs = below as f64 + (n * (n + 1)) as f64 / 2.0;
        if w != rhs {
            bad += 1;
        }
        let lin = linear_rank_statistic(&x, &y, &ScoreGenerator::Mww).unwrap();
        let err = (lin.raw - w / (n + m + 1) as f64).abs();
        worst = worst.max(err);
    }
    verdict(
        bad == 0 && worst <= 1e-12,
        format!("{bad} identity mismatches, max |W_mww - W/(N+1)| = {worst:.2e}"),
    )
}

fn c3_type_one() -> Verdict {
    let mut cfg = base_config("c3", Family::L1Minus, 6, 0.0);
    cfg.replications = 400;
    cfg.methods = vec![MethodSpec::Ranking {
        ranker: RankerKind::Linear,
        phi: ScoreGenerator::Mww,
        train: TrainConfig::default(),
    }];
    let report = run_experiment(&cfg).unwrap();
    let (f, fails) = rate(&report, "rank[linear,mww]", 0.0);
    verdict(
        fails == 0 && (0.028..=0.072).contains(&f),
        format!("rejection frequency {f:.4} (band [0.028, 0.072], B=400)"),
    )
}

fn c4_power() -> Verdict {
    let mut cfg = base_config("c4", Family::L1Minus, 6, 0.08);
    cfg.n_total = PAPER_N_TOTAL;
    cfg.replications = 50;
    cfg.methods = vec![MethodSpec::Ranking {
        ranker: RankerKind::Linear,
        phi: ScoreGenerator::Mww,
        train: TrainConfig::default(),
    }];
    let report = run_experiment(&cfg).unwrap();
    let (f, fails) = rate(&report, "rank[linear,mww]", 0.08);
    verdict(
        fails == 0 && f >= 0.80,
        format!("rejection frequency {f:.3} at N=2000, B=50 (bar 0.80)"),
    )
}

fn c5_gaussian_oracle() -> Verdict {
    let spec = ModelSpec::l1_minus(4, 0.3).unwrap();
    let n = 20_000;
    let scorer = oracle_scorer(&spec).unwrap();
    let oracle = gaussian_oracle(&spec).unwrap();
    let (x, y) = generate(&spec, n, n, ranktest::rng::derive_seed(SEED, &[tag("c5")])).unwrap();
    let xs = scorer.score_sample(&x).unwrap();
    let ys = scorer.score_sample(&y).unwrap();
    let curve = empirical_roc(&ys, &xs).unwrap();
    let sup = curve
        .points()
        .iter()
        .map(|&(a, b)| (b - oracle.eval(a)).abs())
        .fold(0.0, f64::max);
    let auc = auc_from_curve(&curve);

    // brute force: concordance over independent random pairs
    let pairs = 2_000_000;
    let (bx, by) = generate(
        &spec,
        pairs,
        pairs,
        ranktest::rng::derive_seed(SEED, &[tag("c5-mc")]),
    )
    .unwrap();
    let bxs = scorer.score_sample(&bx).unwrap();
    let bys = scorer.score_sample(&by).unwrap();
    let wins = bxs.iter().zip(&bys).filter(|(a, b)| a > b).count();
    let mc_auc = wins as f64 / pairs as f64;
    verdict(
        sup <= 0.02 && (auc - mc_auc).abs() <= 0.01,
        format!(
            "sup distance {sup:.4} (bar 0.02), AUC {auc:.4} vs Monte-Carlo {mc_auc:.4} (bar 0.01), closed form {:.4}",
            oracle.auc_star()
        ),
    )
}

fn c6_asymptotic_mean() -> Verdict {
    let total = 10_000;
    let n = total / 2;
    let reps = 200;
    let bar = 5.0 / (total as f64).sqrt();
    let perfect = RocCurve::new(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]).unwrap();
    let diagonal = RocCurve::diagonal();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (k, g) in [ScoreGenerator::Mww, ScoreGenerator::power(2.0).unwrap()]
        .iter()
        .enumerate()
    {
        for (label, curve, shift) in [("diagonal", &diagonal, 0.0), ("perfect", &perfect, 1.0)] {
            let mut r = derived_stream(SEED, &[tag("c6"), k as u64, shift as u64]);
            let mut acc = 0.0;
            for _ in 0..reps {
                let x: Vec<f64> = (0..n).map(|_| shift + r.random::<f64>()).collect();
                let y: Vec<f64> = (0..total - n).map(|_| r.random::<f64>()).collect();
                acc += linear_rank_statistic(&x, &y, g).unwrap().raw / n as f64;
            }
            let mc = acc / reps as f64;
            let target = asymptotic_mean(curve as &dyn RocFn, 0.5, g).unwrap();
            let gap = (mc - target).abs();
            worst = worst.max(gap);
            parts.push(format!("{g}/{label} {gap:.2e}"));
        }
    }
    verdict(
        worst <= bar,
        format!("gaps {} (bar {bar:.3})", parts.join(", ")),
    )
}

fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

fn c7_gradients() -> Verdict {
    let mut r = derived_stream(SEED, &[tag("c7")]);
    let normal = |r: &mut ranktest::rng::Rng| -> f64 { StandardNormal.sample(r) };
    let (d, n_pos, n_neg, width) = (4, 12, 10, 6);
    let rows: Vec<Vec<f64>> = (0..n_pos + n_neg)
        .map(|_| (0..d).map(|_| normal(&mut r)).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = (0..n_pos)
        .flat_map(|i| (0..n_neg).map(move |j| (i, n_pos + j)))
        .collect();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for point in 0..20 {
        let mut net = Mlp::seeded(d, width, point);
        let p0: Vec<f64> = net
            .params()
            .iter()
            .map(|v| v + 0.3 * normal(&mut r))
            .collect();
        net.set_params(&p0);
        let (_, g) = pairwise_logistic_objective(&net, &rows, &pairs, 0.01);
        let fd: Vec<f64> = (0..p0.len())
            .map(|k| {
                let mut a = net.clone();
                let mut b = net.clone();
                let mut p = p0.clone();
                p[k] += h;
                a.set_params(&p);
                p[k] -= 2.0 * h;
                b.set_params(&p);
                (pairwise_logistic_objective(&a, &rows, &pairs, 0.01).0
                    - pairwise_logistic_objective(&b, &rows, &pairs, 0.01).0)
                    / (2.0 * h)
            })
            .collect();
        worst = worst.max(rel_error(&g, &fd));

        let gen = if point % 2 == 0 {
            ScoreGenerator::Mww
        } else {
            ScoreGenerator::power(2.0).unwrap()
        };
        let w: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
        let f = |w: &[f64]| smoothed_wphi_objective(w, &rows, n_pos, &gen, 0.5, 0.01).unwrap();
        let (_, g) = f(&w);
        let fd: Vec<f64> = (0..d)
            .map(|k| {
                let mut a = w.clone();
                let mut b = w.clone();
                a[k] += h;
                b[k] -= h;
                (f(&a).0 - f(&b).0) / (2.0 * h)
            })
            .collect();
        worst = worst.max(rel_error(&g, &fd));
    }
    verdict(
        worst <= 1e-4,
        format!("max relative gradient error {worst:.2e} over 20 points per objective"),
    )
}

fn c8_bound_dominance() -> Verdict {
    let table = NullTable::exact(10, 10, ScoreGenerator::Mww, DEFAULT_EXACT_BUDGET).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [0.01, 0.05, 0.1] {
        let bound = quantile_upper_bound(20, 0.5, &ScoreGenerator::Mww, alpha).unwrap();
        let q = table.quantile(alpha).unwrap();
        ok &= bound >= q;
        parts.push(format!("alpha={alpha}: bound {bound:.3} >= q {q:.3}"));
    }
    verdict(ok, parts.join(", "))
}

fn c9_baseline_validity() -> Verdict {
    let mut cfg = base_config("c9", Family::L1Minus, 6, 0.0);
    cfg.n_total = 200;
    cfg.replications = 300;
    cfg.methods = vec![
        MethodSpec::Mmd {
            bandwidth: MmdBandwidth::Median,
        },
        MethodSpec::Energy,
        MethodSpec::Fr,
    ];
    let report = run_experiment(&cfg).unwrap();
    let bar = 0.05 + binomial_band(0.05, 300);
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["mmd", "energy", "fr"] {
        let (f, fails) = rate(&report, name, 0.0);
        ok &= fails == 0 && f <= bar;
        parts.push(format!("{name} {f:.4}"));
    }
    verdict(ok, format!("{} (bar {bar:.4})", parts.join(", ")))
}

fn c10_comparative_trend() -> Verdict {
    let mut cfg = base_config("c10", Family::S2, 100, 0.1);
    cfg.n_total = PAPER_N_TOTAL;
    cfg.replications = 50;
    cfg.methods = vec![
        MethodSpec::Ranking {
            ranker: RankerKind::Mlp,
            phi: ScoreGenerator::Mww,
            train: TrainConfig {
                epochs: 300,
                learning_rate: 0.005,
                hidden_width: 64,
                ..TrainConfig::default()
            },
        },
        MethodSpec::Tukey {
            phi: ScoreGenerator::Mww,
        },
    ];
    let report = run_experiment(&cfg).unwrap();
    let (mlp, f1) = rate(&report, "rank[mlp,mww]", 0.1);
    let (tukey, f2) = rate(&report, "tukey[mww]", 0.1);
    verdict(
        f1 + f2 == 0 && mlp - tukey >= 0.3,
        format!(
            "mlp {mlp:.3}, tukey {tukey:.3}, difference {:.3} (bar 0.3)",
            mlp - tukey
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("exact pivotality", c1_pivotality),
        ("affine identity", c2_affine_identity),
        ("type-I control", c3_type_one),
        ("power at full scale", c4_power),
        ("gaussian oracle", c5_gaussian_oracle),
        ("asymptotic mean", c6_asymptotic_mean),
        ("gradient checks", c7_gradients),
        ("bound dominance", c8_bound_dominance),
        ("baseline validity", c9_baseline_validity),
        ("comparative trend", c10_comparative_trend),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let k = i + 1;
        if only.is_some_and(|o| o != k) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {k:>2} {status} {name}: {} [{secs:.1}s]",
            v.detail
        );
        if !v.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
