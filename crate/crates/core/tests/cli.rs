use std::fs;

use ranktest::cli::run;
use ranktest::rankstats::NullTable;
use ranktest::twostage::TestReport;

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("ranktest")
        .chain(args.iter().copied())
        .map(String::from)
        .collect()
}

const CONFIG: &str = r#"
name = "cli-smoke"
seed = 3
n_total = 60
replications = 2
alphas = [0.05, 0.1]
b_perm = 20

[[models]]
family = "L1minus"
dim = 4
epsilons = [0.0, 0.5]

[[methods]]
kind = "ranking"
ranker = "linear"
phi = "mww"
train = { epochs = 10 }

[[methods]]
kind = "energy"
"#;

#[test]
fn tabulate_writes_the_exact_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.txt");
    let code = run(argv(&[
        "tabulate",
        "2",
        "2",
        "mww",
        "exact",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let table = NullTable::load(&out).unwrap();
    let probs: Vec<f64> = table.support.iter().map(|s| s.1).collect();
    let sixth = 1.0 / 6.0;
    assert_eq!(probs.len(), 5);
    for (p, e) in probs.iter().zip([sixth, sixth, 2.0 * sixth, sixth, sixth]) {
        assert!((p - e).abs() < 1e-15);
    }
}

#[test]
fn generate_then_test_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let code = run(argv(&[
        "generate", "--model", "L1minus", "--dim", "4", "--eps", "0.2", "-n", "100", "-m", "100",
        "--seed", "7", "--out", d, "--header",
    ]));
    assert_eq!(code, 0);
    let x = dir.path().join("sample_x.csv");
    assert!(dir.path().join("sample_meta.json").exists());
    let report = dir.path().join("report.json");
    let code = run(argv(&[
        "test",
        x.to_str().unwrap(),
        x.to_str().unwrap(),
        "--ranker",
        "linear",
        "--phi",
        "mww",
        "--alpha",
        "0.05",
        "--seed",
        "7",
        "--out",
        report.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let r: TestReport = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert!(!r.reject);
    assert_eq!(r.seed, 7);
}

#[test]
fn baseline_methods_run_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(
        run(argv(&[
            "generate", "--model", "S1", "--dim", "3", "--eps", "0.3", "-n", "30", "-m", "40",
            "--out", d
        ])),
        0
    );
    let x = dir.path().join("sample_x.csv");
    let y = dir.path().join("sample_y.csv");
    for method in ["rocsup", "mmd", "energy", "fr", "tukey"] {
        let out = dir.path().join(format!("{method}.json"));
        let code = run(argv(&[
            "test",
            x.to_str().unwrap(),
            y.to_str().unwrap(),
            "--method",
            method,
            "--b-perm",
            "50",
            "--out",
            out.to_str().unwrap(),
        ]));
        assert_eq!(code, 0, "{method}");
        let r: TestReport = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
        assert!((0.0..=1.0).contains(&r.p_value));
    }
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("out");
    let code = run(argv(&[
        "experiment",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    for f in [
        "report.json",
        "rates.csv",
        "power_L1minus_d4.csv",
        "timing.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(argv(&["experiment", "missing.toml"])), 2);
    assert_eq!(run(argv(&["test", "--bogus"])), 2);
    assert_eq!(run(argv(&["frobnicate"])), 2);
    assert_eq!(run(argv(&["tabulate", "2", "2", "nonsense", "exact"])), 2);
    assert_eq!(run(argv(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, CONFIG.replace("replications = 2", "replications = 0")).unwrap();
    assert_eq!(run(argv(&["experiment", bad.to_str().unwrap()])), 2);

    // a non-positive-definite model is a runtime failure
    let d = dir.path().to_str().unwrap();
    let code = run(argv(&[
        "generate", "--model", "L1plus", "--dim", "4", "-n", "5", "-m", "5", "--out", d,
    ]));
    assert_eq!(code, 1);
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ranktest::harness::ExperimentConfig::load(&path).unwrap();
        count += 1;
    }
    assert!(count >= 2);
}
