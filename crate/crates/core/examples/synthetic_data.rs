//! Drawing the synthetic two-sample problems and exporting them as CSV.
//!
//! cargo run --example synthetic_data -- [out_dir]

use std::path::PathBuf;

use ranktest::synthdata::{export, generate, sample_moments, ModelSpec};

fn main() -> ranktest::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ranktest-data"));

    let specs = [
        ModelSpec::l1_minus(4, 0.3)?,
        ModelSpec::s1(10, 0.4)?,
        ModelSpec::s2(20, 0.1)?,
        ModelSpec::t1(0.5)?,
        ModelSpec::t2(4, 0.3)?,
        ModelSpec::t3(20, 0.2)?,
    ];
    for (k, spec) in specs.iter().enumerate() {
        let (x, y) = generate(spec, 2000, 2000, 100 + k as u64)?;
        let (mx, cx) = sample_moments(&x);
        let (my, cy) = sample_moments(&y);
        println!(
            "{spec:<28} mean[0] {:+.3} / {:+.3}  var[0] {:.3} / {:.3}",
            mx[0],
            my[0],
            cx[(0, 0)],
            cy[(0, 0)]
        );
        let prefix = format!("{}_d{}", spec.family.name(), spec.dim);
        export(&out, &prefix, spec, 100 + k as u64, &x, &y, true)?;
    }
    println!("wrote CSV files and metadata under {}", out.display());

    // the paper's positively correlated location matrices are not valid covariances
    if let Err(e) = ModelSpec::new(ranktest::synthdata::Family::L1Plus, 4, 0.3)
        .and_then(|s| generate(&s, 5, 5, 0))
    {
        println!("L1plus: {e}");
    }
    Ok(())
}
