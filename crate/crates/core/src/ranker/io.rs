//! Line-oriented model format. Floats are written with the shortest
//! representation that parses back to the same bits.
//!
//! ```text
//! ranktest-model 1
//! kind mlp
//! input_dim 2
//! quadratic false
//! standardizer_mean 0.1 -0.3
//! standardizer_scale 1.2 0.9
//! width 4
//! w1 ...
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Features, Mlp, ModelKind, ScoringModel, Standardizer, Stump};
use crate::error::{Error, Result};

const MAGIC: &str = "ranktest-model 1";

fn floats(v: &[f64]) -> String {
    let mut s = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{x:?}").unwrap();
    }
    s
}

pub(super) fn write_model(model: &ScoringModel) -> String {
    let mut out = String::new();
    let f = &model.features;
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "kind {}", model.kind_name()).unwrap();
    writeln!(out, "input_dim {}", f.input_dim).unwrap();
    writeln!(out, "quadratic {}", f.quadratic).unwrap();
    if let Some(st) = &f.standardizer {
        writeln!(out, "standardizer_mean {}", floats(&st.mean)).unwrap();
        writeln!(out, "standardizer_scale {}", floats(&st.scale)).unwrap();
    }
    match &model.kind {
        ModelKind::Linear { weights, bias } | ModelKind::Fixed { weights, bias } => {
            writeln!(out, "weights {}", floats(weights)).unwrap();
            writeln!(out, "bias {bias:?}").unwrap();
        }
        ModelKind::Mlp(net) => {
            writeln!(out, "width {}", net.width).unwrap();
            writeln!(out, "w1 {}", floats(&net.w1)).unwrap();
            writeln!(out, "b1 {}", floats(&net.b1)).unwrap();
            writeln!(out, "w2 {}", floats(&net.w2)).unwrap();
            writeln!(out, "b2 {:?}", net.b2).unwrap();
        }
        ModelKind::BoostedStumps(stumps) => {
            writeln!(out, "stages {}", stumps.len()).unwrap();
            for s in stumps {
                writeln!(
                    out,
                    "stump {} {:?} {:?} {:?} {:?}",
                    s.feature, s.threshold, s.left, s.right, s.weight
                )
                .unwrap();
            }
        }
    }
    out
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

struct Fields<'a> {
    map: HashMap<&'a str, &'a str>,
    stumps: Vec<&'a str>,
}

impl<'a> Fields<'a> {
    fn raw(&self, key: &str) -> Result<&'a str> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| parse_err(format!("missing field `{key}`")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.raw(key)?
            .parse()
            .map_err(|_| parse_err(format!("bad value for `{key}`")))
    }

    fn floats(&self, key: &str, len: usize) -> Result<Vec<f64>> {
        let v = parse_floats(self.raw(key)?)?;
        if v.len() != len {
            return Err(parse_err(format!(
                "`{key}` has {} values, expected {len}",
                v.len()
            )));
        }
        Ok(v)
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(format!("bad number `{t}`")))
        })
        .collect()
}

pub(super) fn read_model(text: &str) -> Result<ScoringModel> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(MAGIC) {
        return Err(parse_err("not a ranktest model"));
    }
    let mut fields = Fields {
        map: HashMap::new(),
        stumps: Vec::new(),
    };
    for line in lines {
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        if key == "stump" {
            fields.stumps.push(rest);
        } else if fields.map.insert(key, rest).is_some() {
            return Err(parse_err(format!("duplicate field `{key}`")));
        }
    }

    let input_dim: usize = fields.parse("input_dim")?;
    let quadratic: bool = fields.parse("quadratic")?;
    let standardizer = if fields.map.contains_key("standardizer_mean") {
        Some(Standardizer {
            mean: fields.floats("standardizer_mean", input_dim)?,
            scale: fields.floats("standardizer_scale", input_dim)?,
        })
    } else {
        None
    };
    let features = Features {
        input_dim,
        standardizer,
        quadratic,
    };
    let d = features.output_dim();
    let kind = match fields.raw("kind")? {
        k @ ("linear" | "fixed") => {
            let weights = fields.floats("weights", d)?;
            let bias = fields.parse("bias")?;
            if k == "linear" {
                ModelKind::Linear { weights, bias }
            } else {
                ModelKind::Fixed { weights, bias }
            }
        }
        "mlp" => {
            let width: usize = fields.parse("width")?;
            ModelKind::Mlp(Mlp {
                input_dim: d,
                width,
                w1: fields.floats("w1", width * d)?,
                b1: fields.floats("b1", width)?,
                w2: fields.floats("w2", width)?,
                b2: fields.parse("b2")?,
            })
        }
        "stumps" => {
            let stages: usize = fields.parse("stages")?;
            if stages != fields.stumps.len() {
                return Err(parse_err("stump count mismatch"));
            }
            let mut stumps = Vec::with_capacity(stages);
            for line in &fields.stumps {
                let mut it = line.split_whitespace();
                let feature: usize = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err("bad stump feature"))?;
                if feature >= d {
                    return Err(parse_err("stump feature out of range"));
                }
                let rest = parse_floats(&it.collect::<Vec<_>>().join(" "))?;
                let [threshold, left, right, weight] = rest[..] else {
                    return Err(parse_err("stump needs four numbers"));
                };
                stumps.push(Stump {
                    feature,
                    threshold,
                    left,
                    right,
                    weight,
                });
            }
            ModelKind::BoostedStumps(stumps)
        }
        other => return Err(parse_err(format!("unknown model kind `{other}`"))),
    };
    Ok(ScoringModel { features, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6f64..1e6, Just(0.1), Just(-0.0), Just(1e-300)]
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_model("hello").is_err());
        assert!(read_model("ranktest-model 1\nkind tree\ninput_dim 1\nquadratic false").is_err());
        assert!(read_model(
            "ranktest-model 1\nkind linear\ninput_dim 2\nquadratic false\nweights 1\nbias 0"
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn linear_round_trip(w in prop::collection::vec(finite(), 3), b in finite(),
                             mean in prop::collection::vec(finite(), 2), quad in any::<bool>()) {
            let mut features = Features::identity(2);
            features.quadratic = quad;
            features.standardizer = Some(Standardizer { mean, scale: vec![0.5, 3.0] });
            let d = features.output_dim();
            let weights: Vec<f64> = w.iter().cycle().take(d).copied().collect();
            let m = ScoringModel { features, kind: ModelKind::Fixed { weights, bias: b } };
            let back = read_model(&write_model(&m)).unwrap();
            prop_assert_eq!(back.to_text(), m.to_text());
            prop_assert_eq!(back, m);
        }

        #[test]
        fn mlp_round_trip(seed in any::<u64>(), width in 1usize..5) {
            let m = ScoringModel {
                features: Features::identity(3),
                kind: ModelKind::Mlp(Mlp::seeded(3, width, seed)),
            };
            prop_assert_eq!(read_model(&write_model(&m)).unwrap(), m);
        }

        #[test]
        fn stumps_round_trip(t in prop::collection::vec((0usize..2, finite(), finite(), finite()), 0..6)) {
            let stumps = t.into_iter().map(|(feature, threshold, left, right)| Stump {
                feature, threshold, left, right, weight: 0.05,
            }).collect();
            let m = ScoringModel { features: Features::identity(2), kind: ModelKind::BoostedStumps(stumps) };
            prop_assert_eq!(read_model(&write_model(&m)).unwrap(), m);
        }
    }
}
