//! JSON file formats.
//!
//! Effect sets are stored as
//!
//! ```json
//! {"d": 2, "n": 2, "flavor": "...", "seed": 7, "effects": [[[[re, im], ...], ...], ...]}
//! ```
//!
//! with each matrix a row-major list of rows and every number written with 17
//! significant digits, so a parse of the rendered text recovers the same bits.

use serde::Deserialize;
use serde_json::{json, Value};

use crate::effects::{build_effect_set, EffectSet};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::tolerance::Tolerances;
use crate::witness::{ContractionReport, WitnessCertificate};

/// Metadata carried next to the matrices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SetMetadata {
    pub flavor: Option<String>,
    pub seed: Option<u64>,
}

/// Raw contents of an effect-set file, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectSetFile {
    pub d: usize,
    pub n: usize,
    pub meta: SetMetadata,
    pub effects: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct RawSet {
    d: usize,
    n: usize,
    #[serde(default)]
    flavor: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    effects: Vec<Vec<Vec<[f64; 2]>>>,
}

impl EffectSetFile {
    pub fn from_set(set: &EffectSet, meta: SetMetadata) -> Self {
        Self {
            d: set.dim(),
            n: set.len(),
            meta,
            effects: set.matrices().cloned().collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawSet = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.effects.len() != raw.n {
            return Err(Error::Parse(format!(
                "n = {} but {} effects listed",
                raw.n,
                raw.effects.len()
            )));
        }
        let effects = raw
            .effects
            .iter()
            .map(|rows| {
                let m = matrix_from_rows(rows)?;
                if m.dim() != (raw.d, raw.d) {
                    return Err(Error::Parse(format!(
                        "effect is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        raw.d,
                        raw.d
                    )));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d: raw.d,
            n: raw.n,
            meta: SetMetadata {
                flavor: raw.flavor,
                seed: raw.seed,
            },
            effects,
        })
    }

    pub fn to_effect_set(&self, tol: &Tolerances) -> Result<EffectSet> {
        build_effect_set(&self.effects, tol)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"d\": {},\n  \"n\": {},\n", self.d, self.n));
        if let Some(flavor) = &self.meta.flavor {
            out.push_str(&format!(
                "  \"flavor\": {},\n",
                Value::from(flavor.as_str())
            ));
        }
        if let Some(seed) = self.meta.seed {
            out.push_str(&format!("  \"seed\": {seed},\n"));
        }
        out.push_str("  \"effects\": [\n");
        for (i, m) in self.effects.iter().enumerate() {
            out.push_str(&render_matrix(m, "    "));
            out.push_str(if i + 1 < self.effects.len() {
                ",\n"
            } else {
                "\n"
            });
        }
        out.push_str("  ]\n}\n");
        out
    }
}

/// A double with 17 significant digits.
pub fn render_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn render_matrix(m: &ComplexMatrix, indent: &str) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let entries: Vec<String> = m
                .row(i)
                .iter()
                .map(|z| format!("[{}, {}]", render_f64(z.re), render_f64(z.im)))
                .collect();
            format!("{indent}  [{}]", entries.join(", "))
        })
        .collect();
    format!("{indent}[\n{}\n{indent}]", rows.join(",\n"))
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| Error::Parse(e.to_string()))
}

/// An operator file: either a bare row-major matrix or `{"matrix": [...]}`.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum RawMatrix {
        Bare(Vec<Vec<[f64; 2]>>),
        Wrapped { matrix: Vec<Vec<[f64; 2]>> },
    }
    let raw: RawMatrix = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match raw {
        RawMatrix::Bare(rows) | RawMatrix::Wrapped { matrix: rows } => matrix_from_rows(&rows),
    }
}

pub fn render_operator(m: &ComplexMatrix) -> String {
    format!("{{\n  \"matrix\":\n{}\n}}\n", render_matrix(m, "  "))
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(|z| json!([z.re, z.im])).collect()))
            .collect(),
    )
}

/// Certificate JSON; projectors only when `full`.
pub fn witness_json(cert: &WitnessCertificate, full: bool) -> Value {
    let mut v = serde_json::to_value(cert).expect("certificate serializes");
    if full {
        v["left_projector"] = matrix_json(&cert.left_projector);
        v["right_projector"] = matrix_json(&cert.right_projector);
    }
    v
}

/// Contraction report JSON; `Y`, `P` and `Q` only when `full`.
pub fn contraction_json(report: &ContractionReport, full: bool) -> Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    if full {
        v["y"] = matrix_json(&report.y);
        v["p_projector"] = matrix_json(&report.p_projector);
        v["q_projector"] = matrix_json(&report.q_projector);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate_noncommuting_resolution;
    use crate::lueders::{verify, Claim, FixedPointReport};
    use proptest::prelude::*;

    #[test]
    fn effect_set_round_trip_is_bit_exact() {
        let set = generate_noncommuting_resolution(3, 3, 5).unwrap();
        let file = EffectSetFile::from_set(
            &set,
            SetMetadata {
                flavor: Some("noncommuting-resolution".into()),
                seed: Some(5),
            },
        );
        let text = file.render();
        let back = EffectSetFile::parse(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.render(), text);
    }

    #[test]
    fn parse_rejects_inconsistent_headers() {
        let text = r#"{"d": 2, "n": 2, "effects": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert!(matches!(EffectSetFile::parse(text), Err(Error::Parse(_))));
        let text = r#"{"d": 3, "n": 1, "effects": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert!(matches!(EffectSetFile::parse(text), Err(Error::Parse(_))));
        assert!(EffectSetFile::parse("not json").is_err());
    }

    #[test]
    fn operator_formats() {
        let bare = parse_matrix("[[[0,0],[1,0]],[[1,0],[0,0]]]").unwrap();
        let wrapped = parse_matrix(r#"{"matrix": [[[0,0],[1,0]],[[1,0],[0,0]]]}"#).unwrap();
        assert_eq!(bare, wrapped);
        assert_eq!(parse_matrix(&render_operator(&bare)).unwrap(), bare);
    }

    #[test]
    fn fixed_point_report_schema() {
        let set = generate_noncommuting_resolution(2, 3, 1).unwrap();
        let report: FixedPointReport = verify(&set).unwrap();
        assert_eq!(report.claim, Claim::FixedEqualsCommutant);
        let v = serde_json::to_value(&report).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["claim", "distance", "fixed_dim", "target_dim", "verdict"]
        );
        assert_eq!(v["claim"], "fixed-equals-commutant");
    }

    proptest! {
        #[test]
        fn rendered_doubles_parse_back_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let text = render_f64(x);
            let back: f64 = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
