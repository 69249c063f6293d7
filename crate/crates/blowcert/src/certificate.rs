//! The JSON certificate document behind a validation run.
//!
//! Every interval field serializes as a two-element array of decimal
//! strings, outward-rounded to 17 significant digits, so the document is
//! itself a true enclosure; no binary floats cross the text boundary.
//! Parsing keeps the original strings, which makes parse followed by
//! serialize the identity up to whitespace.

use serde_json::{json, Map, Value};

use crate::blowup::{BlowUpCertificate, RunStatus, Stage};
use crate::compact::{ChartKind, Sign};
use crate::interval::{fmt_outward, parse_outward, Direction, Interval, IntervalVector};

/// Schema revision stamped into every document.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CertificateError {
    #[error("document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema revision {0}")]
    Schema(u64),
    #[error("field {0}: {1}")]
    Field(&'static str, String),
}

fn interval_value(v: &Interval) -> Value {
    json!([
        fmt_outward(v.lo(), Direction::Down),
        fmt_outward(v.hi(), Direction::Up)
    ])
}

fn vector_value(v: &IntervalVector) -> Value {
    Value::Array((0..v.dim()).map(|i| interval_value(&v[i])).collect())
}

fn scalar_value(v: f64) -> Value {
    Value::String(format!("{v:?}"))
}

/// The CLI spelling of a chart: `para`, or `dir:<coordinate>:<sign>`
/// with 1-based coordinate numbers.
pub fn chart_label(kind: ChartKind) -> String {
    match kind {
        ChartKind::QuasiParabolic => "para".to_string(),
        ChartKind::Directional { index, sign } => {
            let s = match sign {
                Sign::Plus => '+',
                Sign::Minus => '-',
            };
            format!("dir:{}:{}", index + 1, s)
        }
    }
}

/// Parses a chart label; the inverse of [`chart_label`].
pub fn parse_chart_label(s: &str) -> Option<ChartKind> {
    if s == "para" {
        return Some(ChartKind::QuasiParabolic);
    }
    let mut parts = s.split(':');
    if parts.next()? != "dir" {
        return None;
    }
    let coordinate: usize = parts.next()?.parse().ok()?;
    let sign = match parts.next()? {
        "+" => Sign::Plus,
        "-" => Sign::Minus,
        _ => return None,
    };
    if parts.next().is_some() || coordinate == 0 {
        return None;
    }
    Some(ChartKind::Directional {
        index: coordinate - 1,
        sign,
    })
}

fn status_label(status: &RunStatus) -> String {
    status.to_string()
}

/// Parses a status string; the inverse of the status display.
pub fn parse_status_label(s: &str) -> Option<RunStatus> {
    if s == "succeeded" {
        return Some(RunStatus::Succeeded);
    }
    let stage = s.strip_prefix("failed(")?.strip_suffix(')')?;
    let stage = match stage {
        "equilibrium-validation" => Stage::EquilibriumValidation,
        "domain-certification" => Stage::DomainCertification,
        "integration" => Stage::Integration,
        "tail-bound" => Stage::TailBound,
        _ => return None,
    };
    Some(RunStatus::Failed(stage))
}

/// Renders a run as the versioned certificate document.
pub fn certificate_json(run: &BlowUpCertificate) -> Value {
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(SCHEMA_VERSION));
    doc.insert("problem".into(), json!(run.problem_id));
    doc.insert("chart".into(), json!(chart_label(run.chart.kind())));
    doc.insert("status".into(), json!(status_label(&run.status)));
    doc.insert("wall_seconds".into(), scalar_value(run.wall_seconds));

    let null = Value::Null;
    match &run.cert {
        Some(cert) => {
            doc.insert("x_star".into(), vector_value(&cert.x_star));
            let rows: Vec<Value> = (0..cert.y.nrows())
                .map(|i| {
                    Value::Array((0..cert.y.ncols()).map(|j| scalar_value(cert.y[(i, j)])).collect())
                })
                .collect();
            doc.insert("y".into(), Value::Array(rows));
            doc.insert("eps".into(), scalar_value(cert.eps));
            doc.insert("c_a".into(), interval_value(&cert.c_a));
            doc.insert("c1".into(), interval_value(&cert.c1));
            doc.insert("c_tilde_n".into(), interval_value(&cert.c_tilde_n));
        }
        None => {
            for key in ["x_star", "y", "eps", "c_a", "c1", "c_tilde_n"] {
                doc.insert(key.into(), null.clone());
            }
        }
    }
    doc.insert(
        "tau_n".into(),
        run.tau_n.map_or(null.clone(), scalar_value),
    );
    for (key, field) in [
        ("t_n", &run.t_n),
        ("tail", &run.tail_bound),
        ("t_max", &run.t_max),
    ] {
        doc.insert(
            key.into(),
            field.as_ref().map_or(null.clone(), interval_value),
        );
    }
    Value::Object(doc)
}

/// Renders a run as pretty-printed JSON with a trailing newline.
pub fn certificate_string(run: &BlowUpCertificate) -> String {
    let mut s = serde_json::to_string_pretty(&certificate_json(run)).expect("serializable value");
    s.push('\n');
    s
}

/// A schema-checked certificate document. It keeps the parsed JSON value
/// verbatim, so re-serializing reproduces the input up to whitespace.
#[derive(Debug, Clone)]
pub struct CertificateDoc {
    value: Value,
}

impl CertificateDoc {
    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn to_string_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.value).expect("serializable value");
        s.push('\n');
        s
    }

    pub fn problem(&self) -> &str {
        self.value["problem"].as_str().expect("checked at parse")
    }

    pub fn chart(&self) -> ChartKind {
        parse_chart_label(self.value["chart"].as_str().expect("checked at parse"))
            .expect("checked at parse")
    }

    pub fn status(&self) -> RunStatus {
        parse_status_label(self.value["status"].as_str().expect("checked at parse"))
            .expect("checked at parse")
    }

    /// Outward-parsed interval field; `None` when the field is null.
    pub fn interval(&self, name: &str) -> Option<Interval> {
        let pair = self.value.get(name)?.as_array()?;
        let lo = parse_outward(pair[0].as_str()?, Direction::Down)?;
        let hi = parse_outward(pair[1].as_str()?, Direction::Up)?;
        Interval::try_new(lo, hi).ok()
    }

    pub fn t_max(&self) -> Option<Interval> {
        self.interval("t_max")
    }
}

fn check_interval_field(doc: &Value, name: &'static str) -> Result<(), CertificateError> {
    let field = doc
        .get(name)
        .ok_or_else(|| CertificateError::Field(name, "missing".into()))?;
    if field.is_null() {
        return Ok(());
    }
    let bad = |msg: &str| CertificateError::Field(name, msg.into());
    let pair = field
        .as_array()
        .ok_or_else(|| bad("expected [lo, hi] strings"))?;
    if pair.len() != 2 {
        return Err(bad("expected exactly two bounds"));
    }
    let lo = pair[0]
        .as_str()
        .and_then(|s| parse_outward(s, Direction::Down))
        .ok_or_else(|| bad("lower bound is not a decimal string"))?;
    let hi = pair[1]
        .as_str()
        .and_then(|s| parse_outward(s, Direction::Up))
        .ok_or_else(|| bad("upper bound is not a decimal string"))?;
    if !(lo <= hi) {
        return Err(bad("bounds are out of order"));
    }
    Ok(())
}

/// Parses and checks a certificate document.
pub fn parse_certificate(text: &str) -> Result<CertificateDoc, CertificateError> {
    let value: Value = serde_json::from_str(text)?;
    let schema = value
        .get("schema")
        .and_then(Value::as_u64)
        .ok_or_else(|| CertificateError::Field("schema", "missing".into()))?;
    if schema != SCHEMA_VERSION {
        return Err(CertificateError::Schema(schema));
    }
    value
        .get("problem")
        .and_then(Value::as_str)
        .ok_or_else(|| CertificateError::Field("problem", "missing".into()))?;
    value
        .get("chart")
        .and_then(Value::as_str)
        .and_then(parse_chart_label)
        .ok_or_else(|| CertificateError::Field("chart", "unrecognized".into()))?;
    let status = value
        .get("status")
        .and_then(Value::as_str)
        .and_then(parse_status_label)
        .ok_or_else(|| CertificateError::Field("status", "unrecognized".into()))?;
    for name in ["c_a", "c1", "c_tilde_n", "t_n", "tail", "t_max"] {
        check_interval_field(&value, name)?;
    }
    if status.is_success() && value.get("t_max").map_or(true, Value::is_null) {
        return Err(CertificateError::Field("t_max", "missing on success".into()));
    }
    Ok(CertificateDoc { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::{reference_initial, validate_blowup, BlowUpOptions};
    use crate::problems::builtin_problems;
    use std::sync::OnceLock;

    fn sample_run() -> &'static BlowUpCertificate {
        static RUN: OnceLock<BlowUpCertificate> = OnceLock::new();
        RUN.get_or_init(|| {
            let problem = builtin_problems()
                .into_iter()
                .find(|p| p.id == "kk-simple")
                .unwrap();
            let run = &problem.reference_runs[1];
            let y0 = reference_initial(&problem, run);
            validate_blowup(&problem, run.chart, &y0, &BlowUpOptions::default())
        })
    }

    #[test]
    fn document_round_trips_bit_for_bit() {
        let run = sample_run();
        let text = certificate_string(run);
        let doc = parse_certificate(&text).unwrap();
        assert_eq!(doc.to_string_pretty(), text);
        assert_eq!(doc.problem(), "kk-simple");
        assert_eq!(doc.status(), run.status);
    }

    #[test]
    fn parsed_intervals_contain_the_run_values() {
        let run = sample_run();
        assert!(run.status.is_success(), "{}", run.status);
        let doc = parse_certificate(&certificate_string(run)).unwrap();
        let t_max = run.t_max.unwrap();
        let parsed = doc.t_max().unwrap();
        assert!(parsed.contains_interval(&t_max));
        // 17 outward digits stay within an ulp-scale margin.
        assert!(parsed.width() <= t_max.width() * (1.0 + 1e-12) + 1e-13 * t_max.mag());
    }

    #[test]
    fn chart_and_status_labels_invert() {
        for kind in [
            ChartKind::QuasiParabolic,
            ChartKind::Directional {
                index: 0,
                sign: Sign::Plus,
            },
            ChartKind::Directional {
                index: 3,
                sign: Sign::Minus,
            },
        ] {
            assert_eq!(parse_chart_label(&chart_label(kind)), Some(kind));
        }
        assert_eq!(parse_chart_label("dir:0:+"), None);
        assert_eq!(parse_chart_label("dir:1:*"), None);
        for status in [
            RunStatus::Succeeded,
            RunStatus::Failed(Stage::EquilibriumValidation),
            RunStatus::Failed(Stage::DomainCertification),
            RunStatus::Failed(Stage::Integration),
            RunStatus::Failed(Stage::TailBound),
        ] {
            assert_eq!(parse_status_label(&status.to_string()), Some(status));
        }
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(matches!(
            parse_certificate("{\"schema\": 2}"),
            Err(CertificateError::Schema(2))
        ));
        let run = sample_run();
        let mut value = certificate_json(run);
        value["t_max"] = serde_json::json!(["2e0", "1e0"]);
        let text = serde_json::to_string(&value).unwrap();
        assert!(matches!(
            parse_certificate(&text),
            Err(CertificateError::Field("t_max", _))
        ));
        assert!(parse_certificate("not json").is_err());
    }
}
