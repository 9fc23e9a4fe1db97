//! The machine-readable output record and its three wire formats.
//!
//! Column order is fixed: k, j, n, value, v2, predicted, rule, agree. CSV and
//! TSV always start with a header row; JSON output is one object per line.
//! Exact term values are rendered as decimal strings in every format (they
//! outgrow fixed-width numerics almost immediately), and an infinite
//! valuation is rendered as the literal string "inf".

use gfib_core::Valuation;
use serde_json::{json, Map, Value};
use std::borrow::Cow;

pub const COLUMNS: [&str; 8] = ["k", "j", "n", "value", "v2", "predicted", "rule", "agree"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Tsv,
}

/// One output row. `value` is the exact decimal term when computed, `v2` its
/// 2-adic order, `predicted`/`rule` the predictor's answer when one was
/// consulted, and `agree` the comparison when both sides are present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputRecord {
    pub k: usize,
    pub j: Option<usize>,
    pub n: i64,
    pub value: Option<String>,
    pub v2: Option<Valuation>,
    pub predicted: Option<Valuation>,
    pub rule: Option<String>,
    pub agree: Option<bool>,
}

impl OutputRecord {
    /// Fill in `agree` from `v2` and `predicted` when both are present.
    pub fn with_agreement(mut self) -> Self {
        self.agree = match (self.v2, self.predicted) {
            (Some(v), Some(p)) => Some(v == p),
            _ => None,
        };
        self
    }

    fn valuation_field(v: Option<Valuation>) -> String {
        v.map(|v| v.to_string()).unwrap_or_default()
    }

    /// The eight fields in column order, with absent entries empty.
    pub fn fields(&self) -> [String; 8] {
        [
            self.k.to_string(),
            self.j.map(|j| j.to_string()).unwrap_or_default(),
            self.n.to_string(),
            self.value.clone().unwrap_or_default(),
            Self::valuation_field(self.v2),
            Self::valuation_field(self.predicted),
            self.rule.clone().unwrap_or_default(),
            self.agree.map(|a| a.to_string()).unwrap_or_default(),
        ]
    }

    pub fn from_fields(fields: &[String]) -> Result<Self, String> {
        if fields.len() != 8 {
            return Err(format!("expected 8 fields, got {}", fields.len()));
        }
        let opt = |s: &String| (!s.is_empty()).then(|| s.clone());
        let parse_val = |s: &String| -> Result<Option<Valuation>, String> {
            match s.as_str() {
                "" => Ok(None),
                "inf" => Ok(Some(Valuation::Infinite)),
                other => other
                    .parse::<u64>()
                    .map(|v| Some(Valuation::Finite(v)))
                    .map_err(|e| format!("bad valuation {other:?}: {e}")),
            }
        };
        Ok(OutputRecord {
            k: fields[0].parse().map_err(|e| format!("bad k: {e}"))?,
            j: match fields[1].as_str() {
                "" => None,
                s => Some(s.parse().map_err(|e| format!("bad j: {e}"))?),
            },
            n: fields[2].parse().map_err(|e| format!("bad n: {e}"))?,
            value: opt(&fields[3]),
            v2: parse_val(&fields[4])?,
            predicted: parse_val(&fields[5])?,
            rule: opt(&fields[6]),
            agree: match fields[7].as_str() {
                "" => None,
                "true" => Some(true),
                "false" => Some(false),
                other => return Err(format!("bad agree flag {other:?}")),
            },
        })
    }

    pub fn to_json(&self) -> Value {
        let val_json = |v: Valuation| -> Value {
            match v {
                Valuation::Finite(x) => json!(x),
                Valuation::Infinite => json!("inf"),
            }
        };
        let mut map = Map::new();
        map.insert("k".into(), json!(self.k));
        map.insert("j".into(), self.j.map(|j| json!(j)).unwrap_or(Value::Null));
        map.insert("n".into(), json!(self.n));
        if let Some(value) = &self.value {
            map.insert("value".into(), json!(value));
        }
        if let Some(v) = self.v2 {
            map.insert("v2".into(), val_json(v));
        }
        map.insert(
            "predicted".into(),
            self.predicted.map(val_json).unwrap_or(Value::Null),
        );
        map.insert(
            "rule".into(),
            self.rule.as_ref().map(|r| json!(r)).unwrap_or(Value::Null),
        );
        map.insert(
            "agree".into(),
            self.agree.map(|a| json!(a)).unwrap_or(Value::Null),
        );
        Value::Object(map)
    }

    pub fn from_json(value: &Value) -> Result<Self, String> {
        let obj = value.as_object().ok_or("record is not a JSON object")?;
        let parse_val = |key: &str| -> Result<Option<Valuation>, String> {
            match obj.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::Number(n)) => n
                    .as_u64()
                    .map(|v| Some(Valuation::Finite(v)))
                    .ok_or_else(|| format!("{key} is not a nonnegative integer")),
                Some(Value::String(s)) if s == "inf" => Ok(Some(Valuation::Infinite)),
                Some(other) => Err(format!("bad {key}: {other}")),
            }
        };
        Ok(OutputRecord {
            k: obj.get("k").and_then(Value::as_u64).ok_or("missing k")? as usize,
            j: match obj.get("j") {
                None | Some(Value::Null) => None,
                Some(v) => Some(v.as_u64().ok_or("bad j")? as usize),
            },
            n: obj.get("n").and_then(Value::as_i64).ok_or("missing n")?,
            value: match obj.get("value") {
                None | Some(Value::Null) => None,
                Some(v) => Some(v.as_str().ok_or("value is not a string")?.to_owned()),
            },
            v2: parse_val("v2")?,
            predicted: parse_val("predicted")?,
            rule: match obj.get("rule") {
                None | Some(Value::Null) => None,
                Some(v) => Some(v.as_str().ok_or("rule is not a string")?.to_owned()),
            },
            agree: match obj.get("agree") {
                None | Some(Value::Null) => None,
                Some(v) => Some(v.as_bool().ok_or("agree is not a boolean")?),
            },
        })
    }
}

fn csv_escape(field: &str) -> Cow<'_, str> {
    if field.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", field.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(field)
    }
}

/// Split one CSV line into fields, honoring quoted fields with doubled quotes.
pub fn parse_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    current.push('"');
                } else {
                    quoted = false;
                }
            }
            '"' if current.is_empty() => quoted = true,
            ',' if !quoted => fields.push(std::mem::take(&mut current)),
            c => current.push(c),
        }
    }
    fields.push(current);
    fields
}

/// Streams records in one format, emitting the header once for CSV/TSV.
pub struct RecordWriter<W: std::io::Write> {
    format: Format,
    out: W,
    header_written: bool,
}

impl<W: std::io::Write> RecordWriter<W> {
    pub fn new(format: Format, out: W) -> Self {
        RecordWriter {
            format,
            out,
            header_written: false,
        }
    }

    pub fn write(&mut self, record: &OutputRecord) -> std::io::Result<()> {
        match self.format {
            Format::Csv => {
                if !self.header_written {
                    writeln!(self.out, "{}", COLUMNS.join(","))?;
                    self.header_written = true;
                }
                let rendered: Vec<String> = record
                    .fields()
                    .iter()
                    .map(|f| csv_escape(f).into_owned())
                    .collect();
                writeln!(self.out, "{}", rendered.join(","))
            }
            Format::Tsv => {
                if !self.header_written {
                    writeln!(self.out, "{}", COLUMNS.join("\t"))?;
                    self.header_written = true;
                }
                writeln!(self.out, "{}", record.fields().join("\t"))
            }
            Format::Json => writeln!(self.out, "{}", record.to_json()),
        }
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OutputRecord {
        OutputRecord {
            k: 3,
            j: Some(0),
            n: 22,
            value: Some("66012".into()),
            v2: Some(Valuation::Finite(2)),
            predicted: Some(Valuation::Finite(2)),
            rule: Some("K3J0.case4".into()),
            agree: None,
        }
        .with_agreement()
    }

    #[test]
    fn csv_round_trip() {
        let rec = sample();
        let line = rec.fields().join(",");
        let parsed = OutputRecord::from_fields(&parse_csv_line(&line)).unwrap();
        assert_eq!(parsed, rec);
    }

    #[test]
    fn json_round_trip() {
        let rec = sample();
        let parsed = OutputRecord::from_json(&rec.to_json()).unwrap();
        assert_eq!(parsed, rec);
    }

    #[test]
    fn infinite_valuation_renders_as_inf() {
        let rec = OutputRecord {
            k: 4,
            j: Some(1),
            n: 2,
            value: Some("0".into()),
            v2: Some(Valuation::Infinite),
            predicted: None,
            rule: None,
            agree: None,
        };
        assert_eq!(rec.fields()[4], "inf");
        assert_eq!(rec.to_json()["v2"], serde_json::json!("inf"));
        let parsed = OutputRecord::from_fields(rec.fields().as_ref()).unwrap();
        assert_eq!(parsed.v2, Some(Valuation::Infinite));
    }

    #[test]
    fn quoted_fields_survive() {
        assert_eq!(
            parse_csv_line("a,\"b,c\",\"d\"\"e\""),
            vec!["a".to_string(), "b,c".to_string(), "d\"e".to_string()]
        );
    }

    #[test]
    fn agreement_rules() {
        let base = OutputRecord {
            k: 2,
            j: None,
            n: 5,
            value: None,
            v2: Some(Valuation::Finite(1)),
            predicted: Some(Valuation::Finite(3)),
            rule: Some("T4i".into()),
            agree: None,
        };
        assert_eq!(base.clone().with_agreement().agree, Some(false));
        let no_oracle = OutputRecord { v2: None, ..base };
        assert_eq!(no_oracle.with_agreement().agree, None);
    }
}
