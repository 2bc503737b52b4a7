//! Byte-deterministic CSV and JSON output.
//!
//! Floats are written with 17 significant digits (`{:.16e}`); JSON objects
//! are written with sorted keys regardless of how the map was built.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::config::OutputFormat;
use super::report::{Cell, Report};

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Float(v) => format_float(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

fn cell_value(c: &Cell) -> Value {
    match c {
        Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
        Cell::Int(v) => Value::from(*v),
        Cell::Text(s) => Value::from(s.clone()),
        Cell::Bool(b) => Value::from(*b),
    }
}

/// The table as RFC 4180 CSV with a header row.
pub fn to_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&report.columns)?;
    for row in &report.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

/// Compact JSON with sorted keys, fixed float formatting and `null` for
/// non-finite numbers.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&format_float(x)),
                    _ => out.push_str("null"),
                }
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(out, &map[k]);
            }
            out.push('}');
        }
    }
}

/// Summary object: campaign, verdict, assertions and the summary map; with
/// `with_table` the columns and rows as well.
pub fn summary_value(report: &Report, with_table: bool) -> Value {
    let mut m = Map::new();
    m.insert("campaign".into(), Value::from(report.campaign.as_str()));
    m.insert("verdict".into(), Value::from(report.verdict().as_str()));
    m.insert(
        "assertions".into(),
        serde_json::to_value(&report.assertions).unwrap_or(Value::Null),
    );
    m.insert("summary".into(), Value::Object(report.summary.clone()));
    if with_table {
        m.insert(
            "columns".into(),
            Value::Array(report.columns.iter().map(|c| Value::from(c.clone())).collect()),
        );
        m.insert(
            "rows".into(),
            Value::Array(
                report
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(cell_value).collect()))
                    .collect(),
            ),
        );
    }
    Value::Object(m)
}

fn write_file(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Write `report` into `dir`: `<campaign>.csv` plus `<campaign>_summary.json`
/// for CSV, or a single `<campaign>.json`.
pub fn emit(report: &Report, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let name = report.campaign.as_str();
    match format {
        OutputFormat::Csv => {
            let csv = write_file(dir.join(format!("{name}.csv")), &to_csv(report)?)?;
            let mut json = to_json_string(&summary_value(report, false));
            json.push('\n');
            let summary = write_file(dir.join(format!("{name}_summary.json")), &json)?;
            Ok(vec![csv, summary])
        }
        OutputFormat::Json => {
            let mut json = to_json_string(&summary_value(report, true));
            json.push('\n');
            Ok(vec![write_file(dir.join(format!("{name}.json")), &json)?])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Campaign;
    use crate::experiments::report::{Assertion, Verdict};

    fn sample() -> Report {
        let mut r = Report::new(Campaign::Decay, &["t", "label", "n"]);
        r.push_row(vec![0.1.into(), "a,\"b\"".into(), 3usize.into()]).unwrap();
        r.push_row(vec![f64::NAN.into(), "plain".into(), 4usize.into()]).unwrap();
        r.note("zeta", 1.5);
        r.note("alpha", vec![1, 2]);
        r.check(Assertion::new("ok", Verdict::Pass, "fine"));
        r
    }

    #[test]
    fn csv_quotes_and_formats() {
        let text = to_csv(&sample()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,label,n"));
        assert_eq!(lines.next(), Some("1.0000000000000001e-1,\"a,\"\"b\"\"\",3"));
        assert_eq!(lines.next(), Some("NaN,plain,4"));
    }

    #[test]
    fn json_is_sorted_and_parses() {
        let v = summary_value(&sample(), true);
        let text = to_json_string(&v);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["summary"]["zeta"].as_f64(), Some(1.5));
        assert!(back["rows"][1][0].is_null());
        let a = text.find("\"assertions\"").unwrap();
        let c = text.find("\"campaign\"").unwrap();
        let s = text.find("\"summary\"").unwrap();
        assert!(a < c && c < s);
        assert!(text.contains("\"zeta\":1.5000000000000000e0"));
    }
}
