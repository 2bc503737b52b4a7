//! Tabular results, summaries and verdicts of a campaign run.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::fit::{DecayFit, CONCLUSIVE_R2};

use super::config::Campaign;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Fail => "fail",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Process exit code: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, verdict: Verdict, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            verdict,
            detail: detail.into(),
        }
    }

    /// Verdict of a claim resting on `fit`: inconclusive below
    /// [`CONCLUSIVE_R2`], failed if `ok` is false or the fit is below
    /// `min_r_squared`.
    pub fn on_fit(
        name: impl Into<String>,
        fit: &DecayFit,
        min_r_squared: f64,
        ok: bool,
        detail: impl Into<String>,
    ) -> Self {
        let verdict = if fit.r_squared < CONCLUSIVE_R2 {
            Verdict::Inconclusive
        } else {
            Verdict::from_bool(ok && fit.r_squared >= min_r_squared)
        };
        let detail = format!("{}; r_squared {:.6}", detail.into(), fit.r_squared);
        Self::new(name, verdict, detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub campaign: Campaign,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Map<String, Value>,
    pub assertions: Vec<Assertion>,
}

impl Report {
    pub fn new(campaign: Campaign, columns: &[&str]) -> Self {
        Self {
            campaign,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Map::new(),
            assertions: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Config(format!(
                "row has {} cells for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.summary.insert(key.to_string(), v);
    }

    pub fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    /// Worst verdict over all assertions; a report without assertions passes.
    pub fn verdict(&self) -> Verdict {
        self.assertions
            .iter()
            .map(|a| a.verdict)
            .max()
            .unwrap_or(Verdict::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict().exit_code()
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_ordering() {
        let mut r = Report::new(Campaign::Decay, &["a"]);
        assert_eq!(r.exit_code(), 0);
        r.check(Assertion::new("x", Verdict::Pass, ""));
        r.check(Assertion::new("y", Verdict::Inconclusive, ""));
        assert_eq!(r.exit_code(), 2);
        r.check(Assertion::new("z", Verdict::Fail, ""));
        assert_eq!(r.exit_code(), 1);
        assert!(r.push_row(vec![1.0.into(), 2.0.into()]).is_err());
    }

    #[test]
    fn fit_assertions_respect_r_squared() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let clean = DecayFit::from_loglog(&xs, &[1.0, 0.5, 0.25, 0.125]).unwrap();
        assert_eq!(Assertion::on_fit("a", &clean, 0.99, true, "").verdict, Verdict::Pass);
        assert_eq!(Assertion::on_fit("a", &clean, 0.99, false, "").verdict, Verdict::Fail);
        let noisy = DecayFit::from_loglog(&xs, &[1.0, 3.0, 0.5, 2.0]).unwrap();
        assert_eq!(Assertion::on_fit("a", &noisy, 0.5, true, "").verdict, Verdict::Inconclusive);
    }
}
