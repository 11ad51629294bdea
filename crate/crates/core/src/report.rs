//! Verification certificates: lists of per-case comparisons.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// How a record's expected and actual values were compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "tolerance", rename_all = "kebab-case")]
pub enum Comparison {
    Exact,
    Tolerance(f64),
    /// Reported but never failing.
    Informational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub name: String,
    pub inputs: Value,
    pub expected: String,
    pub actual: String,
    pub comparison: Comparison,
    pub passed: bool,
}

impl CaseRecord {
    pub fn exact<T: PartialEq + ToString>(name: impl Into<String>, inputs: Value, expected: T, actual: T) -> Self {
        CaseRecord {
            name: name.into(),
            inputs,
            passed: expected == actual,
            expected: expected.to_string(),
            actual: actual.to_string(),
            comparison: Comparison::Exact,
        }
    }

    pub fn tolerance(name: impl Into<String>, inputs: Value, expected: f64, actual: f64, tol: f64) -> Self {
        CaseRecord {
            name: name.into(),
            inputs,
            passed: (expected - actual).abs() <= tol,
            expected: format!("{expected:.12e}"),
            actual: format!("{actual:.12e}"),
            comparison: Comparison::Tolerance(tol),
        }
    }

    /// A boolean condition; `expected` documents what should hold.
    pub fn check(name: impl Into<String>, inputs: Value, expected: impl Into<String>, holds: bool) -> Self {
        CaseRecord {
            name: name.into(),
            inputs,
            expected: expected.into(),
            actual: if holds { "holds".into() } else { "violated".into() },
            comparison: Comparison::Exact,
            passed: holds,
        }
    }

    pub fn informational(name: impl Into<String>, inputs: Value, expected: impl ToString, actual: impl ToString) -> Self {
        CaseRecord {
            name: name.into(),
            inputs,
            expected: expected.to_string(),
            actual: actual.to_string(),
            comparison: Comparison::Informational,
            passed: true,
        }
    }
}

/// Outcome of one verification routine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub task: String,
    pub records: Vec<CaseRecord>,
}

impl Certificate {
    pub fn new(task: impl Into<String>) -> Self {
        Certificate { task: task.into(), records: Vec::new() }
    }

    pub fn push(&mut self, record: CaseRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, other: Certificate) {
        self.records.extend(other.records);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseRecord> {
        self.records.iter().filter(|r| !r.passed)
    }
}
