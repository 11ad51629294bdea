//! The report envelope printed by every subcommand, and its text rendering.

use std::fmt::Write as _;

use horizeta_core::{CaseRecord, Certificate, Comparison, Error};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    ResourceLimit,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::ResourceLimit => 3,
        }
    }
}

/// One record together with the verification routine that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub check: String,
    #[serde(flatten)]
    pub record: CaseRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub task: String,
    pub params: Map<String, Value>,
    pub status: Status,
    pub details: Vec<Detail>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub elapsed_ms: u64,
}

impl VerificationReport {
    pub fn from_certificates(task: &str, params: Map<String, Value>, certs: Vec<Certificate>) -> Self {
        let details: Vec<Detail> = certs
            .into_iter()
            .flat_map(|c| {
                let check = c.task;
                c.records.into_iter().map(move |record| Detail { check: check.clone(), record })
            })
            .collect();
        let status = if details.iter().all(|d| d.record.passed) { Status::Pass } else { Status::Fail };
        VerificationReport { task: task.to_string(), params, status, details, error: None, elapsed_ms: 0 }
    }

    /// A report for a run that stopped on an error. Internal inconsistencies
    /// count as mathematical failures; overflows and budgets as resource limits.
    pub fn from_error(task: &str, params: Map<String, Value>, error: &Error) -> Self {
        let status = match error {
            Error::Inconsistency(_) => Status::Fail,
            _ => Status::ResourceLimit,
        };
        let mut details = Vec::new();
        if let Error::IncompleteOrbits { partial, .. } = error {
            details.push(Detail {
                check: "elliptic.torsion-orbits".into(),
                record: CaseRecord::informational(
                    "partial orbit data",
                    serde_json::to_value(partial.as_ref()).unwrap_or(Value::Null),
                    "complete orbit search",
                    format!("{} of {} points placed", partial.points_found(), partial.closure_total),
                ),
            });
        }
        if status == Status::Fail {
            details.push(Detail {
                check: task.to_string(),
                record: CaseRecord::check("internal consistency", Value::Null, "no inconsistency", false),
            });
        }
        VerificationReport { task: task.to_string(), params, status, details, error: Some(error.to_string()), elapsed_ms: 0 }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ResourceLimit => "RESOURCE-LIMIT",
        };
        let _ = writeln!(out, "{status} {} ({} ms)", self.task, self.elapsed_ms);
        for (k, v) in &self.params {
            let _ = writeln!(out, "  {k} = {v}");
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "  error: {e}");
        }
        for d in &self.details {
            let r = &d.record;
            let mark = match (r.comparison, r.passed) {
                (Comparison::Informational, _) => "info",
                (_, true) => " ok ",
                (_, false) => "FAIL",
            };
            let how = match r.comparison {
                Comparison::Exact => "exact".to_string(),
                Comparison::Tolerance(t) => format!("tol {t:e}"),
                Comparison::Informational => "informational".to_string(),
            };
            let _ = writeln!(
                out,
                "  [{mark}] {} / {} {}: expected {}, actual {} ({how})",
                d.check, r.name, r.inputs, r.expected, r.actual
            );
        }
        out
    }
}
