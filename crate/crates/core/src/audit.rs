//! Inequality audit records and their CSV encoding.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// A proved inequality checked exactly and satisfied.
    Holds,
    /// Bounds are compatible with the inequality.
    Consistent,
    /// The available bounds cannot decide.
    Inconclusive,
    /// The inequality fails on the computed quantities.
    Violation,
    /// Outcome recorded without a verdict.
    Recorded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Holds => "holds",
            Verdict::Consistent => "consistent",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violation => "violation",
            Verdict::Recorded => "recorded",
        };
        f.write_str(s)
    }
}

/// One audited inequality instance `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub kind: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constants: String,
    pub verdict: Verdict,
    /// The audited statement is a theorem whose exact check must never fail.
    pub proved: bool,
    pub details: Vec<(String, String)>,
}

impl AuditReport {
    pub fn new(kind: &str, instance: impl Into<String>, lhs: f64, rhs: f64, verdict: Verdict) -> Self {
        AuditReport {
            kind: kind.into(),
            instance: instance.into(),
            lhs,
            rhs,
            constants: String::new(),
            verdict,
            proved: false,
            details: Vec::new(),
        }
    }

    pub fn proved(mut self) -> Self {
        self.proved = true;
        self
    }

    pub fn constants(mut self, c: impl Into<String>) -> Self {
        self.constants = c.into();
        self
    }

    pub fn detail(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.details.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.details
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// A proved statement failed its exact check.
    pub fn is_proved_violation(&self) -> bool {
        self.proved && self.verdict == Verdict::Violation
    }

    fn details_string(&self) -> String {
        self.details
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn number(x: f64) -> String {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

pub const CSV_HEADER: [&str; 7] = ["kind", "instance", "lhs", "rhs", "constants", "verdict", "details"];

/// Writes reports as CSV with a header row.
pub fn write_csv<W: Write>(reports: &[AuditReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("csv output: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in reports {
        w.write_record([
            r.kind.clone(),
            r.instance.clone(),
            number(r.lhs),
            number(r.rhs),
            r.constants.clone(),
            r.verdict.to_string(),
            r.details_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("csv output: {e}")))?;
    Ok(())
}

pub fn to_csv_string(reports: &[AuditReport]) -> String {
    let mut buf = Vec::new();
    write_csv(reports, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows() {
        let r = AuditReport::new("scaling", "sys-1", 7.0, 20.0, Verdict::Holds)
            .proved()
            .constants("L=2")
            .detail("R", 2)
            .detail("s", 2);
        let text = to_csv_string(std::slice::from_ref(&r));
        assert_eq!(
            text,
            "kind,instance,lhs,rhs,constants,verdict,details\nscaling,sys-1,7,20,L=2,holds,R=2;s=2\n"
        );
        assert_eq!(r.get("R"), Some("2"));
        assert!(!r.is_proved_violation());
    }
}
