//! Pass/fail records shared by scenario audits and the identity suite.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::fields::io::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// measured ≤ tolerance
    AtMost,
    /// measured ≥ tolerance
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub description: String,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
    /// Source equation or statement the check exercises.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Check {
    pub fn at_most(name: &str, description: &str, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            description: description.to_string(),
            measured,
            tolerance,
            comparison: Comparison::AtMost,
            passed: measured.is_finite() && measured <= tolerance,
            anchor: None,
            details: Value::Null,
        }
    }

    pub fn at_least(name: &str, description: &str, measured: f64, threshold: f64) -> Self {
        Check {
            comparison: Comparison::AtLeast,
            passed: measured.is_finite() && measured >= threshold,
            ..Check::at_most(name, description, measured, threshold)
        }
    }

    pub fn anchor(mut self, anchor: &str) -> Self {
        self.anchor = Some(anchor.to_string());
        self
    }

    pub fn details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    /// Extra condition that must also hold.
    pub fn require(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }

    /// One-line summary: `PASS name: measured (≤ tol)`.
    pub fn line(&self) -> String {
        let op = match self.comparison {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        };
        format!(
            "{} {}: {} ({op} {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            fmt_f64(self.measured),
            fmt_f64(self.tolerance)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Check::at_most("a", "", 1e-13, 1e-12).passed);
        assert!(!Check::at_most("a", "", f64::NAN, 1e-12).passed);
        assert!(Check::at_least("b", "", 5.0, 3.0).passed);
        assert!(!Check::at_least("b", "", 2.0, 3.0).passed);
        assert!(!Check::at_least("b", "", 5.0, 3.0).require(false).passed);
        assert!(Check::at_most("c", "", 0.0, 0.0).line().starts_with("PASS c"));
    }
}
