//! Machine-readable run reports.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const TOOL: &str = "metagibbs";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value| ≤ tolerance`
    AbsAtMost,
    /// `value ≥ −tolerance`
    AtLeastNegTol,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    /// Informational checks are reported but do not affect the exit code.
    pub gating: bool,
    pub passed: bool,
}

impl Check {
    pub fn abs_at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let passed = value.abs() <= tolerance;
        Self { name: name.into(), value, tolerance, comparison: Comparison::AbsAtMost, gating: true, passed }
    }

    pub fn at_least_neg_tol(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let passed = value >= -tolerance;
        Self { name: name.into(), value, tolerance, comparison: Comparison::AtLeastNegTol, gating: true, passed }
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub suite: &'static str,
    pub name: String,
    pub config_sha256: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// File names of tables written next to the report.
    pub artifacts: Vec<String>,
    pub details: Value,
}

impl Report {
    pub fn failed_gating(&self) -> usize {
        self.checks.iter().filter(|c| c.gating && !c.passed).count()
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.report.json", self.name));
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Minimum, `+∞` for an empty set; any NaN makes the result NaN.
pub fn min_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.min(b) })
}

/// Largest absolute value, `0` for an empty set; NaN-propagating.
pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b.abs()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_comparisons() {
        assert!(Check::abs_at_most("a", -1e-11, 1e-10).passed);
        assert!(!Check::abs_at_most("a", 2e-10, 1e-10).passed);
        assert!(Check::at_least_neg_tol("b", -1e-10, 1e-9).passed);
        assert!(!Check::at_least_neg_tol("b", -1e-8, 1e-9).passed);
        assert!(!Check::abs_at_most("nan", f64::NAN, 1.0).passed);
        assert!(!Check::at_least_neg_tol("c", -1.0, 0.0).informational().gating);
    }

    #[test]
    fn reductions() {
        assert_eq!(min_of([3.0, -1.0, 2.0]), -1.0);
        assert_eq!(max_abs([0.5, -2.0]), 2.0);
        assert_eq!(max_abs([]), 0.0);
        assert!(max_abs([1.0, f64::NAN, 0.0]).is_nan());
        assert!(min_of([f64::NAN, 1.0]).is_nan());
    }
}
