//! Machine-readable verification reports.

use nalgebra::DMatrix;
use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1";

/// How a check decides pass or fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    /// Symbolic or bit-level equality.
    Exact,
    /// `|closed - oracle| <= value · max(|closed|, 1)`.
    Relative(f64),
    /// `|closed - oracle| <= value · scale` for an explicit scale.
    Scaled(f64),
    /// `|closed - oracle| <= value · stderr`.
    Sigma(f64),
    /// `oracle <= value`, for bounds on a diagnostic.
    AtMost(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub closed: f64,
    pub oracle: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub tolerance: Tolerance,
    pub pass: bool,
}

fn rel_err(closed: f64, oracle: f64) -> f64 {
    let abs = (closed - oracle).abs();
    if abs == 0.0 {
        0.0
    } else {
        abs / closed.abs().max(f64::MIN_POSITIVE)
    }
}

impl Check {
    fn build(id: impl Into<String>, anchor: &str, closed: f64, oracle: f64, tolerance: Tolerance) -> Self {
        Check {
            id: id.into(),
            anchor: anchor.to_string(),
            closed,
            oracle,
            abs_err: (closed - oracle).abs(),
            rel_err: rel_err(closed, oracle),
            stderr: None,
            tolerance,
            pass: false,
        }
    }

    /// An equality decided elsewhere (exact polynomial or rational
    /// arithmetic); `closed` and `oracle` are representative values.
    pub fn exact(id: impl Into<String>, anchor: &str, closed: f64, oracle: f64, equal: bool) -> Self {
        Check { pass: equal, ..Self::build(id, anchor, closed, oracle, Tolerance::Exact) }
    }

    pub fn relative(id: impl Into<String>, anchor: &str, closed: f64, oracle: f64, tol: f64) -> Self {
        let check = Self::build(id, anchor, closed, oracle, Tolerance::Relative(tol));
        let pass = check.abs_err <= tol * closed.abs().max(1.0);
        Check { pass, ..check }
    }

    pub fn scaled(id: impl Into<String>, anchor: &str, closed: f64, oracle: f64, scale: f64, tol: f64) -> Self {
        let check = Self::build(id, anchor, closed, oracle, Tolerance::Scaled(tol));
        let pass = check.abs_err <= tol * scale;
        Check { pass, ..check }
    }

    pub fn sigma(id: impl Into<String>, anchor: &str, closed: f64, oracle: f64, stderr: f64, k: f64) -> Self {
        let check = Self::build(id, anchor, closed, oracle, Tolerance::Sigma(k));
        let pass = stderr.is_finite() && check.abs_err <= k * stderr;
        Check { stderr: Some(stderr), pass, ..check }
    }

    pub fn at_most(id: impl Into<String>, anchor: &str, value: f64, bound: f64) -> Self {
        let check = Self::build(id, anchor, bound, value, Tolerance::AtMost(bound));
        Check { pass: value <= bound, ..check }
    }

    /// Complex comparison given as `[re, im]` pairs; the error is relative to
    /// `|closed|`. The reported values are the real parts.
    pub fn complex(id: impl Into<String>, anchor: &str, closed: [f64; 2], oracle: [f64; 2], tol: f64) -> Self {
        let abs = (closed[0] - oracle[0]).hypot(closed[1] - oracle[1]);
        let norm = closed[0].hypot(closed[1]);
        let mut check = Self::build(id, anchor, closed[0], oracle[0], Tolerance::Relative(tol));
        check.abs_err = abs;
        check.rel_err = abs / norm.max(f64::MIN_POSITIVE);
        check.pass = abs <= tol * norm;
        check
    }

    /// Entrywise matrix comparison, reported at the worst entry. The error is
    /// relative to the largest entry of `closed`, floored at 1.
    pub fn matrix(id: impl Into<String>, anchor: &str, closed: &DMatrix<f64>, oracle: &DMatrix<f64>, tol: f64) -> Self {
        let diff = closed - oracle;
        let (worst, abs) = diff
            .iter()
            .map(|v| v.abs())
            .enumerate()
            .fold((0, 0.0), |acc, (i, v)| if v > acc.1 || v.is_nan() { (i, v) } else { acc });
        let scale = closed.amax().max(1.0);
        let mut check = Self::build(id, anchor, closed[worst], oracle[worst], Tolerance::Relative(tol));
        check.abs_err = abs;
        check.rel_err = abs / scale;
        check.pass = check.rel_err <= tol;
        check
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub wall_time_s: f64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(suite: &str, seed: u64, samples: usize) -> Self {
        VerificationReport {
            schema: SCHEMA_VERSION,
            suite: suite.to_string(),
            seed,
            samples,
            wall_time_s: 0.0,
            checks: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn extend(&mut self, other: VerificationReport) {
        for check in other.checks {
            self.push(check);
        }
        self.notes.extend(other.notes);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances() {
        assert!(Check::relative("a", "x", 2.0, 2.0 + 1e-13, 1e-12).pass);
        assert!(!Check::relative("a", "x", 2.0, 2.1, 1e-12).pass);
        assert!(Check::sigma("b", "x", 1.0, 1.2, 0.1, 3.0).pass);
        assert!(!Check::sigma("b", "x", 1.0, 1.4, 0.1, 3.0).pass);
        assert!(!Check::sigma("b", "x", 1.0, 1.0, f64::NAN, 3.0).pass);
        assert!(Check::at_most("c", "x", 0.005, 0.01).pass);
        assert!(Check::exact("d", "x", 0.0, 0.0, true).pass);
    }

    #[test]
    fn matrix_check_reports_worst_entry() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0 + 2e-9]);
        let c = Check::matrix("m", "x", &a, &b, 1e-9);
        assert_eq!(c.closed, 4.0);
        assert!(c.pass);
        assert!(!Check::matrix("m", "x", &a, &b, 1e-10).pass);
    }

    #[test]
    fn report_json_shape() {
        let mut r = VerificationReport::new("pm", 7, 10);
        r.push(Check::exact("p", "x", 1.0, 1.0, true));
        r.push(Check::sigma("q", "x", 1.0, 2.0, 0.1, 3.0));
        assert!(!r.pass);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], "1");
        assert_eq!(v["checks"][0]["tolerance"]["kind"], "exact");
        assert_eq!(v["checks"][1]["tolerance"]["value"], 3.0);
        assert!(v["checks"][0].get("stderr").is_none());
        assert_eq!(r.failures().count(), 1);
    }
}
