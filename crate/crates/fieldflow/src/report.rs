//! Diagnostic reports: named residuals and measured orders with thresholds.

use std::fmt;

/// Direction of a check threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `value <= threshold` passes (residual norms).
    AtMost,
    /// `value >= threshold` passes (convergence orders).
    AtLeast,
}

/// A single named check inside a report.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
}

impl CheckLine {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            bound: Bound::AtMost,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            bound: Bound::AtLeast,
        }
    }

    pub fn pass(&self) -> bool {
        if !self.value.is_finite() {
            return false;
        }
        match self.bound {
            Bound::AtMost => self.value <= self.threshold,
            Bound::AtLeast => self.value >= self.threshold,
        }
    }
}

/// Collection of checks produced by one diagnostic operation.
///
/// An empty report passes vacuously.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticReport {
    pub title: String,
    pub checks: Vec<CheckLine>,
}

impl DiagnosticReport {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: CheckLine) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckLine::pass)
    }

    /// Largest `value/threshold` ratio among `AtMost` checks; useful when
    /// summarizing how close a report came to its limits.
    pub fn worst_margin(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.bound == Bound::AtMost && c.threshold > 0.0)
            .map(|c| c.value / c.threshold)
            .fold(0.0f64, f64::max)
    }

    /// CSV rendering: `check,value,threshold,pass` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,value,threshold,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{:e},{:e},{}\n",
                c.name,
                c.value,
                c.threshold,
                if c.pass() { "pass" } else { "FAIL" }
            ));
        }
        out
    }
}

impl fmt::Display for DiagnosticReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<44} {:>13.6e}  ({} {:.2e})  {}",
                c.name,
                c.value,
                match c.bound {
                    Bound::AtMost => "<=",
                    Bound::AtLeast => ">=",
                },
                c.threshold,
                if c.pass() { "pass" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}
