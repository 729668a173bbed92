use std::fmt;

use serde::Serialize;

/// One line of a verification report.
#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub label: String,
    pub passed: bool,
    /// Measured quantity, when the check is numeric.
    pub value: Option<f64>,
    pub detail: String,
}

/// A named list of pass/fail checks.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub title: String,
    pub entries: Vec<Entry>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), entries: Vec::new() }
    }

    /// Record `value < tol`.
    pub fn below(&mut self, label: impl Into<String>, value: f64, tol: f64) -> &mut Self {
        self.entries.push(Entry {
            label: label.into(),
            passed: value.is_finite() && value < tol,
            value: Some(value),
            detail: format!("{value:.3e} < {tol:.0e}"),
        });
        self
    }

    /// Record `value > bound`; used to show a check can tell right from wrong.
    pub fn above(&mut self, label: impl Into<String>, value: f64, bound: f64) -> &mut Self {
        self.entries.push(Entry {
            label: label.into(),
            passed: value > bound,
            value: Some(value),
            detail: format!("{value:.3e} > {bound}"),
        });
        self
    }

    pub fn check(&mut self, label: impl Into<String>, ok: bool, detail: impl Into<String>) -> &mut Self {
        self.entries.push(Entry { label: label.into(), passed: ok, value: None, detail: detail.into() });
        self
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn extend(&mut self, other: Report) {
        for mut e in other.entries {
            e.label = format!("{}: {}", other.title, e.label);
            self.entries.push(e);
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {}", self.title)?;
        let width = self.entries.iter().map(|e| e.label.len()).max().unwrap_or(0);
        for e in &self.entries {
            let tag = if e.passed { "PASS" } else { "FAIL" };
            writeln!(f, "  {tag}  {:<width$}  {}", e.label, e.detail)?;
        }
        Ok(())
    }
}
