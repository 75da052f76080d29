//! Experiment reports: one pass/fail line per assertion, a metric table,
//! and deterministic `report.txt` / `report.json` writers.

use crate::error::Result;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// One checked assertion.
#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything one experiment produced.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub description: String,
    pub seed: Option<u64>,
    pub items: Vec<CheckItem>,
    /// Named scalar results, ordered by key for reproducible output.
    pub metrics: BTreeMap<String, f64>,
    /// Files written next to the report.
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str, description: &str) -> Self {
        Self {
            name: name.to_string(),
            description: description.to_string(),
            seed: None,
            items: Vec::new(),
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Record an assertion outcome.
    pub fn check(&mut self, label: &str, passed: bool, detail: String) {
        self.items.push(CheckItem {
            label: label.to_string(),
            passed,
            detail,
        });
    }

    /// Record `value <= bound` with a uniform detail string.
    pub fn check_le(&mut self, label: &str, value: f64, bound: f64) {
        self.check(
            label,
            value <= bound,
            format!("{value:.6e} <= {bound:.6e}"),
        );
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    pub fn artifact(&mut self, path: &str) {
        self.artifacts.push(path.to_string());
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    /// One line per assertion, `PASS`/`FAIL` first.
    pub fn render_lines(&self) -> Vec<String> {
        self.items
            .iter()
            .map(|i| {
                format!(
                    "{} {} :: {} ({})",
                    if i.passed { "PASS" } else { "FAIL" },
                    self.name,
                    i.label,
                    i.detail
                )
            })
            .collect()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment: {}", self.name);
        let _ = writeln!(out, "description: {}", self.description);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        let _ = writeln!(
            out,
            "status: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        let _ = writeln!(out, "checks:");
        for line in self.render_lines() {
            let _ = writeln!(out, "  {line}");
        }
        if !self.metrics.is_empty() {
            let _ = writeln!(out, "metrics:");
            for (k, v) in &self.metrics {
                let _ = writeln!(out, "  {k} = {v}");
            }
        }
        if !self.artifacts.is_empty() {
            let _ = writeln!(out, "artifacts:");
            for a in &self.artifacts {
                let _ = writeln!(out, "  {a}");
            }
        }
        out
    }

    /// Write `report.txt` and `report.json` under `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.txt"), self.render_text())?;
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(dir.join("report.json"), json)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trip_and_status() {
        let mut r = ExperimentReport::new("demo", "demo experiment").with_seed(7);
        r.check_le("small", 1e-9, 1e-6);
        r.metric("value", 0.5);
        assert!(r.passed());
        r.check("big", false, "nope".into());
        assert!(!r.passed());

        let dir = tempfile::tempdir().unwrap();
        r.write_to_dir(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(text.contains("status: FAIL"));
        let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
        assert!(json.contains("\"name\": \"demo\""));
    }
}
