//! Verification reports in text and machine-readable form.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Version tag of the machine format.
pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub detail: String,
}

/// Outcome of one checked claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub site: String,
    /// The claim being checked, in words.
    pub anchor: String,
    pub verdict: bool,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    pub millis: u64,
}

impl Report {
    pub fn witness_count(&self) -> usize {
        self.witnesses.len()
    }

    /// Looks up the first witness with this label.
    pub fn witness(&self, label: &str) -> Option<&str> {
        self.witnesses.iter().find(|w| w.label == label).map(|w| w.detail.as_str())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.verdict { "PASS" } else { "FAIL" };
        writeln!(f, "[{verdict}] {} on {} ({} ms)", self.id, self.site, self.millis)?;
        writeln!(f, "  claim: {}", self.anchor)?;
        for w in &self.witnesses {
            writeln!(f, "  {}: {}", w.label, w.detail)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Accumulates witnesses while a check runs.
pub(crate) struct ReportBuilder {
    id: String,
    site: String,
    anchor: String,
    witnesses: Vec<Witness>,
    notes: Vec<String>,
    failures: Vec<String>,
    started: Instant,
}

impl ReportBuilder {
    pub(crate) fn new(id: &str, site: &str, anchor: &str) -> Self {
        ReportBuilder {
            id: id.to_string(),
            site: site.to_string(),
            anchor: anchor.to_string(),
            witnesses: Vec::new(),
            notes: Vec::new(),
            failures: Vec::new(),
            started: Instant::now(),
        }
    }

    pub(crate) fn witness(&mut self, label: impl Into<String>, detail: impl fmt::Display) {
        self.witnesses.push(Witness { label: label.into(), detail: detail.to_string() });
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Records a named check. A failing check is also recorded as a witness.
    pub(crate) fn check(&mut self, label: &str, ok: bool, detail: impl fmt::Display) -> bool {
        if !ok {
            self.failures.push(label.to_string());
            self.witness(format!("failed {label}"), detail);
        }
        ok
    }

    pub(crate) fn finish(mut self) -> Report {
        let verdict = self.failures.is_empty();
        if !verdict && self.witnesses.is_empty() {
            self.witness("failed", self.failures.join(", "));
        }
        Report {
            id: self.id,
            site: self.site,
            anchor: self.anchor,
            verdict,
            witnesses: self.witnesses,
            notes: self.notes,
            millis: self.started.elapsed().as_millis() as u64,
        }
    }
}

/// The versioned machine document for a batch of reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub version: u32,
    pub verdict: bool,
    pub reports: Vec<Report>,
}

impl ReportBundle {
    pub fn new(mut reports: Vec<Report>) -> Self {
        reports.sort_by(|a, b| (&a.id, &a.site).cmp(&(&b.id, &b.site)));
        let verdict = reports.iter().all(|r| r.verdict);
        ReportBundle { version: REPORT_FORMAT_VERSION, verdict, reports }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&r.to_string());
        }
        let passed = self.reports.iter().filter(|r| r.verdict).count();
        out.push_str(&format!("{passed}/{} claims hold\n", self.reports.len()));
        out
    }

    /// Zeroes timings so two runs can be compared byte for byte.
    pub fn without_timing(mut self) -> Self {
        for r in &mut self.reports {
            r.millis = 0;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_report_always_has_a_witness() {
        let mut b = ReportBuilder::new("x", "s", "claim");
        b.check("leg", false, "bad");
        let r = b.finish();
        assert!(!r.verdict);
        assert_eq!(r.witness("failed leg"), Some("bad"));
    }

    #[test]
    fn bundle_round_trips_and_sorts() {
        let a = ReportBuilder::new("b", "s", "claim").finish();
        let c = ReportBuilder::new("a", "s", "claim").finish();
        let bundle = ReportBundle::new(vec![a, c]).without_timing();
        assert_eq!(bundle.reports[0].id, "a");
        let back: ReportBundle = serde_json::from_str(&bundle.to_json()).unwrap();
        assert_eq!(back, bundle);
        assert!(bundle.to_text().ends_with("2/2 claims hold\n"));
    }
}
