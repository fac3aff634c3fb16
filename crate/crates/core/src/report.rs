//! Ordered pass/fail/inconclusive check lists with numeric witnesses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn from_flag(flag: bool) -> Self {
        if flag {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

/// One coordinate where two tables disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub coordinate: String,
    pub computed: [f64; 2],
    pub printed: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Informational checks never affect [`VerificationReport::passed`].
    pub informational: bool,
    pub witnesses: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diffs: Vec<DiffEntry>,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status) -> Self {
        Self {
            name: name.into(),
            status,
            informational: false,
            witnesses: BTreeMap::new(),
            note: String::new(),
            diffs: Vec::new(),
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn witness(mut self, name: &str, value: f64) -> Self {
        self.witnesses.insert(name.to_string(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn diffs(mut self, diffs: Vec<DiffEntry>) -> Self {
        self.diffs = diffs;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// True iff every gating check passed.
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| !c.informational)
            .all(|c| c.status == Status::Pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tolerance {:e}", self.tolerance);
        for (k, c) in self.checks.iter().enumerate() {
            let tag = if c.informational { " (info)" } else { "" };
            let _ = writeln!(out, "{:>2}. [{:<12}] {}{}", k + 1, c.status.as_str(), c.name, tag);
            for (name, value) in &c.witnesses {
                let _ = writeln!(out, "      {name} = {value:.6e}");
            }
            if !c.note.is_empty() {
                let _ = writeln!(out, "      note: {}", c.note);
            }
            for d in &c.diffs {
                let _ = writeln!(
                    out,
                    "      diff {}: computed {:.6}{:+.6}i, printed {:.6}{:+.6}i",
                    d.coordinate, d.computed[0], d.computed[1], d.printed[0], d.printed[1]
                );
            }
        }
        let _ = writeln!(out, "overall: {}", if self.passed() { "pass" } else { "fail" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn informational_checks_do_not_gate() {
        let mut r = VerificationReport::new(1e-9);
        r.push(Check::new("a", Status::Pass));
        r.push(Check::new("b", Status::Inconclusive).informational());
        assert!(r.passed());
        r.push(Check::new("c", Status::Fail));
        assert!(!r.passed());
        assert!(r.to_text().contains("overall: fail"));
    }
}
