//! The report emitted by every subcommand, in human-readable and
//! machine-readable (JSON) forms.
//!
//! The JSON layout is versioned; see `docs/report-schema.md` for the schema
//! contract. Reports are deterministic: for identical inputs the rendered
//! bytes are identical (ordered checks, sorted input echo, no timestamps).

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// Version of the JSON report layout documented in `docs/report-schema.md`.
pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one check.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check could not be decided (insufficient coverage, generator
    /// outside the automated family, …). Does not affect the exit code.
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pass => write!(f, "pass"),
            Status::Fail => write!(f, "fail"),
            Status::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// One verified claim.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Residual expressions/norms, dimensions, descriptions — whatever
    /// substantiates the status.
    pub detail: String,
}

/// Extra information attached to a failing check.
#[derive(Clone, Debug, Serialize)]
pub struct Discrepancy {
    /// Name of the failing check.
    pub check: String,
    /// The offending residual (or defect), verbatim.
    pub residual: String,
    /// Nearest combination of the covering general ansatz, when the failing
    /// object is a catalog generator with a covering case.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nearest_ansatz: Option<String>,
}

/// Numeric knobs in effect, recorded in every report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    pub tolerance: f64,
    pub seed: u64,
}

/// A full command report.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub engine_version: &'static str,
    pub command: String,
    /// Echo of the effective inputs, sorted by key.
    pub inputs: BTreeMap<String, String>,
    /// Hypotheses the results are conditional on.
    pub assumptions: Vec<String>,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    pub discrepancies: Vec<Discrepancy>,
    /// Named payloads (rendered systems, ansätze, CSV paths, …).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub artifacts: BTreeMap<String, String>,
}

impl Report {
    pub fn new(command: &str, tolerances: Tolerances) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            engine_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            inputs: BTreeMap::new(),
            assumptions: Vec::new(),
            tolerances,
            checks: Vec::new(),
            discrepancies: Vec::new(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl fmt::Display) {
        self.inputs.insert(key.to_string(), value.to_string());
    }

    pub fn assume(&mut self, assumption: &str) {
        self.assumptions.push(assumption.to_string());
    }

    pub fn check(&mut self, name: impl Into<String>, status: Status, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            status,
            detail: detail.into(),
        });
    }

    pub fn pass(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.check(name, Status::Pass, detail);
    }

    /// Record a pass/fail check from a boolean.
    pub fn verdict(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.check(name, if ok { Status::Pass } else { Status::Fail }, detail);
    }

    pub fn discrepancy(&mut self, check: &str, residual: String, nearest: Option<String>) {
        self.discrepancies.push(Discrepancy {
            check: check.to_string(),
            residual,
            nearest_ansatz: nearest,
        });
    }

    pub fn artifact(&mut self, name: &str, payload: impl Into<String>) {
        self.artifacts.insert(name.to_string(), payload.into());
    }

    pub fn any_fail(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    /// Exit-code contract: any fail is nonzero; inconclusive alone is not.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.any_fail())
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        use fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "{} (engine {})", self.command, self.engine_version);
        for (k, v) in &self.inputs {
            let _ = writeln!(out, "  input {k} = {v}");
        }
        let _ = writeln!(
            out,
            "  tolerance = {:e}, seed = {}",
            self.tolerances.tolerance, self.tolerances.seed
        );
        for a in &self.assumptions {
            let _ = writeln!(out, "  assuming: {a}");
        }
        let _ = writeln!(out);
        for c in &self.checks {
            let _ = writeln!(out, "[{}] {} — {}", c.status, c.name, c.detail);
        }
        for d in &self.discrepancies {
            let _ = writeln!(out, "\ndiscrepancy in {}:\n  residual: {}", d.check, d.residual);
            if let Some(n) = &d.nearest_ansatz {
                let _ = writeln!(out, "  nearest ansatz: {n}");
            }
        }
        for (name, payload) in &self.artifacts {
            let _ = writeln!(out, "\n--- {name} ---\n{}", payload.trim_end());
        }
        let (p, f, i) = self.tally();
        let _ = writeln!(out, "\n{p} passed, {f} failed, {i} inconclusive");
        out
    }

    fn tally(&self) -> (usize, usize, usize) {
        let count = |s: Status| self.checks.iter().filter(|c| c.status == s).count();
        (
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Inconclusive),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::{Report, Status, Tolerances};

    fn sample() -> Report {
        let mut r = Report::new(
            "classify",
            Tolerances {
                tolerance: 1e-8,
                seed: 7919,
            },
        );
        r.input("f", "x");
        r.assume("symbolic constants are nonzero");
        r.pass("family recognition", "power family");
        r.check("flow check", Status::Inconclusive, "coverage 0.12");
        r
    }

    #[test]
    fn inconclusive_alone_exits_zero() {
        let r = sample();
        assert!(!r.any_fail());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn any_fail_exits_nonzero() {
        let mut r = sample();
        r.verdict("closure", false, "bracket escaped the span");
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn json_rendering_is_stable() {
        let a = sample().render_json();
        let b = sample().render_json();
        assert_eq!(a, b);
        assert!(a.contains("\"schema_version\": 1"));
        assert!(a.contains("\"status\": \"inconclusive\""));
    }
}
