//! Pass/fail records shared by the verifiers and the CLI.

use std::fmt;

use serde::Serialize;

/// One exhaustive check: how many cases were examined and the first counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    name: String,
    checked: u64,
    counterexample: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check { name: name.into(), checked: 0, counterexample: None }
    }

    pub fn count(&mut self, n: u64) {
        self.checked += n;
    }

    /// Records the first counterexample; later ones are ignored.
    pub fn fail(&mut self, why: impl Into<String>) {
        if self.counterexample.is_none() {
            self.counterexample = Some(why.into());
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn checked(&self) -> u64 {
        self.checked
    }

    pub fn counterexample(&self) -> Option<&str> {
        self.counterexample.as_deref()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "PASS {} ({} cases)", self.name, self.checked),
            Some(c) => write!(f, "FAIL {}: {}", self.name, c),
        }
    }
}

/// A titled list of checks plus free-form records (witnesses, tables).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    title: String,
    checks: Vec<Check>,
    records: Vec<Record>,
}

/// A labeled line of output, e.g. a capture witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Record {
    pub kind: String,
    pub text: String,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), checks: Vec::new(), records: Vec::new() }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn record(&mut self, kind: impl Into<String>, text: impl Into<String>) {
        self.records.push(Record { kind: kind.into(), text: text.into() });
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.records.extend(other.records);
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed())
    }

    /// Human-readable form: a header, one line per check, one per record.
    pub fn render_text(&self) -> String {
        let mut out = format!("== {} ==\n", self.title);
        for c in &self.checks {
            out.push_str(&format!("{c}\n"));
        }
        for r in &self.records {
            out.push_str(&format!("{}: {}\n", r.kind, r.text));
        }
        out
    }

    /// One JSON object per line: the header, then each check, then each record.
    pub fn render_lines(&self) -> String {
        #[derive(Serialize)]
        struct Header<'a> {
            report: &'a str,
            passed: bool,
            checks: usize,
        }
        #[derive(Serialize)]
        struct CheckLine<'a> {
            check: &'a str,
            passed: bool,
            checked: u64,
            counterexample: Option<&'a str>,
        }
        let mut out = serde_json::to_string(&Header { report: &self.title, passed: self.passed(), checks: self.checks.len() })
            .expect("header serializes");
        out.push('\n');
        for c in &self.checks {
            let line = CheckLine { check: &c.name, passed: c.passed(), checked: c.checked, counterexample: c.counterexample() };
            out.push_str(&serde_json::to_string(&line).expect("check serializes"));
            out.push('\n');
        }
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}
