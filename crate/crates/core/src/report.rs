//! Named pass/fail lines shared by the verification routines and the CLI.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }

    pub fn pass(name: impl Into<String>) -> Self {
        Self::new(name, true, "")
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        if self.detail.is_empty() {
            write!(f, "{} {}", self.name, verdict)
        } else {
            write!(f, "{} {} {}", self.name, verdict, self.detail)
        }
    }
}

pub fn all_pass(lines: &[CheckLine]) -> bool {
    lines.iter().all(|l| l.pass)
}
