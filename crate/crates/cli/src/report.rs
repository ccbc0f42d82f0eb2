//! Structured result of a CLI verb.
//!
//! Every verb produces one [`Report`]: an overall status, a list of named
//! sections holding human-readable result lines, and a flat list of
//! witnesses.  A failing report always carries at least one witness so the
//! caller can see *what* went wrong, not just that something did.  The same
//! report renders either as plain text or as JSON (`--format structured`),
//! and the JSON form round-trips through serde.

use serde::{Deserialize, Serialize};

/// Overall outcome of a verb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Every check the verb ran came back clean.
    Pass,
    /// The inputs were well-formed but a verification check failed.
    Fail,
    /// The inputs could not be read, parsed, or validated.
    Error,
}

/// A named group of result lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub lines: Vec<String>,
}

/// The full result of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub status: Status,
    pub sections: Vec<Section>,
    pub witnesses: Vec<String>,
}

impl Report {
    /// A passing report with no sections yet.
    pub fn pass() -> Report {
        Report {
            status: Status::Pass,
            sections: Vec::new(),
            witnesses: Vec::new(),
        }
    }

    /// An error report carrying a single diagnostic message.
    pub fn error(message: impl Into<String>) -> Report {
        Report {
            status: Status::Error,
            sections: vec![Section {
                name: "error".to_string(),
                lines: vec![message.into()],
            }],
            witnesses: Vec::new(),
        }
    }

    /// Append a named section.
    pub fn section(mut self, name: impl Into<String>, lines: Vec<String>) -> Report {
        self.sections.push(Section {
            name: name.into(),
            lines,
        });
        self
    }

    /// Mark the report failed and record the witnesses that show why.
    ///
    /// Does nothing when `witnesses` is empty: a failure with no witness is
    /// not reportable, and a clean check should not flip the status.
    pub fn fail_with(mut self, witnesses: Vec<String>) -> Report {
        if !witnesses.is_empty() {
            self.status = Status::Fail;
            self.witnesses.extend(witnesses);
        }
        self
    }

    /// Exit code for this report: 0 pass, 1 fail, 2 error.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }

    /// Plain-text rendering: a status line, then each section under a
    /// bracketed header, then the witnesses if there are any.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let status = match self.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        };
        out.push_str(&format!("status: {status}\n"));
        for section in &self.sections {
            out.push_str(&format!("[{}]\n", section.name));
            for line in &section.lines {
                out.push_str(line);
                out.push('\n');
            }
        }
        if !self.witnesses.is_empty() {
            out.push_str("[witnesses]\n");
            for witness in &self.witnesses {
                out.push_str(&format!("- {witness}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report::pass()
            .section("equilibria", vec!["count: 2".into(), "1=Bx,2=Bx".into()])
            .section("notes", vec![])
    }

    #[test]
    fn text_rendering_lists_sections_in_order() {
        let text = sample().render_text();
        assert!(text.starts_with("status: pass\n"));
        let eq_at = text.find("[equilibria]").unwrap();
        let notes_at = text.find("[notes]").unwrap();
        assert!(eq_at < notes_at);
        assert!(!text.contains("[witnesses]"));
    }

    #[test]
    fn json_round_trips() {
        let report = sample().fail_with(vec!["coproduct only: 1=Bx".into()]);
        let json = serde_json::to_string(&report).unwrap();
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.exit_code(), 1);
    }

    #[test]
    fn fail_with_requires_a_witness() {
        let report = Report::pass().fail_with(vec![]);
        assert_eq!(report.status, Status::Pass);
        let report = report.fail_with(vec!["bad".into()]);
        assert_eq!(report.status, Status::Fail);
        assert_eq!(report.witnesses, vec!["bad".to_string()]);
    }

    #[test]
    fn status_serializes_lowercase() {
        assert_eq!(serde_json::to_string(&Status::Error).unwrap(), "\"error\"");
        assert_eq!(Report::error("boom").exit_code(), 2);
    }
}
