//! Structured errors reported by the checker and the command line.

use std::fmt;

use serde::Serialize;

/// Byte range in a source file with the 1-based line and column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Name of the violated rule, e.g. `ucode-lt` or `conversion`.
    pub rule: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
    /// The context the failure occurred in, as printed text.
    pub context: String,
}

impl Diagnostic {
    pub fn error(rule: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            rule: rule.to_string(),
            message: message.into(),
            span: None,
            context: String::new(),
        }
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span.get_or_insert(span);
        self
    }

    pub fn with_context(mut self, ctx: impl fmt::Display) -> Self {
        if self.context.is_empty() {
            self.context = ctx.to_string();
        }
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if let Some(s) = self.span {
            write!(f, "{}:{}: ", s.line, s.col)?;
        }
        write!(f, "{sev}[{}]: {}", self.rule, self.message)?;
        if !self.context.is_empty() && self.context != "()" {
            write!(f, "\n  in context: {}", self.context)?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}
