//! Static execution-compliance checks.
//!
//! | code | rule |
//! |------|------|
//! | `R1_DEFAULT_FLOW` | a branching exclusive gateway names one of its outgoing flows as `default` |
//! | `R2_CONDITION_EXPR` | every non-default exit of a branching exclusive/inclusive gateway has a condition |
//! | `R3_DATA_REF_ORDER` | data object references resolve to a declaration that precedes the first reference |
//! | `R4_CONNECTIVITY` | flows resolve; every flow node is reachable from a start and reaches an end |
//! | `R5_WELLFORMED` | parseable XML, BPMN namespace, unique ids |
//! | `R6_START_END` | every process has a start event and an end event |

mod diff;
mod rules;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use diff::{diff_reports, ReportDiff};
pub use rules::{validate, validate_bytes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleCode {
    #[serde(rename = "R1_DEFAULT_FLOW")]
    DefaultFlow,
    #[serde(rename = "R2_CONDITION_EXPR")]
    ConditionExpression,
    #[serde(rename = "R3_DATA_REF_ORDER")]
    DataReferenceOrder,
    #[serde(rename = "R4_CONNECTIVITY")]
    Connectivity,
    #[serde(rename = "R5_WELLFORMED")]
    WellFormed,
    #[serde(rename = "R6_START_END")]
    StartEnd,
}

impl RuleCode {
    pub const ALL: [RuleCode; 6] = [
        RuleCode::DefaultFlow,
        RuleCode::ConditionExpression,
        RuleCode::DataReferenceOrder,
        RuleCode::Connectivity,
        RuleCode::WellFormed,
        RuleCode::StartEnd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleCode::DefaultFlow => "R1_DEFAULT_FLOW",
            RuleCode::ConditionExpression => "R2_CONDITION_EXPR",
            RuleCode::DataReferenceOrder => "R3_DATA_REF_ORDER",
            RuleCode::Connectivity => "R4_CONNECTIVITY",
            RuleCode::WellFormed => "R5_WELLFORMED",
            RuleCode::StartEnd => "R6_START_END",
        }
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: RuleCode,
    pub element_id: Option<String>,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: RuleCode, element_id: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            code,
            element_id: element_id.map(str::to_owned),
            severity: Severity::Error,
            message: message.into(),
        }
    }

    pub fn warning(code: RuleCode, element_id: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(code, element_id, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} {} @{}: {}",
            self.severity,
            self.code,
            self.element_id.as_deref().unwrap_or("-"),
            self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub compliant: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ComplianceReport {
    pub fn from_diagnostics(diagnostics: Vec<Diagnostic>) -> Self {
        Self {
            compliant: !diagnostics.iter().any(Diagnostic::is_error),
            diagnostics,
        }
    }

    pub fn error_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.is_error()).count()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
