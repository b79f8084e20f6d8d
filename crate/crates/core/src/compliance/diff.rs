use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ComplianceReport, Diagnostic, RuleCode};

/// Diagnostics partitioned by (code, element id) identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDiff {
    pub resolved: Vec<Diagnostic>,
    pub persisting: Vec<Diagnostic>,
    pub new: Vec<Diagnostic>,
}

type Key = (RuleCode, Option<String>);

fn key(d: &Diagnostic) -> Key {
    (d.code, d.element_id.clone())
}

pub fn diff_reports(before: &ComplianceReport, after: &ComplianceReport) -> ReportDiff {
    let before_keys: BTreeSet<Key> = before.diagnostics.iter().map(key).collect();
    let after_keys: BTreeSet<Key> = after.diagnostics.iter().map(key).collect();
    let mut out = ReportDiff::default();
    let mut seen = BTreeSet::new();
    for d in &before.diagnostics {
        if !seen.insert(key(d)) {
            continue;
        }
        if after_keys.contains(&key(d)) {
            out.persisting.push(d.clone());
        } else {
            out.resolved.push(d.clone());
        }
    }
    let mut seen = BTreeSet::new();
    for d in &after.diagnostics {
        if !before_keys.contains(&key(d)) && seen.insert(key(d)) {
            out.new.push(d.clone());
        }
    }
    out
}
