//! Deterministic spatial-reasoning lints.
//!
//! Lint families mirror the four reasoning instruction categories the prompts
//! carry: support placement and member alignment (SPACE), member tallies
//! (COUNT), and distributed-load direction (LOAD).

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{approx_eq, signed_uniform_load, ElementKind, FrameModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LintId {
    #[serde(rename = "SPACE-1")]
    SupportBaseline,
    #[serde(rename = "SPACE-2")]
    GirderLevel,
    #[serde(rename = "SPACE-3")]
    ColumnPlumb,
    #[serde(rename = "SPACE-4")]
    UndeclaredDiagonal,
    #[serde(rename = "COUNT-1")]
    ColumnCount,
    #[serde(rename = "COUNT-2")]
    GirderCount,
    #[serde(rename = "COUNT-3")]
    DiagonalCount,
    #[serde(rename = "COUNT-4")]
    CantileverCount,
    #[serde(rename = "LOAD-1")]
    DistributedDirection,
}

impl LintId {
    pub fn code(self) -> &'static str {
        match self {
            LintId::SupportBaseline => "SPACE-1",
            LintId::GirderLevel => "SPACE-2",
            LintId::ColumnPlumb => "SPACE-3",
            LintId::UndeclaredDiagonal => "SPACE-4",
            LintId::ColumnCount => "COUNT-1",
            LintId::GirderCount => "COUNT-2",
            LintId::DiagonalCount => "COUNT-3",
            LintId::CantileverCount => "COUNT-4",
            LintId::DistributedDirection => "LOAD-1",
        }
    }

    fn count_for(kind: ElementKind) -> Self {
        match kind {
            ElementKind::Column => LintId::ColumnCount,
            ElementKind::Girder => LintId::GirderCount,
            ElementKind::Diagonal => LintId::DiagonalCount,
            ElementKind::Cantilever => LintId::CantileverCount,
        }
    }
}

impl fmt::Display for LintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Warnings are recorded for generated models; ground truth treats them as errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub lint: LintId,
    pub severity: Severity,
    pub message: String,
    pub ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, lint: LintId) -> bool {
        self.findings.iter().any(|f| f.lint == lint)
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return f.write_str("no findings");
        }
        for (k, finding) in self.findings.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{} [{:?}] {}", finding.lint, finding.severity, finding.message)?;
        }
        Ok(())
    }
}

/// Runs every lint, reporting findings as warnings.
pub fn validate(model: &FrameModel) -> ValidationReport {
    validate_with(model, Severity::Warning)
}

pub fn validate_with(model: &FrameModel, severity: Severity) -> ValidationReport {
    let mut findings = Vec::new();
    let mut push = |lint: LintId, message: String, ids: Vec<u32>| {
        findings.push(Finding { lint, severity, message, ids });
    };

    for s in model.supports() {
        let node = model.node(s.node).expect("integrity");
        if !approx_eq(node.y, 0.0) {
            push(
                LintId::SupportBaseline,
                format!("support node {} sits at y = {} instead of 0", node.id, node.y),
                vec![node.id],
            );
        }
    }

    for el in model.elements() {
        let (a, b) = model.endpoints(el);
        let level = approx_eq(a[1], b[1]);
        let plumb = approx_eq(a[0], b[0]);
        match el.kind {
            ElementKind::Girder if !level => push(
                LintId::GirderLevel,
                format!("girder {} end nodes have y = {} and y = {}", el.id, a[1], b[1]),
                vec![el.id],
            ),
            ElementKind::Column if !plumb => push(
                LintId::ColumnPlumb,
                format!("column {} end nodes have x = {} and x = {}", el.id, a[0], b[0]),
                vec![el.id],
            ),
            _ => {}
        }
        if !level && !plumb && el.kind != ElementKind::Diagonal {
            push(
                LintId::UndeclaredDiagonal,
                format!("{} {} is inclined but not declared as a diagonal", el.kind, el.id),
                vec![el.id],
            );
        }
    }

    if let Some(stated) = model.stated_counts() {
        for kind in ElementKind::ALL {
            let defined = model.count_kind(kind);
            let expected = stated.get(kind);
            if defined != expected {
                let ids = model
                    .elements()
                    .iter()
                    .filter(|e| e.kind == kind)
                    .map(|e| e.id)
                    .collect();
                push(
                    LintId::count_for(kind),
                    format!("{defined} {kind} elements defined, {expected} stated"),
                    ids,
                );
            }
        }
    }

    for d in model.distributed_loads() {
        let el = model.element(d.element).expect("integrity");
        let (a, b) = model.endpoints(el);
        let expected = signed_uniform_load(a, b, d.w.abs(), d.inward);
        if expected.signum() != d.w.signum() {
            push(
                LintId::DistributedDirection,
                format!(
                    "distributed load on element {} has w = {} but node ordering requires {}",
                    el.id, d.w, expected
                ),
                vec![el.id],
            );
        }
    }

    ValidationReport { findings }
}
