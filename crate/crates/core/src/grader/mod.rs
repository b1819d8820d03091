//! Attempt grading and failure classification.

mod aggregate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{solve, SolveResult};
use crate::model::{canonicalize, diff_models, FrameModel, ModelDiff, COORD_TOL, LOAD_REL_TOL};

pub use aggregate::{aggregate_accuracy, AccuracyMatrix, AccuracyRow, CaseAttempts, Histogram, Mode};

pub const NUMERIC_REL_TOL: f64 = 1e-3;
pub const NUMERIC_ABS_TOL: f64 = 1e-9;

/// Outcome class of one attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorType {
    None,
    #[serde(rename = "type1_layout")]
    Type1Layout,
    #[serde(rename = "type2_boundary")]
    Type2Boundary,
    Unparseable,
    Unsolvable,
}

impl ErrorType {
    pub const ALL: [ErrorType; 5] = [
        ErrorType::None,
        ErrorType::Type1Layout,
        ErrorType::Type2Boundary,
        ErrorType::Unparseable,
        ErrorType::Unsolvable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::None => "none",
            ErrorType::Type1Layout => "type1_layout",
            ErrorType::Type2Boundary => "type2_boundary",
            ErrorType::Unparseable => "unparseable",
            ErrorType::Unsolvable => "unsolvable",
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraderError {
    #[error("cannot compare results: {what} count {generated} vs {truth}")]
    ShapeMismatch { what: &'static str, generated: usize, truth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub coordinate: f64,
    pub load_rel: f64,
    pub numeric_rel: f64,
    pub numeric_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            coordinate: COORD_TOL,
            load_rel: LOAD_REL_TOL,
            numeric_rel: NUMERIC_REL_TOL,
            numeric_abs: NUMERIC_ABS_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureGrade {
    pub layout: bool,
    pub support: bool,
    pub load: bool,
    pub diff: ModelDiff,
}

pub fn grade_structure(generated: &FrameModel, truth: &FrameModel) -> StructureGrade {
    let diff = diff_models(generated, truth);
    StructureGrade {
        layout: diff.layout_matches(),
        support: diff.supports_match(),
        load: diff.loads_match(),
        diff,
    }
}

/// Componentwise comparison of displacements and end forces. Results must
/// come from models with matching ids, e.g. both canonicalized.
pub fn grade_numeric(generated: &SolveResult, truth: &SolveResult, tol: &Tolerances) -> Result<bool, GraderError> {
    let shape = |what, g: usize, t: usize| {
        if g == t {
            Ok(())
        } else {
            Err(GraderError::ShapeMismatch { what, generated: g, truth: t })
        }
    };
    shape("node", generated.displacements.len(), truth.displacements.len())?;
    shape("element", generated.end_forces.len(), truth.end_forces.len())?;

    let close = |a: f64, b: f64| (a - b).abs() <= (tol.numeric_rel * b.abs()).max(tol.numeric_abs);
    let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| close(*x, *y));
    let displacements = truth
        .displacements
        .iter()
        .all(|(id, t)| generated.displacements.get(id).is_some_and(|g| same(g, t)));
    let forces = truth
        .end_forces
        .iter()
        .all(|(id, t)| generated.end_forces.get(id).is_some_and(|g| same(g.as_flattened(), t.as_flattened())));
    Ok(displacements && forces)
}

/// Applies the precedence unparseable > unsolvable > type 1 > type 2.
/// A numeric mismatch with matching geometry, supports and loads (wrong
/// section or material values) is a boundary-definition error.
pub fn classify(parsed: bool, solvable: bool, layout: bool, support: bool, load: bool, numeric: bool) -> ErrorType {
    if !parsed {
        ErrorType::Unparseable
    } else if !solvable {
        ErrorType::Unsolvable
    } else if !layout {
        ErrorType::Type1Layout
    } else if !(support && load && numeric) {
        ErrorType::Type2Boundary
    } else {
        ErrorType::None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeReport {
    pub layout_match: bool,
    pub support_match: bool,
    pub load_match: bool,
    pub numeric_match: bool,
    pub error_type: ErrorType,
    pub diff_summary: String,
    pub tolerances: Tolerances,
}

impl GradeReport {
    pub fn is_correct(&self) -> bool {
        self.error_type == ErrorType::None
    }

    /// Report for an attempt whose output never yielded a model.
    pub fn unparseable(reason: &str) -> GradeReport {
        GradeReport {
            layout_match: false,
            support_match: false,
            load_match: false,
            numeric_match: false,
            error_type: ErrorType::Unparseable,
            diff_summary: reason.to_string(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes") + "\n"
    }
}

/// Grades a generated model against the truth: structure by geometry, then
/// numbers by solving both in canonical form.
pub fn grade_model(generated: &FrameModel, truth: &FrameModel) -> GradeReport {
    grade_model_with(generated, truth, &Tolerances::default())
}

pub fn grade_model_with(generated: &FrameModel, truth: &FrameModel, tol: &Tolerances) -> GradeReport {
    let structure = grade_structure(generated, truth);
    let mut summary = if structure.diff.is_empty() { String::new() } else { structure.diff.to_string() };

    let gen_canon = canonicalize(generated);
    let solved = solve(&gen_canon);
    let numeric = match &solved {
        Err(e) => {
            summary = join(&summary, &format!("generated model does not solve: {e}"));
            false
        }
        Ok(_) if !structure.layout => false,
        Ok(g) => match solve(&canonicalize(truth)) {
            Err(e) => {
                summary = join(&summary, &format!("truth model does not solve: {e}"));
                false
            }
            Ok(t) => match grade_numeric(g, &t, tol) {
                Ok(true) => true,
                Ok(false) => {
                    summary = join(&summary, "displacements or end forces differ beyond tolerance");
                    false
                }
                Err(e) => {
                    summary = join(&summary, &e.to_string());
                    false
                }
            },
        },
    };
    GradeReport {
        layout_match: structure.layout,
        support_match: structure.support,
        load_match: structure.load,
        numeric_match: numeric,
        error_type: classify(true, solved.is_ok(), structure.layout, structure.support, structure.load, numeric),
        diff_summary: if summary.is_empty() { "models match".into() } else { summary },
        tolerances: *tol,
    }
}

fn join(a: &str, b: &str) -> String {
    if a.is_empty() {
        b.to_string()
    } else {
        format!("{a}\n{b}")
    }
}

/// Error type of a finished attempt, derived from its stage statuses,
/// solve outcome and grade flags; `None` when an infrastructure failure
/// left it ungraded.
pub fn classify_error(attempt: &crate::pipeline::Attempt) -> Option<ErrorType> {
    let grade = attempt.grade.as_ref()?;
    let parsed = attempt.stages.len() == 3 && attempt.model.is_some();
    Some(classify(
        parsed,
        attempt.solution.is_some(),
        grade.layout_match,
        grade.support_match,
        grade.load_match,
        grade.numeric_match,
    ))
}
