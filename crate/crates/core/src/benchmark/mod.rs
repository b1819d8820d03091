//! The 20 bundled structural analysis word problems and their ground truth.

mod mutate;

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{solve, SolveResult};
use crate::model::{parse_document, validate_with, FrameModel, Severity, StatedCounts, VisualizationSpec};

pub use mutate::{mutate_case, MutantSpec, Mutation};

pub const CASE_COUNT: u32 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchmarkError {
    #[error("bundled case {case} is corrupt: {reason}")]
    AssetCorruption { case: u32, reason: String },
    #[error("no benchmark case with id {0} (valid ids are 1..=20)")]
    UnknownCase(u32),
    #[error("mutation {mutation} does not apply to case {case}: {reason}")]
    InapplicableMutation { case: u32, mutation: Mutation, reason: String },
}

/// Generation pattern a case belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Scaling,
    Asymmetry,
    Features,
}

impl Pattern {
    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::Scaling => "scaling",
            Pattern::Asymmetry => "asymmetry",
            Pattern::Features => "features",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SawpCase {
    pub id: u32,
    pub description: String,
    pub truth_model: FrameModel,
    pub truth_solution: SolveResult,
    pub pattern: Pattern,
    pub visualization: VisualizationSpec,
}

/// Raw text of one case as bundled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseAssets {
    pub id: u32,
    pub description: &'static str,
    pub truth_fmd: &'static str,
    pub truth_solution: &'static str,
    pub meta: &'static str,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseMeta {
    id: u32,
    pattern: Pattern,
    stated_counts: StatedCounts,
    visualization: VisualizationSpec,
}

macro_rules! bundled {
    ($($id:literal => $dir:literal),* $(,)?) => {
        [$(CaseAssets {
            id: $id,
            description: include_str!(concat!("../../benchmark/", $dir, "/description.txt")),
            truth_fmd: include_str!(concat!("../../benchmark/", $dir, "/truth.fmd.json")),
            truth_solution: include_str!(concat!("../../benchmark/", $dir, "/truth.solution.json")),
            meta: include_str!(concat!("../../benchmark/", $dir, "/meta.json")),
        }),*]
    };
}

static ASSETS: [CaseAssets; CASE_COUNT as usize] = bundled!(
    1 => "case01", 2 => "case02", 3 => "case03", 4 => "case04", 5 => "case05",
    6 => "case06", 7 => "case07", 8 => "case08", 9 => "case09", 10 => "case10",
    11 => "case11", 12 => "case12", 13 => "case13", 14 => "case14", 15 => "case15",
    16 => "case16", 17 => "case17", 18 => "case18", 19 => "case19", 20 => "case20",
);

pub fn bundled_assets() -> &'static [CaseAssets] {
    &ASSETS
}

/// Parses and cross-checks one case: clean lints, consistent metadata and a
/// pinned solution identical to a fresh solve.
pub fn build_case(assets: &CaseAssets) -> Result<SawpCase, BenchmarkError> {
    let case = assets.id;
    let corrupt = |reason: String| BenchmarkError::AssetCorruption { case, reason };

    let truth_model = parse_document(assets.truth_fmd).map_err(|e| corrupt(format!("truth model: {e}")))?;
    let meta: CaseMeta = serde_json::from_str(assets.meta).map_err(|e| corrupt(format!("meta: {e}")))?;
    if meta.id != case {
        return Err(corrupt(format!("meta id {} does not match", meta.id)));
    }
    meta.visualization.check().map_err(|e| corrupt(format!("meta: {e}")))?;
    if truth_model.stated_counts() != Some(&meta.stated_counts) {
        return Err(corrupt("stated counts differ between meta and truth model".into()));
    }
    let lints = validate_with(&truth_model, Severity::Error);
    if !lints.is_clean() {
        return Err(corrupt(format!("truth model fails validation: {lints}")));
    }

    let fresh = solve(&truth_model).map_err(|e| corrupt(format!("truth model does not solve: {e}")))?;
    if fresh.to_json_string() != assets.truth_solution {
        return Err(corrupt("pinned solution differs from a fresh solve".into()));
    }
    let truth_solution =
        SolveResult::from_json_str(assets.truth_solution).map_err(|e| corrupt(format!("pinned solution: {e}")))?;

    let description = assets.description.trim_end().to_string();
    if description.is_empty() {
        return Err(corrupt("empty description".into()));
    }

    Ok(SawpCase {
        id: case,
        description,
        truth_model,
        truth_solution,
        pattern: meta.pattern,
        visualization: meta.visualization,
    })
}

/// All bundled cases, verified once per process.
pub fn load_cases() -> Result<&'static [SawpCase], BenchmarkError> {
    static CASES: OnceLock<Result<Vec<SawpCase>, BenchmarkError>> = OnceLock::new();
    CASES
        .get_or_init(|| ASSETS.iter().map(build_case).collect())
        .as_ref()
        .map(Vec::as_slice)
        .map_err(Clone::clone)
}

pub fn case_by_id(id: u32) -> Result<&'static SawpCase, BenchmarkError> {
    if !(1..=CASE_COUNT).contains(&id) {
        return Err(BenchmarkError::UnknownCase(id));
    }
    load_cases()?
        .iter()
        .find(|c| c.id == id)
        .ok_or(BenchmarkError::UnknownCase(id))
}

/// The grader-fidelity mutant set.
///
/// Layout, support and point-load mutations use cases 5, 9, 11 and 13;
/// those cases carry no distributed loads, so the sign flip uses their
/// distributed-load twins 6, 10, 12 and 14. Bay reshaping needs three
/// column lines and is skipped on case 11, whose trimmed frame would equal
/// case 5 exactly.
pub fn mutant_suite() -> Vec<MutantSpec> {
    let mut suite = Vec::new();
    for base in [5, 9, 11, 13] {
        for mutation in [
            Mutation::DropNode,
            Mutation::DropElement,
            Mutation::MoveLoadsAllFloor,
            Mutation::WrongSupport,
        ] {
            suite.push(MutantSpec::new(base, mutation));
        }
    }
    for base in [9, 13] {
        suite.push(MutantSpec::new(base, Mutation::ReshapeBays));
    }
    for base in [6, 10, 12, 14] {
        suite.push(MutantSpec::new(base, Mutation::FlipDistributedSign));
    }
    suite
}
