//! Three-stage generation per case, stage-output parsing, and the
//! best-of-N, stability and benchmark experiments.

mod store;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::SawpCase;
use crate::fem::{solve, ParameterSet, SolveResult};
use crate::gateway::{Gateway, GatewayError};
use crate::grader::{aggregate_accuracy, grade_model, AccuracyMatrix, CaseAttempts, ErrorType, GradeReport, Mode};
use crate::model::{parse_document, validate, FrameModel, VisualizationSpec};
use crate::prompt::{build_stage_prompt, render_messages, InstructionSelection, PromptOptions, Stage, StageContext};

pub use store::{read_attempt_records, reconstruct_matrix, AttemptRecord, RunMeta, RunStore, StageRecord};

pub const DEFAULT_BEST_OF: usize = 3;
pub const DEFAULT_REPEATS: usize = 5;

/// The body of the single fenced code block in `text`.
pub fn extract_fenced_block(text: &str) -> Result<&str, String> {
    let mut blocks = Vec::new();
    let mut open: Option<usize> = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        match open {
            None if trimmed.starts_with("```") => open = Some(offset + line.len()),
            Some(start) if trimmed == "```" => {
                blocks.push(&text[start..offset]);
                open = None;
            }
            _ => {}
        }
        offset += line.len();
    }
    if open.is_some() {
        return Err("unterminated fenced block".into());
    }
    match blocks.as_slice() {
        [one] => Ok(one),
        [] => Err("no fenced block in the response".into()),
        many => Err(format!("expected exactly one fenced block, found {}", many.len())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Parameters(ParameterSet),
    Layout(FrameModel),
    Visualization(VisualizationSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    Ok,
    Unparseable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutput {
    pub stage: Stage,
    pub raw: String,
    pub digest: String,
    pub payload: Option<Payload>,
    /// Why parsing failed.
    pub error: Option<String>,
    /// Lint findings on a parsed layout; recorded, never fatal.
    pub warnings: Vec<String>,
}

impl StageOutput {
    pub fn status(&self) -> ParseStatus {
        if self.payload.is_some() {
            ParseStatus::Ok
        } else {
            ParseStatus::Unparseable
        }
    }
}

/// Parses a raw stage response; malformed output yields an unparseable
/// stage, never an error.
pub fn parse_stage_output(stage: Stage, raw: &str, digest: &str) -> StageOutput {
    let mut out = StageOutput {
        stage,
        raw: raw.to_string(),
        digest: digest.to_string(),
        payload: None,
        error: None,
        warnings: Vec::new(),
    };
    let parsed = extract_fenced_block(raw).and_then(|body| match stage {
        Stage::Parameters => ParameterSet::parse(body).map(Payload::Parameters).map_err(|e| e.to_string()),
        Stage::Layout => parse_document(body).map(Payload::Layout).map_err(|e| e.to_string()),
        Stage::Visualization => serde_json::from_str::<VisualizationSpec>(body)
            .map_err(|e| e.to_string())
            .and_then(|v| v.check().map(|_| v).map_err(|e| e.to_string()))
            .map(Payload::Visualization),
    });
    match parsed {
        Ok(payload) => {
            if let Payload::Layout(m) = &payload {
                out.warnings = validate(m).findings.iter().map(|f| format!("{}: {}", f.lint, f.message)).collect();
            }
            out.payload = Some(payload);
        }
        Err(e) => out.error = Some(e),
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub instructions: InstructionSelection,
    pub exemplar: Option<u32>,
}

pub fn run_stage(
    case: &SawpCase,
    stage: Stage,
    options: &PromptOptions,
    gateway: &Gateway,
    attempt: u32,
) -> Result<StageOutput, GatewayError> {
    let bundle = build_stage_prompt(case, stage, options).map_err(|e| GatewayError::Config(e.to_string()))?;
    let script = render_messages(&bundle);
    let completion = gateway.complete(&script, attempt)?;
    Ok(parse_stage_output(stage, &completion.response, &completion.digest))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attempt {
    pub case: u32,
    /// 1-based.
    pub index: u32,
    /// Stages in order, stopping after the first unparseable one.
    pub stages: Vec<StageOutput>,
    pub model: Option<FrameModel>,
    pub solution: Option<SolveResult>,
    /// `None` only for infrastructure failures.
    pub grade: Option<GradeReport>,
    pub infrastructure_error: Option<String>,
}

impl Attempt {
    pub fn is_correct(&self) -> bool {
        self.grade.as_ref().is_some_and(GradeReport::is_correct)
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageOutput> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    pub fn digests(&self) -> Vec<String> {
        self.stages.iter().map(|s| s.digest.clone()).collect()
    }

    /// `None` when an infrastructure failure prevented grading.
    pub fn outcome(&self) -> Option<ErrorType> {
        self.grade.as_ref().map(|g| g.error_type)
    }
}

fn assemble(layout: &FrameModel, visualization: &VisualizationSpec) -> Option<FrameModel> {
    let mut parts = layout.parts().clone();
    parts.visualization = Some(visualization.clone());
    FrameModel::from_parts(parts).ok()
}

/// One full three-stage attempt, graded against the case truth.
pub fn run_attempt(case: &SawpCase, index: u32, options: &RunOptions, gateway: &Gateway) -> Attempt {
    let mut attempt = Attempt {
        case: case.id,
        index,
        stages: Vec::new(),
        model: None,
        solution: None,
        grade: None,
        infrastructure_error: None,
    };
    let mut prompt = PromptOptions { instructions: options.instructions.clone(), exemplar: options.exemplar, context: None };
    let mut layout = None;
    let mut visualization = None;
    for stage in Stage::ALL {
        let output = match run_stage(case, stage, &prompt, gateway, index) {
            Ok(o) => o,
            Err(e) => {
                tracing::warn!(case = case.id, attempt = index, %stage, error = %e, "infrastructure failure");
                attempt.infrastructure_error = Some(format!("stage {stage}: {e}"));
                return attempt;
            }
        };
        match &output.payload {
            None => {
                let reason = format!("stage {stage}: {}", output.error.as_deref().unwrap_or("unparseable"));
                attempt.stages.push(output);
                attempt.grade = Some(GradeReport::unparseable(&reason));
                return attempt;
            }
            Some(Payload::Parameters(p)) => prompt.context = Some(StageContext::Parameters(p.clone())),
            Some(Payload::Layout(m)) => {
                prompt.context = Some(StageContext::Layout(m.clone()));
                layout = Some(m.clone());
            }
            Some(Payload::Visualization(v)) => visualization = Some(v.clone()),
        }
        attempt.stages.push(output);
    }
    let (Some(layout), Some(visualization)) = (layout, visualization) else {
        unreachable!("all three stages parsed")
    };
    let Some(model) = assemble(&layout, &visualization) else {
        attempt.grade = Some(GradeReport::unparseable("stage 3: visualization does not fit the model"));
        return attempt;
    };
    attempt.solution = solve(&model).ok();
    attempt.grade = Some(grade_model(&model, &case.truth_model));
    attempt.model = Some(model);
    attempt
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRun {
    pub case: u32,
    pub attempts: Vec<Attempt>,
}

impl CaseRun {
    /// Best-of-N verdict: any fully correct attempt.
    pub fn solved(&self) -> bool {
        self.attempts.iter().any(Attempt::is_correct)
    }

    /// Fraction of graded attempts that are correct; `None` if none graded.
    pub fn success_rate(&self) -> Option<f64> {
        let graded = self.attempts.iter().filter(|a| a.grade.is_some()).count();
        let ok = self.attempts.iter().filter(|a| a.is_correct()).count();
        (graded > 0).then(|| ok as f64 / graded as f64)
    }

    pub fn outcomes(&self) -> CaseAttempts {
        CaseAttempts { case: self.case, outcomes: self.attempts.iter().map(Attempt::outcome).collect() }
    }
}

/// N independent attempts; every attempt is kept even after a success.
pub fn run_case_best_of_n(case: &SawpCase, n: usize, options: &RunOptions, gateway: &Gateway) -> CaseRun {
    assert!(n >= 1, "best-of-N needs N >= 1");
    CaseRun {
        case: case.id,
        attempts: (1..=n as u32).map(|k| run_attempt(case, k, options, gateway)).collect(),
    }
}

pub fn run_stability(case: &SawpCase, repeats: usize, options: &RunOptions, gateway: &Gateway) -> CaseRun {
    assert!(repeats >= 1, "stability needs at least one repeat");
    run_case_best_of_n(case, repeats, options, gateway)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRun {
    pub mode: Mode,
    pub matrix: AccuracyMatrix,
    /// Per config label, one entry per case in input order.
    pub runs: Vec<(String, Vec<CaseRun>)>,
}

/// Runs every case under every gateway. `attempts` is N for best-of-N or
/// the repeat count for stability; cases run in parallel.
pub fn run_benchmark(
    gateways: &[Gateway],
    cases: &[&SawpCase],
    mode: Mode,
    attempts: usize,
    options: &RunOptions,
) -> BenchmarkRun {
    let runs: Vec<(String, Vec<CaseRun>)> = gateways
        .iter()
        .map(|g| {
            let per_case = cases
                .par_iter()
                .map(|case| run_case_best_of_n(case, attempts, options, g))
                .collect();
            (g.config().label(), per_case)
        })
        .collect();
    let rows: Vec<(String, Vec<CaseAttempts>)> = runs
        .iter()
        .map(|(label, per_case)| (label.clone(), per_case.iter().map(CaseRun::outcomes).collect()))
        .collect();
    BenchmarkRun { mode, matrix: aggregate_accuracy(&rows, mode), runs }
}
