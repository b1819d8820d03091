//! Scripted replay transcript sets for offline runs.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use crate::benchmark::{load_cases, mutate_case, MutantSpec, Mutation, SawpCase};
use crate::gateway::{
    attempt_dir, store_transcript, Backend, Gateway, GatewayError, Provider, ProviderConfig, Responder, Transcript,
};
use crate::model::to_document_string;
use crate::pipeline::{run_attempt, RunOptions};
use crate::prompt::{question_of, reference_answer, stage_of, MessageScript, Stage};

/// Fixed so regenerated sets are byte-identical.
pub const FIXTURE_TIMESTAMP: &str = "2024-11-01T00:00:00Z";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Stage 2 answers in prose without a fenced block.
    Unparseable,
    /// Stage 2 answers with the mutated truth model.
    Mutant(Mutation),
}

/// Which (case, attempt) pairs answer wrongly; everything else is correct.
#[derive(Debug, Clone, PartialEq)]
pub struct FixturePlan {
    pub name: &'static str,
    pub attempts: u32,
    pub faults: BTreeMap<(u32, u32), Fault>,
}

impl FixturePlan {
    /// All 20 cases solvable; case 20 fails attempts 1 and 3.
    pub fn golden() -> Self {
        FixturePlan {
            name: "golden",
            attempts: 3,
            faults: BTreeMap::from([
                ((20, 1), Fault::Unparseable),
                ((20, 3), Fault::Mutant(Mutation::FlipDistributedSign)),
            ]),
        }
    }

    /// Cases 11, 13 and 14 fail every attempt.
    pub fn degraded() -> Self {
        let mut faults = BTreeMap::new();
        for k in 1..=3 {
            faults.insert((11, k), Fault::Mutant(Mutation::DropNode));
            faults.insert((13, k), Fault::Mutant(Mutation::WrongSupport));
            faults.insert((14, k), Fault::Mutant(Mutation::FlipDistributedSign));
        }
        FixturePlan { name: "degraded", attempts: 3, faults }
    }

    pub fn config(&self) -> ProviderConfig {
        ProviderConfig::new(Provider::Replay).with_model(self.name)
    }
}

/// Answers like a model that follows the output format.
pub struct FixtureResponder {
    plan: FixturePlan,
}

impl FixtureResponder {
    pub fn new(plan: FixturePlan) -> Self {
        FixtureResponder { plan }
    }

    /// The response text and whether it is one of the planned faults.
    fn answer(&self, case: &SawpCase, stage: Stage, attempt: u32) -> Result<(String, bool), GatewayError> {
        let fault = self.plan.faults.get(&(case.id, attempt)).filter(|_| stage == Stage::Layout);
        let body = match fault {
            None => reference_answer(case, stage),
            Some(Fault::Unparseable) => {
                let prose = "The frame has the columns and girders listed in the problem, with fixed supports at \
                             the base and the loads applied as described.";
                return Ok((prose.into(), true));
            }
            Some(Fault::Mutant(m)) => {
                let mutant = mutate_case(case, &MutantSpec::new(case.id, *m))
                    .map_err(|e| GatewayError::Config(e.to_string()))?;
                format!("```json\n{}```", to_document_string(&mutant))
            }
        };
        Ok((format!("Stage {stage} result:\n\n{body}\n"), fault.is_some()))
    }

    fn identify(&self, script: &MessageScript) -> Result<(&'static SawpCase, Stage), GatewayError> {
        let unknown = |what: &str| GatewayError::Config(format!("fixture responder cannot identify the {what}"));
        let stage = stage_of(script).ok_or_else(|| unknown("stage"))?;
        let question = question_of(script).ok_or_else(|| unknown("question"))?;
        let case = load_cases()
            .map_err(|e| GatewayError::Config(e.to_string()))?
            .iter()
            .find(|c| c.description == question)
            .ok_or_else(|| unknown("case"))?;
        Ok((case, stage))
    }
}

impl Responder for FixtureResponder {
    fn respond(&self, script: &MessageScript, attempt: u32) -> Result<String, GatewayError> {
        let (case, stage) = self.identify(script)?;
        self.answer(case, stage, attempt).map(|(text, _)| text)
    }
}

struct Capture {
    inner: FixtureResponder,
    log: Mutex<Vec<(MessageScript, u32, String, bool)>>,
}

impl Responder for Capture {
    fn respond(&self, script: &MessageScript, attempt: u32) -> Result<String, GatewayError> {
        let (case, stage) = self.inner.identify(script)?;
        let (response, faulty) = self.inner.answer(case, stage, attempt)?;
        let entry = (script.clone(), attempt, response.clone(), faulty);
        self.log.lock().unwrap_or_else(|e| e.into_inner()).push(entry);
        Ok(response)
    }
}

/// Writes the transcript set for `plan` under `dir`. Correct answers are
/// shared at the top level; faulty ones go to `attempt_<k>/`.
pub fn write_transcript_set(plan: &FixturePlan, dir: &Path, options: &RunOptions) -> Result<usize, GatewayError> {
    let capture = Arc::new(Capture { inner: FixtureResponder::new(plan.clone()), log: Mutex::new(Vec::new()) });
    let config = plan.config();
    let gateway = Gateway::new(config.clone(), Backend::Scripted(capture.clone()))?;
    for case in load_cases().map_err(|e| GatewayError::Config(e.to_string()))? {
        for k in 1..=plan.attempts {
            let attempt = run_attempt(case, k, options, &gateway);
            if let Some(e) = attempt.infrastructure_error {
                return Err(GatewayError::Config(e));
            }
        }
    }
    let log = std::mem::take(&mut *capture.log.lock().unwrap_or_else(|e| e.into_inner()));
    let mut written = 0;
    for (script, attempt, response, faulty) in log {
        let shared = !faulty;
        let target = if shared { dir.to_path_buf() } else { attempt_dir(dir, attempt) };
        let t = Transcript::new(config.provider, &config.model, &script, response, FIXTURE_TIMESTAMP.into());
        match store_transcript(&t, &target, false) {
            Ok(_) => written += 1,
            Err(GatewayError::DuplicateDigest(_)) if shared => {}
            Err(e) => return Err(e),
        }
    }
    Ok(written)
}
