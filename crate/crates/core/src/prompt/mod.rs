//! Staged prompt construction: general and task templates, reasoning
//! instructions, one in-context exemplar and the question.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{case_by_id, BenchmarkError, SawpCase};
use crate::fem::{geometry_of, ParameterSet};
use crate::model::{to_document_string, FrameModel, VisualizationSpec};

const GENERAL: &str = include_str!("../../prompts/general.txt");
const TASK_STAGE: [&str; 3] = [
    include_str!("../../prompts/task_stage1.txt"),
    include_str!("../../prompts/task_stage2.txt"),
    include_str!("../../prompts/task_stage3.txt"),
];
const EXAMPLE1_FMD: &str = include_str!("../../prompts/icl/example1.fmd.json");

/// Exemplar used when none is requested.
pub const DEFAULT_EXEMPLAR: u32 = 1;
/// Exemplar used for case 1 itself, which cannot be its own example.
pub const FALLBACK_EXEMPLAR: u32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PromptError {
    #[error("case {0} cannot serve as its own in-context exemplar")]
    SelfExemplar(u32),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "1")]
    Parameters,
    #[serde(rename = "2")]
    Layout,
    #[serde(rename = "3")]
    Visualization,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Parameters, Stage::Layout, Stage::Visualization];

    pub fn number(self) -> u8 {
        match self {
            Stage::Parameters => 1,
            Stage::Layout => 2,
            Stage::Visualization => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.number() == n)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstructionId {
    Direction,
    Number,
    SpaceRationality,
    DistributedDirection,
}

impl InstructionId {
    pub const ALL: [InstructionId; 4] = [
        InstructionId::Direction,
        InstructionId::Number,
        InstructionId::SpaceRationality,
        InstructionId::DistributedDirection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InstructionId::Direction => "direction",
            InstructionId::Number => "number",
            InstructionId::SpaceRationality => "space_rationality",
            InstructionId::DistributedDirection => "distributed_direction",
        }
    }

    pub fn parse(text: &str) -> Option<InstructionId> {
        InstructionId::ALL.into_iter().find(|i| i.as_str() == text)
    }

    fn asset(self) -> &'static str {
        match self {
            InstructionId::Direction => include_str!("../../prompts/instructions/direction.txt"),
            InstructionId::Number => include_str!("../../prompts/instructions/number.txt"),
            InstructionId::SpaceRationality => include_str!("../../prompts/instructions/space.txt"),
            InstructionId::DistributedDirection => include_str!("../../prompts/instructions/distributed.txt"),
        }
    }
}

impl fmt::Display for InstructionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemInstruction {
    pub id: InstructionId,
    pub title: String,
    pub body: String,
}

impl SystemInstruction {
    /// Title line followed by the body, as embedded in prompts.
    pub fn text(&self) -> String {
        format!("{}\n{}", self.title, self.body)
    }
}

pub fn instruction_catalog() -> Vec<SystemInstruction> {
    InstructionId::ALL
        .into_iter()
        .map(|id| {
            let text = id.asset().trim_end();
            let (title, body) = text.split_once('\n').expect("instruction asset has a title line");
            SystemInstruction { id, title: title.to_string(), body: body.to_string() }
        })
        .collect()
}

/// Which reasoning instructions go into the system message.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstructionSelection {
    #[default]
    All,
    None,
    Subset(BTreeSet<InstructionId>),
}

impl InstructionSelection {
    pub fn includes(&self, id: InstructionId) -> bool {
        match self {
            InstructionSelection::All => true,
            InstructionSelection::None => false,
            InstructionSelection::Subset(ids) => ids.contains(&id),
        }
    }

    /// Parses `all`, `none` or a comma-separated list of instruction ids.
    pub fn parse(text: &str) -> Option<InstructionSelection> {
        match text.trim() {
            "all" => Some(InstructionSelection::All),
            "none" => Some(InstructionSelection::None),
            list => list
                .split(',')
                .map(|s| InstructionId::parse(s.trim()))
                .collect::<Option<BTreeSet<_>>>()
                .map(InstructionSelection::Subset),
        }
    }

    pub fn label(&self) -> String {
        match self {
            InstructionSelection::All => "all".into(),
            InstructionSelection::None => "none".into(),
            InstructionSelection::Subset(ids) => ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(","),
        }
    }
}

/// Output of an earlier stage carried into a later prompt.
#[derive(Debug, Clone, PartialEq)]
pub enum StageContext {
    Parameters(ParameterSet),
    Layout(FrameModel),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PromptOptions {
    pub instructions: InstructionSelection,
    pub exemplar: Option<u32>,
    pub context: Option<StageContext>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionId {
    General,
    TaskSpecific,
    Icl,
    Question,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub case: u32,
    pub stage: Stage,
    pub sections: Vec<(SectionId, String)>,
    pub instructions: Vec<InstructionId>,
    pub exemplar: u32,
}

impl PromptBundle {
    pub fn section(&self, id: SectionId) -> &str {
        self.sections
            .iter()
            .find(|(s, _)| *s == id)
            .map(|(_, t)| t.as_str())
            .expect("every bundle carries all four sections")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MessageScript {
    pub messages: Vec<Message>,
}

impl MessageScript {
    pub fn system(&self) -> &str {
        &self.messages[0].content
    }

    pub fn user(&self) -> &str {
        &self.messages[1].content
    }
}

impl fmt::Display for MessageScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.messages.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            writeln!(f, "===== {} =====", m.role.as_str())?;
            writeln!(f, "{}", m.content)?;
        }
        Ok(())
    }
}

fn fenced(body: &str) -> String {
    format!("```json\n{}\n```", body.trim_end())
}

/// The answer a correct model gives for `case` at `stage`, as a fenced block.
pub fn reference_answer(case: &SawpCase, stage: Stage) -> String {
    match stage {
        Stage::Parameters => fenced(
            &ParameterSet::from_model(&case.truth_model)
                .expect("every bundled case has columns")
                .to_json_string(),
        ),
        Stage::Layout => {
            if case.id == 1 {
                fenced(EXAMPLE1_FMD)
            } else {
                fenced(&to_document_string(&case.truth_model))
            }
        }
        Stage::Visualization => fenced(&visualization_json(&case.visualization)),
    }
}

pub fn visualization_json(spec: &VisualizationSpec) -> String {
    serde_json::to_string(spec).expect("plain data serializes")
}

fn parameter_table(p: &ParameterSet) -> String {
    let mut out = String::from("Parameters extracted in stage 1:\n| name | value |\n|---|---|\n");
    for (name, value) in p.entries() {
        let _ = writeln!(out, "| {name} | {value:e} |");
    }
    out
}

fn layout_table(m: &FrameModel) -> String {
    let mut out = String::from("Members defined in stage 2:\n| id | kind | i | j | length (m) |\n|---|---|---|---|---|\n");
    for el in m.elements() {
        let length = geometry_of(m, el).map(|g| g.length).unwrap_or(0.0);
        let _ = writeln!(out, "| {} | {} | {} | {} | {} |", el.id, el.kind, el.node_i, el.node_j, length);
    }
    out
}

fn resolve_exemplar(case: u32, requested: Option<u32>) -> Result<u32, PromptError> {
    match requested {
        Some(id) if id == case => Err(PromptError::SelfExemplar(case)),
        Some(id) => Ok(id),
        None if case == DEFAULT_EXEMPLAR => Ok(FALLBACK_EXEMPLAR),
        None => Ok(DEFAULT_EXEMPLAR),
    }
}

pub fn build_stage_prompt(case: &SawpCase, stage: Stage, options: &PromptOptions) -> Result<PromptBundle, PromptError> {
    let exemplar_id = resolve_exemplar(case.id, options.exemplar)?;
    let exemplar = case_by_id(exemplar_id)?;

    let mut task = TASK_STAGE[stage.number() as usize - 1].trim_end().to_string();
    match (&options.context, stage) {
        (Some(StageContext::Parameters(p)), Stage::Layout) => {
            task.push_str("\n\n");
            task.push_str(parameter_table(p).trim_end());
        }
        (Some(StageContext::Layout(m)), Stage::Visualization) => {
            task.push_str("\n\n");
            task.push_str(layout_table(m).trim_end());
        }
        _ => {}
    }

    let icl = format!(
        "## Example\n### Problem\n{}\n### Answer\n{}",
        exemplar.description,
        reference_answer(exemplar, stage)
    );

    let instructions = instruction_catalog()
        .into_iter()
        .filter(|i| options.instructions.includes(i.id))
        .map(|i| i.id)
        .collect();

    Ok(PromptBundle {
        case: case.id,
        stage,
        sections: vec![
            (SectionId::General, GENERAL.trim_end().to_string()),
            (SectionId::TaskSpecific, task),
            (SectionId::Icl, icl),
            (SectionId::Question, case.description.clone()),
        ],
        instructions,
        exemplar: exemplar_id,
    })
}

/// System message: general, task and instruction texts. User message:
/// exemplar, then the question.
pub fn render_messages(bundle: &PromptBundle) -> MessageScript {
    let mut system = format!(
        "{}\n\n{}",
        bundle.section(SectionId::General),
        bundle.section(SectionId::TaskSpecific)
    );
    for instruction in instruction_catalog() {
        if bundle.instructions.contains(&instruction.id) {
            system.push_str("\n\n");
            system.push_str(&instruction.text());
        }
    }
    let user = format!(
        "{}\n\n## Question\n{}",
        bundle.section(SectionId::Icl),
        bundle.section(SectionId::Question)
    );
    MessageScript {
        messages: vec![
            Message { role: Role::System, content: system },
            Message { role: Role::User, content: user },
        ],
    }
}

/// Stage whose task template appears in the system message.
pub fn stage_of(script: &MessageScript) -> Option<Stage> {
    let system = &script.messages.iter().find(|m| m.role == Role::System)?.content;
    Stage::ALL
        .into_iter()
        .find(|s| system.contains(TASK_STAGE[s.number() as usize - 1].trim_end()))
}

/// The problem text after the final question heading of the user message.
pub fn question_of(script: &MessageScript) -> Option<&str> {
    let user = &script.messages.iter().rev().find(|m| m.role == Role::User)?.content;
    user.rsplit_once("## Question\n").map(|(_, q)| q)
}
