use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Attempt, BenchmarkRun, ParseStatus, Payload};
use crate::grader::{aggregate_accuracy, AccuracyMatrix, CaseAttempts, ErrorType, Mode};
use crate::model::to_document_string;
use crate::prompt::{visualization_json, Stage};

/// `run.json`; `created_at` is the only time-dependent field of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub created_at: String,
    pub mode: Mode,
    pub attempts: usize,
    pub instructions: String,
    pub configs: Vec<String>,
    pub cases: Vec<u32>,
}

impl RunMeta {
    /// Stamped with the current UTC time.
    pub fn new(mode: Mode, attempts: usize, instructions: &str, configs: Vec<String>, cases: Vec<u32>) -> Self {
        RunMeta {
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            mode,
            attempts,
            instructions: instructions.to_string(),
            configs,
            cases,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub digest: String,
    pub status: ParseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// `attempt.json`: enough to rebuild every matrix cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub config: String,
    pub case: u32,
    pub attempt: u32,
    pub stages: Vec<StageRecord>,
    pub error_type: Option<ErrorType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infrastructure_error: Option<String>,
}

impl AttemptRecord {
    pub fn new(config: &str, a: &Attempt) -> Self {
        AttemptRecord {
            config: config.to_string(),
            case: a.case,
            attempt: a.index,
            stages: a
                .stages
                .iter()
                .map(|s| StageRecord {
                    stage: s.stage,
                    digest: s.digest.clone(),
                    status: s.status(),
                    error: s.error.clone(),
                    warnings: s.warnings.clone(),
                })
                .collect(),
            error_type: a.outcome(),
            infrastructure_error: a.infrastructure_error.clone(),
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

fn dir_name(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// Append-only directory of one experiment under `runs/<timestamp>/`.
#[derive(Debug, Clone)]
pub struct RunStore {
    dir: PathBuf,
}

impl RunStore {
    /// Creates a fresh `<root>/<UTC timestamp>` directory (suffixed if taken).
    pub fn create(root: &Path) -> io::Result<RunStore> {
        fs::create_dir_all(root)?;
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
        for k in 0.. {
            let name = if k == 0 { stamp.clone() } else { format!("{stamp}-{k}") };
            let dir = root.join(name);
            match fs::create_dir(&dir) {
                Ok(()) => return Ok(RunStore { dir }),
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e),
            }
        }
        unreachable!()
    }

    pub fn open(dir: impl Into<PathBuf>) -> RunStore {
        RunStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// `<run>/<config>/caseNN/attemptK`, with `/` in the config label replaced.
    pub fn attempt_dir(&self, config: &str, case: u32, index: u32) -> PathBuf {
        self.dir.join(dir_name(config)).join(format!("case{case:02}")).join(format!("attempt{index}"))
    }

    /// Raw stage texts, parsed payloads, assembled model, solution, grade
    /// and the attempt record.
    pub fn write_attempt(&self, config: &str, attempt: &Attempt) -> io::Result<PathBuf> {
        let dir = self.attempt_dir(config, attempt.case, attempt.index);
        fs::create_dir_all(&dir)?;
        for s in &attempt.stages {
            let n = s.stage.number();
            fs::write(dir.join(format!("stage{n}.raw.txt")), &s.raw)?;
            let payload = match &s.payload {
                Some(Payload::Parameters(p)) => Some(p.to_json_string() + "\n"),
                Some(Payload::Layout(m)) => Some(to_document_string(m)),
                Some(Payload::Visualization(v)) => Some(visualization_json(v) + "\n"),
                None => None,
            };
            if let Some(text) = payload {
                fs::write(dir.join(format!("stage{n}.json")), text)?;
            }
        }
        if let Some(m) = &attempt.model {
            fs::write(dir.join("model.fmd.json"), to_document_string(m))?;
        }
        if let Some(s) = &attempt.solution {
            fs::write(dir.join("solution.json"), s.to_json_string())?;
        }
        if let Some(g) = &attempt.grade {
            fs::write(dir.join("grade.json"), g.to_json_string())?;
        }
        fs::write(dir.join("attempt.json"), pretty(&AttemptRecord::new(config, attempt)))?;
        Ok(dir)
    }

    pub fn write_benchmark(&self, run: &BenchmarkRun, meta: &RunMeta) -> io::Result<()> {
        for (label, cases) in &run.runs {
            for case in cases {
                for attempt in &case.attempts {
                    self.write_attempt(label, attempt)?;
                }
            }
        }
        fs::write(self.dir.join("run.json"), pretty(meta))?;
        fs::write(self.dir.join("matrix.json"), run.matrix.to_json_string())?;
        fs::write(self.dir.join("errors.json"), run.matrix.errors_json_string())?;
        Ok(())
    }
}

fn collect_records(dir: &Path, out: &mut Vec<AttemptRecord>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_records(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == "attempt.json") {
            let text = fs::read_to_string(&path)?;
            let record = serde_json::from_str(&text)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
            out.push(record);
        }
    }
    Ok(())
}

/// Every attempt record of a run, ordered by config, case and attempt.
pub fn read_attempt_records(run_dir: &Path) -> io::Result<Vec<AttemptRecord>> {
    let mut records = Vec::new();
    collect_records(run_dir, &mut records)?;
    records.sort_by(|a, b| (&a.config, a.case, a.attempt).cmp(&(&b.config, b.case, b.attempt)));
    Ok(records)
}

/// Rebuilds the accuracy matrix from persisted attempt records alone.
pub fn reconstruct_matrix(run_dir: &Path) -> io::Result<AccuracyMatrix> {
    let meta: RunMeta = serde_json::from_str(&fs::read_to_string(run_dir.join("run.json"))?)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    let mut grouped: BTreeMap<&str, BTreeMap<u32, Vec<Option<ErrorType>>>> = BTreeMap::new();
    let records = read_attempt_records(run_dir)?;
    for r in &records {
        grouped.entry(&r.config).or_default().entry(r.case).or_default().push(r.error_type);
    }
    let rows: Vec<(String, Vec<CaseAttempts>)> = meta
        .configs
        .iter()
        .map(|label| {
            let cases = grouped.get(label.as_str()).cloned().unwrap_or_default();
            let cases = meta
                .cases
                .iter()
                .filter_map(|id| cases.get(id).map(|o| CaseAttempts { case: *id, outcomes: o.clone() }))
                .collect();
            (label.clone(), cases)
        })
        .collect();
    Ok(aggregate_accuracy(&rows, meta.mode))
}
