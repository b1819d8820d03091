use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ErrorType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// A case is solved when any of its attempts is fully correct.
    BestOfN,
    /// A case scores the fraction of its repeats that are fully correct.
    Stability,
}

/// Graded outcomes of one case under one configuration; `None` marks an
/// attempt lost to an infrastructure failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseAttempts {
    pub case: u32,
    pub outcomes: Vec<Option<ErrorType>>,
}

pub type Histogram = BTreeMap<ErrorType, usize>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub config: String,
    /// Case id to solved flag (0 or 1) or success rate; `None` when every
    /// attempt failed for infrastructure reasons.
    pub cells: BTreeMap<u32, Option<f64>>,
    /// Mean over gradeable cases.
    pub overall: Option<f64>,
    /// Error types of failed, gradeable attempts.
    pub histogram: Histogram,
    pub infrastructure_failures: usize,
}

impl AccuracyRow {
    pub fn solved_count(&self) -> usize {
        self.cells.values().filter(|c| **c == Some(1.0)).count()
    }

    /// Cases grouped by their cell value in whole percent, highest first.
    pub fn buckets(&self) -> Vec<(u32, Vec<u32>)> {
        let mut out: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (case, cell) in &self.cells {
            if let Some(v) = cell {
                out.entry((v * 100.0).round() as u32).or_default().push(*case);
            }
        }
        out.into_iter().rev().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMatrix {
    pub mode: Mode,
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyMatrix {
    pub fn row(&self, config: &str) -> Option<&AccuracyRow> {
        self.rows.iter().find(|r| r.config == config)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes") + "\n"
    }

    /// Per-config error histograms keyed by config label.
    pub fn errors_json_string(&self) -> String {
        #[derive(Serialize)]
        struct Errors {
            histogram: BTreeMap<&'static str, usize>,
            infrastructure_failures: usize,
        }
        let map: BTreeMap<&str, Errors> = self
            .rows
            .iter()
            .map(|r| {
                let histogram = ErrorType::ALL
                    .into_iter()
                    .filter(|e| *e != ErrorType::None)
                    .map(|e| (e.as_str(), r.histogram.get(&e).copied().unwrap_or(0)))
                    .collect();
                (r.config.as_str(), Errors { histogram, infrastructure_failures: r.infrastructure_failures })
            })
            .collect();
        serde_json::to_string_pretty(&map).expect("plain data serializes") + "\n"
    }
}

pub fn aggregate_accuracy(rows: &[(String, Vec<CaseAttempts>)], mode: Mode) -> AccuracyMatrix {
    let rows = rows
        .iter()
        .map(|(config, cases)| {
            let mut histogram = Histogram::new();
            let mut infrastructure_failures = 0;
            let mut cells = BTreeMap::new();
            for c in cases {
                let graded: Vec<ErrorType> = c.outcomes.iter().flatten().copied().collect();
                infrastructure_failures += c.outcomes.len() - graded.len();
                for e in graded.iter().filter(|e| **e != ErrorType::None) {
                    *histogram.entry(*e).or_default() += 1;
                }
                let successes = graded.iter().filter(|e| **e == ErrorType::None).count();
                let cell = (!graded.is_empty()).then(|| match mode {
                    Mode::BestOfN => f64::from(u8::from(successes > 0)),
                    Mode::Stability => successes as f64 / graded.len() as f64,
                });
                cells.insert(c.case, cell);
            }
            let scored: Vec<f64> = cells.values().flatten().copied().collect();
            let overall = (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
            AccuracyRow { config: config.clone(), cells, overall, histogram, infrastructure_failures }
        })
        .collect();
    AccuracyMatrix { mode, rows }
}
