use std::fmt::Write as _;

use crate::grader::{AccuracyMatrix, ErrorType, Mode};

fn percent(v: f64) -> String {
    format!("{:.0}%", v * 100.0)
}

/// Plain-text accuracy matrix: one row per config with a cell per case,
/// the overall score, error histograms and, for stability runs, the
/// success-rate buckets.
pub fn format_matrix(m: &AccuracyMatrix) -> String {
    let mut out = String::new();
    let cases: Vec<u32> = m.rows.iter().flat_map(|r| r.cells.keys().copied()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let width = m.rows.iter().map(|r| r.config.len()).max().unwrap_or(6).max(6);
    let cell_width = if m.mode == Mode::Stability { 5 } else { 3 };
    let mode = match m.mode {
        Mode::BestOfN => "best-of-N (solved = o, unsolved = x, no graded attempt = -)",
        Mode::Stability => "stability (success rate per case)",
    };
    let _ = writeln!(out, "mode: {mode}");
    let _ = write!(out, "{:<width$}", "config");
    for c in &cases {
        let _ = write!(out, " {c:>cell_width$}");
    }
    let _ = writeln!(out, "  overall");
    for r in &m.rows {
        let _ = write!(out, "{:<width$}", r.config);
        for c in &cases {
            let text = match (r.cells.get(c).copied().flatten(), m.mode) {
                (None, _) => "-".to_string(),
                (Some(v), Mode::BestOfN) => if v == 1.0 { "o" } else { "x" }.to_string(),
                (Some(v), Mode::Stability) => percent(v),
            };
            let _ = write!(out, " {text:>cell_width$}");
        }
        let overall = r.overall.map(percent).unwrap_or_else(|| "-".into());
        match m.mode {
            Mode::BestOfN => {
                let graded = r.cells.values().flatten().count();
                let _ = writeln!(out, "  {overall} ({}/{graded})", r.solved_count());
            }
            Mode::Stability => {
                let _ = writeln!(out, "  {overall}");
            }
        }
    }
    for r in &m.rows {
        let _ = writeln!(out, "\n{}", r.config);
        let hist: Vec<String> = ErrorType::ALL
            .into_iter()
            .filter(|e| *e != ErrorType::None)
            .map(|e| format!("{e}={}", r.histogram.get(&e).copied().unwrap_or(0)))
            .collect();
        let _ = writeln!(out, "  failed attempts: {}", hist.join(" "));
        let _ = writeln!(out, "  infrastructure failures: {}", r.infrastructure_failures);
        if m.mode == Mode::Stability {
            for (pct, ids) in r.buckets() {
                let ids: Vec<String> = ids.iter().map(u32::to_string).collect();
                let _ = writeln!(out, "  {pct:>3}%: {}", ids.join(", "));
            }
        }
    }
    out
}
