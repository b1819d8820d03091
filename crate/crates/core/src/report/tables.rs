use std::path::Path;

use super::ReportError;
use crate::fem::{round_significant, SolveResult};

const FORCE_HEADER: [&str; 5] = ["element_id", "end", "axial_N", "shear_N", "moment_Nm"];

fn cell(v: f64) -> String {
    let v = round_significant(v);
    // -0 prints as 0
    format!("{}", if v == 0.0 { 0.0 } else { v })
}

/// One row per element end (ends 1 and 2) followed by `min` and `max` rows.
pub fn forces_csv_string(result: &SolveResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FORCE_HEADER).expect("in-memory write");
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for (id, ends) in &result.end_forces {
        for (k, f) in ends.iter().enumerate() {
            for c in 0..3 {
                let v = round_significant(f[c]);
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
            let row = [id.to_string(), (k + 1).to_string(), cell(f[0]), cell(f[1]), cell(f[2])];
            w.write_record(&row).expect("in-memory write");
        }
    }
    if result.end_forces.is_empty() {
        lo = [0.0; 3];
        hi = [0.0; 3];
    }
    for (label, v) in [("min", lo), ("max", hi)] {
        w.write_record([label.to_string(), String::new(), cell(v[0]), cell(v[1]), cell(v[2])])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Support reactions, one row per support node.
pub fn reactions_csv_string(result: &SolveResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node_id", "Rx_N", "Ry_N", "Mz_Nm"]).expect("in-memory write");
    for (id, r) in &result.reactions {
        w.write_record([id.to_string(), cell(r[0]), cell(r[1]), cell(r[2])]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn export_forces_csv(result: &SolveResult, path: &Path) -> Result<(), ReportError> {
    super::write_file(path, &forces_csv_string(result))
}

pub fn export_reactions_csv(result: &SolveResult, path: &Path) -> Result<(), ReportError> {
    super::write_file(path, &reactions_csv_string(result))
}
