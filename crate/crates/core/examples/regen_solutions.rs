//! Rewrites `benchmark/caseNN/truth.solution.json` from the bundled truth models.
//!
//! Run after any kernel change that legitimately moves the pinned numbers:
//! `cargo run -p sawp-core --example regen_solutions`

use std::fs;
use std::path::PathBuf;

use sawp_core::fem::solve;
use sawp_core::model::parse_document;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmark");
    for id in 1..=20 {
        let dir = root.join(format!("case{id:02}"));
        let model = parse_document(&fs::read_to_string(dir.join("truth.fmd.json"))?)?;
        let text = solve(&model)?.to_json_string();
        fs::write(dir.join("truth.solution.json"), text)?;
        println!("case {id:02}: {} nodes, {} elements", model.nodes().len(), model.elements().len());
    }
    Ok(())
}
