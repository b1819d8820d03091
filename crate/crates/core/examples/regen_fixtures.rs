//! Rewrites the bundled replay transcript sets under `fixtures/transcripts/`.
//!
//! `cargo run -p sawp-core --example regen_fixtures`

use std::path::Path;

use sawp_core::fixtures::{write_transcript_set, FixturePlan};
use sawp_core::pipeline::RunOptions;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/transcripts");
    for plan in [FixturePlan::golden(), FixturePlan::degraded()] {
        let dir = root.join(plan.name);
        if dir.exists() {
            std::fs::remove_dir_all(&dir).expect("remove old set");
        }
        let n = write_transcript_set(&plan, &dir, &RunOptions::default()).expect("write transcript set");
        println!("{}: {n} transcripts", dir.display());
    }
}
