use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use sawp_core::benchmark::{case_by_id, load_cases, Mutation, SawpCase};
use sawp_core::fixtures::{write_transcript_set, Fault, FixturePlan, FixtureResponder};
use sawp_core::gateway::{Backend, Gateway, GatewayError, Provider, ProviderConfig};
use sawp_core::grader::{classify_error, ErrorType, Mode};
use sawp_core::model::Diagram;
use sawp_core::pipeline::{
    extract_fenced_block, parse_stage_output, reconstruct_matrix, run_attempt, run_benchmark, run_case_best_of_n,
    run_stability, run_stage, ParseStatus, Payload, RunMeta, RunOptions, RunStore, DEFAULT_BEST_OF,
};
use sawp_core::prompt::{PromptOptions, Stage};

fn transcripts(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/transcripts").join(name)
}

fn replay(name: &str) -> Gateway {
    Gateway::replay(ProviderConfig::new(Provider::Replay).with_model(name), transcripts(name)).unwrap()
}

fn scripted(plan: FixturePlan) -> Gateway {
    let config = plan.config();
    Gateway::new(config, Backend::Scripted(Arc::new(FixtureResponder::new(plan)))).unwrap()
}

fn all_cases() -> Vec<&'static SawpCase> {
    load_cases().unwrap().iter().collect()
}

#[test]
fn fenced_block_extraction() {
    assert_eq!(extract_fenced_block("intro\n```json\n{\"a\": 1}\n```\nbye").unwrap(), "{\"a\": 1}\n");
    assert_eq!(extract_fenced_block("```\n[]\n```").unwrap(), "[]\n");
    assert!(extract_fenced_block("no code here").unwrap_err().contains("no fenced block"));
    assert!(extract_fenced_block("```json\n{}\n```\n```json\n{}\n```").unwrap_err().contains("found 2"));
    assert!(extract_fenced_block("```json\n{}\n").unwrap_err().contains("unterminated"));
}

#[test]
fn malformed_stage_outputs_are_unparseable() {
    let s = parse_stage_output(Stage::Layout, "The frame has two columns.", "d");
    assert_eq!(s.status(), ParseStatus::Unparseable);
    assert!(s.payload.is_none() && s.error.is_some());
    let s = parse_stage_output(Stage::Parameters, "```json\n{\"E\": -1, \"A_column\": 1, \"I_column\": 1}\n```", "d");
    assert_eq!(s.status(), ParseStatus::Unparseable);
    let s = parse_stage_output(Stage::Visualization, "```json\n{\"diagrams\": [\"moment\"], \"scale\": 0, \"samples\": 21}\n```", "d");
    assert_eq!(s.status(), ParseStatus::Unparseable);
    let s = parse_stage_output(Stage::Layout, "```json\n{\"nodes\": [{\"id\": 1, \"x\": 0}]}\n```", "d");
    assert_eq!(s.status(), ParseStatus::Unparseable);
}

#[test]
fn portal_stages_from_golden_replay() {
    let case = case_by_id(1).unwrap();
    let g = replay("golden");
    let s1 = run_stage(case, Stage::Parameters, &PromptOptions::default(), &g, 1).unwrap();
    let Some(Payload::Parameters(p)) = &s1.payload else { panic!("{:?}", s1.error) };
    assert_eq!(p.e, 2e11);
    assert_eq!(p.a_column, 2e-3);
    assert_eq!(p.a_girder, Some(6e-3));
    assert_eq!(p.i_column, 1.6e-5);
    assert_eq!(p.i_girder, Some(5.4e-5));

    let attempt = run_attempt(case, 1, &RunOptions::default(), &g);
    let Some(Payload::Visualization(v)) = &attempt.stage(Stage::Visualization).unwrap().payload else { panic!() };
    assert_eq!(v.diagrams, [Diagram::Deformed, Diagram::Axial, Diagram::Shear, Diagram::Moment]);
    assert!(attempt.is_correct());
    assert_eq!(attempt.digests().len(), 3);
    assert_eq!(classify_error(&attempt), Some(ErrorType::None));
}

#[test]
fn best_of_three_accepts_fail_pass_fail() {
    let case = case_by_id(20).unwrap();
    let g = replay("golden");
    let run = run_case_best_of_n(case, DEFAULT_BEST_OF, &RunOptions::default(), &g);
    let outcomes: Vec<_> = run.attempts.iter().map(|a| a.outcome().unwrap()).collect();
    assert_eq!(outcomes, [ErrorType::Unparseable, ErrorType::None, ErrorType::Type2Boundary]);
    assert!(run.solved());
    assert_eq!(run.attempts[0].stages.len(), 2);
    assert_eq!(classify_error(&run.attempts[0]), Some(ErrorType::Unparseable));
    assert_eq!(classify_error(&run.attempts[2]), Some(ErrorType::Type2Boundary));

    // monotone in N over the same transcript pool
    assert!(!run_case_best_of_n(case, 1, &RunOptions::default(), &g).solved());
    assert!(run_case_best_of_n(case, 2, &RunOptions::default(), &g).solved());
    assert!(run_case_best_of_n(case_by_id(1).unwrap(), 1, &RunOptions::default(), &g).solved());
}

#[test]
fn all_failing_attempts_leave_case_unsolved() {
    let run = run_case_best_of_n(case_by_id(11).unwrap(), 3, &RunOptions::default(), &replay("degraded"));
    assert!(!run.solved());
    assert!(run.attempts.iter().all(|a| a.outcome() == Some(ErrorType::Type1Layout)));
}

fn stability_plan(failing: &[u32]) -> FixturePlan {
    FixturePlan {
        name: "stability",
        attempts: 5,
        faults: failing.iter().map(|k| ((13, *k), Fault::Mutant(Mutation::WrongSupport))).collect(),
    }
}

#[test]
fn stability_rates() {
    let case = case_by_id(13).unwrap();
    let rate = |failing: &[u32]| {
        run_stability(case, 5, &RunOptions::default(), &scripted(stability_plan(failing))).success_rate().unwrap()
    };
    assert_eq!(rate(&[2, 4, 5]), 0.4);
    assert_eq!(rate(&[]), 1.0);
    assert_eq!(rate(&[1, 2, 3, 4, 5]), 0.0);
}

#[test]
fn golden_and_degraded_benchmarks() {
    let golden = run_benchmark(&[replay("golden")], &all_cases(), Mode::BestOfN, 3, &RunOptions::default());
    let row = &golden.matrix.rows[0];
    assert_eq!(row.config, "replay/golden");
    assert_eq!(row.solved_count(), 20);
    assert_eq!(row.overall, Some(1.0));
    assert_eq!(row.infrastructure_failures, 0);
    assert_eq!(row.histogram, BTreeMap::from([(ErrorType::Unparseable, 1), (ErrorType::Type2Boundary, 1)]));

    let degraded = run_benchmark(&[replay("degraded")], &all_cases(), Mode::BestOfN, 3, &RunOptions::default());
    let row = &degraded.matrix.rows[0];
    assert_eq!(row.solved_count(), 17);
    assert!((row.overall.unwrap() - 0.85).abs() < 1e-12);
    for id in [11, 13, 14] {
        assert_eq!(row.cells[&id], Some(0.0));
    }
    assert_eq!(row.histogram, BTreeMap::from([(ErrorType::Type1Layout, 3), (ErrorType::Type2Boundary, 6)]));
}

#[test]
fn empty_config_list() {
    let run = run_benchmark(&[], &all_cases(), Mode::BestOfN, 3, &RunOptions::default());
    assert!(run.matrix.rows.is_empty());
}

#[test]
fn replay_is_deterministic_and_order_independent() {
    let cases = all_cases();
    let mut shuffled = cases.clone();
    shuffled.reverse();
    shuffled.swap(3, 11);
    let a = run_benchmark(&[replay("degraded")], &cases, Mode::BestOfN, 3, &RunOptions::default());
    let b = run_benchmark(&[replay("degraded")], &shuffled, Mode::BestOfN, 3, &RunOptions::default());
    assert_eq!(a.matrix, b.matrix);
    let c = run_benchmark(&[replay("degraded")], &cases, Mode::BestOfN, 3, &RunOptions::default());
    assert_eq!(a.matrix.to_json_string(), c.matrix.to_json_string());
}

#[test]
fn infrastructure_failures_are_isolated() {
    let empty = tempfile::tempdir().unwrap();
    let broken = Gateway::replay(ProviderConfig::new(Provider::Replay).with_model("golden"), empty.path()).unwrap();
    let run = run_benchmark(&[replay("golden"), broken], &all_cases(), Mode::BestOfN, 3, &RunOptions::default());
    assert_eq!(run.matrix.rows[0].solved_count(), 20);
    let row = &run.matrix.rows[1];
    assert!(row.cells.values().all(Option::is_none));
    assert_eq!(row.overall, None);
    assert_eq!(row.infrastructure_failures, 60);
    assert!(row.histogram.is_empty());
    let a = &run.runs[1].1[0].attempts[0];
    assert!(a.infrastructure_error.as_ref().unwrap().contains("no recorded transcript for digest"));
    assert_eq!(classify_error(a), None);
}

#[test]
fn instruction_ablation_misses_golden_transcripts() {
    let options = RunOptions { instructions: sawp_core::prompt::InstructionSelection::None, exemplar: None };
    let a = run_attempt(case_by_id(12).unwrap(), 1, &options, &replay("golden"));
    assert!(a.infrastructure_error.is_some());
    let a = run_attempt(case_by_id(12).unwrap(), 1, &options, &scripted(FixturePlan::golden()));
    assert!(a.is_correct());
}

#[test]
fn persisted_attempts_rebuild_the_matrix() {
    let root = tempfile::tempdir().unwrap();
    let store = RunStore::create(root.path()).unwrap();
    let run = run_benchmark(&[replay("golden"), replay("degraded")], &all_cases(), Mode::BestOfN, 3, &RunOptions::default());
    let meta = RunMeta {
        created_at: "2024-11-01T00:00:00Z".into(),
        mode: Mode::BestOfN,
        attempts: 3,
        instructions: "all".into(),
        configs: run.runs.iter().map(|(l, _)| l.clone()).collect(),
        cases: (1..=20).collect(),
    };
    store.write_benchmark(&run, &meta).unwrap();
    assert_eq!(reconstruct_matrix(store.dir()).unwrap(), run.matrix);

    let attempt = store.dir().join("replay_golden/case20/attempt3");
    for f in ["stage1.raw.txt", "stage2.json", "model.fmd.json", "solution.json", "grade.json", "attempt.json"] {
        assert!(attempt.join(f).exists(), "{f}");
    }
    assert!(!store.dir().join("replay_golden/case20/attempt1/stage3.raw.txt").exists());
    for f in ["run.json", "matrix.json", "errors.json"] {
        assert!(store.dir().join(f).exists());
    }
    let errors: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(store.dir().join("errors.json")).unwrap()).unwrap();
    assert_eq!(errors["replay/degraded"]["histogram"]["type2_boundary"], 6);
    let second = RunStore::create(root.path()).unwrap();
    assert_ne!(second.dir(), store.dir());
}

#[test]
fn bundled_transcript_sets_are_current() {
    for plan in [FixturePlan::golden(), FixturePlan::degraded()] {
        let dir = tempfile::tempdir().unwrap();
        write_transcript_set(&plan, dir.path(), &RunOptions::default()).unwrap();
        let listing = |root: &std::path::Path| {
            let mut files = BTreeMap::new();
            let mut stack = vec![root.to_path_buf()];
            while let Some(d) = stack.pop() {
                for e in std::fs::read_dir(d).unwrap() {
                    let p = e.unwrap().path();
                    if p.is_dir() {
                        stack.push(p);
                    } else {
                        files.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
                    }
                }
            }
            files
        };
        assert!(listing(dir.path()) == listing(&transcripts(plan.name)), "{} set is stale", plan.name);
    }
}

#[test]
fn scripted_responder_rejects_foreign_prompts() {
    let g = scripted(FixturePlan::golden());
    let script = sawp_core::prompt::MessageScript { messages: vec![] };
    assert!(matches!(g.complete(&script, 1), Err(GatewayError::Config(_))));
}
