use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sawp_core::benchmark::{case_by_id, load_cases, mutate_case, MutantSpec, Mutation};
use sawp_core::fem::{assemble, solve};
use sawp_core::gateway::{Gateway, Provider, ProviderConfig};
use sawp_core::grader::{grade_model, Mode};
use sawp_core::model::{parse_document, to_document_string};
use sawp_core::pipeline::{run_benchmark, RunOptions};
use sawp_core::prompt::{build_stage_prompt, render_messages, PromptOptions, Stage};

fn fem(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for id in [1, 9, 20] {
        let model = &case_by_id(id).unwrap().truth_model;
        g.bench_with_input(BenchmarkId::from_parameter(id), model, |b, m| b.iter(|| solve(black_box(m)).unwrap()));
    }
    g.finish();

    let model = &case_by_id(9).unwrap().truth_model;
    c.bench_function("assemble/9", |b| b.iter(|| assemble(black_box(model)).unwrap()));
    c.bench_function("solve/all", |b| {
        let cases = load_cases().unwrap();
        b.iter(|| cases.iter().map(|c| solve(&c.truth_model).unwrap().displacements.len()).sum::<usize>())
    });

    let text = to_document_string(model);
    c.bench_function("parse_document/9", |b| b.iter(|| parse_document(black_box(&text)).unwrap()));
}

fn grading(c: &mut Criterion) {
    let case = case_by_id(13).unwrap();
    let mutant = mutate_case(case, &MutantSpec::new(13, Mutation::WrongSupport)).unwrap();
    c.bench_function("grade/13/exact", |b| b.iter(|| grade_model(black_box(&case.truth_model), &case.truth_model)));
    c.bench_function("grade/13/wrong_support", |b| b.iter(|| grade_model(black_box(&mutant), &case.truth_model)));
}

fn prompts(c: &mut Criterion) {
    let case = case_by_id(12).unwrap();
    let options = PromptOptions::default();
    c.bench_function("prompt/12/layout", |b| {
        b.iter(|| render_messages(&build_stage_prompt(black_box(case), Stage::Layout, &options).unwrap()))
    });
}

fn replay(c: &mut Criterion) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/transcripts/golden");
    let config = ProviderConfig::new(Provider::Replay).with_model("golden");
    let gateway = [Gateway::replay(config, dir).unwrap()];
    let cases: Vec<_> = load_cases().unwrap().iter().collect();
    let mut g = c.benchmark_group("replay");
    g.sample_size(10);
    g.bench_function("golden/best_of_3", |b| {
        b.iter(|| run_benchmark(&gateway, &cases, Mode::BestOfN, 3, &RunOptions::default()).matrix)
    });
    g.finish();
}

criterion_group!(benches, fem, grading, prompts, replay);
criterion_main!(benches);
