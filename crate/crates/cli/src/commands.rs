use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use sawp_core::benchmark::{case_by_id, load_cases, SawpCase};
use sawp_core::fem::{solve_with_diagnostics, ParameterSet};
use sawp_core::gateway::{Gateway, Provider, ProviderConfig};
use sawp_core::grader::{grade_model, Mode};
use sawp_core::model::{self, parse_document, to_document_string, FrameModel};
use sawp_core::pipeline::{run_benchmark, BenchmarkRun, RunMeta, RunOptions, RunStore};
use sawp_core::prompt::{build_stage_prompt, render_messages, PromptOptions, Stage, StageContext};
use sawp_core::report::{build_report, format_matrix, ReportInput};

use crate::{CasesArgs, ContextSource, GatewayFlags, PromptArgs, PromptFlags, RunArgs, SolveArgs, ValidateArgs};

macro_rules! out {
    ($($t:tt)*) => { write!(std::io::stdout(), $($t)*)? };
}

macro_rules! outln {
    ($($t:tt)*) => { writeln!(std::io::stdout(), $($t)*)? };
}

fn read_model(path: &Path) -> Result<FrameModel> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_document(&text).with_context(|| format!("{} is not a valid frame model", path.display()))
}

fn with_visualization(model: FrameModel, scale: Option<f64>, samples: Option<usize>) -> Result<FrameModel> {
    if scale.is_none() && samples.is_none() {
        return Ok(model);
    }
    let mut parts = model.into_parts();
    let mut spec = parts.visualization.clone().unwrap_or_default();
    if let Some(s) = scale {
        spec.scale = s;
    }
    if let Some(n) = samples {
        spec.samples = n;
    }
    spec.check()?;
    parts.visualization = Some(spec);
    Ok(FrameModel::from_parts(parts)?)
}

pub fn solve(a: SolveArgs) -> Result<ExitCode> {
    let (model, title, mut description) = match (&a.model, a.case) {
        (Some(path), _) => {
            let stem = path.file_name().and_then(|s| s.to_str()).unwrap_or("model");
            let stem = stem.strip_suffix(".json").unwrap_or(stem).trim_end_matches(".fmd");
            (read_model(path)?, stem.to_string(), None)
        }
        (None, Some(id)) => {
            let case = case_by_id(id)?;
            (case.truth_model.clone(), format!("Case {id}"), Some(case.description.as_str()))
        }
        (None, None) => bail!("either --model or --case is required"),
    };
    let model = with_visualization(model, a.scale, a.samples)?;
    for f in model::validate(&model).findings {
        eprintln!("warning: {} {}", f.lint, f.message);
    }
    let (result, diagnostics) = solve_with_diagnostics(&model).context("model does not solve")?;
    for w in &diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    let grade = match a.grade_case {
        Some(id) => {
            let case = case_by_id(id)?;
            description = description.or(Some(case.description.as_str()));
            Some(grade_model(&model, &case.truth_model))
        }
        None => None,
    };

    let Some(out) = a.out else {
        out!("{}", result.to_json_string());
        if let Some(g) = &grade {
            eprintln!("grade: {} ({})", g.error_type, g.diff_summary);
        }
        return Ok(ExitCode::SUCCESS);
    };
    let input = ReportInput { title, description, model: &model, result: &result, grade: grade.as_ref() };
    let bundle = build_report(&input, &out)?;
    let files = [&bundle.fmd, &bundle.solution]
        .into_iter()
        .chain(&bundle.csv)
        .chain(&bundle.diagrams)
        .chain([&bundle.markdown]);
    for f in files {
        outln!("{}", out.join(f).display());
    }
    if let Some(g) = &grade {
        eprintln!("grade: {} ({})", g.error_type, g.diff_summary);
    }
    Ok(ExitCode::SUCCESS)
}

pub fn validate(a: ValidateArgs) -> Result<ExitCode> {
    let model = read_model(&a.file)?;
    let report = model::validate(&model);
    for f in &report.findings {
        outln!("{} [{:?}] {}", f.lint, f.severity, f.message);
    }
    let (_, diagnostics) = solve_with_diagnostics(&model).context("model does not solve")?;
    for w in &diagnostics.warnings {
        outln!("warning: {w}");
    }
    outln!(
        "{}: {} nodes, {} elements, {} finding(s)",
        a.file.display(),
        model.nodes().len(),
        model.elements().len(),
        report.findings.len()
    );
    if a.strict && !report.is_clean() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn cases(a: CasesArgs) -> Result<ExitCode> {
    if let Some(id) = a.id {
        let case = case_by_id(id)?;
        if a.solution {
            out!("{}", case.truth_solution.to_json_string());
        } else {
            outln!("Case {} ({})\n\n{}\n", case.id, case.pattern, case.description);
            out!("{}", to_document_string(&case.truth_model));
        }
        return Ok(ExitCode::SUCCESS);
    }
    for c in load_cases()? {
        let first = c.description.split(". ").next().unwrap_or_default();
        let mut summary: String = first.chars().take(64).collect();
        if summary.len() < first.len() {
            summary.push_str("...");
        }
        outln!(
            "{:>2}  {:<9}  {:>2} nodes  {:>2} elements  {}",
            c.id,
            c.pattern,
            c.truth_model.nodes().len(),
            c.truth_model.elements().len(),
            summary
        );
    }
    Ok(ExitCode::SUCCESS)
}

pub fn prompt(a: PromptArgs) -> Result<ExitCode> {
    let case = case_by_id(a.case)?;
    let stage = Stage::from_number(a.stage).context("stage must be 1, 2 or 3")?;
    let context = match (a.context, stage) {
        (ContextSource::Truth, Stage::Layout) => Some(StageContext::Parameters(
            ParameterSet::from_model(&case.truth_model).context("case has no column to take parameters from")?,
        )),
        (ContextSource::Truth, Stage::Visualization) => Some(StageContext::Layout(case.truth_model.clone())),
        _ => None,
    };
    let options = PromptOptions { instructions: a.prompt.instructions, exemplar: a.prompt.exemplar, context };
    let bundle = build_stage_prompt(case, stage, &options)?;
    out!("{}", render_messages(&bundle));
    Ok(ExitCode::SUCCESS)
}

fn select_cases(ids: &[u32], exemplar: Option<u32>) -> Result<Vec<&'static SawpCase>> {
    let cases: Vec<&SawpCase> = if ids.is_empty() {
        load_cases()?.iter().collect()
    } else {
        ids.iter().map(|&id| case_by_id(id)).collect::<Result<_, _>>()?
    };
    if let Some(e) = exemplar {
        case_by_id(e)?;
        if cases.iter().any(|c| c.id == e) {
            bail!("case {e} cannot be its own exemplar; leave it out with --cases or pick another --exemplar");
        }
    }
    Ok(cases)
}

fn gateways(flags: &GatewayFlags) -> Result<Vec<Gateway>> {
    if let Some(dir) = &flags.replay {
        if !dir.is_dir() {
            bail!("transcript directory {} does not exist", dir.display());
        }
    } else if flags.provider == Provider::Replay {
        bail!("--provider replay needs --replay DIR");
    }
    let models = if !flags.model.is_empty() {
        flags.model.clone()
    } else if let (Provider::Replay, Some(dir)) = (flags.provider, &flags.replay) {
        let name = dir.canonicalize()?.file_name().and_then(|s| s.to_str()).map(str::to_string);
        vec![name.context("cannot take a model name from the transcript directory; pass --model")?]
    } else {
        vec![flags.provider.default_model().to_string()]
    };

    let mut out = Vec::new();
    for model in models {
        let mut config = ProviderConfig::new(flags.provider).with_model(&model);
        config.temperature = flags.temperature;
        config.max_output_tokens = flags.max_tokens.unwrap_or(config.max_output_tokens);
        config.timeout_secs = flags.timeout.unwrap_or(config.timeout_secs);
        config.retry_budget = flags.retries.unwrap_or(config.retry_budget);
        config.requests_per_minute = flags.rpm;
        config.key_env = flags.key_env.clone();
        config.base_url = flags.base_url.clone();
        let gateway = match &flags.replay {
            Some(dir) => Gateway::replay(config, dir)?,
            None => {
                let g = Gateway::live(config)?;
                g.check_credentials()?;
                g
            }
        };
        out.push(gateway);
    }
    Ok(out)
}

/// Runs, stores and prints; returns the store and the number of
/// infrastructure failures.
fn execute(
    mode: Mode,
    cases: &[&SawpCase],
    attempts: u32,
    prompt: &PromptFlags,
    flags: &GatewayFlags,
) -> Result<(RunStore, BenchmarkRun, usize)> {
    let gateways = gateways(flags)?;
    let store = RunStore::create(&flags.runs_dir)
        .with_context(|| format!("cannot create a run directory under {}", flags.runs_dir.display()))?;
    let gateways: Vec<Gateway> = if flags.record {
        let dir = store.dir().join("transcripts");
        gateways.into_iter().map(|g| g.recording(&dir)).collect()
    } else {
        gateways
    };
    let options = RunOptions { instructions: prompt.instructions.clone(), exemplar: prompt.exemplar };
    let run = run_benchmark(&gateways, cases, mode, attempts as usize, &options);
    let meta = RunMeta::new(
        mode,
        attempts as usize,
        &options.instructions.label(),
        gateways.iter().map(|g| g.config().label()).collect(),
        cases.iter().map(|c| c.id).collect(),
    );
    store
        .write_benchmark(&run, &meta)
        .with_context(|| format!("cannot write run artifacts to {}", store.dir().display()))?;

    let mut failures = 0;
    for (label, per_case) in &run.runs {
        for attempt in per_case.iter().flat_map(|c| &c.attempts) {
            if let Some(e) = &attempt.infrastructure_error {
                failures += 1;
                eprintln!("{label} case {} attempt {}: {e}", attempt.case, attempt.index);
            }
        }
    }
    Ok((store, run, failures))
}

pub fn matrix(mode: Mode, ids: &[u32], attempts: u32, prompt: PromptFlags, flags: GatewayFlags) -> Result<ExitCode> {
    let cases = select_cases(ids, prompt.exemplar)?;
    let (store, run, failures) = execute(mode, &cases, attempts, &prompt, &flags)?;
    out!("{}", format_matrix(&run.matrix));
    outln!("\nrun: {}", store.dir().display());
    Ok(if failures > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

pub fn run(a: RunArgs) -> Result<ExitCode> {
    let cases = select_cases(&[a.case], a.prompt.exemplar)?;
    let case = cases[0];
    let (store, run, failures) = execute(Mode::BestOfN, &cases, a.n, &a.prompt, &a.gateway)?;
    for (label, per_case) in &run.runs {
        for attempt in per_case.iter().flat_map(|c| &c.attempts) {
            let dir: PathBuf = store.attempt_dir(label, attempt.case, attempt.index);
            let verdict = match (&attempt.grade, &attempt.infrastructure_error) {
                (Some(g), _) if g.is_correct() => "correct".to_string(),
                (Some(g), _) => format!("{}: {}", g.error_type, g.diff_summary),
                (None, Some(e)) => format!("not graded: {e}"),
                (None, None) => "not graded".to_string(),
            };
            outln!("{label} attempt {}: {verdict}", attempt.index);
            if let (Some(model), Some(result)) = (&attempt.model, &attempt.solution) {
                let input = ReportInput {
                    title: format!("Case {}, attempt {} ({label})", case.id, attempt.index),
                    description: Some(&case.description),
                    model,
                    result,
                    grade: attempt.grade.as_ref(),
                };
                let report = dir.join("report");
                build_report(&input, &report)?;
                outln!("  report: {}", report.join("report.md").display());
            }
        }
    }
    outln!("run: {}", store.dir().display());
    Ok(if failures > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}
