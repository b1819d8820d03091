//! Output layer: force tables, SVG diagrams and Markdown reports.

mod matrix;
mod svg;
mod tables;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::fem::{round_significant, FemError, SolveResult};
use crate::grader::GradeReport;
use crate::model::{to_document_string, Diagram, ElementKind, FrameModel, VisualizationSpec};

pub use matrix::format_matrix;
pub use svg::{render_svg_diagram, svg_diagram, DiagramRequest, DEFAULT_CANVAS, DEFAULT_SAMPLES};
pub use tables::{export_forces_csv, export_reactions_csv, forces_csv_string, reactions_csv_string};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid diagram request: {0}")]
    InvalidRequest(String),
    #[error("missing result data: {0}")]
    MissingResult(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), ReportError> {
    let io = |source| ReportError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

pub struct ReportInput<'a> {
    pub title: String,
    pub description: Option<&'a str>,
    pub model: &'a FrameModel,
    pub result: &'a SolveResult,
    pub grade: Option<&'a GradeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub nodes: usize,
    pub elements: usize,
    pub max_displacement_m: f64,
    pub max_abs_moment_nm: f64,
    pub max_abs_axial_n: f64,
    pub max_abs_shear_n: f64,
}

impl SolveSummary {
    pub fn new(model: &FrameModel, r: &SolveResult) -> Self {
        let peak = |c: usize| {
            r.end_forces.values().flatten().fold(0.0, |m: f64, f| m.max(round_significant(f[c]).abs()))
        };
        SolveSummary {
            nodes: model.nodes().len(),
            elements: model.elements().len(),
            max_displacement_m: r
                .displacements
                .values()
                .fold(0.0, |m: f64, u| m.max(round_significant(u[0].hypot(u[1])))),
            max_abs_axial_n: peak(0),
            max_abs_shear_n: peak(1),
            max_abs_moment_nm: peak(2),
        }
    }
}

/// Files of one report, relative to its output directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub description: Option<String>,
    pub fmd: PathBuf,
    pub solution: PathBuf,
    pub summary: SolveSummary,
    pub diagrams: Vec<PathBuf>,
    pub csv: Vec<PathBuf>,
    pub grade: Option<GradeReport>,
    pub markdown: PathBuf,
}

fn num(v: f64) -> String {
    let v = round_significant(v);
    format!("{}", if v == 0.0 { 0.0 } else { v })
}

fn requested_diagrams(model: &FrameModel) -> (Vec<Diagram>, VisualizationSpec) {
    let spec = model.visualization().cloned().unwrap_or_default();
    let mut kinds = vec![Diagram::Geometry];
    kinds.extend(spec.diagrams.iter().copied().filter(|d| *d != Diagram::Geometry));
    (kinds, spec)
}

pub fn build_report(input: &ReportInput<'_>, out_dir: &Path) -> Result<ReportBundle, ReportError> {
    let now = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    build_report_at(input, out_dir, &now)
}

/// As [`build_report`] with an explicit value for the report's single
/// timestamp line.
pub fn build_report_at(input: &ReportInput<'_>, out_dir: &Path, generated_at: &str) -> Result<ReportBundle, ReportError> {
    let model = input.model;
    let result = input.result;
    let fmd = PathBuf::from("model.fmd.json");
    let solution = PathBuf::from("solution.json");
    write_file(&out_dir.join(&fmd), &to_document_string(model))?;
    write_file(&out_dir.join(&solution), &result.to_json_string())?;
    let csv = vec![PathBuf::from("forces.csv"), PathBuf::from("reactions.csv")];
    export_forces_csv(result, &out_dir.join(&csv[0]))?;
    export_reactions_csv(result, &out_dir.join(&csv[1]))?;

    let (kinds, spec) = requested_diagrams(model);
    let mut diagrams = Vec::new();
    for kind in kinds {
        let path = PathBuf::from(format!("{}.svg", kind.as_str()));
        let req = DiagramRequest { kind, scale: spec.scale, samples: spec.samples, canvas: DEFAULT_CANVAS };
        render_svg_diagram(model, Some(result), &req, &out_dir.join(&path))?;
        diagrams.push(path);
    }

    let bundle = ReportBundle {
        description: input.description.map(str::to_string),
        fmd,
        solution,
        summary: SolveSummary::new(model, result),
        diagrams,
        csv,
        grade: input.grade.cloned(),
        markdown: PathBuf::from("report.md"),
    };
    let text = markdown(input, &bundle, &spec, generated_at);
    write_file(&out_dir.join(&bundle.markdown), &text)?;
    Ok(bundle)
}

fn markdown(input: &ReportInput<'_>, bundle: &ReportBundle, spec: &VisualizationSpec, generated_at: &str) -> String {
    let model = input.model;
    let r = input.result;
    let mut md = String::new();
    let _ = writeln!(md, "# {}\n", input.title);
    let _ = writeln!(md, "Generated: {generated_at}\n");
    if let Some(d) = input.description {
        let _ = writeln!(md, "## Problem\n\n{d}\n");
    }

    let _ = writeln!(md, "## Model\n");
    let counts: Vec<String> = ElementKind::ALL
        .into_iter()
        .map(|k| (k, model.count_kind(k)))
        .filter(|(_, n)| *n > 0)
        .map(|(k, n)| format!("{n} {k}"))
        .collect();
    let _ = writeln!(
        md,
        "{} nodes, {} elements ({}), {} supports, {} point loads, {} distributed loads.\n",
        model.nodes().len(),
        model.elements().len(),
        counts.join(", "),
        model.supports().len(),
        model.point_loads().len(),
        model.distributed_loads().len()
    );
    let _ = writeln!(md, "```json\n{}```\n", to_document_string(model));

    let s = &bundle.summary;
    let _ = writeln!(md, "## Summary\n");
    let _ = writeln!(md, "| quantity | value |\n|---|---|");
    let _ = writeln!(md, "| max nodal translation (m) | {} |", num(s.max_displacement_m));
    let _ = writeln!(md, "| max abs axial force (N) | {} |", num(s.max_abs_axial_n));
    let _ = writeln!(md, "| max abs shear force (N) | {} |", num(s.max_abs_shear_n));
    let _ = writeln!(md, "| max abs end moment (N·m) | {} |\n", num(s.max_abs_moment_nm));

    let _ = writeln!(md, "## Displacements\n");
    let _ = writeln!(md, "| node | ux (m) | uy (m) | θz (rad) |\n|---|---|---|---|");
    for (id, u) in &r.displacements {
        let _ = writeln!(md, "| {id} | {} | {} | {} |", num(u[0]), num(u[1]), num(u[2]));
    }

    let _ = writeln!(md, "\n## End forces\n");
    let _ = writeln!(md, "Local axes, forces acting on the element.\n");
    let _ = writeln!(md, "| element | end | N (N) | V (N) | M (N·m) |\n|---|---|---|---|---|");
    for (id, ends) in &r.end_forces {
        for (k, f) in ends.iter().enumerate() {
            let _ = writeln!(md, "| {id} | {} | {} | {} | {} |", k + 1, num(f[0]), num(f[1]), num(f[2]));
        }
    }

    let _ = writeln!(md, "\n## Reactions\n");
    let _ = writeln!(md, "| node | Rx (N) | Ry (N) | Mz (N·m) |\n|---|---|---|---|");
    for (id, f) in &r.reactions {
        let _ = writeln!(md, "| {id} | {} | {} | {} |", num(f[0]), num(f[1]), num(f[2]));
    }

    let _ = writeln!(md, "\n## Diagrams\n");
    let _ = writeln!(
        md,
        "Deformed shapes are magnified {}x. Moment diagrams are drawn on the tension side of each member, so sagging \
         moments appear below a girder. Markers show moment extrema where the shear changes sign.\n",
        spec.scale
    );
    for d in &bundle.diagrams {
        let name = d.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let _ = writeln!(md, "![{name}]({})", d.display());
    }

    let _ = writeln!(md, "\n## Tables\n");
    for c in &bundle.csv {
        let _ = writeln!(md, "- [{}]({})", c.display(), c.display());
    }
    let _ = writeln!(md, "- [{}]({})", bundle.solution.display(), bundle.solution.display());

    if let Some(g) = input.grade {
        let yes = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(md, "\n## Grade\n");
        let _ = writeln!(md, "| layout | supports | loads | numeric | error type |\n|---|---|---|---|---|");
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} |\n",
            yes(g.layout_match),
            yes(g.support_match),
            yes(g.load_match),
            yes(g.numeric_match),
            g.error_type
        );
        let _ = writeln!(md, "```text\n{}\n```", g.diff_summary);
    }
    md
}
