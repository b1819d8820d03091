use sawp_core::benchmark::{case_by_id, load_cases};
use sawp_core::fem::solve;
use sawp_core::grader::grade_model;
use sawp_core::model::{Diagram, FrameModel};
use sawp_core::report::{
    build_report_at, export_forces_csv, forces_csv_string, reactions_csv_string, svg_diagram, DiagramRequest,
    ReportError, ReportInput, DEFAULT_SAMPLES,
};

fn rows(text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn portal_force_table_extrema() {
    let result = solve(&case_by_id(1).unwrap().truth_model).unwrap();
    let text = forces_csv_string(&result);
    assert!(text.starts_with("element_id,end,axial_N,shear_N,moment_Nm\n"));
    let rows = rows(&text);
    assert_eq!(rows.len(), 6 + 2);
    let (body, summary) = rows.split_at(6);
    assert_eq!(summary[0][0], "min");
    assert_eq!(summary[1][0], "max");
    for c in 2..5 {
        let values: Vec<f64> = body.iter().map(|r| r[c].parse().unwrap()).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(summary[0][c].parse::<f64>().unwrap(), lo);
        assert_eq!(summary[1][c].parse::<f64>().unwrap(), hi);
    }
    let max_moment: f64 = summary[1][4].parse().unwrap();
    assert!((max_moment - 15968.2).abs() <= 1e-3 * 15968.2);
    let row = body.iter().find(|r| r[0] == "2" && r[1] == "2").unwrap();
    assert_eq!(row[4].parse::<f64>().unwrap(), max_moment);
}

#[test]
fn unloaded_model_table_is_zero() {
    let truth = &case_by_id(1).unwrap().truth_model;
    let unloaded = truth.with_loads(vec![], vec![]).unwrap();
    let rows = rows(&forces_csv_string(&solve(&unloaded).unwrap()));
    for r in &rows {
        for v in &r[2..] {
            assert_eq!(v, "0");
        }
    }
}

#[test]
fn export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let result = solve(&case_by_id(9).unwrap().truth_model).unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    export_forces_csv(&result, &a).unwrap();
    export_forces_csv(&solve(&case_by_id(9).unwrap().truth_model).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(reactions_csv_string(&result).starts_with("node_id,Rx_N,Ry_N,Mz_Nm\n"));
}

fn request(kind: Diagram) -> DiagramRequest {
    DiagramRequest::new(kind, 100.0, DEFAULT_SAMPLES).unwrap()
}

#[test]
fn every_diagram_is_well_formed_xml() {
    for case in load_cases().unwrap() {
        let result = solve(&case.truth_model).unwrap();
        for kind in Diagram::ALL {
            let svg = svg_diagram(&case.truth_model, Some(&result), &request(kind)).unwrap();
            let doc = roxmltree::Document::parse(&svg).unwrap_or_else(|e| panic!("case {} {kind:?}: {e}", case.id));
            assert_eq!(doc.root_element().tag_name().name(), "svg");
        }
    }
}

fn elements_with_class<'a>(doc: &'a roxmltree::Document, tag: &str, class: &str) -> Vec<roxmltree::Node<'a, 'a>> {
    doc.descendants().filter(|n| n.has_tag_name(tag) && n.attribute("class") == Some(class)).collect()
}

#[test]
fn portal_moment_extremum_at_zero_shear() {
    let case = case_by_id(1).unwrap();
    let result = solve(&case.truth_model).unwrap();
    let svg = svg_diagram(&case.truth_model, Some(&result), &request(Diagram::Moment)).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let markers = elements_with_class(&doc, "circle", "extremum");
    assert_eq!(markers.len(), 1);
    let m = markers[0];
    assert_eq!(m.attribute("data-element"), Some("3"));
    // V(x) = V1 + w x with V1 from the pinned girder end forces and w = -10 kN/m
    let v1 = case.truth_solution.end_forces[&3][0][1];
    let x_star = v1 / 10_000.0;
    let x: f64 = m.attribute("data-x").unwrap().parse().unwrap();
    assert!((x - x_star).abs() <= 1e-5);
    assert!((x - 2.93798).abs() <= 1e-5);
    assert_eq!(elements_with_class(&doc, "polygon", "diagram moment").len(), 3);
}

#[test]
fn asymmetric_frame_geometry_strokes() {
    let case = case_by_id(12).unwrap();
    let svg = svg_diagram(&case.truth_model, None, &request(Diagram::Geometry)).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(elements_with_class(&doc, "line", "member column").len(), 5);
    assert_eq!(elements_with_class(&doc, "line", "member girder").len(), 3);
}

#[test]
fn invalid_requests_are_rejected() {
    assert!(matches!(DiagramRequest::new(Diagram::Deformed, 0.0, 21), Err(ReportError::InvalidRequest(_))));
    assert!(matches!(DiagramRequest::new(Diagram::Moment, 1.0, 1), Err(ReportError::InvalidRequest(_))));
    let truth = &case_by_id(1).unwrap().truth_model;
    let bad = DiagramRequest { scale: -1.0, ..request(Diagram::Shear) };
    assert!(matches!(svg_diagram(truth, None, &bad), Err(ReportError::InvalidRequest(_))));
    assert!(matches!(svg_diagram(truth, None, &request(Diagram::Deformed)), Err(ReportError::MissingResult(_))));
}

fn report(model: &FrameModel, description: Option<&str>, graded: bool, dir: &std::path::Path, at: &str) -> String {
    let result = solve(model).unwrap();
    let truth = &case_by_id(1).unwrap().truth_model;
    let grade = graded.then(|| grade_model(model, truth));
    let input = ReportInput { title: "Case 1".into(), description, model, result: &result, grade: grade.as_ref() };
    let bundle = build_report_at(&input, dir, at).unwrap();
    for f in bundle.diagrams.iter().chain(&bundle.csv).chain([&bundle.fmd, &bundle.solution]) {
        assert!(dir.join(f).exists(), "{}", f.display());
    }
    std::fs::read_to_string(dir.join(&bundle.markdown)).unwrap()
}

#[test]
fn portal_report_tables() {
    let case = case_by_id(1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let md = report(&case.truth_model, Some(&case.description), true, dir.path(), "2024-11-01T00:00:00Z");
    assert!(md.contains(&case.description));
    let row = |node: &str| -> Vec<f64> {
        let line = md.lines().find(|l| l.starts_with(&format!("| {node} | "))).unwrap();
        line.split('|').map(str::trim).filter(|s| !s.is_empty()).skip(1).map(|s| s.parse().unwrap()).collect()
    };
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-3 * b.abs();
    let n2 = row("2");
    for (a, b) in n2.iter().zip([0.00203106, -0.000293798, -0.00458888]) {
        assert!(close(*a, b), "{a} vs {b}");
    }
    let n4 = row("4");
    for (a, b) in n4.iter().zip([0.00199962, -0.000306202, 0.0042402]) {
        assert!(close(*a, b), "{a} vs {b}");
    }
    assert!(md.contains("## Grade"));
    assert!(md.contains("| yes | yes | yes | yes | none |"));
    for d in ["geometry.svg", "deformed.svg", "axial.svg", "shear.svg", "moment.svg"] {
        assert!(md.contains(&format!("({d})")), "{d}");
    }
}

#[test]
fn reports_regenerate_identically_apart_from_timestamp() {
    let model = &case_by_id(16).unwrap().truth_model;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = report(model, None, false, a.path(), "2024-11-01T00:00:00Z");
    let second = report(model, None, false, b.path(), "2025-01-02T03:04:05Z");
    assert_ne!(first, second);
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("Generated: ")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&first), strip(&second));
    assert!(!first.contains("## Grade"));
    assert!(!first.contains("## Problem"));
    for f in ["moment.svg", "forces.csv", "model.fmd.json", "solution.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}
