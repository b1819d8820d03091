use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::fem::{element_load, geometry_of, internal_action_at, shear_zero, ElementGeometry, SolveResult};
use crate::model::{Diagram, Element, FrameModel};

pub const DEFAULT_SAMPLES: usize = 21;
pub const DEFAULT_CANVAS: (u32, u32) = (800, 600);

const MARGIN: f64 = 40.0;
/// Largest force ordinate as a fraction of the frame's larger dimension.
const ORDINATE: f64 = 0.12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramRequest {
    pub kind: Diagram,
    /// Displacement magnification for deformed shapes.
    pub scale: f64,
    pub samples: usize,
    pub canvas: (u32, u32),
}

impl DiagramRequest {
    pub fn new(kind: Diagram, scale: f64, samples: usize) -> Result<Self, ReportError> {
        let r = DiagramRequest { kind, scale, samples, canvas: DEFAULT_CANVAS };
        r.check()?;
        Ok(r)
    }

    pub fn check(&self) -> Result<(), ReportError> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(ReportError::InvalidRequest(format!("scale must be > 0, got {}", self.scale)));
        }
        if self.samples < 2 {
            return Err(ReportError::InvalidRequest(format!("samples must be >= 2, got {}", self.samples)));
        }
        if self.canvas.0 as f64 <= 2.0 * MARGIN || self.canvas.1 as f64 <= 2.0 * MARGIN {
            return Err(ReportError::InvalidRequest(format!("canvas {:?} is too small", self.canvas)));
        }
        Ok(())
    }
}

struct View {
    xmin: f64,
    ymin: f64,
    pad: f64,
    k: f64,
    height: f64,
}

impl View {
    fn new(model: &FrameModel, canvas: (u32, u32)) -> View {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for (k, n) in model.nodes().iter().enumerate() {
            if k == 0 {
                (xmin, xmax, ymin, ymax) = (n.x, n.x, n.y, n.y);
            }
            xmin = xmin.min(n.x);
            xmax = xmax.max(n.x);
            ymin = ymin.min(n.y);
            ymax = ymax.max(n.y);
        }
        let extent = (xmax - xmin).max(ymax - ymin).max(1.0);
        let pad = 0.2 * extent;
        let (w, h) = (canvas.0 as f64 - 2.0 * MARGIN, canvas.1 as f64 - 2.0 * MARGIN);
        let k = (w / (xmax - xmin + 2.0 * pad)).min(h / (ymax - ymin + 2.0 * pad));
        View { xmin, ymin, pad, k, height: canvas.1 as f64 }
    }

    fn extent(&self) -> f64 {
        self.pad / 0.2
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        (
            MARGIN + (p[0] - self.xmin + self.pad) * self.k,
            self.height - MARGIN - (p[1] - self.ymin + self.pad) * self.k,
        )
    }
}

fn point_list(view: &View, points: &[[f64; 2]]) -> String {
    points
        .iter()
        .map(|p| {
            let (x, y) = view.px(*p);
            format!("{x:.2},{y:.2}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn along(origin: [f64; 2], g: &ElementGeometry, x: f64, y: f64) -> [f64; 2] {
    [origin[0] + x * g.c - y * g.s, origin[1] + x * g.s + y * g.c]
}

fn members(out: &mut String, model: &FrameModel, view: &View, extra_class: &str) {
    for el in model.elements() {
        let (a, b) = model.endpoints(el);
        let ((x1, y1), (x2, y2)) = (view.px(a), view.px(b));
        let _ = writeln!(
            out,
            r#"<line class="member {}{extra_class}" data-element="{}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#,
            el.kind, el.id
        );
    }
}

fn supports(out: &mut String, model: &FrameModel, view: &View) {
    for s in model.supports() {
        let Some(n) = model.node(s.node) else { continue };
        let (x, y) = view.px(n.position());
        let kind = match s.fix {
            [true, true, true] => "fixed",
            [true, true, false] => "pinned",
            _ => "roller",
        };
        let _ = writeln!(
            out,
            r#"<polygon class="support {kind}" data-node="{}" points="{x:.2},{y:.2} {:.2},{:.2} {:.2},{:.2}"/>"#,
            n.id,
            x - 8.0,
            y + 12.0,
            x + 8.0,
            y + 12.0
        );
    }
}

fn nodes(out: &mut String, model: &FrameModel, view: &View) {
    for n in model.nodes() {
        let (x, y) = view.px(n.position());
        let _ = writeln!(out, r#"<circle class="node" data-node="{}" cx="{x:.2}" cy="{y:.2}" r="3"/>"#, n.id);
    }
}

fn loads(out: &mut String, model: &FrameModel, view: &View) {
    let arrow = 0.08 * view.extent();
    for l in model.point_loads() {
        let Some(n) = model.node(l.node) else { continue };
        let norm = l.fx.hypot(l.fy);
        if norm == 0.0 {
            continue;
        }
        let tip = n.position();
        let tail = [tip[0] - arrow * l.fx / norm, tip[1] - arrow * l.fy / norm];
        let ((x1, y1), (x2, y2)) = (view.px(tail), view.px(tip));
        let _ = writeln!(
            out,
            r#"<line class="load point" data-node="{}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#,
            n.id
        );
    }
    for d in model.distributed_loads() {
        let Some(el) = model.element(d.element) else { continue };
        let Ok(g) = geometry_of(model, el) else { continue };
        let (a, _) = model.endpoints(el);
        let side = if d.w < 0.0 { 1.0 } else { -1.0 };
        let band: Vec<[f64; 2]> =
            [0.0, g.length].iter().map(|x| along(a, &g, *x, side * 0.5 * arrow)).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="load distributed" data-element="{}" points="{}"/>"#,
            el.id,
            point_list(view, &band)
        );
    }
}

fn element_forces<'a>(result: &'a SolveResult, el: &Element) -> Result<&'a crate::fem::EndForces, ReportError> {
    result.end_forces.get(&el.id).ok_or(ReportError::MissingResult(format!("end forces of element {}", el.id)))
}

fn component(kind: Diagram, a: &crate::fem::InternalAction) -> f64 {
    match kind {
        Diagram::Axial => a.n,
        Diagram::Shear => a.v,
        _ => a.m,
    }
}

fn force_diagram(out: &mut String, model: &FrameModel, result: &SolveResult, req: &DiagramRequest, view: &View) -> Result<(), ReportError> {
    let mut curves = Vec::new();
    let mut peak: f64 = 0.0;
    for el in model.elements() {
        let g = geometry_of(model, el)?;
        let ef = element_forces(result, el)?;
        let w = element_load(model, el);
        let mut values = Vec::with_capacity(req.samples);
        for k in 0..req.samples {
            let x = g.length * k as f64 / (req.samples - 1) as f64;
            let v = component(req.kind, &internal_action_at(g.length, ef, w, x)?);
            peak = peak.max(v.abs());
            values.push((x, v));
        }
        curves.push((el, g, ef, w, values));
    }
    // sagging moments are drawn on the tension side, i.e. toward local -y
    let sign = if req.kind == Diagram::Moment { -1.0 } else { 1.0 };
    let unit = if peak > 0.0 { ORDINATE * view.extent() / peak } else { 0.0 };
    let kind = req.kind.as_str();
    for (el, g, ef, w, values) in curves {
        let (a, _) = model.endpoints(el);
        let mut outline = vec![a];
        outline.extend(values.iter().map(|(x, v)| along(a, &g, *x, sign * unit * v)));
        outline.push(along(a, &g, g.length, 0.0));
        let _ = writeln!(
            out,
            r#"<polygon class="diagram {kind}" data-element="{}" points="{}"/>"#,
            el.id,
            point_list(view, &outline)
        );
        for (x, v) in [values[0], values[values.len() - 1]] {
            let (px, py) = view.px(along(a, &g, x, sign * unit * v));
            let _ = writeln!(out, r#"<text class="value" x="{px:.2}" y="{py:.2}">{}</text>"#, label(v));
        }
        if req.kind == Diagram::Moment {
            if let Some(xs) = shear_zero(g.length, ef, w) {
                let m = internal_action_at(g.length, ef, w, xs)?.m;
                let (px, py) = view.px(along(a, &g, xs, sign * unit * m));
                let _ = writeln!(
                    out,
                    r#"<circle class="extremum" data-element="{}" data-x="{xs:.5}" data-value="{}" cx="{px:.2}" cy="{py:.2}" r="4"/>"#,
                    el.id,
                    label(m)
                );
                let _ = writeln!(
                    out,
                    r#"<text class="extremum-label" x="{:.2}" y="{:.2}">{} at x = {xs:.3} m</text>"#,
                    px + 6.0,
                    py - 6.0,
                    label(m)
                );
            }
        }
    }
    Ok(())
}

/// Deflected centreline of `el` in model coordinates: linear axial and
/// cubic Hermite transverse interpolation of the end displacements.
fn deformed_shape(model: &FrameModel, result: &SolveResult, el: &Element, samples: usize, scale: f64) -> Result<Vec<[f64; 2]>, ReportError> {
    let g = geometry_of(model, el)?;
    let disp = |id| {
        result
            .displacements
            .get(&id)
            .ok_or(ReportError::MissingResult(format!("displacement of node {id}")))
    };
    let (ui, uj) = (disp(el.node_i)?, disp(el.node_j)?);
    let local = |u: &[f64; 3]| (g.c * u[0] + g.s * u[1], -g.s * u[0] + g.c * u[1], u[2]);
    let ((a1, v1, t1), (a2, v2, t2)) = (local(ui), local(uj));
    let (a, _) = model.endpoints(el);
    let l = g.length;
    Ok((0..samples)
        .map(|k| {
            let xi = k as f64 / (samples - 1) as f64;
            let axial = (1.0 - xi) * a1 + xi * a2;
            let v = (1.0 - 3.0 * xi * xi + 2.0 * xi.powi(3)) * v1
                + l * (xi - 2.0 * xi * xi + xi.powi(3)) * t1
                + (3.0 * xi * xi - 2.0 * xi.powi(3)) * v2
                + l * (xi.powi(3) - xi * xi) * t2;
            along(a, &g, xi * l + scale * axial, scale * v)
        })
        .collect())
}

fn deformed(out: &mut String, model: &FrameModel, result: &SolveResult, req: &DiagramRequest, view: &View) -> Result<(), ReportError> {
    for el in model.elements() {
        let points = deformed_shape(model, result, el, req.samples, req.scale)?;
        let _ = writeln!(
            out,
            r#"<polyline class="deformed" data-element="{}" points="{}"/>"#,
            el.id,
            point_list(view, &points)
        );
    }
    Ok(())
}

fn label(v: f64) -> String {
    let v = crate::fem::round_significant(v);
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-2 && v.abs() < 1e6 {
        format!("{:.1}", v)
    } else {
        format!("{v:.3e}")
    }
}

const STYLE: &str = "line.member{stroke:#333;stroke-width:2}line.undeformed{stroke:#bbb;stroke-dasharray:4 3}\
polygon.support{fill:#666}circle.node{fill:#000}line.load{stroke:#c00;stroke-width:2}\
polyline.load{stroke:#c00;fill:none}polyline.deformed{stroke:#06c;fill:none;stroke-width:2}\
polygon.diagram{fill:#6af;fill-opacity:0.35;stroke:#06c}circle.extremum{fill:#c00}\
text{font-family:sans-serif;font-size:11px}";

/// Full SVG document for one diagram.
pub fn svg_diagram(model: &FrameModel, result: Option<&SolveResult>, req: &DiagramRequest) -> Result<String, ReportError> {
    req.check()?;
    let view = View::new(model, req.canvas);
    let (w, h) = req.canvas;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, "<style>{STYLE}</style>");
    let title = match req.kind {
        Diagram::Geometry => "Geometry and loads".to_string(),
        Diagram::Deformed => format!("Deformed shape (displacements x{})", req.scale),
        Diagram::Axial => "Axial force N (N), tension positive".to_string(),
        Diagram::Shear => "Shear force V (N)".to_string(),
        Diagram::Moment => "Bending moment M (N·m), drawn on the tension side".to_string(),
    };
    let _ = writeln!(out, r#"<text class="title" x="{MARGIN}" y="24">{title}</text>"#);

    let needs_result = req.kind != Diagram::Geometry;
    let result = match (needs_result, result) {
        (true, None) => return Err(ReportError::MissingResult(format!("{} diagram needs a solution", req.kind.as_str()))),
        (_, r) => r,
    };
    let undeformed = if req.kind == Diagram::Deformed { " undeformed" } else { "" };
    members(&mut out, model, &view, undeformed);
    supports(&mut out, model, &view);
    match (req.kind, result) {
        (Diagram::Geometry, _) => {
            loads(&mut out, model, &view);
            nodes(&mut out, model, &view);
        }
        (Diagram::Deformed, Some(r)) => deformed(&mut out, model, r, req, &view)?,
        (_, Some(r)) => force_diagram(&mut out, model, r, req, &view)?,
        _ => unreachable!(),
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_svg_diagram(
    model: &FrameModel,
    result: Option<&SolveResult>,
    req: &DiagramRequest,
    path: &Path,
) -> Result<(), ReportError> {
    super::write_file(path, &svg_diagram(model, result, req)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::solve;
    use crate::model::parse_document;

    fn cantilever() -> FrameModel {
        parse_document(
            r#"{"nodes": [{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 0, "y": 2}],
                "elements": [{"id": 1, "i": 1, "j": 2, "kind": "column", "E": 2e11, "A": 0.01, "I": 1e-4}],
                "supports": [{"node": 1, "fix": [true, true, true]}],
                "point_loads": [{"node": 2, "fx": 1000, "fy": 0, "mz": 0}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn hermite_shape_is_exact_for_tip_load() {
        let m = cantilever();
        let r = solve(&m).unwrap();
        let pts = deformed_shape(&m, &r, &m.elements()[0], 5, 1.0).unwrap();
        let (p, l, ei) = (1000.0, 2.0, 2e11 * 1e-4);
        for (k, pt) in pts.iter().enumerate() {
            let x = l * k as f64 / 4.0;
            let sway = p * x * x * (3.0 * l - x) / (6.0 * ei);
            assert!((pt[0] - sway).abs() <= 1e-12, "{k}: {} vs {sway}", pt[0]);
        }
        let tip = pts[4];
        assert!((tip[1] - (2.0 + r.displacements[&2][1])).abs() <= 1e-15);
    }

    #[test]
    fn scale_magnifies_displacements() {
        let m = cantilever();
        let r = solve(&m).unwrap();
        let a = deformed_shape(&m, &r, &m.elements()[0], 3, 1.0).unwrap();
        let b = deformed_shape(&m, &r, &m.elements()[0], 3, 100.0).unwrap();
        assert!((b[1][0] - 100.0 * a[1][0]).abs() <= 1e-12);
    }
}
