//! JSON wire format of the frame model document.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    DistributedLoad, Element, ElementKind, FrameModel, FrameParts, ModelError, Node, PointLoad, StatedCounts,
    Support, VisualizationSpec,
};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDocument {
    nodes: Vec<WireNode>,
    elements: Vec<WireElement>,
    supports: Vec<WireSupport>,
    #[serde(default)]
    point_loads: Vec<WirePointLoad>,
    #[serde(default)]
    distributed_loads: Vec<WireDistributedLoad>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stated_counts: Option<StatedCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    visualization: Option<VisualizationSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireNode {
    id: u32,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireElement {
    id: u32,
    i: u32,
    j: u32,
    kind: ElementKind,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "I")]
    inertia: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireSupport {
    node: u32,
    fix: [bool; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WirePointLoad {
    node: u32,
    #[serde(default)]
    fx: f64,
    #[serde(default)]
    fy: f64,
    #[serde(default)]
    mz: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDistributedLoad {
    element: u32,
    w: f64,
    #[serde(default)]
    inward: bool,
}

/// Parses an FMD document and checks referential integrity.
pub fn parse_document(text: &str) -> Result<FrameModel, ModelError> {
    let wire: WireDocument = serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
    FrameModel::from_parts(FrameParts {
        nodes: wire.nodes.into_iter().map(|n| Node { id: n.id, x: n.x, y: n.y }).collect(),
        elements: wire
            .elements
            .into_iter()
            .map(|e| Element {
                id: e.id,
                node_i: e.i,
                node_j: e.j,
                kind: e.kind,
                e: e.e,
                a: e.a,
                i: e.inertia,
            })
            .collect(),
        supports: wire
            .supports
            .into_iter()
            .map(|s| Support { node: s.node, fix: s.fix })
            .collect(),
        point_loads: wire
            .point_loads
            .into_iter()
            .map(|p| PointLoad { node: p.node, fx: p.fx, fy: p.fy, mz: p.mz })
            .collect(),
        distributed_loads: wire
            .distributed_loads
            .into_iter()
            .map(|d| DistributedLoad { element: d.element, w: d.w, inward: d.inward })
            .collect(),
        stated_counts: wire.stated_counts,
        visualization: wire.visualization,
    })
}

/// Serializes a model as an FMD document, one record per line.
pub fn to_document_string(model: &FrameModel) -> String {
    let p = model.parts();
    let mut out = String::from("{\n");

    let nodes: Vec<String> = p
        .nodes
        .iter()
        .map(|n| json(&WireNode { id: n.id, x: n.x, y: n.y }))
        .collect();
    write_array(&mut out, "nodes", &nodes);

    let elements: Vec<String> = p
        .elements
        .iter()
        .map(|e| {
            json(&WireElement {
                id: e.id,
                i: e.node_i,
                j: e.node_j,
                kind: e.kind,
                e: e.e,
                a: e.a,
                inertia: e.i,
            })
        })
        .collect();
    out.push_str(",\n");
    write_array(&mut out, "elements", &elements);

    let supports: Vec<String> = p
        .supports
        .iter()
        .map(|s| json(&WireSupport { node: s.node, fix: s.fix }))
        .collect();
    out.push_str(",\n");
    write_array(&mut out, "supports", &supports);

    let point_loads: Vec<String> = p
        .point_loads
        .iter()
        .map(|l| json(&WirePointLoad { node: l.node, fx: l.fx, fy: l.fy, mz: l.mz }))
        .collect();
    out.push_str(",\n");
    write_array(&mut out, "point_loads", &point_loads);

    let distributed: Vec<String> = p
        .distributed_loads
        .iter()
        .map(|d| json(&WireDistributedLoad { element: d.element, w: d.w, inward: d.inward }))
        .collect();
    out.push_str(",\n");
    write_array(&mut out, "distributed_loads", &distributed);

    if let Some(c) = &p.stated_counts {
        let _ = write!(out, ",\n  \"stated_counts\": {}", json(c));
    }
    if let Some(v) = &p.visualization {
        let _ = write!(out, ",\n  \"visualization\": {}", json(v));
    }
    out.push_str("\n}\n");
    out
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

fn write_array(out: &mut String, key: &str, items: &[String]) {
    if items.is_empty() {
        let _ = write!(out, "  \"{key}\": []");
        return;
    }
    let _ = writeln!(out, "  \"{key}\": [");
    for (k, item) in items.iter().enumerate() {
        let sep = if k + 1 == items.len() { "" } else { "," };
        let _ = writeln!(out, "    {item}{sep}");
    }
    out.push_str("  ]");
}

#[cfg(test)]
mod tests {
    use super::*;

    const PORTAL: &str = include_str!("../../benchmark/case01/truth.fmd.json");

    #[test]
    fn parses_portal_frame() {
        let m = parse_document(PORTAL).unwrap();
        assert_eq!(m.nodes().len(), 4);
        assert_eq!(m.elements().len(), 3);
        assert_eq!(m.supports().len(), 2);
        assert!(m.supports().iter().all(|s| s.fix == [true; 3]));
        assert_eq!(m.point_loads().len(), 1);
        assert_eq!(m.distributed_loads().len(), 1);
    }

    #[test]
    fn dangling_node_reference() {
        let text = PORTAL.replacen("\"i\":1,", "\"i\":99,", 1);
        assert_ne!(text, PORTAL);
        assert!(matches!(
            parse_document(&text),
            Err(ModelError::Reference { what: "element", missing: 99, .. })
        ));
    }

    #[test]
    fn duplicate_node_id() {
        let text = PORTAL.replacen("{\"id\":2,\"x\"", "{\"id\":1,\"x\"", 1);
        assert_ne!(text, PORTAL);
        assert_eq!(
            parse_document(&text),
            Err(ModelError::DuplicateId { what: "node", id: 1 })
        );
    }

    #[test]
    fn unknown_and_missing_keys_are_schema_errors() {
        let unknown = PORTAL.replacen("\"nodes\"", "\"extra\": 1,\n  \"nodes\"", 1);
        assert!(matches!(parse_document(&unknown), Err(ModelError::Schema(_))));
        let missing = r#"{"nodes": [], "elements": []}"#;
        assert!(matches!(parse_document(missing), Err(ModelError::Schema(_))));
        let mistyped = PORTAL.replacen("\"x\":0.0", "\"x\":\"zero\"", 1);
        assert!(matches!(parse_document(&mistyped), Err(ModelError::Schema(_))));
    }

    #[test]
    fn serializer_reproduces_bundled_document() {
        let m = parse_document(PORTAL).unwrap();
        assert_eq!(to_document_string(&m), PORTAL);
    }
}
