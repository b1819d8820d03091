//! Frame Model Document (FMD): the declarative description of a 2D frame.
//!
//! A [`FrameModel`] is built once, checked for referential integrity, and
//! never mutated afterwards. Edits go through [`FrameParts`], which is
//! re-validated by [`FrameModel::from_parts`].

mod canonical;
mod diff;
mod document;
mod lint;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::canonicalize;
pub use diff::{diff_models, LOAD_REL_TOL, DistributedLoadMismatch, ModelDiff, PointLoadMismatch, SupportMismatch};
pub use document::{parse_document, to_document_string};
pub use lint::{validate, validate_with, Finding, LintId, Severity, ValidationReport};

/// Absolute tolerance (m) for coordinate comparisons.
pub const COORD_TOL: f64 = 1e-9;

pub type NodeId = u32;
pub type ElementId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{what} {id} references missing {target} {missing}")]
    Reference {
        what: &'static str,
        id: u32,
        target: &'static str,
        missing: u32,
    },
    #[error("duplicate {what} id {id}")]
    DuplicateId { what: &'static str, id: u32 },
    #[error("no non-support node on the {0} side")]
    EmptySelection(Side),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
}

impl Node {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Column,
    Girder,
    Diagonal,
    Cantilever,
}

impl ElementKind {
    pub const ALL: [ElementKind; 4] = [
        ElementKind::Column,
        ElementKind::Girder,
        ElementKind::Diagonal,
        ElementKind::Cantilever,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Column => "column",
            ElementKind::Girder => "girder",
            ElementKind::Diagonal => "diagonal",
            ElementKind::Cantilever => "cantilever",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A two-node Euler-Bernoulli frame member. Local x runs from `node_i` to `node_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub id: ElementId,
    pub node_i: NodeId,
    pub node_j: NodeId,
    pub kind: ElementKind,
    /// Young's modulus, Pa.
    pub e: f64,
    /// Cross-sectional area, m².
    pub a: f64,
    /// Second moment of area, m⁴.
    pub i: f64,
}

/// Constrained degrees of freedom at a node, in (ux, uy, θz) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Support {
    pub node: NodeId,
    pub fix: [bool; 3],
}

impl Support {
    pub fn fixed(node: NodeId) -> Self {
        Self { node, fix: [true; 3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLoad {
    pub node: NodeId,
    pub fx: f64,
    pub fy: f64,
    pub mz: f64,
}

impl PointLoad {
    pub fn components(&self) -> [f64; 3] {
        [self.fx, self.fy, self.mz]
    }
}

/// Uniform load along an element, signed along the element's local +y axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributedLoad {
    pub element: ElementId,
    /// N/m along local +y.
    pub w: f64,
    /// The problem statement describes this load as acting inward.
    pub inward: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatedCounts {
    pub columns: u32,
    pub girders: u32,
    pub diagonals: u32,
    pub cantilevers: u32,
}

impl StatedCounts {
    pub fn get(&self, kind: ElementKind) -> u32 {
        match kind {
            ElementKind::Column => self.columns,
            ElementKind::Girder => self.girders,
            ElementKind::Diagonal => self.diagonals,
            ElementKind::Cantilever => self.cantilevers,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagram {
    Geometry,
    Deformed,
    Axial,
    Shear,
    Moment,
}

impl Diagram {
    pub const ALL: [Diagram; 5] = [
        Diagram::Geometry,
        Diagram::Deformed,
        Diagram::Axial,
        Diagram::Shear,
        Diagram::Moment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Diagram::Geometry => "geometry",
            Diagram::Deformed => "deformed",
            Diagram::Axial => "axial",
            Diagram::Shear => "shear",
            Diagram::Moment => "moment",
        }
    }
}

/// Which result diagrams to draw, and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisualizationSpec {
    pub diagrams: Vec<Diagram>,
    pub scale: f64,
    pub samples: usize,
}

impl Default for VisualizationSpec {
    fn default() -> Self {
        Self {
            diagrams: vec![Diagram::Deformed, Diagram::Axial, Diagram::Shear, Diagram::Moment],
            scale: 100.0,
            samples: 21,
        }
    }
}

impl VisualizationSpec {
    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(ModelError::Schema(format!(
                "visualization.scale must be > 0, got {}",
                self.scale
            )));
        }
        if self.samples < 2 {
            return Err(ModelError::Schema(format!(
                "visualization.samples must be >= 2, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Unchecked building blocks of a [`FrameModel`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameParts {
    pub nodes: Vec<Node>,
    pub elements: Vec<Element>,
    pub supports: Vec<Support>,
    pub point_loads: Vec<PointLoad>,
    pub distributed_loads: Vec<DistributedLoad>,
    pub stated_counts: Option<StatedCounts>,
    pub visualization: Option<VisualizationSpec>,
}

/// A frame model with verified referential integrity.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameModel {
    parts: FrameParts,
    node_index: HashMap<NodeId, usize>,
    element_index: HashMap<ElementId, usize>,
}

impl FrameModel {
    pub fn from_parts(parts: FrameParts) -> Result<Self, ModelError> {
        let mut node_index = HashMap::with_capacity(parts.nodes.len());
        for (k, node) in parts.nodes.iter().enumerate() {
            if node.id == 0 {
                return Err(ModelError::Schema("node ids must be positive".into()));
            }
            if !(node.x.is_finite() && node.y.is_finite()) {
                return Err(ModelError::Schema(format!("node {} has non-finite coordinates", node.id)));
            }
            if node_index.insert(node.id, k).is_some() {
                return Err(ModelError::DuplicateId { what: "node", id: node.id });
            }
        }

        let mut element_index = HashMap::with_capacity(parts.elements.len());
        for (k, el) in parts.elements.iter().enumerate() {
            if el.id == 0 {
                return Err(ModelError::Schema("element ids must be positive".into()));
            }
            if element_index.insert(el.id, k).is_some() {
                return Err(ModelError::DuplicateId { what: "element", id: el.id });
            }
            for end in [el.node_i, el.node_j] {
                if !node_index.contains_key(&end) {
                    return Err(ModelError::Reference {
                        what: "element",
                        id: el.id,
                        target: "node",
                        missing: end,
                    });
                }
            }
            if el.node_i == el.node_j {
                return Err(ModelError::Schema(format!(
                    "element {} connects node {} to itself",
                    el.id, el.node_i
                )));
            }
            for (name, v) in [("E", el.e), ("A", el.a), ("I", el.i)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(ModelError::Schema(format!(
                        "element {} property {name} must be > 0, got {v}",
                        el.id
                    )));
                }
            }
        }

        let mut supported = BTreeSet::new();
        for s in &parts.supports {
            if !node_index.contains_key(&s.node) {
                return Err(ModelError::Reference {
                    what: "support",
                    id: s.node,
                    target: "node",
                    missing: s.node,
                });
            }
            if !supported.insert(s.node) {
                return Err(ModelError::DuplicateId { what: "support", id: s.node });
            }
            if !s.fix.iter().any(|&f| f) {
                return Err(ModelError::Schema(format!(
                    "support at node {} constrains no degree of freedom",
                    s.node
                )));
            }
        }

        for p in &parts.point_loads {
            if !node_index.contains_key(&p.node) {
                return Err(ModelError::Reference {
                    what: "point load",
                    id: p.node,
                    target: "node",
                    missing: p.node,
                });
            }
            let c = p.components();
            if c.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::Schema(format!("point load at node {} is not finite", p.node)));
            }
            if c.iter().all(|&v| v == 0.0) {
                return Err(ModelError::Schema(format!("point load at node {} is all zero", p.node)));
            }
        }

        for d in &parts.distributed_loads {
            if !element_index.contains_key(&d.element) {
                return Err(ModelError::Reference {
                    what: "distributed load",
                    id: d.element,
                    target: "element",
                    missing: d.element,
                });
            }
            if !d.w.is_finite() || d.w == 0.0 {
                return Err(ModelError::Schema(format!(
                    "distributed load on element {} must be finite and nonzero",
                    d.element
                )));
            }
        }

        if let Some(v) = &parts.visualization {
            v.check()?;
        }

        Ok(Self { parts, node_index, element_index })
    }

    pub fn parts(&self) -> &FrameParts {
        &self.parts
    }

    pub fn into_parts(self) -> FrameParts {
        self.parts
    }

    pub fn nodes(&self) -> &[Node] {
        &self.parts.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.parts.elements
    }

    pub fn supports(&self) -> &[Support] {
        &self.parts.supports
    }

    pub fn point_loads(&self) -> &[PointLoad] {
        &self.parts.point_loads
    }

    pub fn distributed_loads(&self) -> &[DistributedLoad] {
        &self.parts.distributed_loads
    }

    pub fn stated_counts(&self) -> Option<&StatedCounts> {
        self.parts.stated_counts.as_ref()
    }

    pub fn visualization(&self) -> Option<&VisualizationSpec> {
        self.parts.visualization.as_ref()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.node_index.get(&id).map(|&k| &self.parts.nodes[k])
    }

    pub fn node_position(&self, id: NodeId) -> Option<usize> {
        self.node_index.get(&id).copied()
    }

    pub fn element(&self, id: ElementId) -> Option<&Element> {
        self.element_index.get(&id).map(|&k| &self.parts.elements[k])
    }

    /// Coordinates of an element's start and end node.
    pub fn endpoints(&self, el: &Element) -> ([f64; 2], [f64; 2]) {
        let a = self.node(el.node_i).expect("integrity checked at construction");
        let b = self.node(el.node_j).expect("integrity checked at construction");
        (a.position(), b.position())
    }

    pub fn support_at(&self, node: NodeId) -> Option<&Support> {
        self.parts.supports.iter().find(|s| s.node == node)
    }

    pub fn support_nodes(&self) -> BTreeSet<NodeId> {
        self.parts.supports.iter().map(|s| s.node).collect()
    }

    pub fn constrained_dof_count(&self) -> usize {
        self.parts
            .supports
            .iter()
            .map(|s| s.fix.iter().filter(|&&f| f).count())
            .sum()
    }

    pub fn count_kind(&self, kind: ElementKind) -> u32 {
        self.parts.elements.iter().filter(|e| e.kind == kind).count() as u32
    }

    /// Same geometry and properties with a different load set.
    pub fn with_loads(&self, point_loads: Vec<PointLoad>, distributed_loads: Vec<DistributedLoad>) -> Result<Self, ModelError> {
        let mut parts = self.parts.clone();
        parts.point_loads = point_loads;
        parts.distributed_loads = distributed_loads;
        Self::from_parts(parts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Top => "top",
            Side::Bottom => "bottom",
        })
    }
}

/// Non-support nodes attaining the extreme coordinate on `side`.
///
/// Ties within [`COORD_TOL`] are all returned, so a left side spanning two
/// stories yields every node on that column line.
pub fn boundary_nodes(model: &FrameModel, side: Side) -> Result<BTreeSet<NodeId>, ModelError> {
    let supports = model.support_nodes();
    let candidates: Vec<&Node> = model
        .nodes()
        .iter()
        .filter(|n| !supports.contains(&n.id))
        .collect();
    if candidates.is_empty() {
        return Err(ModelError::EmptySelection(side));
    }
    let coord = |n: &Node| match side {
        Side::Left | Side::Right => n.x,
        Side::Top | Side::Bottom => n.y,
    };
    let extreme = candidates
        .iter()
        .map(|n| coord(n))
        .fold(None, |acc: Option<f64>, v| {
            Some(match (acc, side) {
                (None, _) => v,
                (Some(a), Side::Left | Side::Bottom) => a.min(v),
                (Some(a), Side::Right | Side::Top) => a.max(v),
            })
        })
        .expect("non-empty");
    Ok(candidates
        .into_iter()
        .filter(|n| (coord(n) - extreme).abs() <= COORD_TOL)
        .map(|n| n.id)
        .collect())
}

/// True when the member runs backwards: start right of end, or for vertical
/// members, start above end.
pub fn runs_reversed(start: [f64; 2], end: [f64; 2]) -> bool {
    let dx = end[0] - start[0];
    if dx.abs() > COORD_TOL {
        dx < 0.0
    } else {
        end[1] < start[1]
    }
}

/// Local-y intensity for a uniform load of `magnitude` acting downward or
/// inward on a member from `start` to `end`.
///
/// Downward and inward loads both point to the member's negative local y side
/// when it is defined start-before-end, so the base value is `-magnitude`;
/// reversed members negate it. `inward` records how the load was described and
/// does not change the sign.
pub fn signed_uniform_load(start: [f64; 2], end: [f64; 2], magnitude: f64, inward: bool) -> f64 {
    let _ = inward;
    let base = -magnitude.abs();
    if runs_reversed(start, end) {
        -base
    } else {
        base
    }
}

pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= COORD_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn portal() -> FrameModel {
        parse_document(include_str!("../../benchmark/case01/truth.fmd.json")).unwrap()
    }

    #[test]
    fn boundary_left_and_top_of_portal() {
        let m = portal();
        assert_eq!(boundary_nodes(&m, Side::Left).unwrap(), BTreeSet::from([2]));
        assert_eq!(boundary_nodes(&m, Side::Top).unwrap(), BTreeSet::from([2, 4]));
        assert_eq!(boundary_nodes(&m, Side::Right).unwrap(), BTreeSet::from([4]));
        // bottom among non-support nodes is the girder level
        assert_eq!(boundary_nodes(&m, Side::Bottom).unwrap(), BTreeSet::from([2, 4]));
    }

    #[test]
    fn boundary_of_supports_only_model_is_empty() {
        let parts = FrameParts {
            nodes: vec![Node { id: 1, x: 0.0, y: 0.0 }, Node { id: 2, x: 6.0, y: 0.0 }],
            elements: vec![Element { id: 1, node_i: 1, node_j: 2, kind: ElementKind::Girder, e: 1.0, a: 1.0, i: 1.0 }],
            supports: vec![Support::fixed(1), Support::fixed(2)],
            ..Default::default()
        };
        let m = FrameModel::from_parts(parts).unwrap();
        assert_eq!(boundary_nodes(&m, Side::Left), Err(ModelError::EmptySelection(Side::Left)));
    }

    #[test]
    fn distributed_sign_follows_member_direction() {
        assert_eq!(signed_uniform_load([0.0, 4.0], [6.0, 4.0], 1e4, false), -1e4);
        assert_eq!(signed_uniform_load([6.0, 4.0], [0.0, 4.0], 1e4, false), 1e4);
        // roof diagonal of the gable frame, inward
        assert!(signed_uniform_load([0.0, 4.0], [4.0, 7.0], 1e4, true) < 0.0);
        assert!(signed_uniform_load([4.0, 7.0], [8.0, 4.0], 1e4, true) < 0.0);
        // vertical members resolve by y order
        assert_eq!(signed_uniform_load([0.0, 0.0], [0.0, 4.0], 5.0, false), -5.0);
        assert_eq!(signed_uniform_load([0.0, 4.0], [0.0, 0.0], 5.0, false), 5.0);
    }

    #[test]
    fn model_rejects_bad_values() {
        let base = portal().into_parts();

        let mut p = base.clone();
        p.elements[0].node_j = p.elements[0].node_i;
        assert!(matches!(FrameModel::from_parts(p), Err(ModelError::Schema(_))));

        let mut p = base.clone();
        p.elements[0].a = 0.0;
        assert!(matches!(FrameModel::from_parts(p), Err(ModelError::Schema(_))));

        let mut p = base.clone();
        p.supports[0].fix = [false; 3];
        assert!(matches!(FrameModel::from_parts(p), Err(ModelError::Schema(_))));

        let mut p = base.clone();
        p.point_loads[0].fx = 0.0;
        assert!(matches!(FrameModel::from_parts(p), Err(ModelError::Schema(_))));

        let mut p = base.clone();
        p.supports.push(p.supports[0]);
        assert!(matches!(FrameModel::from_parts(p), Err(ModelError::DuplicateId { what: "support", .. })));

        let mut p = base;
        p.distributed_loads[0].element = 42;
        assert!(matches!(FrameModel::from_parts(p), Err(ModelError::Reference { missing: 42, .. })));
    }
}
