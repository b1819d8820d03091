use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BenchmarkError, SawpCase};
use crate::grader::ErrorType;
use crate::model::{ElementKind, FrameModel, FrameParts, NodeId, PointLoad, COORD_TOL};

/// Deliberate modeling mistakes used to exercise the grader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    DropNode,
    DropElement,
    ReshapeBays,
    MoveLoadsAllFloor,
    WrongSupport,
    FlipDistributedSign,
}

impl Mutation {
    pub const ALL: [Mutation; 6] = [
        Mutation::DropNode,
        Mutation::DropElement,
        Mutation::ReshapeBays,
        Mutation::MoveLoadsAllFloor,
        Mutation::WrongSupport,
        Mutation::FlipDistributedSign,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mutation::DropNode => "drop_node",
            Mutation::DropElement => "drop_element",
            Mutation::ReshapeBays => "reshape_bays",
            Mutation::MoveLoadsAllFloor => "move_loads_all_floor",
            Mutation::WrongSupport => "wrong_support",
            Mutation::FlipDistributedSign => "flip_distributed_sign",
        }
    }

    /// Layout mutations are type 1; support and load mutations are type 2.
    pub fn expected_error(self) -> ErrorType {
        match self {
            Mutation::DropNode | Mutation::DropElement | Mutation::ReshapeBays => ErrorType::Type1Layout,
            Mutation::MoveLoadsAllFloor | Mutation::WrongSupport | Mutation::FlipDistributedSign => {
                ErrorType::Type2Boundary
            }
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MutantSpec {
    pub base: u32,
    pub mutation: Mutation,
    pub expected: ErrorType,
}

impl MutantSpec {
    pub fn new(base: u32, mutation: Mutation) -> Self {
        MutantSpec { base, mutation, expected: mutation.expected_error() }
    }
}

fn cmp_tol(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= COORD_TOL {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Orders points top first, then right first.
fn top_right(a: [f64; 2], b: [f64; 2]) -> Ordering {
    cmp_tol(a[1], b[1]).then(cmp_tol(a[0], b[0]))
}

/// Removes nodes and everything attached to them.
fn remove_nodes(parts: &mut FrameParts, gone: &BTreeSet<NodeId>) {
    parts.nodes.retain(|n| !gone.contains(&n.id));
    let dropped: BTreeSet<u32> = parts
        .elements
        .iter()
        .filter(|e| gone.contains(&e.node_i) || gone.contains(&e.node_j))
        .map(|e| e.id)
        .collect();
    parts.elements.retain(|e| !dropped.contains(&e.id));
    parts.supports.retain(|s| !gone.contains(&s.node));
    parts.point_loads.retain(|l| !gone.contains(&l.node));
    parts.distributed_loads.retain(|d| !dropped.contains(&d.element));
}

pub fn mutate_case(case: &SawpCase, spec: &MutantSpec) -> Result<FrameModel, BenchmarkError> {
    let inapplicable = |reason: &str| BenchmarkError::InapplicableMutation {
        case: case.id,
        mutation: spec.mutation,
        reason: reason.to_string(),
    };
    if spec.base != case.id {
        return Err(inapplicable("mutant targets a different base case"));
    }
    let truth = &case.truth_model;
    let mut parts = truth.parts().clone();
    let supported = truth.support_nodes();

    match spec.mutation {
        Mutation::DropNode => {
            let target = parts
                .nodes
                .iter()
                .filter(|n| !supported.contains(&n.id))
                .max_by(|a, b| top_right(a.position(), b.position()))
                .ok_or_else(|| inapplicable("no unsupported node to drop"))?
                .id;
            remove_nodes(&mut parts, &BTreeSet::from([target]));
        }
        Mutation::DropElement => {
            let mut degree: HashMap<NodeId, usize> = HashMap::new();
            for e in &parts.elements {
                *degree.entry(e.node_i).or_default() += 1;
                *degree.entry(e.node_j).or_default() += 1;
            }
            let k = parts
                .elements
                .iter()
                .enumerate()
                .filter(|(_, e)| e.kind == ElementKind::Girder && degree[&e.node_i] >= 2 && degree[&e.node_j] >= 2)
                .map(|(k, e)| {
                    let (a, b) = truth.endpoints(e);
                    (k, [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])
                })
                .max_by(|(_, a), (_, b)| top_right(*a, *b))
                .ok_or_else(|| inapplicable("no girder whose removal keeps both end nodes connected"))?
                .0;
            let removed = parts.elements.remove(k).id;
            parts.distributed_loads.retain(|d| d.element != removed);
        }
        Mutation::ReshapeBays => {
            let mut lines: Vec<f64> = Vec::new();
            for e in parts.elements.iter().filter(|e| e.kind == ElementKind::Column) {
                let (a, _) = truth.endpoints(e);
                if !lines.iter().any(|x| (x - a[0]).abs() <= COORD_TOL) {
                    lines.push(a[0]);
                }
            }
            if lines.len() < 3 {
                return Err(inapplicable("needs at least three column lines"));
            }
            let last = lines.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let gone = parts
                .nodes
                .iter()
                .filter(|n| (n.x - last).abs() <= COORD_TOL)
                .map(|n| n.id)
                .collect();
            remove_nodes(&mut parts, &gone);
        }
        Mutation::MoveLoadsAllFloor => {
            let first = *parts.point_loads.first().ok_or_else(|| inapplicable("case has no point loads"))?;
            let free: Vec<&crate::model::Node> = parts.nodes.iter().filter(|n| !supported.contains(&n.id)).collect();
            let floor = free.iter().map(|n| n.y).fold(f64::INFINITY, f64::min);
            parts.point_loads = free
                .iter()
                .filter(|n| (n.y - floor).abs() <= COORD_TOL)
                .map(|n| PointLoad { node: n.id, ..first })
                .collect();
        }
        Mutation::WrongSupport => {
            let s = parts.supports.first_mut().ok_or_else(|| inapplicable("case has no supports"))?;
            let pinned = [true, true, false];
            if s.fix == pinned {
                return Err(inapplicable("first support is already pinned"));
            }
            s.fix = pinned;
        }
        Mutation::FlipDistributedSign => {
            if parts.distributed_loads.is_empty() {
                return Err(inapplicable("case has no distributed loads"));
            }
            for d in &mut parts.distributed_loads {
                d.w = -d.w;
            }
        }
    }

    let mutant = FrameModel::from_parts(parts).map_err(|e| inapplicable(&format!("mutant is not a valid model: {e}")))?;
    if crate::model::diff_models(&mutant, truth).is_empty() {
        return Err(inapplicable("mutation leaves the model unchanged"));
    }
    Ok(mutant)
}
