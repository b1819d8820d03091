use std::fmt;

use serde::{Deserialize, Serialize};

use super::{canonicalize, FrameModel, COORD_TOL};

/// Relative tolerance for load magnitudes.
pub const LOAD_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportMismatch {
    pub at: [f64; 2],
    pub expected: Option<[bool; 3]>,
    pub found: Option<[bool; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLoadMismatch {
    pub at: [f64; 2],
    pub expected: [f64; 3],
    pub found: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedLoadMismatch {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub expected: f64,
    pub found: f64,
}

/// Structural differences between a generated model and the truth.
///
/// Coordinates are reported relative to each model's lower-left corner
/// (minimum x and minimum y over all nodes), so a frame drawn at a different
/// origin compares equal.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelDiff {
    pub missing_nodes: Vec<[f64; 2]>,
    pub extra_nodes: Vec<[f64; 2]>,
    pub missing_elements: Vec<[[f64; 2]; 2]>,
    pub extra_elements: Vec<[[f64; 2]; 2]>,
    pub support_mismatches: Vec<SupportMismatch>,
    pub point_load_mismatches: Vec<PointLoadMismatch>,
    pub distributed_load_mismatches: Vec<DistributedLoadMismatch>,
}

impl ModelDiff {
    pub fn is_empty(&self) -> bool {
        self.layout_matches() && self.supports_match() && self.loads_match()
    }

    pub fn layout_matches(&self) -> bool {
        self.missing_nodes.is_empty()
            && self.extra_nodes.is_empty()
            && self.missing_elements.is_empty()
            && self.extra_elements.is_empty()
    }

    pub fn supports_match(&self) -> bool {
        self.support_mismatches.is_empty()
    }

    pub fn loads_match(&self) -> bool {
        self.point_load_mismatches.is_empty() && self.distributed_load_mismatches.is_empty()
    }
}

impl fmt::Display for ModelDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("models match");
        }
        let mut parts = Vec::new();
        for n in &self.missing_nodes {
            parts.push(format!("missing node ({}, {})", n[0], n[1]));
        }
        for n in &self.extra_nodes {
            parts.push(format!("extra node ({}, {})", n[0], n[1]));
        }
        for [a, b] in &self.missing_elements {
            parts.push(format!("missing element ({}, {})-({}, {})", a[0], a[1], b[0], b[1]));
        }
        for [a, b] in &self.extra_elements {
            parts.push(format!("extra element ({}, {})-({}, {})", a[0], a[1], b[0], b[1]));
        }
        for s in &self.support_mismatches {
            parts.push(format!(
                "support at ({}, {}): expected {:?}, found {:?}",
                s.at[0], s.at[1], s.expected, s.found
            ));
        }
        for l in &self.point_load_mismatches {
            parts.push(format!(
                "point load at ({}, {}): expected {:?}, found {:?}",
                l.at[0], l.at[1], l.expected, l.found
            ));
        }
        for d in &self.distributed_load_mismatches {
            parts.push(format!(
                "distributed load on ({}, {})-({}, {}): expected {}, found {}",
                d.start[0], d.start[1], d.end[0], d.end[1], d.expected, d.found
            ));
        }
        f.write_str(&parts.join("; "))
    }
}

fn same_point(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] - b[0]).abs() <= COORD_TOL && (a[1] - b[1]).abs() <= COORD_TOL
}

fn same_segment(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> bool {
    (same_point(a[0], b[0]) && same_point(a[1], b[1])) || (same_point(a[0], b[1]) && same_point(a[1], b[0]))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= LOAD_REL_TOL * a.abs().max(b.abs()) + f64::MIN_POSITIVE
}

struct Flat {
    nodes: Vec<[f64; 2]>,
    segments: Vec<[[f64; 2]; 2]>,
    supports: Vec<([f64; 2], [bool; 3])>,
    point_loads: Vec<([f64; 2], [f64; 3])>,
    distributed: Vec<([[f64; 2]; 2], f64)>,
}

fn flatten(model: &FrameModel) -> Flat {
    let c = canonicalize(model);
    let min_x = c.nodes().iter().map(|n| n.x).fold(f64::INFINITY, f64::min);
    let min_y = c.nodes().iter().map(|n| n.y).fold(f64::INFINITY, f64::min);
    let (ox, oy) = if min_x.is_finite() { (min_x, min_y) } else { (0.0, 0.0) };
    let pos = |id| {
        let n = c.node(id).expect("integrity");
        [n.x - ox, n.y - oy]
    };

    let mut point_loads: Vec<([f64; 2], [f64; 3])> = Vec::new();
    for l in c.point_loads() {
        let at = pos(l.node);
        match point_loads.iter_mut().find(|(p, _)| same_point(*p, at)) {
            Some((_, sum)) => {
                sum[0] += l.fx;
                sum[1] += l.fy;
                sum[2] += l.mz;
            }
            None => point_loads.push((at, l.components())),
        }
    }

    let mut distributed: Vec<([[f64; 2]; 2], f64)> = Vec::new();
    for d in c.distributed_loads() {
        let el = c.element(d.element).expect("integrity");
        let seg = [pos(el.node_i), pos(el.node_j)];
        match distributed.iter_mut().find(|(s, _)| same_segment(*s, seg)) {
            Some((_, w)) => *w += d.w,
            None => distributed.push((seg, d.w)),
        }
    }

    Flat {
        nodes: c.nodes().iter().map(|n| pos(n.id)).collect(),
        segments: c.elements().iter().map(|e| [pos(e.node_i), pos(e.node_j)]).collect(),
        supports: c.supports().iter().map(|s| (pos(s.node), s.fix)).collect(),
        point_loads,
        distributed,
    }
}

/// Compares two models by geometry, ignoring ids and listing order.
pub fn diff_models(generated: &FrameModel, truth: &FrameModel) -> ModelDiff {
    let g = flatten(generated);
    let t = flatten(truth);
    let mut diff = ModelDiff::default();

    diff.missing_nodes = t
        .nodes
        .iter()
        .filter(|p| !g.nodes.iter().any(|q| same_point(**p, *q)))
        .copied()
        .collect();
    diff.extra_nodes = g
        .nodes
        .iter()
        .filter(|p| !t.nodes.iter().any(|q| same_point(**p, *q)))
        .copied()
        .collect();
    diff.missing_elements = t
        .segments
        .iter()
        .filter(|s| !g.segments.iter().any(|q| same_segment(**s, *q)))
        .copied()
        .collect();
    diff.extra_elements = g
        .segments
        .iter()
        .filter(|s| !t.segments.iter().any(|q| same_segment(**s, *q)))
        .copied()
        .collect();

    let find_support = |list: &[([f64; 2], [bool; 3])], at: [f64; 2]| {
        list.iter().find(|(p, _)| same_point(*p, at)).map(|(_, f)| *f)
    };
    for (at, fix) in &t.supports {
        let found = find_support(&g.supports, *at);
        if found != Some(*fix) {
            diff.support_mismatches.push(SupportMismatch { at: *at, expected: Some(*fix), found });
        }
    }
    for (at, fix) in &g.supports {
        if find_support(&t.supports, *at).is_none() {
            diff.support_mismatches.push(SupportMismatch { at: *at, expected: None, found: Some(*fix) });
        }
    }

    let find_point = |list: &[([f64; 2], [f64; 3])], at: [f64; 2]| {
        list.iter()
            .find(|(p, _)| same_point(*p, at))
            .map(|(_, c)| *c)
            .unwrap_or([0.0; 3])
    };
    for (at, expected) in &t.point_loads {
        let found = find_point(&g.point_loads, *at);
        if !(0..3).all(|k| close(expected[k], found[k])) {
            diff.point_load_mismatches.push(PointLoadMismatch { at: *at, expected: *expected, found });
        }
    }
    for (at, found) in &g.point_loads {
        if !t.point_loads.iter().any(|(p, _)| same_point(*p, *at)) {
            diff.point_load_mismatches.push(PointLoadMismatch { at: *at, expected: [0.0; 3], found: *found });
        }
    }

    // both sides are canonical, so segments share orientation and signs compare directly
    let find_w = |list: &[([[f64; 2]; 2], f64)], seg: [[f64; 2]; 2]| {
        list.iter().find(|(s, _)| same_segment(*s, seg)).map(|(_, w)| *w).unwrap_or(0.0)
    };
    for (seg, expected) in &t.distributed {
        let found = find_w(&g.distributed, *seg);
        if !close(*expected, found) {
            diff.distributed_load_mismatches.push(DistributedLoadMismatch {
                start: seg[0],
                end: seg[1],
                expected: *expected,
                found,
            });
        }
    }
    for (seg, found) in &g.distributed {
        if !t.distributed.iter().any(|(s, _)| same_segment(*s, *seg)) {
            diff.distributed_load_mismatches.push(DistributedLoadMismatch {
                start: seg[0],
                end: seg[1],
                expected: 0.0,
                found: *found,
            });
        }
    }

    diff
}
