use std::cmp::Ordering;
use std::collections::HashMap;

use super::{
    DistributedLoad, Element, FrameModel, FrameParts, Node, NodeId, PointLoad, Support, COORD_TOL,
};

fn cmp_coord(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= COORD_TOL {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

fn cmp_position(a: [f64; 2], b: [f64; 2]) -> Ordering {
    cmp_coord(a[0], b[0]).then_with(|| cmp_coord(a[1], b[1]))
}

/// Id-independent normal form of a model.
///
/// Nodes are ordered by (x, y) and renumbered from 1, every element runs from
/// its lower to its higher canonical node, and elements, supports and loads
/// are sorted. A distributed load on an element whose direction flipped is
/// negated, so the physical load is unchanged.
pub fn canonicalize(model: &FrameModel) -> FrameModel {
    let p = model.parts();

    let mut nodes: Vec<Node> = p.nodes.clone();
    nodes.sort_by(|a, b| cmp_position(a.position(), b.position()).then(a.id.cmp(&b.id)));
    let node_map: HashMap<NodeId, NodeId> = nodes
        .iter()
        .enumerate()
        .map(|(k, n)| (n.id, k as NodeId + 1))
        .collect();
    for (k, n) in nodes.iter_mut().enumerate() {
        n.id = k as NodeId + 1;
    }

    let mut elements: Vec<(Element, u32, bool)> = p
        .elements
        .iter()
        .map(|e| {
            let (i, j) = (node_map[&e.node_i], node_map[&e.node_j]);
            let flipped = i > j;
            let (node_i, node_j) = if flipped { (j, i) } else { (i, j) };
            (Element { node_i, node_j, ..*e }, e.id, flipped)
        })
        .collect();
    elements.sort_by(|(a, ida, _), (b, idb, _)| {
        (a.node_i, a.node_j, a.kind)
            .cmp(&(b.node_i, b.node_j, b.kind))
            .then(a.e.total_cmp(&b.e))
            .then(a.a.total_cmp(&b.a))
            .then(a.i.total_cmp(&b.i))
            .then(ida.cmp(idb))
    });
    let mut element_map = HashMap::new();
    let elements: Vec<Element> = elements
        .into_iter()
        .enumerate()
        .map(|(k, (mut e, old, flipped))| {
            e.id = k as u32 + 1;
            element_map.insert(old, (e.id, flipped));
            e
        })
        .collect();

    let mut supports: Vec<Support> = p
        .supports
        .iter()
        .map(|s| Support { node: node_map[&s.node], fix: s.fix })
        .collect();
    supports.sort_by_key(|s| s.node);

    let mut point_loads: Vec<PointLoad> = p
        .point_loads
        .iter()
        .map(|l| PointLoad { node: node_map[&l.node], ..*l })
        .collect();
    point_loads.sort_by(|a, b| {
        a.node
            .cmp(&b.node)
            .then(a.fx.total_cmp(&b.fx))
            .then(a.fy.total_cmp(&b.fy))
            .then(a.mz.total_cmp(&b.mz))
    });

    let mut distributed_loads: Vec<DistributedLoad> = p
        .distributed_loads
        .iter()
        .map(|d| {
            let (element, flipped) = element_map[&d.element];
            DistributedLoad {
                element,
                w: if flipped { -d.w } else { d.w },
                inward: d.inward,
            }
        })
        .collect();
    distributed_loads.sort_by(|a, b| {
        a.element
            .cmp(&b.element)
            .then(a.w.total_cmp(&b.w))
            .then(a.inward.cmp(&b.inward))
    });

    FrameModel::from_parts(FrameParts {
        nodes,
        elements,
        supports,
        point_loads,
        distributed_loads,
        stated_counts: p.stated_counts,
        visualization: p.visualization.clone(),
    })
    .expect("relabeling preserves integrity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_document, to_document_string, validate};
    use proptest::prelude::*;

    const PORTAL: &str = include_str!("../../benchmark/case01/truth.fmd.json");
    const THREE_BAY: &str = include_str!("../../benchmark/case09/truth.fmd.json");

    /// Reverses list order, relabels ids through `perm` and optionally flips
    /// element directions (negating their distributed loads).
    fn relabel(model: &FrameModel, node_offset: u32, flip_mask: u64, reverse: bool) -> FrameModel {
        let mut p = model.parts().clone();
        let n = p.nodes.len() as u32;
        let remap = |id: u32| ((id - 1 + node_offset) % n) + 1 + 100;
        for node in &mut p.nodes {
            node.id = remap(node.id);
        }
        let mut flipped = HashMap::new();
        for (k, e) in p.elements.iter_mut().enumerate() {
            e.node_i = remap(e.node_i);
            e.node_j = remap(e.node_j);
            let f = flip_mask >> (k % 64) & 1 == 1;
            if f {
                std::mem::swap(&mut e.node_i, &mut e.node_j);
            }
            flipped.insert(e.id, f);
            e.id += 500;
        }
        for s in &mut p.supports {
            s.node = remap(s.node);
        }
        for l in &mut p.point_loads {
            l.node = remap(l.node);
        }
        for d in &mut p.distributed_loads {
            if flipped[&d.element] {
                d.w = -d.w;
            }
            d.element += 500;
        }
        if reverse {
            p.nodes.reverse();
            p.elements.reverse();
            p.supports.reverse();
            p.point_loads.reverse();
            p.distributed_loads.reverse();
        }
        FrameModel::from_parts(p).unwrap()
    }

    #[test]
    fn idempotent() {
        let m = parse_document(THREE_BAY).unwrap();
        let once = canonicalize(&m);
        assert_eq!(canonicalize(&once), once);
    }

    #[test]
    fn reversed_listing_has_same_form() {
        let m = parse_document(PORTAL).unwrap();
        let reversed = relabel(&m, 0, 0, true);
        assert_eq!(canonicalize(&reversed), canonicalize(&m));
    }

    #[test]
    fn independent_id_schemes_give_identical_documents() {
        let m = parse_document(THREE_BAY).unwrap();
        let other = relabel(&m, 5, 0b1010_0110_1101, true);
        assert_eq!(
            to_document_string(&canonicalize(&other)),
            to_document_string(&canonicalize(&m))
        );
    }

    #[test]
    fn flipped_element_keeps_physical_load() {
        let m = parse_document(PORTAL).unwrap();
        let c = canonicalize(&m);
        let girder = c.elements().iter().find(|e| e.kind == crate::model::ElementKind::Girder).unwrap();
        let load = c.distributed_loads().iter().find(|d| d.element == girder.id).unwrap();
        assert_eq!(load.w, -1e4);
        assert!(validate(&c).is_clean());
    }

    proptest! {
        #[test]
        fn permutation_invariant(offset in 0u32..16, mask in any::<u64>(), reverse in any::<bool>()) {
            let m = parse_document(THREE_BAY).unwrap();
            let other = relabel(&m, offset, mask, reverse);
            prop_assert_eq!(canonicalize(&other), canonicalize(&m));
        }
    }
}
