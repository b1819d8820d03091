use std::collections::BTreeMap;

use crate::model::{Element, FrameModel, NodeId};

use super::dense::{DenseMatrix, Ldlt};
use super::element::{
    element_geometry, equivalent_nodal_loads, global_stiffness, local_stiffness, mat_vec, transformation,
    ElementGeometry, Vec6,
};
use super::{ConditionWarning, Diagnostics, EndForces, FemError, SolveResult, CONDITION_LIMIT};

const COMPONENTS: [&str; 3] = ["ux", "uy", "rz"];

/// Node id to its three global DOF indices, in model node order.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    index: BTreeMap<NodeId, [usize; 3]>,
    order: Vec<NodeId>,
}

impl DofMap {
    fn new(model: &FrameModel) -> Self {
        let order: Vec<NodeId> = model.nodes().iter().map(|n| n.id).collect();
        let index = order
            .iter()
            .enumerate()
            .map(|(k, &id)| (id, [3 * k, 3 * k + 1, 3 * k + 2]))
            .collect();
        DofMap { index, order }
    }

    pub fn dofs(&self, node: NodeId) -> Option<[usize; 3]> {
        self.index.get(&node).copied()
    }

    pub fn len(&self) -> usize {
        3 * self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Node and component name owning a global DOF.
    pub fn owner(&self, dof: usize) -> (NodeId, &'static str) {
        (self.order[dof / 3], COMPONENTS[dof % 3])
    }

    fn element_dofs(&self, el: &Element) -> [usize; 6] {
        let a = self.index[&el.node_i];
        let b = self.index[&el.node_j];
        [a[0], a[1], a[2], b[0], b[1], b[2]]
    }
}

#[derive(Debug, Clone)]
pub struct Assembly {
    pub k: DenseMatrix,
    pub f: Vec<f64>,
    pub dofs: DofMap,
}

pub fn geometry_of(model: &FrameModel, el: &Element) -> Result<ElementGeometry, FemError> {
    let (a, b) = model.endpoints(el);
    element_geometry(a[0], a[1], b[0], b[1]).map_err(|e| match e {
        FemError::ZeroLength { at, .. } => FemError::ZeroLength { at, element: Some(el.id) },
        other => other,
    })
}

/// Total local-y intensity on an element (several loads on one member add up).
pub fn element_load(model: &FrameModel, el: &Element) -> f64 {
    model
        .distributed_loads()
        .iter()
        .filter(|d| d.element == el.id)
        .map(|d| d.w)
        .sum()
}

pub fn assemble(model: &FrameModel) -> Result<Assembly, FemError> {
    let dofs = DofMap::new(model);
    let mut k = DenseMatrix::zeros(dofs.len());
    let mut f = vec![0.0; dofs.len()];

    for el in model.elements() {
        let g = geometry_of(model, el)?;
        let kg = global_stiffness(&local_stiffness(el.e, el.a, el.i, g.length), &g);
        let map = dofs.element_dofs(el);
        for (r, &gr) in map.iter().enumerate() {
            for (c, &gc) in map.iter().enumerate() {
                k.add(gr, gc, kg[r][c]);
            }
        }
        let w = element_load(model, el);
        if w != 0.0 {
            let (equivalent, _) = equivalent_nodal_loads(w, g.length, &g);
            for (r, &gr) in map.iter().enumerate() {
                f[gr] += equivalent[r];
            }
        }
    }

    for load in model.point_loads() {
        let d = dofs.dofs(load.node).expect("integrity");
        for (slot, value) in d.iter().zip(load.components()) {
            f[*slot] += value;
        }
    }

    Ok(Assembly { k, f, dofs })
}

/// Local end forces of one element: k_local·T·u_e plus its fixed-end forces.
pub fn recover_end_forces(model: &FrameModel, el: &Element, u: &[f64]) -> Result<EndForces, FemError> {
    let g = geometry_of(model, el)?;
    let dofs = DofMap::new(model);
    Ok(end_forces_with(el, &g, &dofs, element_load(model, el), u))
}

fn end_forces_with(el: &Element, g: &ElementGeometry, dofs: &DofMap, w: f64, u: &[f64]) -> EndForces {
    let map = dofs.element_dofs(el);
    let ue: Vec6 = map.map(|d| u[d]);
    let local_u = mat_vec(&transformation(g), &ue);
    let mut f = mat_vec(&local_stiffness(el.e, el.a, el.i, g.length), &local_u);
    if w != 0.0 {
        let (_, fixed_end) = equivalent_nodal_loads(w, g.length, g);
        for (fk, fe) in f.iter_mut().zip(fixed_end) {
            *fk += fe;
        }
    }
    [[f[0], f[1], f[2]], [f[3], f[4], f[5]]]
}

pub fn solve(model: &FrameModel) -> Result<SolveResult, FemError> {
    let (result, diagnostics) = solve_with_diagnostics(model)?;
    for w in &diagnostics.warnings {
        tracing::warn!("{w}");
    }
    Ok(result)
}

pub fn solve_with_diagnostics(model: &FrameModel) -> Result<(SolveResult, Diagnostics), FemError> {
    let constrained = model.constrained_dof_count();
    if constrained < 3 {
        return Err(FemError::Singular {
            reason: format!("only {constrained} constrained DOFs; at least 3 are needed to prevent rigid-body motion"),
        });
    }

    let Assembly { k, f, dofs } = assemble(model)?;
    let mut fixed = vec![false; dofs.len()];
    for s in model.supports() {
        let d = dofs.dofs(s.node).expect("integrity");
        for (slot, is_fixed) in d.iter().zip(s.fix) {
            fixed[*slot] |= is_fixed;
        }
    }
    let free: Vec<usize> = (0..dofs.len()).filter(|d| !fixed[*d]).collect();

    let factor = Ldlt::factor(k.submatrix(&free)).map_err(|zp| {
        let (node, component) = dofs.owner(free[zp.index]);
        FemError::Singular {
            reason: format!("zero pivot {:.3e} at node {node} {component} (mechanism)", zp.pivot),
        }
    })?;
    let estimate = factor.condition_number();
    let mut warnings = Vec::new();
    if estimate > CONDITION_LIMIT {
        warnings.push(ConditionWarning { estimate });
    }

    let f_free: Vec<f64> = free.iter().map(|&d| f[d]).collect();
    let u_free = factor.solve(&f_free);
    let mut u = vec![0.0; dofs.len()];
    for (&d, v) in free.iter().zip(u_free) {
        u[d] = v;
    }

    let ku = k.mul_vec(&u);
    let mut reactions = BTreeMap::new();
    for s in model.supports() {
        let d = dofs.dofs(s.node).expect("integrity");
        let mut r = [0.0; 3];
        for c in 0..3 {
            if s.fix[c] {
                r[c] = ku[d[c]] - f[d[c]];
            }
        }
        reactions.insert(s.node, r);
    }

    let displacements = model
        .nodes()
        .iter()
        .map(|n| {
            let d = dofs.dofs(n.id).expect("integrity");
            (n.id, [u[d[0]], u[d[1]], u[d[2]]])
        })
        .collect();

    let mut end_forces = BTreeMap::new();
    for el in model.elements() {
        let g = geometry_of(model, el)?;
        end_forces.insert(el.id, end_forces_with(el, &g, &dofs, element_load(model, el), &u));
    }

    Ok((
        SolveResult { displacements, end_forces, reactions },
        Diagnostics { condition_estimate: estimate, warnings },
    ))
}

/// Axial force, shear and bending moment at a station of an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalAction {
    pub n: f64,
    pub v: f64,
    pub m: f64,
}

/// Internal actions at `x` from end i, given the element's end forces and its
/// local-y load intensity `w`.
///
/// Tension and sagging are positive; V is the slope of M, so
/// N(0) = −P₁, V(0) = V₁, M(0) = −M₁ and N(L) = P₂, V(L) = −V₂, M(L) = M₂.
pub fn internal_action_at(length: f64, end_forces: &EndForces, w: f64, x: f64) -> Result<InternalAction, FemError> {
    let slack = 1e-12 * length;
    if !(x >= -slack && x <= length + slack) {
        return Err(FemError::Domain { x, length });
    }
    let x = x.clamp(0.0, length);
    let [p1, v1, m1] = end_forces[0];
    Ok(InternalAction {
        n: -p1,
        v: v1 + w * x,
        m: -m1 + v1 * x + 0.5 * w * x * x,
    })
}

/// Station where the shear vanishes inside the element, if any.
pub fn shear_zero(length: f64, end_forces: &EndForces, w: f64) -> Option<f64> {
    if w == 0.0 {
        return None;
    }
    let x = -end_forces[0][1] / w;
    (x > 0.0 && x < length).then_some(x)
}
