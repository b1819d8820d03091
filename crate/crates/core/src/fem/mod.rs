//! Linear-elastic 2D frame solver (direct stiffness method).

mod dense;
mod element;
mod params;
mod solver;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ElementId, NodeId};

pub use dense::{DenseMatrix, Ldlt, ZeroPivot, PIVOT_RATIO};
pub use element::{
    element_geometry, equivalent_nodal_loads, global_stiffness, local_stiffness, transformation, ElementGeometry,
    Mat6, Vec6,
};
pub use params::{ParameterError, ParameterSet};
pub use solver::{
    assemble, element_load, geometry_of, internal_action_at, recover_end_forces, shear_zero, solve,
    solve_with_diagnostics, Assembly, DofMap, InternalAction,
};

/// 1-norm condition number above which a warning is raised.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Significant digits kept when a result is serialized.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Relative magnitude below which serialized values are round-off.
pub const NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("zero-length element{} at ({}, {})", element.map(|e| format!(" {e}")).unwrap_or_default(), at[0], at[1])]
    ZeroLength { at: [f64; 2], element: Option<ElementId> },
    #[error("singular stiffness matrix: {reason}")]
    Singular { reason: String },
    #[error("station x = {x} lies outside [0, {length}]")]
    Domain { x: f64, length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionWarning {
    pub estimate: f64,
}

impl fmt::Display for ConditionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stiffness matrix is ill-conditioned (estimate {:.3e} exceeds {:.0e})",
            self.estimate, CONDITION_LIMIT
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub condition_estimate: f64,
    pub warnings: Vec<ConditionWarning>,
}

/// (P, V, M) at end i and end j, local axes, forces acting on the element.
pub type EndForces = [[f64; 3]; 2];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveResult {
    /// Node id to (ux, uy, θz).
    pub displacements: BTreeMap<NodeId, [f64; 3]>,
    pub end_forces: BTreeMap<ElementId, EndForces>,
    /// Support node id to (Rx, Ry, Mz); free components are zero.
    pub reactions: BTreeMap<NodeId, [f64; 3]>,
}

impl SolveResult {
    /// Copy with every number rounded to [`SIGNIFICANT_DIGITS`]; values below
    /// [`NOISE_FLOOR`] of the largest magnitude in their family become zero.
    pub fn rounded(&self) -> SolveResult {
        let floor = |values: &mut dyn Iterator<Item = f64>| NOISE_FLOOR * values.fold(0.0, |m: f64, v| m.max(v.abs()));
        let fu = floor(&mut self.displacements.values().flatten().copied());
        let ff = floor(&mut self.end_forces.values().flatten().flatten().copied());
        let fr = floor(&mut self.reactions.values().flatten().copied());
        let r3 = |v: &[f64; 3], floor: f64| v.map(|x| if x.abs() < floor { 0.0 } else { round_significant(x) });
        SolveResult {
            displacements: self.displacements.iter().map(|(k, v)| (*k, r3(v, fu))).collect(),
            end_forces: self
                .end_forces
                .iter()
                .map(|(k, [a, b])| (*k, [r3(a, ff), r3(b, ff)]))
                .collect(),
            reactions: self.reactions.iter().map(|(k, v)| (*k, r3(v, fr))).collect(),
        }
    }

    /// Rounded JSON, one id per line.
    pub fn to_json_string(&self) -> String {
        let r = self.rounded();
        let mut out = String::from("{\n");
        write_map(&mut out, "displacements", &r.displacements);
        out.push_str(",\n");
        write_map(&mut out, "end_forces", &r.end_forces);
        out.push_str(",\n");
        write_map(&mut out, "reactions", &r.reactions);
        out.push_str("\n}\n");
        out
    }

    pub fn from_json_str(text: &str) -> Result<SolveResult, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn write_map<V: Serialize>(out: &mut String, key: &str, map: &BTreeMap<u32, V>) {
    out.push_str(&format!("  \"{key}\": {{"));
    for (k, (id, value)) in map.iter().enumerate() {
        let sep = if k == 0 { "\n" } else { ",\n" };
        let value = serde_json::to_string(value).expect("plain data serializes");
        out.push_str(&format!("{sep}    \"{id}\": {value}"));
    }
    out.push_str(if map.is_empty() { "}" } else { "\n  }" });
}

pub fn round_significant(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { 0.0 } else { v };
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().expect("valid float text");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}
