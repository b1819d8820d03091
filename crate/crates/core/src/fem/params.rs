use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ElementKind, FrameModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParameterError {
    #[error("malformed parameter set: {0}")]
    Schema(String),
    #[error("parameter {name} must be positive and finite, got {value}")]
    NotPositive { name: String, value: f64 },
}

/// Material, section and load scalars extracted from a problem description.
///
/// Girder properties are optional because some frames have no girders; any
/// further named scalars (e.g. `A_diagonal`, `P`, `w`) land in `other`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A_column")]
    pub a_column: f64,
    #[serde(rename = "A_girder", default, skip_serializing_if = "Option::is_none")]
    pub a_girder: Option<f64>,
    #[serde(rename = "I_column")]
    pub i_column: f64,
    #[serde(rename = "I_girder", default, skip_serializing_if = "Option::is_none")]
    pub i_girder: Option<f64>,
    #[serde(flatten)]
    pub other: BTreeMap<String, f64>,
}

impl ParameterSet {
    pub fn parse(text: &str) -> Result<Self, ParameterError> {
        let set: ParameterSet = serde_json::from_str(text).map_err(|e| ParameterError::Schema(e.to_string()))?;
        set.check()?;
        Ok(set)
    }

    /// Every scalar, by its wire name.
    pub fn entries(&self) -> Vec<(String, f64)> {
        let mut out = vec![("E".to_string(), self.e), ("A_column".to_string(), self.a_column)];
        if let Some(v) = self.a_girder {
            out.push(("A_girder".into(), v));
        }
        out.push(("I_column".into(), self.i_column));
        if let Some(v) = self.i_girder {
            out.push(("I_girder".into(), v));
        }
        out.extend(self.other.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }

    pub fn check(&self) -> Result<(), ParameterError> {
        for (name, value) in self.entries() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ParameterError::NotPositive { name, value });
            }
        }
        Ok(())
    }

    /// Parameters a correct extraction would report for `model`; `None`
    /// when the model has no column to take column properties from.
    pub fn from_model(model: &FrameModel) -> Option<ParameterSet> {
        let first = |kind: ElementKind| model.elements().iter().find(|e| e.kind == kind);
        let column = first(ElementKind::Column)?;
        let mut other = BTreeMap::new();
        for (kind, a_key, i_key) in [
            (ElementKind::Diagonal, "A_diagonal", "I_diagonal"),
            (ElementKind::Cantilever, "A_cantilever", "I_cantilever"),
        ] {
            if let Some(e) = first(kind) {
                other.insert(a_key.to_string(), e.a);
                other.insert(i_key.to_string(), e.i);
            }
        }
        let p = model
            .point_loads()
            .iter()
            .flat_map(|l| l.components())
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        if p > 0.0 {
            other.insert("P".into(), p);
        }
        let w = model.distributed_loads().iter().fold(0.0, |m: f64, d| m.max(d.w.abs()));
        if w > 0.0 {
            other.insert("w".into(), w);
        }
        let girder = first(ElementKind::Girder);
        Some(ParameterSet {
            e: column.e,
            a_column: column.a,
            a_girder: girder.map(|g| g.a),
            i_column: column.i,
            i_girder: girder.map(|g| g.i),
            other,
        })
    }

    /// Compact JSON, keys in wire order.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries().into_iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    /// True when every scalar of `self` matches `other` within `rel`.
    pub fn matches(&self, other: &ParameterSet, rel: f64) -> bool {
        let a = self.entries();
        let b = other.entries();
        a.len() == b.len()
            && a.iter().zip(&b).all(|((ka, va), (kb, vb))| {
                ka == kb && (va - vb).abs() <= rel * vb.abs().max(f64::MIN_POSITIVE)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_portal_parameters() {
        let p = ParameterSet::parse(
            r#"{"E": 2e11, "A_column": 0.002, "A_girder": 0.006, "I_column": 1.6e-5, "I_girder": 5.4e-5, "P": 2000, "w": 10000}"#,
        )
        .unwrap();
        assert_eq!(p.e, 2e11);
        assert_eq!(p.i_girder, Some(5.4e-5));
        assert_eq!(p.get("P"), Some(2000.0));
        assert_eq!(p.entries().len(), 7);
    }

    #[test]
    fn rejects_missing_and_nonpositive() {
        assert!(matches!(ParameterSet::parse(r#"{"E": 2e11}"#), Err(ParameterError::Schema(_))));
        assert!(matches!(
            ParameterSet::parse(r#"{"E": 2e11, "A_column": -1, "I_column": 1}"#),
            Err(ParameterError::NotPositive { .. })
        ));
        assert!(matches!(
            ParameterSet::parse(r#"{"E": 2e11, "A_column": 1, "I_column": 1, "P": 0}"#),
            Err(ParameterError::NotPositive { .. })
        ));
    }

    #[test]
    fn relative_match() {
        let a = ParameterSet::parse(r#"{"E": 2e11, "A_column": 0.002, "I_column": 1.6e-5}"#).unwrap();
        let mut b = a.clone();
        b.e *= 1.0 + 1e-5;
        assert!(a.matches(&b, 1e-3));
        b.a_girder = Some(1.0);
        assert!(!a.matches(&b, 1e-3));
    }
}
