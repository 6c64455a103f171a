//! Numbers as they appear in emitted reports.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Measured,
    BoundUpper,
    BoundLower,
}

/// A reported value with its tolerance and where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
}

impl Quantity {
    pub fn measured(value: f64, tolerance: f64) -> Self {
        Quantity { value, tolerance, provenance: Provenance::Measured }
    }

    /// An exact count or an exactly representable quantity.
    pub fn exact(value: f64) -> Self {
        Self::measured(value, 0.0)
    }

    pub fn upper(value: f64, tolerance: f64) -> Self {
        Quantity { value, tolerance, provenance: Provenance::BoundUpper }
    }

    pub fn lower(value: f64, tolerance: f64) -> Self {
        Quantity { value, tolerance, provenance: Provenance::BoundLower }
    }
}

/// A vector of values sharing one tolerance and provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantities {
    pub values: Vec<f64>,
    pub tolerance: f64,
    pub provenance: Provenance,
}

impl Quantities {
    pub fn measured(values: Vec<f64>, tolerance: f64) -> Self {
        Quantities { values, tolerance, provenance: Provenance::Measured }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provenance_spelling() {
        let q = Quantity::upper(0.5, 1e-9);
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"value":0.5,"tolerance":1e-9,"provenance":"bound-upper"}"#);
    }
}
