//! On-disk equilibrium format (JSON). Action indices in `strategy_support` are 1-based;
//! numbers carry 12 significant digits.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{EquilibriumCertificate, EquilibriumKind, SearchReport};
use crate::error::{MfgError, Result};
use crate::model::{PopulationDistribution, StationaryStrategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumRecord {
    pub m: Vec<f64>,
    pub pi: Vec<Vec<f64>>,
    pub kind: EquilibriumKind,
    pub stationarity_residual: f64,
    pub optimality_gap: f64,
    pub strategy_support: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumFile {
    pub equilibria: Vec<EquilibriumRecord>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl EquilibriumRecord {
    pub fn from_certificate(c: &EquilibriumCertificate) -> Self {
        EquilibriumRecord {
            m: c.m.as_slice().iter().map(|&v| round12(v)).collect(),
            pi: c.pi.to_rows().into_iter().map(|r| r.into_iter().map(round12).collect()).collect(),
            kind: c.kind,
            stationarity_residual: round12(c.stationarity_residual),
            optimality_gap: round12(c.optimality_gap),
            strategy_support: c.strategy_support.iter().map(|s| s.iter().map(|a| a + 1).collect()).collect(),
        }
    }

    /// The distribution, renormalised after rounding.
    pub fn distribution(&self) -> Result<PopulationDistribution> {
        PopulationDistribution::new_normalized(self.m.clone(), 1e-6)
    }

    /// The strategy, with every row renormalised after rounding.
    pub fn strategy(&self) -> Result<StationaryStrategy> {
        let s = self.pi.len();
        let a = self.pi.first().map_or(0, Vec::len);
        if s == 0 || a == 0 || self.pi.iter().any(|r| r.len() != a) {
            return Err(MfgError::InvalidStrategy("pi must be a non-empty rectangular matrix".into()));
        }
        StationaryStrategy::new_normalized(DMatrix::from_fn(s, a, |i, k| self.pi[i][k]), 1e-6)
    }
}

impl EquilibriumFile {
    pub fn from_report(report: &SearchReport) -> Self {
        EquilibriumFile {
            equilibria: report.equilibria.iter().map(EquilibriumRecord::from_certificate).collect(),
            warnings: report.warnings.clone(),
        }
    }
}

pub fn equilibria_to_string(file: &EquilibriumFile) -> String {
    serde_json::to_string_pretty(file).expect("equilibrium file serialises")
}

pub fn parse_equilibria(text: &str) -> Result<EquilibriumFile> {
    serde_json::from_str(text).map_err(|e| MfgError::Parse(format!("equilibrium file: {e}")))
}

pub fn save_equilibria(path: impl AsRef<Path>, file: &EquilibriumFile) -> Result<()> {
    std::fs::write(path, equilibria_to_string(file) + "\n")?;
    Ok(())
}

pub fn load_equilibria(path: impl AsRef<Path>) -> Result<EquilibriumFile> {
    parse_equilibria(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(0.0), 0.0);
        assert_eq!(round12(123456.7890123456), 123456.789012);
    }

    #[test]
    fn parse_roundtrip_and_renormalise() {
        let text = r#"{"equilibria": [{"m": [0.333333333333, 0.666666666667], "pi": [[0.5, 0.5], [0.0, 1.0]],
            "kind": "mixed", "stationarity_residual": 1e-12, "optimality_gap": 0.0,
            "strategy_support": [[1, 2], [2]]}]}"#;
        let file = parse_equilibria(text).unwrap();
        assert_eq!(file.equilibria[0].kind, EquilibriumKind::Mixed);
        let m = file.equilibria[0].distribution().unwrap();
        assert!((m.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let back = parse_equilibria(&equilibria_to_string(&file)).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn rejects_unknown_kind() {
        let text = r#"{"equilibria": [{"m": [1.0], "pi": [[1.0]], "kind": "weird",
            "stationarity_residual": 0, "optimality_gap": 0, "strategy_support": [[1]]}]}"#;
        assert!(parse_equilibria(text).is_err());
    }
}
