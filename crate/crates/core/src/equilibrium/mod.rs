//! Best-response map, equilibrium search and verification.

mod hull;
mod mixed;
mod newton;
pub mod output;
mod pure;
mod verify;

use std::fmt;

use crate::error::{MfgError, Result};
use crate::model::ModelSpec;

pub use hull::{best_response_vertices, hull_distance, BestResponseHull};
pub use mixed::find_mixed_equilibria;
pub use pure::find_pure_equilibria;
pub use verify::{recover_strategy, strategy_kind, verify_equilibrium, EquilibriumCertificate, EquilibriumKind};

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Grid resolution per simplex edge; `None` picks a default from the number of states.
    pub grid: Option<usize>,
    /// Random seeds per deterministic strategy, on top of the vertices and the barycenter.
    pub multistart: usize,
    /// Damping `λ` of the fixed-point iteration `m ← (1 − λ)m + λ x^d(m)`.
    pub damping: f64,
    pub tie_tol: f64,
    /// Residual tolerance of the root finders.
    pub tol: f64,
    /// Tolerance at which every returned certificate is re-verified.
    pub verify_tol: f64,
    pub dedup_radius: f64,
    /// Worker threads; 0 uses all available cores.
    pub threads: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid: None,
            multistart: 32,
            damping: 0.5,
            tie_tol: 1e-8,
            tol: 1e-9,
            verify_tol: 1e-7,
            dedup_radius: 1e-6,
            threads: 0,
            seed: 0,
            max_iter: 500,
        }
    }
}

impl SearchConfig {
    pub fn grid_resolution(&self, num_states: usize) -> usize {
        self.grid.unwrap_or(match num_states {
            2 => 200,
            3 => 60,
            4 => 20,
            5 => 12,
            _ => 8,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tie_tol", self.tie_tol),
            ("tol", self.tol),
            ("verify_tol", self.verify_tol),
            ("dedup_radius", self.dedup_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MfgError::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(MfgError::InvalidParams(format!("damping = {} must lie in (0, 1]", self.damping)));
        }
        if matches!(self.grid, Some(g) if g < 2) {
            return Err(MfgError::InvalidParams("grid resolution must be at least 2".into()));
        }
        if self.max_iter == 0 {
            return Err(MfgError::InvalidParams("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// A root-finding run that did not produce a candidate.
#[derive(Debug, Clone)]
pub struct SearchFailure {
    pub context: String,
    pub residual: f64,
}

impl fmt::Display for SearchFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (residual {:e})", self.context, self.residual)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchReport {
    pub equilibria: Vec<EquilibriumCertificate>,
    /// Reducible generators met during the search; completeness is not claimed there.
    pub warnings: Vec<String>,
    pub failures: Vec<SearchFailure>,
}

impl SearchReport {
    pub fn pure(&self) -> impl Iterator<Item = &EquilibriumCertificate> {
        self.equilibria.iter().filter(|c| c.kind == EquilibriumKind::Pure)
    }

    pub fn mixed(&self) -> impl Iterator<Item = &EquilibriumCertificate> {
        self.equilibria.iter().filter(|c| c.kind == EquilibriumKind::Mixed)
    }
}

pub(crate) fn fmt_point(m: &[f64]) -> String {
    let parts: Vec<String> = m.iter().map(|v| format!("{:.6}", v)).collect();
    format!("({})", parts.join(", "))
}

pub(crate) fn sort_certificates(certs: &mut [EquilibriumCertificate]) {
    certs.sort_by(|a, b| {
        a.m.as_slice()
            .partial_cmp(b.m.as_slice())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (a.kind as u8).cmp(&(b.kind as u8)))
    });
}

fn run(model: &ModelSpec, cfg: &SearchConfig) -> Result<SearchReport> {
    let mut report = find_pure_equilibria(model, cfg)?;
    let mixed = find_mixed_equilibria(model, cfg, &report.equilibria)?;
    report.equilibria.extend(mixed.equilibria);
    for w in mixed.warnings {
        if !report.warnings.contains(&w) {
            report.warnings.push(w);
        }
    }
    report.failures.extend(mixed.failures);
    sort_certificates(&mut report.equilibria);
    Ok(report)
}

/// Pure and mixed search combined, sorted lexicographically by `m`.
pub fn solve(model: &ModelSpec, cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| MfgError::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(|| run(model, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{consumer_model, consumer_reference, ConsumerParams};

    #[test]
    fn consumer_case_v_has_five() {
        let p = ConsumerParams::default();
        let model = consumer_model(&p).unwrap();
        let report = solve(&model, &SearchConfig::default()).unwrap();
        let reference = consumer_reference(&p).unwrap();
        assert_eq!(report.equilibria.len(), reference.equilibria.len());
        for (c, r) in report.equilibria.iter().zip(&reference.equilibria) {
            assert!((c.m[0] - r.m[0]).abs() < 1e-6, "{} vs {}", c.m[0], r.m[0]);
            assert!(c.passed());
        }
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SearchConfig { damping: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = SearchConfig { grid: Some(1), ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
