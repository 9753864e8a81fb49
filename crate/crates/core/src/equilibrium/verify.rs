use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::hull::{best_response_vertices, hull_distance};
use crate::ctmdp::{
    mixed_generator, optimal_action_sets_evaluated, policy_value_evaluated, OptimalitySummary, DEFAULT_TIE_TOL,
};
use crate::error::{MfgError, Result};
use crate::linalg;
use crate::model::{ModelSpec, PopulationDistribution, StationaryStrategy};

/// Residual below which the balance system of [`recover_strategy`] counts as solved.
pub const RECOVERY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    Pure,
    Mixed,
}

impl EquilibriumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumKind::Pure => "pure",
            EquilibriumKind::Mixed => "mixed",
        }
    }
}

/// A candidate `(m, π)` together with the evidence for (or against) it being a stationary
/// mean field equilibrium.
#[derive(Debug, Clone)]
pub struct EquilibriumCertificate {
    pub m: PopulationDistribution,
    pub pi: StationaryStrategy,
    pub kind: EquilibriumKind,
    /// `‖mᵀ Q^π(m)‖_∞`.
    pub stationarity_residual: f64,
    /// `‖V*(m) − V^π(m)‖_∞`.
    pub optimality_gap: f64,
    /// Every action played with positive probability is in `O_i(m)`.
    pub support_ok: bool,
    /// Convex weights of `m` over the best-response vertices, when every optimal
    /// deterministic generator at `m` is irreducible.
    pub hull_weights: Option<Vec<f64>>,
    pub hull_distance: Option<f64>,
    /// Actions played with positive probability, per state (0-based).
    pub strategy_support: Vec<Vec<usize>>,
    pub tol: f64,
}

impl EquilibriumCertificate {
    pub fn stationary(&self) -> bool {
        self.stationarity_residual < self.tol
    }

    pub fn optimal(&self) -> bool {
        self.optimality_gap < self.tol && self.support_ok
    }

    pub fn passed(&self) -> bool {
        self.stationary() && self.optimal()
    }
}

/// Support threshold on strategy probabilities.
const SUPPORT_EPS: f64 = 1e-9;

/// Whether `pi` randomises between actions that are not equivalent.
pub fn strategy_kind(model: &ModelSpec, pi: &StationaryStrategy) -> EquilibriumKind {
    let support = pi.support(SUPPORT_EPS);
    let mixed = support.iter().enumerate().any(|(i, acts)| {
        let classes = model.action_classes(i);
        let class_of = |a: usize| classes.iter().position(|c| c.contains(&a));
        acts.iter().any(|&a| class_of(a) != class_of(acts[0]))
    });
    if mixed {
        EquilibriumKind::Mixed
    } else {
        EquilibriumKind::Pure
    }
}

/// Checks stationarity of `m` under `Q^π(m)` by direct balance, and optimality of `π` in
/// every start state. Never fails: problems show up as infinite residuals.
pub fn verify_equilibrium(
    model: &ModelSpec,
    m: &PopulationDistribution,
    pi: &StationaryStrategy,
    tol: f64,
) -> EquilibriumCertificate {
    let mut cert = EquilibriumCertificate {
        m: m.clone(),
        pi: pi.clone(),
        kind: strategy_kind(model, pi),
        stationarity_residual: f64::INFINITY,
        optimality_gap: f64::INFINITY,
        support_ok: false,
        hull_weights: None,
        hull_distance: None,
        strategy_support: pi.support(SUPPORT_EPS),
        tol,
    };
    let shapes_match = m.len() == model.num_states()
        && pi.num_states() == model.num_states()
        && pi.num_actions() == model.num_actions();
    if !shapes_match {
        return cert;
    }
    let q = model.rates_at(m.as_slice());
    let r = model.rewards_at(m.as_slice());
    let g = mixed_generator(&q, pi);
    cert.stationarity_residual = (g.transpose() * m.vector()).amax();

    let Ok(opt) = optimal_action_sets_evaluated(model.beta(), &q, &r, DEFAULT_TIE_TOL) else {
        return cert;
    };
    if let Ok(v) = policy_value_evaluated(model.beta(), &q, &r, pi) {
        cert.optimality_gap = (&opt.value - v).amax();
    }
    cert.support_ok =
        cert.strategy_support.iter().zip(&opt.action_sets).all(|(sup, set)| sup.iter().all(|a| set.contains(a)));
    if let Ok(hull) = best_response_vertices(model, m, DEFAULT_TIE_TOL) {
        let (d, w) = hull_distance(m, &hull);
        cert.hull_distance = Some(d);
        cert.hull_weights = Some(w);
    }
    cert
}

/// Finds `π` supported on `O_i(m)` with `mᵀ Q^π(m) = 0`.
///
/// Solves for `z_{ia} = m_i π_{ia} ≥ 0` with `Σ_a z_{ia} = m_i` and `Σ_{i,a} Q_{ija} z_{ia} = 0`,
/// using one representative per class of equivalent actions. Rows with `m_i = 0` are
/// uniform over the representatives in `O_i(m)`.
pub fn recover_strategy(
    model: &ModelSpec,
    m: &PopulationDistribution,
    opt: &OptimalitySummary,
) -> Result<StationaryStrategy> {
    let s = model.num_states();
    let q = model.evaluate_rates(m)?;
    let sets = opt.representative_sets(model);
    let vars: Vec<(usize, usize)> =
        sets.iter().enumerate().flat_map(|(i, set)| set.iter().map(move |&a| (i, a))).collect();
    let scale = q.uniformization_rate();
    let w = if scale > 0.0 { 1.0 / scale } else { 1.0 };
    let mut a_mat = DMatrix::zeros(2 * s, vars.len());
    let mut rhs = DVector::zeros(2 * s);
    for (k, &(i, a)) in vars.iter().enumerate() {
        a_mat[(i, k)] = 1.0;
        for j in 0..s {
            a_mat[(s + j, k)] = w * q.get(i, j, a);
        }
    }
    for i in 0..s {
        rhs[i] = m[i];
    }
    let (z, res) = linalg::nnls(&a_mat, &rhs);
    if res > RECOVERY_TOL {
        return Err(MfgError::Infeasible(format!(
            "m is not a stationary point of any optimal strategy (balance residual {res:e})"
        )));
    }
    let mut probs = DMatrix::zeros(s, model.num_actions());
    for i in 0..s {
        let idx: Vec<usize> = (0..vars.len()).filter(|&k| vars[k].0 == i).collect();
        let total: f64 = idx.iter().map(|&k| z[k]).sum();
        if m[i] <= 1e-12 || total <= 0.0 {
            for &k in &idx {
                probs[(i, vars[k].1)] = 1.0 / idx.len() as f64;
            }
        } else {
            for &k in &idx {
                probs[(i, vars[k].1)] = z[k] / total;
            }
        }
    }
    StationaryStrategy::new_normalized(probs, 1e-9)
}
