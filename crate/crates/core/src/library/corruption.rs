//! Three-state corruption model with social pressure.
//!
//! States are ordered `(C, H, R)`: corrupt, honest, reserved. Actions are `change`
//! (index 0) and `stay` (index 1); in `R` both actions have the same effect.

use serde::Serialize;

use crate::error::{MfgError, Result};
use crate::model::{ModelSpec, RewardTerm};
use crate::poly::Polynomial;

pub const C: usize = 0;
pub const H: usize = 1;
pub const R: usize = 2;
pub const CHANGE: usize = 0;
pub const STAY: usize = 1;

/// Wages per state.
pub const WAGES: [f64; 3] = [10.0, 5.0, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorruptionParams {
    /// Rate of switching behaviour when choosing `change`.
    pub b: f64,
    /// Pressure from corrupt players on honest ones.
    pub q_inf: f64,
    /// Conviction rate per unit of honest mass.
    pub q_soc: f64,
    /// Recovery rate from `R` to `H`.
    pub r: f64,
    pub beta: f64,
}

impl Default for CorruptionParams {
    fn default() -> Self {
        CorruptionParams { b: 0.3, q_inf: 1.0, q_soc: 2.0, r: 0.5, beta: 0.3 }
    }
}

impl CorruptionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("b", self.b), ("q_inf", self.q_inf), ("q_soc", self.q_soc), ("r", self.r)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MfgError::InvalidParams(format!("{name} = {v} must be strictly positive")));
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(MfgError::InvalidParams(format!("beta = {} must lie in (0, 1)", self.beta)));
        }
        Ok(())
    }
}

pub fn corruption_model(p: &CorruptionParams) -> Result<ModelSpec> {
    p.validate()?;
    let n = 3;
    let mut b = ModelSpec::builder(3, 2, p.beta)
        .state_names(["C", "H", "R"])
        .action_names(["change", "stay"])
        // C -> R by conviction, C -> H when changing
        .rate_all_actions(C, R, Polynomial::linear(p.q_soc, H, n))
        .rate(C, H, CHANGE, Polynomial::constant(p.b))
        // H -> C by pressure, plus b when changing
        .rate_all_actions(H, C, Polynomial::linear(p.q_inf, C, n))
        .rate(H, C, CHANGE, Polynomial::constant(p.b))
        // uncontrolled recovery
        .rate_all_actions(R, H, Polynomial::constant(p.r));
    for (i, w) in WAGES.iter().enumerate() {
        for a in [CHANGE, STAY] {
            b = b.reward(i, a, RewardTerm::Poly(Polynomial::constant(*w)));
        }
    }
    b.build()
}

/// The equilibrium manifold parameterised by `m_C`: `m_H = r(1 − m_C)/(q_soc m_C + r)`,
/// `m_R = q_soc m_C (1 − m_C)/(q_soc m_C + r)`.
pub fn manifold_point(p: &CorruptionParams, m_c: f64) -> [f64; 3] {
    let den = p.q_soc * m_c + p.r;
    [m_c, p.r * (1.0 - m_c) / den, p.q_soc * m_c * (1.0 - m_c) / den]
}

/// Sup-norm distance between `m` and the manifold point with the same `m_C`.
pub fn manifold_residual(p: &CorruptionParams, m: &[f64]) -> f64 {
    let on = manifold_point(p, m[C]);
    (0..3).map(|k| (m[k] - on[k]).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureCandidate {
    /// `"stay×change"` or `"change×stay"` (actions in `C` and `H`).
    pub label: String,
    /// Actions in `(C, H)`.
    pub actions: [usize; 2],
    pub m: [f64; 3],
    /// Whether the strategy is optimal at `m` (including the tie set).
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedCandidate {
    pub m: [f64; 3],
    /// `π_{C,change}`, `π_{H,change}` must satisfy
    /// `π_{H,change} b m_H − π_{C,change} b m_C = m_C m_H (q_soc − q_inf)`.
    pub feasible: bool,
    /// A feasible `(π_{C,change}, π_{H,change})` when one exists.
    pub witness: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorruptionReference {
    /// `(r + β)/q_soc`: `change×stay` is optimal above it, `stay×change` below.
    pub threshold_h: f64,
    pub pure: Vec<PureCandidate>,
    pub mixed: Option<MixedCandidate>,
    /// Candidates that could not be computed (vanishing denominators).
    pub flagged: Vec<String>,
}

impl CorruptionReference {
    /// Distributions of all equilibria implied by the candidates, with a mixed candidate
    /// dropped when it coincides with a pure one.
    pub fn equilibrium_points(&self) -> Vec<[f64; 3]> {
        let mut pts: Vec<[f64; 3]> = Vec::new();
        let push = |pts: &mut Vec<[f64; 3]>, m: [f64; 3]| {
            if !pts.iter().any(|q| (0..3).all(|k| (q[k] - m[k]).abs() < 1e-9)) {
                pts.push(m);
            }
        };
        for c in self.pure.iter().filter(|c| c.optimal) {
            push(&mut pts, c.m);
        }
        if let Some(mx) = self.mixed.as_ref().filter(|mx| mx.feasible) {
            push(&mut pts, mx.m);
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts
    }
}

fn in_unit(x: f64) -> bool {
    (-1e-12..=1.0 + 1e-12).contains(&x)
}

pub fn corruption_reference(p: &CorruptionParams) -> Result<CorruptionReference> {
    p.validate()?;
    let threshold_h = (p.r + p.beta) / p.q_soc;
    let mut pure = Vec::new();
    let mut flagged = Vec::new();

    // stay×change: stationary iff m_H = 0 or m_C = b/(q_soc − q_inf).
    let sc = |m: [f64; 3]| PureCandidate {
        label: "stay×change".into(),
        actions: [STAY, CHANGE],
        m,
        optimal: m[H] <= threshold_h,
    };
    pure.push(sc(manifold_point(p, 1.0)));
    // change×stay: stationary iff m_C = 0 or m_H = b/(q_inf − q_soc).
    let cs = |m: [f64; 3]| PureCandidate {
        label: "change×stay".into(),
        actions: [CHANGE, STAY],
        m,
        optimal: m[H] >= threshold_h,
    };
    pure.push(cs(manifold_point(p, 0.0)));
    if p.q_soc == p.q_inf {
        flagged.push("q_soc = q_inf: the interior stay×change and change×stay candidates are undefined".into());
    } else {
        let m_c = p.b / (p.q_soc - p.q_inf);
        if in_unit(m_c) {
            pure.push(sc(manifold_point(p, m_c)));
        }
        let m_h = p.b / (p.q_inf - p.q_soc);
        if in_unit(m_h) {
            let m_c = p.r * (1.0 - m_h) / (p.q_soc * m_h + p.r);
            pure.push(cs(manifold_point(p, m_c)));
        }
    }

    let mixed = (threshold_h <= 1.0).then(|| {
        let m_c = p.r * (p.q_soc - p.r - p.beta) / ((2.0 * p.r + p.beta) * p.q_soc);
        let m_h = threshold_h;
        let m = [m_c, m_h, 1.0 - m_c - m_h];
        // π_H m_H − π_C m_C = K over the unit square; the left side ranges over [−m_C, m_H].
        let k = m_c * m_h * (p.q_soc - p.q_inf) / p.b;
        let feasible = -m_c - 1e-12 <= k && k <= m_h + 1e-12;
        let witness = feasible.then(|| {
            if k >= 0.0 {
                if m_h > 0.0 {
                    [0.0, (k / m_h).min(1.0)]
                } else {
                    [0.0, 0.0]
                }
            } else if m_c > 0.0 {
                [(-k / m_c).min(1.0), 0.0]
            } else {
                [0.0, 0.0]
            }
        });
        MixedCandidate { m, feasible, witness }
    });

    Ok(CorruptionReference { threshold_h, pure, mixed, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PopulationDistribution;

    fn params() -> CorruptionParams {
        CorruptionParams::default()
    }

    #[test]
    fn rate_rows() {
        let model = corruption_model(&params()).unwrap();
        let m = PopulationDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let q = model.evaluate_rates(&m).unwrap();
        for a in [CHANGE, STAY] {
            assert_eq!(q.slice(a).row(R).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.5, -0.5]);
        }
        let c_stay: Vec<f64> = q.slice(STAY).row(C).iter().copied().collect();
        assert_eq!(c_stay, vec![-1.0, 0.0, 1.0]);
        assert!((q.get(H, C, STAY) - 0.2).abs() < 1e-15);
        assert_eq!(model.action_classes(R), &[vec![CHANGE, STAY]]);
        assert_eq!(model.action_classes(C).len(), 2);
    }

    #[test]
    fn rewards_are_wages() {
        let model = corruption_model(&params()).unwrap();
        let r = model.evaluate_rewards(&PopulationDistribution::uniform(3)).unwrap();
        assert_eq!(r.column(CHANGE).as_slice(), &WAGES);
        assert_eq!(r.column(STAY).as_slice(), &WAGES);
    }

    #[test]
    fn invalid_params() {
        let p = CorruptionParams { q_soc: 0.0, ..params() };
        assert!(matches!(corruption_model(&p), Err(MfgError::InvalidParams(_))));
    }

    #[test]
    fn reference_values() {
        let r = corruption_reference(&params()).unwrap();
        assert!((r.threshold_h - 0.4).abs() < 1e-15);
        let mx = r.mixed.unwrap();
        assert!((mx.m[C] - 0.6 / 2.6).abs() < 1e-15);
        assert!(mx.feasible);
        let on = manifold_point(&params(), 0.2);
        assert!((on[H] - 0.4 / 0.9).abs() < 1e-15);
        assert!((on.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn high_threshold_has_no_tie_set() {
        let p = CorruptionParams { r: 1.5, beta: 0.6, ..params() };
        let r = corruption_reference(&p).unwrap();
        assert!(r.threshold_h > 1.0);
        assert!(r.mixed.is_none());
        assert!(r.pure.iter().filter(|c| c.optimal).all(|c| c.label == "stay×change"));
    }
}
