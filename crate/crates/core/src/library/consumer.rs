//! Two-provider consumer choice model with constant dynamics and logarithmic network utility.
//!
//! States are the two providers; actions are `change` (index 0) and `stay` (index 1).

use serde::Serialize;

use crate::error::{MfgError, Result};
use crate::model::{ModelSpec, RewardTerm, DEFAULT_DELTA};
use crate::poly::Polynomial;

pub const CHANGE: usize = 0;
pub const STAY: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsumerParams {
    /// Switching rate when changing.
    pub b: f64,
    /// Drift rate when staying, `0 < ε < b`.
    pub epsilon: f64,
    pub beta: f64,
    /// Switching cost per unit time.
    pub c: f64,
    pub s1: f64,
    pub s2: f64,
    pub delta: f64,
}

impl Default for ConsumerParams {
    fn default() -> Self {
        ConsumerParams { b: 1.0, epsilon: 0.2, beta: 0.5, c: 0.5, s1: 0.0, s2: 0.0, delta: DEFAULT_DELTA }
    }
}

impl ConsumerParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        let finite = [p.b, p.epsilon, p.beta, p.c, p.s1, p.s2, p.delta].iter().all(|v| v.is_finite());
        if !finite {
            return Err(MfgError::InvalidParams("parameters must be finite".into()));
        }
        if !(p.epsilon > 0.0 && p.epsilon < p.b) {
            return Err(MfgError::InvalidParams(format!(
                "need 0 < epsilon < b, got epsilon = {}, b = {}",
                p.epsilon, p.b
            )));
        }
        if !(p.beta > 0.0 && p.beta < 1.0) {
            return Err(MfgError::InvalidParams(format!("beta = {} must lie in (0, 1)", p.beta)));
        }
        if !(p.c > 0.0) {
            return Err(MfgError::InvalidParams(format!("c = {} must be positive", p.c)));
        }
        if !(p.delta > 0.0) {
            return Err(MfgError::InvalidParams(format!("delta = {} must be positive", p.delta)));
        }
        Ok(())
    }
}

pub fn consumer_model(p: &ConsumerParams) -> Result<ModelSpec> {
    p.validate()?;
    let mut b =
        ModelSpec::builder(2, 2, p.beta).delta(p.delta).state_names(["1", "2"]).action_names(["change", "stay"]);
    for (i, j) in [(0, 1), (1, 0)] {
        b = b.rate(i, j, CHANGE, Polynomial::constant(p.b)).rate(i, j, STAY, Polynomial::constant(p.epsilon));
    }
    for (i, s) in [(0, p.s1), (1, p.s2)] {
        b = b.reward(i, CHANGE, RewardTerm::RegLog { coef: 1.0, state: i, offset: s - p.c }).reward(
            i,
            STAY,
            RewardTerm::RegLog { coef: 1.0, state: i, offset: s },
        );
    }
    b.build()
}

/// The eight parameter regimes of the closed-form classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConsumerCase {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceEquilibrium {
    pub m: [f64; 2],
    /// `pi[i][a]`, actions ordered `(change, stay)`.
    pub pi: [[f64; 2]; 2],
    pub kind: ReferenceKind,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsumerReference {
    pub d1: f64,
    pub d2: f64,
    /// `ε/(b+ε)`, the first component of the change×stay stationary point.
    pub lower: f64,
    /// `b/(b+ε)`, the first component of the stay×change stationary point.
    pub upper: f64,
    pub case: ConsumerCase,
    /// Sorted by `m₁`.
    pub equilibria: Vec<ReferenceEquilibrium>,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Thresholds `(d₁, d₂)`: changing in state 1 is optimal iff `m₁ ≤ d₁`, changing in state 2
/// iff `m₁ ≥ d₂`.
pub fn consumer_thresholds(p: &ConsumerParams) -> (f64, f64) {
    let k = p.c * (p.beta + 2.0 * p.epsilon) / (p.b - p.epsilon);
    let shift = p.s2 - p.s1;
    (logistic(-k + shift), logistic(k + shift))
}

fn coincide(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * (1.0 + x.abs())
}

/// Closed-form equilibrium set of the consumer model (valid for `δ` below both thresholds).
pub fn consumer_reference(p: &ConsumerParams) -> Result<ConsumerReference> {
    p.validate()?;
    let (d1, d2) = consumer_thresholds(p);
    let lower = p.epsilon / (p.b + p.epsilon);
    let upper = p.b / (p.b + p.epsilon);
    let half = 0.5;

    let case = if d1 < lower {
        if d2 < half {
            ConsumerCase::I
        } else if d2 <= upper {
            ConsumerCase::II
        } else {
            ConsumerCase::III
        }
    } else if d1 <= half {
        if d2 < half {
            ConsumerCase::IV
        } else if d2 <= upper {
            ConsumerCase::V
        } else {
            ConsumerCase::VI
        }
    } else {
        assert!(d2 > half, "d1 < d2 must hold, got d1 = {d1}, d2 = {d2}");
        if d2 <= upper {
            ConsumerCase::VII
        } else {
            ConsumerCase::VIII
        }
    };

    let det = |m1: f64, a1: usize, a2: usize, label: &str| {
        let mut pi = [[0.0; 2]; 2];
        pi[0][a1] = 1.0;
        pi[1][a2] = 1.0;
        ReferenceEquilibrium { m: [m1, 1.0 - m1], pi, kind: ReferenceKind::Pure, label: label.into() }
    };
    let mut eq = Vec::new();
    let mut pure_m = Vec::new();
    // change×stay sits at m₁ = lower and is optimal iff m₁ ≤ d₁.
    if lower <= d1 {
        eq.push(det(lower, CHANGE, STAY, "change×stay"));
        pure_m.push(lower);
    }
    if d1 <= half && half <= d2 {
        eq.push(det(half, STAY, STAY, "stay×stay"));
        pure_m.push(half);
    }
    if d2 <= upper {
        eq.push(det(upper, STAY, CHANGE, "stay×change"));
        pure_m.push(upper);
    }
    let (b, e) = (p.b, p.epsilon);
    if lower <= d1 && d1 <= half && !pure_m.iter().any(|&x| coincide(x, d1)) {
        let (m1, m2) = (d1, 1.0 - d1);
        let q = e * (m2 / m1 - 1.0) / (b - e);
        eq.push(ReferenceEquilibrium {
            m: [m1, m2],
            pi: [[q, 1.0 - q], [0.0, 1.0]],
            kind: ReferenceKind::Mixed,
            label: "mixed in state 1".into(),
        });
    }
    if half <= d2 && d2 <= upper && !pure_m.iter().any(|&x| coincide(x, d2)) {
        let (m1, m2) = (d2, 1.0 - d2);
        let q = e * (m1 / m2 - 1.0) / (b - e);
        eq.push(ReferenceEquilibrium {
            m: [m1, m2],
            pi: [[0.0, 1.0], [q, 1.0 - q]],
            kind: ReferenceKind::Mixed,
            label: "mixed in state 2".into(),
        });
    }
    eq.sort_by(|x, y| x.m[0].total_cmp(&y.m[0]));
    Ok(ConsumerReference { d1, d2, lower, upper, case, equilibria: eq })
}
