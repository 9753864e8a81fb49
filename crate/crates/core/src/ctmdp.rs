//! The individual control problem for a frozen population distribution.
//!
//! For fixed `m` a single player faces a continuous-time MDP with rates `Q_{ija}(m)`,
//! rewards `r_{ia}(m)` and discount `β`. It is solved by policy iteration on the
//! uniformized discrete-time MDP, with exact linear-solve policy evaluation.

use nalgebra::{DMatrix, DVector};

use crate::error::{MfgError, Result};
use crate::linalg;
use crate::model::{DeterministicStrategy, ModelSpec, PopulationDistribution, RateTensor, StationaryStrategy};

/// Default relative tie band for the per-state argmax sets.
pub const DEFAULT_TIE_TOL: f64 = 1e-8;

/// Discrete-time MDP obtained by uniformization.
#[derive(Debug, Clone)]
pub struct DiscreteMdp {
    /// `‖Q(m)‖ / (β + ‖Q(m)‖)`.
    pub alpha: f64,
    /// `P̄_{ija} = Q_{ija}/‖Q‖ + δ_{ij}`, one `S × S` stochastic matrix per action.
    pub transition_probs: Vec<DMatrix<f64>>,
    /// `r̄_{ia} = r_{ia}/(β + ‖Q‖)`, `S × A`.
    pub rewards: DMatrix<f64>,
    pub uniformization_rate: f64,
}

impl DiscreteMdp {
    pub fn num_states(&self) -> usize {
        self.rewards.nrows()
    }

    /// Value of a deterministic strategy: the solution of `v = r̄^d + α P̄^d v`.
    pub fn policy_value(&self, d: &DeterministicStrategy) -> Result<DVector<f64>> {
        let s = self.num_states();
        let mut a = DMatrix::identity(s, s);
        let mut r = DVector::zeros(s);
        for (i, &act) in d.actions().iter().enumerate() {
            r[i] = self.rewards[(i, act)];
            for j in 0..s {
                a[(i, j)] -= self.alpha * self.transition_probs[act][(i, j)];
            }
        }
        linalg::solve(&a, &r)
    }

    /// `r̄_{ia} + α Σ_j P̄_{ija} v_j` for all `(i, a)`.
    pub fn q_values(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut q = self.rewards.clone();
        for (a, p) in self.transition_probs.iter().enumerate() {
            let pv = p * v;
            for i in 0..q.nrows() {
                q[(i, a)] += self.alpha * pv[i];
            }
        }
        q
    }
}

/// Reduces the continuous-time problem at `m` to a discrete-time MDP.
pub fn uniformize(model: &ModelSpec, m: &PopulationDistribution) -> Result<DiscreteMdp> {
    let q = model.evaluate_rates(m)?;
    let r = model.evaluate_rewards(m)?;
    uniformize_evaluated(model.beta(), &q, &r)
}

fn uniformize_evaluated(beta: f64, q: &RateTensor, r: &DMatrix<f64>) -> Result<DiscreteMdp> {
    let norm = q.uniformization_rate();
    if norm <= 0.0 {
        return Err(MfgError::DegenerateDynamics);
    }
    let s = q.num_states();
    let transition_probs = q.slices().iter().map(|qa| qa / norm + DMatrix::identity(s, s)).collect();
    Ok(DiscreteMdp {
        alpha: norm / (beta + norm),
        transition_probs,
        rewards: r / (beta + norm),
        uniformization_rate: norm,
    })
}

/// `Q^π(m)` from an evaluated rate tensor.
pub fn mixed_generator(q: &RateTensor, pi: &StationaryStrategy) -> DMatrix<f64> {
    let s = q.num_states();
    let mut g = DMatrix::zeros(s, s);
    for (a, slice) in q.slices().iter().enumerate() {
        for i in 0..s {
            let w = pi.get(i, a);
            if w != 0.0 {
                for j in 0..s {
                    g[(i, j)] += w * slice[(i, j)];
                }
            }
        }
    }
    g
}

/// `r^π(m)` from an evaluated reward matrix.
pub fn mixed_reward(r: &DMatrix<f64>, pi: &StationaryStrategy) -> DVector<f64> {
    DVector::from_fn(r.nrows(), |i, _| (0..r.ncols()).map(|a| pi.get(i, a) * r[(i, a)]).sum())
}

fn check_strategy(model: &ModelSpec, pi: &StationaryStrategy) -> Result<()> {
    if pi.num_states() != model.num_states() || pi.num_actions() != model.num_actions() {
        return Err(MfgError::InvalidStrategy(format!(
            "strategy is {}×{}, model is {}×{}",
            pi.num_states(),
            pi.num_actions(),
            model.num_states(),
            model.num_actions()
        )));
    }
    Ok(())
}

/// Continuous-time value `(βI − Q^π)^{-1} r^π` from evaluated rates and rewards.
pub fn policy_value_evaluated(
    beta: f64,
    q: &RateTensor,
    r: &DMatrix<f64>,
    pi: &StationaryStrategy,
) -> Result<DVector<f64>> {
    let s = q.num_states();
    let a = DMatrix::identity(s, s) * beta - mixed_generator(q, pi);
    linalg::solve(&a, &mixed_reward(r, pi))
}

/// Expected discounted reward of a stationary strategy from every start state.
pub fn policy_value(model: &ModelSpec, m: &PopulationDistribution, pi: &StationaryStrategy) -> Result<DVector<f64>> {
    check_strategy(model, pi)?;
    let q = model.evaluate_rates(m)?;
    let r = model.evaluate_rewards(m)?;
    policy_value_evaluated(model.beta(), &q, &r, pi)
}

/// Optimal value and an optimal deterministic strategy of an evaluated problem.
fn policy_iteration(
    beta: f64,
    q: &RateTensor,
    r: &DMatrix<f64>,
    tol: f64,
) -> Result<(DVector<f64>, DeterministicStrategy)> {
    let mdp = uniformize_evaluated(beta, q, r)?;
    let s = q.num_states();
    // Greedy start with respect to immediate reward.
    let mut d = DeterministicStrategy((0..s).map(|i| r.row(i).transpose().argmax().0).collect());
    // An improvement threshold η bounds the discrete (= continuous) value error by η/(1−α).
    let eta = (tol * (1.0 - mdp.alpha) * 0.5).max(f64::EPSILON);
    let mut v = mdp.policy_value(&d)?;
    let max_iter = 10 * q.num_actions().pow(s.min(8) as u32).min(10_000) + 100;
    for _ in 0..max_iter {
        let qv = mdp.q_values(&v);
        let mut changed = false;
        for i in 0..s {
            let cur = qv[(i, d.0[i])];
            let (best, best_val) =
                (0..qv.ncols())
                    .map(|a| (a, qv[(i, a)]))
                    .fold((d.0[i], cur), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best_val > cur + eta * (1.0 + cur.abs()) {
                d.0[i] = best;
                changed = true;
            }
        }
        if !changed {
            return Ok((v, d));
        }
        v = mdp.policy_value(&d)?;
    }
    Ok((v, d))
}

/// `V*(m)` with sup-norm error at most `tol`.
pub fn solve_optimal_value(model: &ModelSpec, m: &PopulationDistribution, tol: f64) -> Result<DVector<f64>> {
    let q = model.evaluate_rates(m)?;
    let r = model.evaluate_rewards(m)?;
    Ok(policy_iteration(model.beta(), &q, &r, tol)?.0)
}

/// Value function, per-state optimal action sets `O_i(m)`, and through them the
/// deterministic optimal set `D(m) = O_1(m) × … × O_S(m)`.
#[derive(Debug, Clone)]
pub struct OptimalitySummary {
    pub value: DVector<f64>,
    /// Continuous-time Q-values `r_{ia} + Σ_j Q_{ija} V*_j`.
    pub q_values: DMatrix<f64>,
    pub action_sets: Vec<Vec<usize>>,
}

impl OptimalitySummary {
    /// `|D(m)|`.
    pub fn count(&self) -> usize {
        self.action_sets.iter().map(Vec::len).product()
    }

    pub fn contains(&self, d: &DeterministicStrategy) -> bool {
        d.actions().iter().zip(&self.action_sets).all(|(a, set)| set.contains(a))
    }

    /// Explicit enumeration of `D(m)`.
    pub fn det_optimal(&self) -> Vec<DeterministicStrategy> {
        DeterministicStrategy::product(&self.action_sets)
    }

    /// `O_i(m)` restricted to one representative per class of equivalent actions.
    pub fn representative_sets(&self, model: &ModelSpec) -> Vec<Vec<usize>> {
        self.action_sets
            .iter()
            .enumerate()
            .map(|(i, set)| model.representative_actions(i).into_iter().filter(|a| set.contains(a)).collect())
            .collect()
    }

    /// Largest Q-value shortfall of action `a` in state `i` relative to the state's best action.
    pub fn gap(&self, i: usize, a: usize) -> f64 {
        self.q_values.row(i).max() - self.q_values[(i, a)]
    }
}

pub(crate) fn optimal_action_sets_evaluated(
    beta: f64,
    q: &RateTensor,
    r: &DMatrix<f64>,
    tie_tol: f64,
) -> Result<OptimalitySummary> {
    let (value, _) = policy_iteration(beta, q, r, tie_tol * 1e-3)?;
    let s = q.num_states();
    let mut q_values = r.clone();
    for (a, slice) in q.slices().iter().enumerate() {
        let qv = slice * &value;
        for i in 0..s {
            q_values[(i, a)] += qv[i];
        }
    }
    let action_sets = (0..s)
        .map(|i| {
            let best = q_values.row(i).max();
            let band = tie_tol * (1.0 + best.abs());
            (0..q_values.ncols()).filter(|&a| q_values[(i, a)] >= best - band).collect()
        })
        .collect();
    Ok(OptimalitySummary { value, q_values, action_sets })
}

/// Computes `V*(m)` and `O_i(m)`: every action whose Q-value lies within
/// `tie_tol · (1 + |max|)` of the state's maximum.
pub fn optimal_action_sets(model: &ModelSpec, m: &PopulationDistribution, tie_tol: f64) -> Result<OptimalitySummary> {
    let q = model.evaluate_rates(m)?;
    let r = model.evaluate_rewards(m)?;
    optimal_action_sets_evaluated(model.beta(), &q, &r, tie_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{consumer_model, ConsumerParams};
    use crate::model::RewardTerm;
    use crate::poly::Polynomial;

    fn consumer(c: f64) -> ModelSpec {
        consumer_model(&ConsumerParams { c, ..ConsumerParams::default() }).unwrap()
    }

    fn dist(v: &[f64]) -> PopulationDistribution {
        PopulationDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn uniformization_of_consumer_model() {
        let mdp = uniformize(&consumer(0.5), &dist(&[0.3, 0.7])).unwrap();
        assert_eq!(mdp.uniformization_rate, 1.0);
        assert!((mdp.alpha - 1.0 / 1.5).abs() < 1e-15);
        // action 1 = stay
        let p = &mdp.transition_probs[1];
        assert!((p[(0, 0)] - 0.8).abs() < 1e-15 && (p[(0, 1)] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn degenerate_dynamics() {
        let m = ModelSpec::builder(2, 1, 0.5).build().unwrap();
        let err = uniformize(&m, &PopulationDistribution::uniform(2)).unwrap_err();
        assert_eq!(err, MfgError::DegenerateDynamics);
        assert!(solve_optimal_value(&m, &PopulationDistribution::uniform(2), 1e-9).is_err());
    }

    #[test]
    fn symmetric_stay_value() {
        let model = consumer(0.5);
        let pi = StationaryStrategy::from_deterministic(&DeterministicStrategy(vec![1, 1]), 2);
        let v = policy_value(&model, &dist(&[0.5, 0.5]), &pi).unwrap();
        let expect = 0.5f64.ln() / 0.5;
        assert!((v[0] - expect).abs() < 1e-12 && (v[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_rewards_give_zero_value() {
        let model = ModelSpec::builder(2, 2, 0.3)
            .rate(0, 1, 0, Polynomial::constant(1.0))
            .rate(1, 0, 1, Polynomial::linear(2.0, 0, 2))
            .build()
            .unwrap();
        let pi = StationaryStrategy::new(DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.5, 0.5])).unwrap();
        let v = policy_value(&model, &dist(&[0.4, 0.6]), &pi).unwrap();
        assert_eq!(v.amax(), 0.0);
    }

    #[test]
    fn single_action_optimal_value_is_policy_value() {
        let model = ModelSpec::builder(2, 1, 0.4)
            .rate(0, 1, 0, Polynomial::constant(0.7))
            .rate(1, 0, 0, Polynomial::linear(1.5, 1, 2))
            .reward(0, 0, RewardTerm::Poly(Polynomial::constant(2.0)))
            .reward(1, 0, RewardTerm::Poly(Polynomial::linear(-1.0, 0, 2)))
            .build()
            .unwrap();
        let m = dist(&[0.2, 0.8]);
        let pi = StationaryStrategy::from_deterministic(&DeterministicStrategy(vec![0, 0]), 1);
        let v = policy_value(&model, &m, &pi).unwrap();
        let opt = optimal_action_sets(&model, &m, DEFAULT_TIE_TOL).unwrap();
        assert!((v - &opt.value).amax() < 1e-12);
        assert_eq!(opt.count(), 1);
    }

    #[test]
    fn mismatched_strategy_shape() {
        let model = consumer(0.5);
        let pi = StationaryStrategy::from_deterministic(&DeterministicStrategy(vec![0, 0, 0]), 2);
        assert!(matches!(
            policy_value(&model, &PopulationDistribution::uniform(2), &pi),
            Err(MfgError::InvalidStrategy(_))
        ));
    }
}
