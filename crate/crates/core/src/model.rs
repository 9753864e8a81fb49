//! Game data model: population distributions, strategies and population-dependent
//! rates and rewards.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{MfgError, Result};
use crate::poly::Polynomial;

/// Absolute tolerance for simplex membership of distributions and strategy rows.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Default regularisation width of the logarithm floor.
pub const DEFAULT_DELTA: f64 = 1e-6;
/// Tolerance on off-diagonal negativity when validating generators.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
/// Tolerance on row sums when validating generators.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// Quadratic floor below `delta`, identity above. `C¹` and increasing on `[0, ∞)`,
/// with `f_delta(0) = delta / 2`.
pub fn f_delta(y: f64, delta: f64) -> f64 {
    if y <= delta {
        y * y / (2.0 * delta) + delta / 2.0
    } else {
        y
    }
}

/// A probability vector over the states.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationDistribution(DVector<f64>);

impl PopulationDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::check(&probs, SIMPLEX_TOL)?;
        Ok(PopulationDistribution(DVector::from_vec(probs)))
    }

    /// Accepts a vector within `tol` of the simplex, clips tiny negative entries and
    /// renormalises.
    pub fn new_normalized(mut probs: Vec<f64>, tol: f64) -> Result<Self> {
        Self::check(&probs, tol)?;
        for p in probs.iter_mut() {
            *p = p.max(0.0);
        }
        let s: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= s);
        Ok(PopulationDistribution(DVector::from_vec(probs)))
    }

    fn check(probs: &[f64], tol: f64) -> Result<()> {
        if probs.is_empty() {
            return Err(MfgError::InvalidDistribution("empty vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -tol) {
            return Err(MfgError::InvalidDistribution(format!("entry {p} is negative or not finite")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(MfgError::InvalidDistribution(format!("entries sum to {s}, not 1")));
        }
        Ok(())
    }

    pub fn uniform(n: usize) -> Self {
        PopulationDistribution(DVector::from_element(n, 1.0 / n as f64))
    }

    /// The unit vector `e_k` (0-based).
    pub fn vertex(n: usize, k: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        PopulationDistribution(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }

    pub fn sup_distance(&self, other: &PopulationDistribution) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

impl std::ops::Index<usize> for PopulationDistribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A deterministic stationary strategy: one (0-based) action per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicStrategy(pub Vec<usize>);

impl DeterministicStrategy {
    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    /// Human-readable label such as `change×stay`.
    pub fn label(&self, model: &ModelSpec) -> String {
        self.0.iter().map(|&a| model.action_name(a)).collect::<Vec<_>>().join("×")
    }

    /// Enumerates every element of `sets[0] × … × sets[S-1]`.
    pub fn product(sets: &[Vec<usize>]) -> Vec<DeterministicStrategy> {
        let mut out = vec![Vec::with_capacity(sets.len())];
        for set in sets {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    set.iter().map(move |&a| {
                        let mut p = prefix.clone();
                        p.push(a);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(DeterministicStrategy).collect()
    }
}

/// Per-state action distributions, stored as an `S × A` row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryStrategy {
    probs: DMatrix<f64>,
}

impl StationaryStrategy {
    pub fn new(probs: DMatrix<f64>) -> Result<Self> {
        for (i, row) in probs.row_iter().enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < -SIMPLEX_TOL) {
                return Err(MfgError::InvalidStrategy(format!("row {} has a negative entry", i + 1)));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > SIMPLEX_TOL {
                return Err(MfgError::InvalidStrategy(format!("row {} sums to {s}", i + 1)));
            }
        }
        Ok(StationaryStrategy { probs })
    }

    /// Clips tiny negatives and renormalises every row; rows must be within `tol`.
    pub fn new_normalized(mut probs: DMatrix<f64>, tol: f64) -> Result<Self> {
        for (i, mut row) in probs.row_iter_mut().enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < -tol) {
                return Err(MfgError::InvalidStrategy(format!("row {} has a negative entry", i + 1)));
            }
            row.iter_mut().for_each(|p| *p = p.max(0.0));
            let s: f64 = row.sum();
            if (s - 1.0).abs() > tol {
                return Err(MfgError::InvalidStrategy(format!("row {} sums to {s}", i + 1)));
            }
            row /= s;
        }
        Ok(StationaryStrategy { probs })
    }

    /// Wraps a matrix without checks; for intermediate iterates of root finders.
    pub(crate) fn from_rows_unchecked(probs: DMatrix<f64>) -> Self {
        StationaryStrategy { probs }
    }

    pub fn from_deterministic(d: &DeterministicStrategy, num_actions: usize) -> Self {
        let mut probs = DMatrix::zeros(d.0.len(), num_actions);
        for (i, &a) in d.0.iter().enumerate() {
            probs[(i, a)] = 1.0;
        }
        StationaryStrategy { probs }
    }

    /// Convex combination `Σ_k weights[k] · d_k`.
    pub fn mixture(strategies: &[DeterministicStrategy], weights: &[f64], num_actions: usize) -> Result<Self> {
        let s =
            strategies.first().map(|d| d.0.len()).ok_or_else(|| MfgError::InvalidStrategy("empty mixture".into()))?;
        let mut probs = DMatrix::zeros(s, num_actions);
        for (d, &w) in strategies.iter().zip(weights) {
            for (i, &a) in d.0.iter().enumerate() {
                probs[(i, a)] += w;
            }
        }
        Self::new_normalized(probs, 1e-9)
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn num_states(&self) -> usize {
        self.probs.nrows()
    }

    pub fn num_actions(&self) -> usize {
        self.probs.ncols()
    }

    pub fn get(&self, i: usize, a: usize) -> f64 {
        self.probs[(i, a)]
    }

    /// Actions played with probability above `tol`, per state.
    pub fn support(&self, tol: f64) -> Vec<Vec<usize>> {
        self.probs.row_iter().map(|row| (0..row.len()).filter(|&a| row[a] > tol).collect()).collect()
    }

    pub fn is_deterministic(&self, tol: f64) -> bool {
        self.probs.row_iter().all(|row| row.max() >= 1.0 - tol)
    }

    /// The deterministic strategy this one equals, if every row is a vertex.
    pub fn as_deterministic(&self, tol: f64) -> Option<DeterministicStrategy> {
        if !self.is_deterministic(tol) {
            return None;
        }
        Some(DeterministicStrategy(self.probs.row_iter().map(|row| row.transpose().argmax().0).collect()))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.probs.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// One additive component of a reward function.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardTerm {
    Poly(Polynomial),
    /// `coef · ln(f_δ(m_state)) + offset`, with a 0-based `state`.
    RegLog {
        coef: f64,
        state: usize,
        offset: f64,
    },
}

impl RewardTerm {
    fn eval(&self, m: &[f64], delta: f64) -> f64 {
        match self {
            RewardTerm::Poly(p) => p.eval(m),
            RewardTerm::RegLog { coef, state, offset } => coef * f_delta(m[*state], delta).ln() + offset,
        }
    }
}

/// Rates `Q_{ija}(m)` evaluated at one population distribution, one `S × S` slice per action.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTensor {
    slices: Vec<DMatrix<f64>>,
}

impl RateTensor {
    pub fn new(slices: Vec<DMatrix<f64>>) -> Self {
        RateTensor { slices }
    }

    pub fn slice(&self, a: usize) -> &DMatrix<f64> {
        &self.slices[a]
    }

    pub fn slices(&self) -> &[DMatrix<f64>] {
        &self.slices
    }

    pub fn get(&self, i: usize, j: usize, a: usize) -> f64 {
        self.slices[a][(i, j)]
    }

    pub fn num_states(&self) -> usize {
        self.slices.first().map_or(0, |s| s.nrows())
    }

    pub fn num_actions(&self) -> usize {
        self.slices.len()
    }

    /// `sup_{i,a} -Q_{iia}`.
    pub fn uniformization_rate(&self) -> f64 {
        self.slices.iter().flat_map(|q| q.diagonal().iter().map(|d| -d).collect::<Vec<_>>()).fold(0.0, f64::max)
    }

    /// Row `i` of the generator selected by action weights `w` (length `A`).
    pub fn mixed_row(&self, i: usize, w: &[f64]) -> DVector<f64> {
        let s = self.num_states();
        let mut row = DVector::zeros(s);
        for (a, &wa) in w.iter().enumerate() {
            if wa != 0.0 {
                for j in 0..s {
                    row[j] += wa * self.slices[a][(i, j)];
                }
            }
        }
        row
    }
}

/// A complete game: states, actions, discount and population-dependent rates and rewards.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    num_states: usize,
    num_actions: usize,
    beta: f64,
    delta: f64,
    /// Indexed by `(i * S + j) * A + a`.
    rates: Vec<Polynomial>,
    /// Indexed by `i * A + a`.
    rewards: Vec<Vec<RewardTerm>>,
    state_names: Vec<String>,
    action_names: Vec<String>,
    autocompleted: Vec<(usize, usize)>,
    action_classes: Vec<Vec<Vec<usize>>>,
}

impl ModelSpec {
    pub fn builder(num_states: usize, num_actions: usize, beta: f64) -> ModelBuilder {
        ModelBuilder::new(num_states, num_actions, beta)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rate(&self, i: usize, j: usize, a: usize) -> &Polynomial {
        &self.rates[(i * self.num_states + j) * self.num_actions + a]
    }

    pub fn reward_terms(&self, i: usize, a: usize) -> &[RewardTerm] {
        &self.rewards[i * self.num_actions + a]
    }

    pub fn state_name(&self, i: usize) -> &str {
        &self.state_names[i]
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.action_names[a]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    /// Diagonal entries `(i, a)` that were filled in to make rows conservative.
    pub fn autocompleted(&self) -> &[(usize, usize)] {
        &self.autocompleted
    }

    /// True when no rate depends on the population distribution.
    pub fn has_constant_dynamics(&self) -> bool {
        self.rates.iter().all(|p| p.degree() == 0)
    }

    /// Groups of actions in state `i` whose rates and rewards are identical as functions of `m`.
    pub fn action_classes(&self, i: usize) -> &[Vec<usize>] {
        &self.action_classes[i]
    }

    /// The lowest-indexed action of every equivalence class in state `i`.
    pub fn representative_actions(&self, i: usize) -> Vec<usize> {
        self.action_classes[i].iter().map(|c| c[0]).collect()
    }

    /// Every deterministic strategy built from class representatives.
    pub fn representative_strategies(&self) -> Vec<DeterministicStrategy> {
        let sets: Vec<Vec<usize>> = (0..self.num_states).map(|i| self.representative_actions(i)).collect();
        DeterministicStrategy::product(&sets)
    }

    fn check_dim(&self, m: &PopulationDistribution) -> Result<()> {
        if m.len() != self.num_states {
            return Err(MfgError::InvalidDistribution(format!(
                "expected {} components, got {}",
                self.num_states,
                m.len()
            )));
        }
        Ok(())
    }

    pub fn evaluate_rates(&self, m: &PopulationDistribution) -> Result<RateTensor> {
        self.check_dim(m)?;
        Ok(self.rates_at(m.as_slice()))
    }

    pub fn evaluate_rewards(&self, m: &PopulationDistribution) -> Result<DMatrix<f64>> {
        self.check_dim(m)?;
        Ok(self.rewards_at(m.as_slice()))
    }

    /// Unchecked evaluation at an arbitrary point (used by the root finders, whose
    /// iterates may leave the simplex by rounding).
    pub fn rates_at(&self, m: &[f64]) -> RateTensor {
        let (s, na) = (self.num_states, self.num_actions);
        let slices = (0..na).map(|a| DMatrix::from_fn(s, s, |i, j| self.rate(i, j, a).eval(m))).collect();
        RateTensor { slices }
    }

    pub fn rewards_at(&self, m: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.num_states, self.num_actions, |i, a| {
            self.reward_terms(i, a).iter().map(|t| t.eval(m, self.delta)).sum()
        })
    }
}

/// Incremental construction of a [`ModelSpec`]. Indices are 0-based.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    num_states: usize,
    num_actions: usize,
    beta: f64,
    delta: f64,
    rates: Vec<Option<Polynomial>>,
    rewards: Vec<Vec<RewardTerm>>,
    state_names: Option<Vec<String>>,
    action_names: Option<Vec<String>>,
    errors: Vec<String>,
}

impl ModelBuilder {
    pub fn new(num_states: usize, num_actions: usize, beta: f64) -> Self {
        ModelBuilder {
            num_states,
            num_actions,
            beta,
            delta: DEFAULT_DELTA,
            rates: vec![None; num_states * num_states * num_actions],
            rewards: vec![Vec::new(); num_states * num_actions],
            state_names: None,
            action_names: None,
            errors: Vec::new(),
        }
    }

    pub fn delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn state_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.state_names = Some(names.into_iter().map(Into::into).collect());
        self
    }

    pub fn action_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.action_names = Some(names.into_iter().map(Into::into).collect());
        self
    }

    fn in_range(&mut self, what: &str, idx: &[(usize, usize)]) -> bool {
        for &(v, n) in idx {
            if v >= n {
                self.errors.push(format!("{what}: index {} out of range 1..={n}", v + 1));
                return false;
            }
        }
        true
    }

    /// Adds `poly` to the rate `Q_{ija}`.
    pub fn rate(mut self, i: usize, j: usize, a: usize, poly: Polynomial) -> Self {
        let (s, na) = (self.num_states, self.num_actions);
        if self.in_range("rate", &[(i, s), (j, s), (a, na)]) {
            let slot = &mut self.rates[(i * s + j) * na + a];
            *slot = Some(match slot.take() {
                Some(p) => p.add(&poly),
                None => poly,
            });
        }
        self
    }

    /// Sets the same rate polynomial for every action.
    pub fn rate_all_actions(mut self, i: usize, j: usize, poly: Polynomial) -> Self {
        for a in 0..self.num_actions {
            self = self.rate(i, j, a, poly.clone());
        }
        self
    }

    pub fn reward(mut self, i: usize, a: usize, term: RewardTerm) -> Self {
        let (s, na) = (self.num_states, self.num_actions);
        if self.in_range("reward", &[(i, s), (a, na)]) {
            if let RewardTerm::RegLog { state, .. } = term {
                if !self.in_range("reward state_index", &[(state, s)]) {
                    return self;
                }
            }
            self.rewards[i * na + a].push(term);
        }
        self
    }

    pub fn build(self) -> Result<ModelSpec> {
        let (s, na) = (self.num_states, self.num_actions);
        if let Some(e) = self.errors.first() {
            return Err(MfgError::MalformedModel(e.clone()));
        }
        if s < 2 {
            return Err(MfgError::MalformedModel("need at least two states".into()));
        }
        if na < 1 {
            return Err(MfgError::MalformedModel("need at least one action".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(MfgError::MalformedModel(format!("beta = {} must lie in (0, 1)", self.beta)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(MfgError::MalformedModel(format!("delta = {} must be positive", self.delta)));
        }
        for (k, p) in self.rates.iter().enumerate() {
            if let Some(p) = p {
                if p.num_vars_referenced() > s {
                    let (a, ij) = (k % na, k / na);
                    return Err(MfgError::MalformedModel(format!(
                        "rate ({}, {}, {}) references a state index beyond {s}",
                        ij / s + 1,
                        ij % s + 1,
                        a + 1
                    )));
                }
                if p.terms.iter().any(|t| !t.coef.is_finite()) {
                    return Err(MfgError::MalformedModel("non-finite rate coefficient".into()));
                }
            }
        }
        for (k, terms) in self.rewards.iter().enumerate() {
            for t in terms {
                let ok = match t {
                    RewardTerm::Poly(p) => p.num_vars_referenced() <= s && p.terms.iter().all(|t| t.coef.is_finite()),
                    RewardTerm::RegLog { coef, offset, .. } => coef.is_finite() && offset.is_finite(),
                };
                if !ok {
                    return Err(MfgError::MalformedModel(format!(
                        "reward ({}, {}) references a state index beyond {s} or has a non-finite coefficient",
                        k / na + 1,
                        k % na + 1
                    )));
                }
            }
        }

        let names = |given: Option<Vec<String>>, n: usize, what: &str| -> Result<Vec<String>> {
            match given {
                Some(v) if v.len() != n => {
                    Err(MfgError::MalformedModel(format!("{what} has {} entries, expected {n}", v.len())))
                }
                Some(v) => Ok(v),
                None => Ok((1..=n).map(|k| k.to_string()).collect()),
            }
        };
        let state_names = names(self.state_names, s, "state_names")?;
        let action_names = names(self.action_names, na, "action_names")?;

        let mut autocompleted = Vec::new();
        let mut rates: Vec<Polynomial> =
            self.rates.iter().map(|p| p.as_ref().map(|p| p.canonical(s)).unwrap_or_default()).collect();
        for i in 0..s {
            for a in 0..na {
                let diag = (i * s + i) * na + a;
                if self.rates[diag].is_none() {
                    let mut sum = Polynomial::zero();
                    for j in (0..s).filter(|&j| j != i) {
                        sum = sum.add(&rates[(i * s + j) * na + a]);
                    }
                    rates[diag] = sum.scale(-1.0).canonical(s);
                    if !rates[diag].is_zero() {
                        autocompleted.push((i, a));
                    }
                }
            }
        }

        let rewards = self.rewards;
        let action_classes = (0..s)
            .map(|i| {
                let mut classes: Vec<Vec<usize>> = Vec::new();
                for a in 0..na {
                    let same = |b: usize| {
                        (0..s).all(|j| rates[(i * s + j) * na + a] == rates[(i * s + j) * na + b])
                            && canonical_terms(&rewards[i * na + a], s) == canonical_terms(&rewards[i * na + b], s)
                    };
                    match classes.iter_mut().find(|c| same(c[0])) {
                        Some(c) => c.push(a),
                        None => classes.push(vec![a]),
                    }
                }
                classes
            })
            .collect();

        Ok(ModelSpec {
            num_states: s,
            num_actions: na,
            beta: self.beta,
            delta: self.delta,
            rates,
            rewards,
            state_names,
            action_names,
            autocompleted,
            action_classes,
        })
    }
}

/// Reward terms in a canonical order for structural comparison.
fn canonical_terms(terms: &[RewardTerm], n: usize) -> (Polynomial, Vec<(u64, usize, u64)>) {
    let mut poly = Polynomial::zero();
    let mut logs = Vec::new();
    for t in terms {
        match t {
            RewardTerm::Poly(p) => poly = poly.add(p),
            RewardTerm::RegLog { coef, state, offset } => {
                poly = poly.add(&Polynomial::constant(*offset));
                logs.push((coef.to_bits(), *state, 0));
            }
        }
    }
    logs.sort();
    (poly.canonical(n), logs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NegativeOffDiagonal,
    NonConservativeRow,
    NonFiniteRate,
    NonFiniteReward,
}

/// One failed check. Indices are 0-based; `Display` prints them 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub state: usize,
    pub target: Option<usize>,
    pub action: usize,
    pub location: String,
    pub point: Vec<f64>,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, a) = (self.state + 1, self.action + 1);
        match self.kind {
            ViolationKind::NegativeOffDiagonal => write!(
                f,
                "negative off-diagonal Q[{i},{},{a}] = {:e} at {}",
                self.target.map_or(0, |j| j + 1),
                -self.magnitude,
                self.location
            ),
            ViolationKind::NonConservativeRow => {
                write!(f, "row {i} of action {a} sums to {:e} at {}", self.magnitude, self.location)
            }
            ViolationKind::NonFiniteRate => write!(f, "non-finite rate in row {i}, action {a} at {}", self.location),
            ViolationKind::NonFiniteReward => write!(f, "non-finite reward r[{i},{a}] at {}", self.location),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub violations: Vec<Violation>,
    /// Diagonal entries `(i, a)` (0-based) filled in during loading.
    pub autocompleted: Vec<(usize, usize)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// The violation with the largest magnitude.
    pub fn worst(&self) -> Option<&Violation> {
        self.violations.iter().max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }
}

/// Sample points: all vertices, the barycenter, then uniformly random simplex points
/// (fixed seed) until `num_samples` points are reached.
pub fn simplex_sample_points(n: usize, num_samples: usize, seed: u64) -> Vec<(String, Vec<f64>)> {
    let mut pts: Vec<(String, Vec<f64>)> =
        (0..n).map(|k| (format!("vertex e_{}", k + 1), PopulationDistribution::vertex(n, k).to_vec())).collect();
    pts.push(("barycenter".into(), vec![1.0 / n as f64; n]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k = 0;
    while pts.len() < num_samples {
        k += 1;
        pts.push((format!("sample #{k}"), random_simplex_point(&mut rng, n)));
    }
    pts
}

/// A uniformly distributed point of the probability simplex.
pub fn random_simplex_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Checks conservativeness, off-diagonal non-negativity and reward finiteness at sample points.
pub fn validate_model(model: &ModelSpec, num_samples: usize) -> ValidationReport {
    let s = model.num_states();
    let pts = simplex_sample_points(s, num_samples.max(1), 0x5eed);
    let mut violations = Vec::new();
    for (location, m) in &pts {
        let q = model.rates_at(m);
        for a in 0..model.num_actions() {
            let slice = q.slice(a);
            for i in 0..s {
                let mut v = |kind, target, magnitude| {
                    violations.push(Violation {
                        kind,
                        state: i,
                        target,
                        action: a,
                        location: location.clone(),
                        point: m.clone(),
                        magnitude,
                    })
                };
                if slice.row(i).iter().any(|x| !x.is_finite()) {
                    v(ViolationKind::NonFiniteRate, None, f64::INFINITY);
                    continue;
                }
                for j in (0..s).filter(|&j| j != i) {
                    if slice[(i, j)] < -OFF_DIAGONAL_TOL {
                        v(ViolationKind::NegativeOffDiagonal, Some(j), -slice[(i, j)]);
                    }
                }
                let row_sum: f64 = slice.row(i).sum();
                if row_sum.abs() >= ROW_SUM_TOL {
                    v(ViolationKind::NonConservativeRow, None, row_sum.abs());
                }
            }
        }
        let r = model.rewards_at(m);
        for i in 0..s {
            for a in 0..model.num_actions() {
                if !r[(i, a)].is_finite() {
                    violations.push(Violation {
                        kind: ViolationKind::NonFiniteReward,
                        state: i,
                        target: None,
                        action: a,
                        location: location.clone(),
                        point: m.clone(),
                        magnitude: f64::INFINITY,
                    });
                }
            }
        }
    }
    ValidationReport { samples: pts.len(), violations, autocompleted: model.autocompleted().to_vec() }
}
