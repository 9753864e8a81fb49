//! Generators, irreducibility, stationary distributions and cut balances.

use nalgebra::{DMatrix, DVector};

use crate::ctmdp::mixed_generator;
use crate::error::{MfgError, Result};
use crate::linalg;
use crate::model::{ModelSpec, PopulationDistribution, StationaryStrategy, OFF_DIAGONAL_TOL};

/// Off-diagonal entries above this threshold count as edges of the transition graph.
pub const EDGE_THRESHOLD: f64 = 1e-12;

/// A conservative rate matrix `Q^π(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix(DMatrix<f64>);

impl GeneratorMatrix {
    /// Wraps `q` after checking it is square with non-negative off-diagonals and zero row sums.
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() == 0 {
            return Err(MfgError::MalformedModel("generator must be square and non-empty".into()));
        }
        for i in 0..q.nrows() {
            for j in 0..q.ncols() {
                if i != j && q[(i, j)] < -OFF_DIAGONAL_TOL {
                    return Err(MfgError::MalformedModel(format!(
                        "negative off-diagonal entry ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
            let rs = q.row(i).sum();
            let scale = q.row(i).amax().max(1.0);
            if rs.abs() > 1e-10 * scale {
                return Err(MfgError::MalformedModel(format!("row {} sums to {rs:e}", i + 1)));
            }
        }
        Ok(GeneratorMatrix(q))
    }

    pub(crate) fn new_unchecked(q: DMatrix<f64>) -> Self {
        GeneratorMatrix(q)
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    /// `Q̃`: the transpose with its last row replaced by ones.
    pub fn q_tilde(&self) -> DMatrix<f64> {
        let s = self.size();
        let mut t = self.0.transpose();
        for j in 0..s {
            t[(s - 1, j)] = 1.0;
        }
        t
    }
}

/// A stationary distribution with its balance residual `‖xᵀQ‖_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPoint {
    pub dist: PopulationDistribution,
    pub residual: f64,
    /// Largest relative deviation between the linear solve and the cofactor formula.
    pub cofactor_deviation: f64,
}

/// `Q^π(m)_{ij} = Σ_a Q_{ija}(m) π_{ia}`.
pub fn assemble_generator(
    model: &ModelSpec,
    m: &PopulationDistribution,
    pi: &StationaryStrategy,
) -> Result<GeneratorMatrix> {
    if pi.num_states() != model.num_states() || pi.num_actions() != model.num_actions() {
        return Err(MfgError::InvalidStrategy("strategy shape does not match the model".into()));
    }
    let q = model.evaluate_rates(m)?;
    Ok(GeneratorMatrix(mixed_generator(&q, pi)))
}

fn reaches_all(adj: &DMatrix<f64>, transpose: bool) -> bool {
    let n = adj.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            let w = if transpose { adj[(v, u)] } else { adj[(u, v)] };
            if u != v && !seen[v] && w > EDGE_THRESHOLD {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// True iff the graph with an edge `i → j` whenever `Q_ij > 1e-12` is strongly connected.
pub fn is_irreducible(q: &GeneratorMatrix) -> bool {
    reaches_all(&q.0, false) && reaches_all(&q.0, true)
}

/// `det` of `q` with row `i` and column `j` removed.
pub(crate) fn minor_det(q: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    q.clone().remove_row(i).remove_column(j).determinant()
}

/// Cofactor representation `x_i ∝ (−1)^{S+i} det(Q'_{iS})` (1-based `i`), where `Q'_{iS}`
/// deletes row `i` and the last column.
pub fn cofactor_stationary(q: &GeneratorMatrix) -> DVector<f64> {
    let s = q.size();
    let raw = DVector::from_fn(s, |i, _| {
        let sign = if (s + i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor_det(&q.0, i, s - 1)
    });
    let total = raw.sum();
    raw / total
}

/// The unique stationary distribution of an irreducible generator, via `Q̃ x = e_S`.
pub fn stationary_distribution(q: &GeneratorMatrix) -> Result<StationaryPoint> {
    if !is_irreducible(q) {
        return Err(MfgError::ReducibleGenerator(None));
    }
    stationary_distribution_unchecked(q)
}

pub(crate) fn stationary_distribution_unchecked(q: &GeneratorMatrix) -> Result<StationaryPoint> {
    let s = q.size();
    let mut e = DVector::zeros(s);
    e[s - 1] = 1.0;
    let x = linalg::solve(&q.q_tilde(), &e)?;
    if x.iter().any(|&v| v < -1e-9) {
        return Err(MfgError::SingularSystem(format!("stationary solve produced negative mass: {x}")));
    }
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let dist = PopulationDistribution::new_normalized(clipped, 1e-9)?;
    let residual = (q.0.transpose() * dist.vector()).amax();
    let cof = cofactor_stationary(q);
    let cofactor_deviation = (0..s).map(|i| (cof[i] - dist[i]).abs() / dist[i].abs().max(1e-300)).fold(0.0, f64::max);
    Ok(StationaryPoint { dist, residual, cofactor_deviation })
}

/// Net probability flow into `t_set` (0-based states) under `x`:
/// `Σ_{j∈T} Σ_{i∉T} (x_i Q_ij − x_j Q_ji)`.
pub fn cut_residual(q: &GeneratorMatrix, x: &PopulationDistribution, t_set: &[usize]) -> Result<f64> {
    let s = q.size();
    let mut inside = vec![false; s];
    for &k in t_set {
        if k >= s {
            return Err(MfgError::InvalidCut);
        }
        inside[k] = true;
    }
    let n_in = inside.iter().filter(|&&b| b).count();
    if n_in == 0 || n_in == s {
        return Err(MfgError::InvalidCut);
    }
    let mut r = 0.0;
    for j in (0..s).filter(|&j| inside[j]) {
        for i in (0..s).filter(|&i| !inside[i]) {
            r += x[i] * q.0[(i, j)] - x[j] * q.0[(j, i)];
        }
    }
    Ok(r)
}

/// Checks `sign det(Q'_{SS}) = (−1)^{S+1}` and numerical rank `S − 1`.
pub fn minor_sign_check(q: &GeneratorMatrix) -> Result<bool> {
    if !is_irreducible(q) {
        return Err(MfgError::ReducibleGenerator(None));
    }
    let s = q.size();
    let det = minor_det(&q.0, s - 1, s - 1);
    let expected = if (s + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let rank = linalg::numerical_rank(&q.0, 1e-10);
    Ok(det * expected > 0.0 && rank == s - 1)
}

/// Closed communicating classes of `q` (0-based states), in order of their smallest state.
pub fn closed_classes(q: &GeneratorMatrix) -> Vec<Vec<usize>> {
    let s = q.size();
    let mut reach = vec![vec![false; s]; s];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
        let mut stack = vec![i];
        while let Some(u) = stack.pop() {
            for v in 0..s {
                if u != v && !row[v] && q.0[(u, v)] > EDGE_THRESHOLD {
                    row[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..s {
        if classes.iter().any(|c| c.contains(&i)) {
            continue;
        }
        let class: Vec<usize> = (0..s).filter(|&j| reach[i][j] && reach[j][i]).collect();
        let closed = (0..s).all(|j| !reach[i][j] || class.contains(&j));
        if closed {
            classes.push(class);
        }
    }
    classes
}

/// Extreme stationary distributions: one per closed class. Every stationary distribution
/// of `q` is a convex combination of these.
pub fn extreme_stationary_distributions(q: &GeneratorMatrix) -> Result<Vec<PopulationDistribution>> {
    let s = q.size();
    closed_classes(q)
        .into_iter()
        .map(|class| {
            let mut full = vec![0.0; s];
            if class.len() == 1 {
                full[class[0]] = 1.0;
            } else {
                let sub = GeneratorMatrix(q.0.select_rows(&class).select_columns(&class));
                let x = stationary_distribution_unchecked(&sub)?;
                for (k, &i) in class.iter().enumerate() {
                    full[i] = x.dist[k];
                }
            }
            PopulationDistribution::new_normalized(full, 1e-9)
        })
        .collect()
}
