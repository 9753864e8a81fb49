use nalgebra::{DMatrix, DVector};

use crate::ctmdp::{mixed_generator, optimal_action_sets_evaluated};
use crate::error::{MfgError, Result};
use crate::linalg;
use crate::model::{DeterministicStrategy, ModelSpec, PopulationDistribution, StationaryStrategy};
use crate::stationary::{is_irreducible, stationary_distribution_unchecked, GeneratorMatrix, StationaryPoint};

/// The points `x^d(m)` for every `d ∈ D(m)`; the best response set is their convex hull.
#[derive(Debug, Clone)]
pub struct BestResponseHull {
    pub vertices: Vec<StationaryPoint>,
    pub strategies: Vec<DeterministicStrategy>,
}

impl BestResponseHull {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertices as the columns of an `S × n` matrix.
    pub fn vertex_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.vertices.iter().map(|v| v.dist.vector().clone()).collect();
        DMatrix::from_columns(&cols)
    }
}

/// Stationary points of every deterministic optimal strategy at `m`.
///
/// Fails with [`MfgError::ReducibleGenerator`] naming the first `d ∈ D(m)` whose generator
/// is reducible.
pub fn best_response_vertices(model: &ModelSpec, m: &PopulationDistribution, tie_tol: f64) -> Result<BestResponseHull> {
    let q = model.evaluate_rates(m)?;
    let r = model.evaluate_rewards(m)?;
    let opt = optimal_action_sets_evaluated(model.beta(), &q, &r, tie_tol)?;
    let strategies = opt.det_optimal();
    let vertices = strategies
        .iter()
        .map(|d| {
            let pi = StationaryStrategy::from_deterministic(d, model.num_actions());
            let g = GeneratorMatrix::new_unchecked(mixed_generator(&q, &pi));
            if !is_irreducible(&g) {
                return Err(MfgError::ReducibleGenerator(Some(format!("strategy {}", d.label(model)))));
            }
            stationary_distribution_unchecked(&g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BestResponseHull { vertices, strategies })
}

/// Euclidean distance from `point` to the hull and the minimising convex weights.
pub fn hull_distance(point: &PopulationDistribution, hull: &BestResponseHull) -> (f64, Vec<f64>) {
    let (d, w) = linalg::simplex_least_squares(&hull.vertex_matrix(), point.vector());
    (d, w.iter().copied().collect())
}
