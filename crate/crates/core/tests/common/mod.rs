#![allow(dead_code)]

use mfg_core::library::{random_model, RandomModelConfig};
use mfg_core::{
    DeterministicStrategy, ModelSpec, Monomial, Polynomial, PopulationDistribution, RewardTerm, StationaryStrategy,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the probability simplex (normalised exponentials).
pub fn simplex_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub fn dist<R: Rng>(rng: &mut R, n: usize) -> PopulationDistribution {
    PopulationDistribution::new_normalized(simplex_point(rng, n), 1e-9).unwrap()
}

pub fn random_strategy<R: Rng>(rng: &mut R, s: usize, a: usize) -> StationaryStrategy {
    let rows: Vec<Vec<f64>> = (0..s).map(|_| simplex_point(rng, a)).collect();
    StationaryStrategy::new_normalized(DMatrix::from_fn(s, a, |i, k| rows[i][k]), 1e-9).unwrap()
}

/// Models with `S ∈ {2, 3}`, `A ∈ {2, 3}`, polynomial degree ≤ 2.
pub fn random_models(n: usize, seed: u64, irreducible: bool) -> Vec<ModelSpec> {
    let mut r = rng(seed);
    (0..n)
        .map(|k| {
            let cfg = RandomModelConfig {
                states: r.gen_range(2..=3),
                actions: r.gen_range(2..=3),
                max_degree: 2,
                irreducible,
                log_rewards: k % 3 == 0,
            };
            random_model(&mut r, &cfg)
        })
        .collect()
}

/// Every reward equals the same function of `m`, so every action is optimal everywhere
/// while the rates still differ between actions.
pub fn flat_reward_model<R: Rng>(rng: &mut R, s: usize, a: usize, constant_dynamics: bool) -> ModelSpec {
    let mut b = ModelSpec::builder(s, a, rng.gen_range(0.2..0.8));
    for i in 0..s {
        for j in (0..s).filter(|&j| j != i) {
            for act in 0..a {
                let mut terms = vec![Monomial::constant(rng.gen_range(0.1..2.0))];
                if !constant_dynamics {
                    let mut powers = vec![0; s];
                    powers[rng.gen_range(0..s)] = rng.gen_range(1..=2);
                    terms.push(Monomial::new(rng.gen_range(0.0..1.5), powers));
                }
                b = b.rate(i, j, act, Polynomial { terms });
            }
        }
    }
    let c = rng.gen_range(-1.0..1.0);
    let w = rng.gen_range(0.0..2.0);
    let k = rng.gen_range(0..s);
    for i in 0..s {
        for act in 0..a {
            b = b.reward(
                i,
                act,
                RewardTerm::Poly(Polynomial { terms: vec![Monomial::constant(c), Monomial::new(w, unit(s, k))] }),
            );
        }
    }
    b.build().unwrap()
}

fn unit(s: usize, k: usize) -> Vec<u32> {
    let mut p = vec![0; s];
    p[k] = 1;
    p
}

/// `Q^π(m)` assembled entry by entry from the rate polynomials.
pub fn generator(model: &ModelSpec, m: &[f64], pi: &StationaryStrategy) -> DMatrix<f64> {
    let s = model.num_states();
    DMatrix::from_fn(s, s, |i, j| (0..model.num_actions()).map(|a| pi.get(i, a) * model.rate(i, j, a).eval(m)).sum())
}

pub fn reward_vector(model: &ModelSpec, m: &[f64], pi: &StationaryStrategy) -> DVector<f64> {
    let r = model.rewards_at(m);
    DVector::from_fn(model.num_states(), |i, _| (0..model.num_actions()).map(|a| pi.get(i, a) * r[(i, a)]).sum())
}

/// `(βI − Q^π)^{-1} r^π` by a dense LU solve.
pub fn value(model: &ModelSpec, m: &[f64], pi: &StationaryStrategy) -> DVector<f64> {
    let s = model.num_states();
    let a = DMatrix::identity(s, s) * model.beta() - generator(model, m, pi);
    a.lu().solve(&reward_vector(model, m, pi)).expect("βI − Q is invertible")
}

pub fn all_deterministic(s: usize, a: usize) -> Vec<DeterministicStrategy> {
    let mut out = vec![vec![]];
    for _ in 0..s {
        out = out.into_iter().flat_map(|p: Vec<usize>| (0..a).map(move |k| [p.clone(), vec![k]].concat())).collect();
    }
    out.into_iter().map(DeterministicStrategy).collect()
}

/// Componentwise maximum of the values of all `A^S` deterministic strategies; one strategy
/// attains it in every state at once, so this is `V*`.
pub fn brute_force_optimal(model: &ModelSpec, m: &[f64]) -> DVector<f64> {
    let (s, a) = (model.num_states(), model.num_actions());
    all_deterministic(s, a)
        .iter()
        .map(|d| value(model, m, &StationaryStrategy::from_deterministic(d, a)))
        .reduce(|x, y| x.zip_map(&y, f64::max))
        .unwrap()
}

/// Stationary distribution as the null vector of `Qᵀ` from an SVD.
pub fn null_space_stationary(q: &DMatrix<f64>) -> DVector<f64> {
    let svd = q.transpose().svd(false, true);
    let v_t = svd.v_t.unwrap();
    let k = svd.singular_values.imin();
    let x: DVector<f64> = v_t.row(k).transpose();
    let total = x.sum();
    x / total
}

/// Determinant by cofactor expansion along the first row.
pub fn laplace_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    match n {
        0 => 1.0,
        1 => m[(0, 0)],
        _ => (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[(0, j)] * laplace_det(&m.clone().remove_row(0).remove_column(j))
            })
            .sum(),
    }
}

/// A random conservative generator with strictly positive off-diagonal entries on a
/// Hamiltonian cycle and random sparsity elsewhere.
pub fn random_generator<R: Rng>(rng: &mut R, s: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in (0..s).filter(|&j| j != i) {
            if j == (i + 1) % s || rng.gen_bool(0.5) {
                q[(i, j)] = rng.gen_range(0.05..3.0);
            }
        }
        let row: f64 = q.row(i).sum();
        q[(i, i)] = -row;
    }
    q
}

pub fn dirichlet<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    simplex_point(rng, n)
}
