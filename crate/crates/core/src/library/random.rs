//! Randomly generated valid models for property testing.

use rand::Rng;

use crate::model::{ModelSpec, RewardTerm};
use crate::poly::{Monomial, Polynomial};

#[derive(Debug, Clone, Copy)]
pub struct RandomModelConfig {
    pub states: usize,
    pub actions: usize,
    pub max_degree: u32,
    /// Give every off-diagonal rate a strictly positive constant term, which makes every
    /// generator irreducible on the whole simplex.
    pub irreducible: bool,
    /// Add a regularised-log term to each reward.
    pub log_rewards: bool,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig { states: 3, actions: 2, max_degree: 2, irreducible: true, log_rewards: false }
    }
}

fn random_monomial<R: Rng + ?Sized>(rng: &mut R, n: usize, max_degree: u32) -> Vec<u32> {
    let deg = rng.gen_range(1..=max_degree.max(1));
    let mut powers = vec![0; n];
    for _ in 0..deg {
        powers[rng.gen_range(0..n)] += 1;
    }
    powers
}

/// Off-diagonal rates are non-negative polynomials (non-negative coefficients), so every
/// action slice is a conservative generator on the simplex.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomModelConfig) -> ModelSpec {
    let (s, na) = (cfg.states, cfg.actions);
    let beta = rng.gen_range(0.1..0.9);
    let mut b = ModelSpec::builder(s, na, beta);
    for i in 0..s {
        for j in (0..s).filter(|&j| j != i) {
            for a in 0..na {
                let c0 = if cfg.irreducible || rng.gen_bool(0.6) { rng.gen_range(0.1..1.5) } else { 0.0 };
                let mut terms = vec![Monomial::constant(c0)];
                if cfg.max_degree > 0 {
                    for _ in 0..rng.gen_range(0..=2) {
                        terms.push(Monomial::new(rng.gen_range(0.0..2.0), random_monomial(rng, s, cfg.max_degree)));
                    }
                }
                b = b.rate(i, j, a, Polynomial { terms });
            }
        }
    }
    for i in 0..s {
        for a in 0..na {
            let mut terms = vec![Monomial::constant(rng.gen_range(-2.0..2.0))];
            if cfg.max_degree > 0 {
                for _ in 0..rng.gen_range(0..=2) {
                    terms.push(Monomial::new(rng.gen_range(-3.0..3.0), random_monomial(rng, s, cfg.max_degree)));
                }
            }
            b = b.reward(i, a, RewardTerm::Poly(Polynomial { terms }));
            if cfg.log_rewards {
                b = b.reward(i, a, RewardTerm::RegLog { coef: rng.gen_range(0.0..1.0), state: i, offset: 0.0 });
            }
        }
    }
    b.build().expect("random model is well formed")
}
