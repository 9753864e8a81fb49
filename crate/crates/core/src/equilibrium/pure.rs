use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::newton::{coordinates, full_distribution, gauss_newton};
use super::verify::verify_equilibrium;
use super::{fmt_point, SearchConfig, SearchFailure, SearchReport};
use crate::ctmdp::{mixed_generator, optimal_action_sets};
use crate::error::Result;
use crate::model::{
    random_simplex_point, DeterministicStrategy, ModelSpec, PopulationDistribution, StationaryStrategy,
};
use crate::stationary::{
    extreme_stationary_distributions, is_irreducible, stationary_distribution_unchecked, GeneratorMatrix,
};

/// Vertices, barycenter, then `cfg.multistart` uniform random points.
pub(crate) fn seeds(s: usize, cfg: &SearchConfig) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..s).map(|k| PopulationDistribution::vertex(s, k).to_vec()).collect();
    out.push(vec![1.0 / s as f64; s]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    out.extend((0..cfg.multistart).map(|_| random_simplex_point(&mut rng, s)));
    out
}

fn generator(model: &ModelSpec, pi: &StationaryStrategy, m: &[f64]) -> GeneratorMatrix {
    GeneratorMatrix::new_unchecked(mixed_generator(&model.rates_at(m), pi))
}

/// `x^d(m)`, or `None` when `Q^d(m)` is reducible.
fn best_response_point(model: &ModelSpec, pi: &StationaryStrategy, m: &[f64]) -> Option<Vec<f64>> {
    let g = generator(model, pi, m);
    if !is_irreducible(&g) {
        return None;
    }
    stationary_distribution_unchecked(&g).ok().map(|p| p.dist.to_vec())
}

/// First `S − 1` columns of `mᵀ Q^d(m)`; the last follows from conservativeness.
fn balance(model: &ModelSpec, pi: &StationaryStrategy, x: &DVector<f64>) -> DVector<f64> {
    let s = model.num_states();
    let m = full_distribution(x, s);
    let g = mixed_generator(&model.rates_at(&m), pi);
    let flow = g.transpose() * DVector::from_column_slice(&m);
    flow.rows(0, s - 1).into_owned()
}

pub(crate) fn clean_distribution(m: &[f64]) -> Option<PopulationDistribution> {
    let v: Vec<f64> = m.iter().map(|x| if x.abs() < 1e-15 { 0.0 } else { x.max(0.0) }).collect();
    PopulationDistribution::new_normalized(v, 1e-6).ok()
}

struct StrategyOutcome {
    certs: Vec<super::EquilibriumCertificate>,
    warnings: Vec<String>,
    failures: Vec<SearchFailure>,
}

fn damped(model: &ModelSpec, pi: &StationaryStrategy, seed: &[f64], cfg: &SearchConfig) -> Option<Vec<f64>> {
    let mut m = seed.to_vec();
    for _ in 0..cfg.max_iter {
        let x = best_response_point(model, pi, &m)?;
        let next: Vec<f64> = m.iter().zip(&x).map(|(a, b)| (1.0 - cfg.damping) * a + cfg.damping * b).collect();
        let step = next.iter().zip(&m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        m = next;
        if step < cfg.tol {
            break;
        }
    }
    Some(m)
}

fn push_unique(found: &mut Vec<Vec<f64>>, m: Vec<f64>, radius: f64) {
    let close = |a: &Vec<f64>| a.iter().zip(&m).all(|(x, y)| (x - y).abs() < radius);
    if !found.iter().any(close) {
        found.push(m);
    }
}

fn search_strategy(
    model: &ModelSpec,
    d: &DeterministicStrategy,
    seeds: &[Vec<f64>],
    cfg: &SearchConfig,
) -> StrategyOutcome {
    let s = model.num_states();
    let pi = StationaryStrategy::from_deterministic(d, model.num_actions());
    let label = d.label(model);
    let mut out = StrategyOutcome { certs: Vec::new(), warnings: Vec::new(), failures: Vec::new() };
    let mut found: Vec<Vec<f64>> = Vec::new();

    if model.has_constant_dynamics() {
        let g = generator(model, &pi, &seeds[s]);
        if is_irreducible(&g) {
            if let Ok(p) = stationary_distribution_unchecked(&g) {
                found.push(p.dist.to_vec());
            }
        } else {
            out.warnings.push(format!(
                "strategy {label}: reducible generator; only the extreme stationary distributions were examined"
            ));
            if let Ok(ext) = extreme_stationary_distributions(&g) {
                found.extend(ext.into_iter().map(|p| p.to_vec()));
            }
        }
    } else {
        let f = |x: &DVector<f64>| balance(model, &pi, x);
        let polish = |m: &[f64]| gauss_newton(&f, coordinates(m, &[]), s, cfg.tol * 1e-3, 100);
        let mut reducible_at: Option<Vec<f64>> = None;
        for seed in seeds {
            let mut best = f64::INFINITY;
            let starts = match damped(model, &pi, seed, cfg) {
                Some(m) => vec![m, seed.clone()],
                None => {
                    reducible_at.get_or_insert_with(|| seed.clone());
                    vec![seed.clone()]
                }
            };
            for start in starts {
                let r = polish(&start);
                best = best.min(r.residual);
                if r.residual <= cfg.tol {
                    push_unique(&mut found, full_distribution(&r.x, s), cfg.dedup_radius);
                }
            }
            if best > cfg.tol {
                out.failures.push(SearchFailure {
                    context: format!("strategy {label}: no convergence from seed {}", fmt_point(seed)),
                    residual: best,
                });
            }
        }
        if let Some(m) = reducible_at {
            out.warnings.push(format!("strategy {label}: reducible generator at m = {}", fmt_point(&m)));
        }
    }

    let mut accepted: Vec<Vec<f64>> = Vec::new();
    for m in found {
        let Some(dist) = clean_distribution(&m) else { continue };
        if accepted.iter().any(|a| dist.as_slice().iter().zip(a).all(|(x, y)| (x - y).abs() < cfg.dedup_radius)) {
            continue;
        }
        let Ok(opt) = optimal_action_sets(model, &dist, cfg.tie_tol) else { continue };
        if !opt.contains(d) {
            continue;
        }
        let cert = verify_equilibrium(model, &dist, &pi, cfg.verify_tol);
        if cert.passed() {
            accepted.push(dist.to_vec());
            out.certs.push(cert);
        } else {
            out.failures.push(SearchFailure {
                context: format!("strategy {label}: candidate {} failed verification", fmt_point(dist.as_slice())),
                residual: cert.stationarity_residual.max(cert.optimality_gap),
            });
        }
    }
    out
}

/// Stationary points of every deterministic strategy (one per class of equivalent
/// actions) at which that strategy is optimal.
pub fn find_pure_equilibria(model: &ModelSpec, cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let seeds = seeds(model.num_states(), cfg);
    let outcomes: Vec<StrategyOutcome> =
        model.representative_strategies().par_iter().map(|d| search_strategy(model, d, &seeds, cfg)).collect();
    let mut report = SearchReport::default();
    for o in outcomes {
        report.equilibria.extend(o.certs);
        report.warnings.extend(o.warnings);
        report.failures.extend(o.failures);
    }
    super::sort_certificates(&mut report.equilibria);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{consumer_model, corruption_model, corruption_reference, ConsumerParams, CorruptionParams};

    #[test]
    fn consumer_case_v_pure() {
        let model = consumer_model(&ConsumerParams::default()).unwrap();
        let report = find_pure_equilibria(&model, &SearchConfig::default()).unwrap();
        let m1: Vec<f64> = report.equilibria.iter().map(|c| c.m[0]).collect();
        assert_eq!(m1.len(), 3);
        for (got, want) in m1.iter().zip([1.0 / 6.0, 0.5, 5.0 / 6.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        let labels: Vec<String> =
            report.equilibria.iter().map(|c| c.pi.as_deterministic(1e-9).unwrap().label(&model)).collect();
        assert_eq!(labels, ["change×stay", "stay×stay", "stay×change"]);
    }

    #[test]
    fn corruption_pure_matches_candidates() {
        let p = CorruptionParams::default();
        let model = corruption_model(&p).unwrap();
        let report = find_pure_equilibria(&model, &SearchConfig::default()).unwrap();
        let reference = corruption_reference(&p).unwrap();
        let want: Vec<[f64; 3]> = reference.pure.iter().filter(|c| c.optimal).map(|c| c.m).collect();
        assert_eq!(report.equilibria.len(), want.len());
        for w in want {
            assert!(report.equilibria.iter().any(|c| (0..3).all(|k| (c.m[k] - w[k]).abs() < 1e-7)));
        }
    }
}
