//! Mixed equilibria on tie manifolds.
//!
//! A simplex grid is scanned for changes of the optimal action sets. Each grid edge
//! whose endpoints disagree is bisected to a seed on the tie set, and from there a square
//! system (balance plus indifference between the supported actions) is solved for the
//! distribution and the mixing weights.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::newton::{coordinates, full_distribution, gauss_newton};
use super::pure::clean_distribution;
use super::verify::{recover_strategy, verify_equilibrium, EquilibriumCertificate, EquilibriumKind};
use super::{fmt_point, SearchConfig, SearchFailure, SearchReport};
use crate::ctmdp::{mixed_generator, optimal_action_sets, policy_value_evaluated};
use crate::error::Result;
use crate::model::{DeterministicStrategy, ModelSpec, PopulationDistribution, StationaryStrategy};
use crate::stationary::{is_irreducible, GeneratorMatrix};

type Sets = Vec<Vec<usize>>;

const MAX_SUPPORTS: usize = 256;
const BISECTIONS: usize = 50;

/// All points of the simplex with coordinates in `{0, 1/n, …, 1}`, as integer compositions of `n`.
fn grid_points(s: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(s: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(s, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(s, n, &mut Vec::with_capacity(s), &mut out);
    out
}

/// Pairs of grid points that differ by moving one unit between two coordinates.
fn grid_edges(points: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let index: HashMap<&[usize], usize> = points.iter().enumerate().map(|(k, p)| (p.as_slice(), k)).collect();
    let mut edges = Vec::new();
    for (k, p) in points.iter().enumerate() {
        for i in 0..p.len() {
            if p[i] == 0 {
                continue;
            }
            for j in 0..p.len() {
                if j == i {
                    continue;
                }
                let mut q = p.clone();
                q[i] -= 1;
                q[j] += 1;
                if let Some(&l) = index.get(q.as_slice()) {
                    if k < l {
                        edges.push((k, l));
                    }
                }
            }
        }
    }
    edges
}

fn rep_sets(model: &ModelSpec, m: &[f64], tie_tol: f64) -> Option<Sets> {
    let dist = PopulationDistribution::new(m.to_vec()).ok()?;
    optimal_action_sets(model, &dist, tie_tol).ok().map(|o| o.representative_sets(model))
}

/// First optimal deterministic strategy with a reducible generator at `m`.
fn reducible_optimal(model: &ModelSpec, m: &[f64], sets: &Sets) -> Option<DeterministicStrategy> {
    let q = model.rates_at(m);
    DeterministicStrategy::product(sets).into_iter().find(|d| {
        let pi = StationaryStrategy::from_deterministic(d, model.num_actions());
        !is_irreducible(&GeneratorMatrix::new_unchecked(mixed_generator(&q, &pi)))
    })
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

/// Point on the segment where the optimal sets stop being `from`.
fn bisect(model: &ModelSpec, a: &[f64], b: &[f64], from: &Sets, tie_tol: f64) -> Vec<f64> {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if rep_sets(model, &lerp(a, b, mid), tie_tol).as_ref() == Some(from) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lerp(a, b, 0.5 * (lo + hi))
}

fn subsets_of_size_at_least_two(set: &[usize]) -> Vec<Vec<usize>> {
    (1u32..(1 << set.len()))
        .filter(|mask| mask.count_ones() >= 2)
        .map(|mask| (0..set.len()).filter(|k| mask & (1 << k) != 0).map(|k| set[k]).collect())
        .collect()
}

/// Candidate supports drawn from the per-state union of the optimal sets on both sides
/// of a tie: at least one state randomises, the others pick a single action.
fn candidate_supports(union: &Sets) -> Vec<Sets> {
    let mixing: Vec<usize> = (0..union.len()).filter(|&i| union[i].len() >= 2).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << mixing.len().min(12)) {
        let mut partial: Vec<Sets> = vec![Vec::new()];
        for (i, options) in union.iter().enumerate() {
            let pos = mixing.iter().position(|&k| k == i);
            let choices: Vec<Vec<usize>> = match pos {
                Some(p) if mask & (1 << p) != 0 => subsets_of_size_at_least_two(options),
                _ => options.iter().map(|&a| vec![a]).collect(),
            };
            partial = partial
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |c| {
                        let mut next = prefix.clone();
                        next.push(c.clone());
                        next
                    })
                })
                .collect();
        }
        out.extend(partial);
        if out.len() >= MAX_SUPPORTS {
            out.truncate(MAX_SUPPORTS);
            break;
        }
    }
    out
}

/// Unknowns: `S − 1` simplex coordinates, then for each randomising state the weights of
/// all but its first supported action.
struct SupportSystem<'a> {
    model: &'a ModelSpec,
    support: &'a Sets,
}

impl SupportSystem<'_> {
    fn num_weights(&self) -> usize {
        self.support.iter().map(|s| s.len() - 1).sum()
    }

    fn strategy(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let s = self.model.num_states();
        let mut probs = DMatrix::zeros(s, self.model.num_actions());
        let mut k = s - 1;
        for (i, sup) in self.support.iter().enumerate() {
            let mut rest = 1.0;
            for &a in &sup[1..] {
                probs[(i, a)] = x[k];
                rest -= x[k];
                k += 1;
            }
            probs[(i, sup[0])] = rest;
        }
        probs
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let model = self.model;
        let s = model.num_states();
        let m = full_distribution(x, s);
        let q = model.rates_at(&m);
        let r = model.rewards_at(&m);
        let pi = StationaryStrategy::from_rows_unchecked(self.strategy(x));
        let flow = mixed_generator(&q, &pi).transpose() * DVector::from_column_slice(&m);
        let mut out = DVector::zeros(s - 1 + self.num_weights());
        out.rows_mut(0, s - 1).copy_from(&flow.rows(0, s - 1));
        let d0 = DeterministicStrategy(self.support.iter().map(|sup| sup[0]).collect());
        let v = match policy_value_evaluated(
            model.beta(),
            &q,
            &r,
            &StationaryStrategy::from_deterministic(&d0, model.num_actions()),
        ) {
            Ok(v) => v,
            Err(_) => return DVector::from_element(out.len(), f64::NAN),
        };
        let qv = |i: usize, a: usize| r[(i, a)] + (0..s).map(|j| q.get(i, j, a) * v[j]).sum::<f64>();
        let mut k = s - 1;
        for (i, sup) in self.support.iter().enumerate() {
            let base = qv(i, sup[0]);
            for &a in &sup[1..] {
                out[k] = qv(i, a) - base;
                k += 1;
            }
        }
        out
    }
}

enum Attempt {
    Found(EquilibriumCertificate),
    Rejected,
    Failed(f64),
}

fn solve_support(model: &ModelSpec, seed: &[f64], support: &Sets, cfg: &SearchConfig) -> Attempt {
    let s = model.num_states();
    let sys = SupportSystem { model, support };
    let weights: Vec<f64> =
        support.iter().flat_map(|sup| std::iter::repeat(1.0 / sup.len() as f64).take(sup.len() - 1)).collect();
    let f = |x: &DVector<f64>| sys.residual(x);
    let out = gauss_newton(&f, coordinates(seed, &weights), s, cfg.tol * 1e-3, 100);
    if !(out.residual <= cfg.tol) {
        return Attempt::Failed(out.residual);
    }
    let in_range = out.x.iter().skip(s - 1).all(|w| (-1e-7..=1.0 + 1e-7).contains(w))
        && sys.strategy(&out.x).iter().all(|p| *p >= -1e-7);
    if !in_range {
        return Attempt::Rejected;
    }
    let Some(m) = clean_distribution(&full_distribution(&out.x, s)) else { return Attempt::Rejected };
    let Ok(opt) = optimal_action_sets(model, &m, cfg.tie_tol) else { return Attempt::Rejected };
    let candidates = [
        recover_strategy(model, &m, &opt).ok(),
        StationaryStrategy::new_normalized(sys.strategy(&out.x).map(|p| p.max(0.0)), 1e-6).ok(),
    ];
    for pi in candidates.into_iter().flatten() {
        let cert = verify_equilibrium(model, &m, &pi, cfg.verify_tol);
        if cert.passed() {
            return Attempt::Found(cert);
        }
    }
    Attempt::Rejected
}

struct SeedOutcome {
    certs: Vec<EquilibriumCertificate>,
    failure: Option<SearchFailure>,
}

fn from_seed(model: &ModelSpec, seed: &[f64], union: &Sets, cfg: &SearchConfig) -> SeedOutcome {
    let mut certs: Vec<EquilibriumCertificate> = Vec::new();
    let mut best = f64::INFINITY;
    let mut converged = false;
    for support in candidate_supports(union) {
        match solve_support(model, seed, &support, cfg) {
            Attempt::Found(cert) => {
                converged = true;
                if !certs.iter().any(|c| c.m.sup_distance(&cert.m) < cfg.dedup_radius) {
                    certs.push(cert);
                }
            }
            Attempt::Rejected => converged = true,
            Attempt::Failed(r) => best = best.min(r),
        }
    }
    let failure = (!converged).then(|| SearchFailure {
        context: format!("tie cell near {}: no solution of any support system", fmt_point(seed)),
        residual: best,
    });
    SeedOutcome { certs, failure }
}

/// Mixed equilibria located by scanning the tie manifolds, excluding points that coincide
/// with an equilibrium in `pure`.
pub fn find_mixed_equilibria(
    model: &ModelSpec,
    cfg: &SearchConfig,
    pure: &[EquilibriumCertificate],
) -> Result<SearchReport> {
    cfg.validate()?;
    let s = model.num_states();
    let n = cfg.grid_resolution(s);
    let points = grid_points(s, n);
    let coords: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|&k| k as f64 / n as f64).collect()).collect();
    let sets: Vec<Option<Sets>> = coords.par_iter().map(|m| rep_sets(model, m, cfg.tie_tol)).collect();

    let mut report = SearchReport::default();
    let reducible: Vec<Option<(Vec<f64>, String)>> = coords
        .par_iter()
        .zip(&sets)
        .map(|(m, set)| {
            let d = reducible_optimal(model, m, set.as_ref()?)?;
            Some((m.clone(), d.label(model)))
        })
        .collect();
    let mut per_strategy: Vec<(String, Vec<f64>, usize)> = Vec::new();
    for (m, label) in reducible.into_iter().flatten() {
        match per_strategy.iter_mut().find(|e| e.0 == label) {
            Some(e) => e.2 += 1,
            None => per_strategy.push((label, m, 1)),
        }
    }
    for (label, m, count) in per_strategy {
        report.warnings.push(format!(
            "optimal strategy {label} has a reducible generator at {count} grid point(s), e.g. m = {}",
            fmt_point(&m)
        ));
    }

    let mut tasks: Vec<(Vec<f64>, Sets)> = Vec::new();
    let edges: Vec<(usize, usize)> = grid_edges(&points)
        .into_iter()
        .filter(|&(a, b)| matches!((&sets[a], &sets[b]), (Some(x), Some(y)) if x != y))
        .collect();
    let seeds: Vec<(Vec<f64>, Sets)> = edges
        .par_iter()
        .map(|&(a, b)| {
            let (sa, sb) = (sets[a].as_ref().unwrap(), sets[b].as_ref().unwrap());
            let seed = bisect(model, &coords[a], &coords[b], sa, cfg.tie_tol);
            let union: Sets = sa
                .iter()
                .zip(sb)
                .map(|(x, y)| {
                    let mut u = x.clone();
                    u.extend(y.iter().filter(|a| !x.contains(a)));
                    u.sort_unstable();
                    u
                })
                .collect();
            (seed, union)
        })
        .collect();
    // Tie cells wider than one action per state can also appear at single grid points.
    for (m, set) in coords.iter().zip(&sets) {
        if let Some(set) = set {
            if set.iter().any(|o| o.len() >= 2) {
                tasks.push((m.clone(), set.clone()));
            }
        }
    }
    tasks.extend(seeds);

    let outcomes: Vec<SeedOutcome> = tasks.par_iter().map(|(seed, union)| from_seed(model, seed, union, cfg)).collect();
    for o in outcomes {
        report.failures.extend(o.failure);
        for cert in o.certs {
            if cert.kind != EquilibriumKind::Mixed {
                continue;
            }
            let near = |c: &EquilibriumCertificate| c.m.sup_distance(&cert.m) < cfg.dedup_radius;
            if pure.iter().any(near) || report.equilibria.iter().any(near) {
                continue;
            }
            report.equilibria.push(cert);
        }
    }
    super::sort_certificates(&mut report.equilibria);
    Ok(report)
}
