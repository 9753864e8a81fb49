mod common;

use common::*;
use mfg_core::library::{
    consumer_model, consumer_reference, consumer_thresholds, corruption_model, corruption_reference, random_model,
    ConsumerParams, CorruptionParams, RandomModelConfig,
};
use mfg_core::{
    assemble_generator, best_response_vertices, cut_residual, hull_distance, model_to_string, parse_model, solve,
    stationary_distribution, uniformize, GeneratorMatrix, ModelFile, PopulationDistribution, SearchConfig,
};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

fn any_model() -> impl Strategy<Value = (u64, usize, usize, bool, bool)> {
    (any::<u64>(), 2usize..=4, 1usize..=3, any::<bool>(), any::<bool>())
}

fn build(seed: u64, s: usize, a: usize, irreducible: bool, log_rewards: bool) -> mfg_core::ModelSpec {
    let cfg = RandomModelConfig { states: s, actions: a, max_degree: 2, irreducible, log_rewards };
    random_model(&mut rng(seed), &cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_file_round_trips((seed, s, a, irr, logs) in any_model()) {
        let model = build(seed, s, a, irr, logs);
        let back = parse_model(&model_to_string(&model)).unwrap();
        prop_assert_eq!(ModelFile::from_model(&back), ModelFile::from_model(&model));
        let m = dist(&mut rng(seed ^ 1), s);
        prop_assert_eq!(back.rates_at(m.as_slice()), model.rates_at(m.as_slice()));
        prop_assert_eq!(back.rewards_at(m.as_slice()), model.rewards_at(m.as_slice()));
    }

    #[test]
    fn random_models_are_conservative((seed, s, a, irr, logs) in any_model()) {
        let model = build(seed, s, a, irr, logs);
        let mut r = rng(seed);
        for _ in 0..8 {
            let m = dist(&mut r, s);
            let q = model.rates_at(m.as_slice());
            for k in 0..a {
                for i in 0..s {
                    let row = q.slice(k).row(i);
                    prop_assert!(row.sum().abs() < 1e-12);
                    prop_assert!((0..s).filter(|&j| j != i).all(|j| row[j] >= 0.0));
                }
            }
        }
    }

    #[test]
    fn uniformized_chain_is_stochastic((seed, s, a, irr, logs) in any_model()) {
        let model = build(seed, s, a, irr, logs);
        let m = dist(&mut rng(seed), s);
        let mdp = uniformize(&model, &m).unwrap();
        prop_assert!(mdp.alpha > 0.0 && mdp.alpha < 1.0);
        for p in &mdp.transition_probs {
            prop_assert!(p.iter().all(|&x| x >= -1e-15));
            for i in 0..s {
                prop_assert!((p.row(i).sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationary_point_balances_every_cut(seed in any::<u64>(), s in 2usize..=6) {
        let mut r = rng(seed);
        let q = random_generator(&mut r, s);
        let g = GeneratorMatrix::new(q.clone()).unwrap();
        let x = stationary_distribution(&g).unwrap().dist;
        prop_assert!(x.as_slice().iter().all(|&v| v > 0.0));
        prop_assert!((q.transpose() * x.vector()).amax() < 1e-10);
        let k = r.gen_range(1..s);
        let mut t: Vec<usize> = (0..s).collect();
        t.retain(|_| r.gen_bool(0.5));
        t.truncate(k);
        if t.is_empty() {
            t.push(r.gen_range(0..s));
        }
        prop_assert!(cut_residual(&g, &x, &t).unwrap().abs() < 1e-10);
    }

    #[test]
    fn hull_weights_are_convex(seed in any::<u64>()) {
        let model = build(seed, 3, 2, true, seed % 2 == 0);
        let mut r = rng(seed);
        let m = dist(&mut r, 3);
        let hull = best_response_vertices(&model, &m, 1e-8).unwrap();
        let p = dist(&mut r, 3);
        let (d, w) = hull_distance(&p, &hull);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let proj = hull.vertex_matrix() * DVector::from_vec(w);
        prop_assert!(((proj - p.vector()).norm() - d).abs() < 1e-9);
        for v in &hull.vertices {
            prop_assert!(hull_distance(&v.dist, &hull).0 < 1e-12);
        }
    }
}

fn away(x: f64, marks: &[f64], gap: f64) -> bool {
    marks.iter().all(|&y| (x - y).abs() > gap)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn consumer_solver_matches_reference(
        b in 0.5f64..2.0,
        eps_frac in 0.05f64..0.9,
        beta in 0.1f64..0.9,
        c in 0.05f64..3.0,
        s1 in -2.0f64..2.0,
        s2 in -2.0f64..2.0,
    ) {
        let p = ConsumerParams { b, epsilon: eps_frac * b, beta, c, s1, s2, ..Default::default() };
        let (d1, d2) = consumer_thresholds(&p);
        let marks = [p.epsilon / (b + p.epsilon), 0.5, b / (b + p.epsilon)];
        prop_assume!(away(d1, &marks, 1e-3) && away(d2, &marks, 1e-3));
        let reference = consumer_reference(&p).unwrap();
        let report = solve(&consumer_model(&p).unwrap(), &SearchConfig::default()).unwrap();
        prop_assert_eq!(report.equilibria.len(), reference.equilibria.len());
        for (c, r) in report.equilibria.iter().zip(&reference.equilibria) {
            prop_assert!((c.m[0] - r.m[0]).abs() < 1e-6);
            for i in 0..2 {
                for a in 0..2 {
                    prop_assert!((c.pi.get(i, a) - r.pi[i][a]).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn corruption_solver_matches_reference(
        b in 0.1f64..1.0,
        q_inf in 0.2f64..3.0,
        q_soc in 0.2f64..3.0,
        r in 0.1f64..1.0,
        beta in 0.1f64..0.9,
    ) {
        let p = CorruptionParams { b, q_inf, q_soc, r, beta };
        let reference = corruption_reference(&p).unwrap();
        let h_star = reference.threshold_h;
        prop_assume!(reference.flagged.is_empty());
        prop_assume!(reference.pure.iter().all(|c| away(c.m[1], &[h_star], 1e-4) && away(c.m[0], &[0.0, 1.0], 1e-4) || c.m[0] == 0.0 || c.m[0] == 1.0));
        let want = reference.equilibrium_points();
        prop_assume!(want.windows(2).all(|w| (0..3).any(|k| (w[0][k] - w[1][k]).abs() > 1e-4)));
        if let Some(mx) = &reference.mixed {
            prop_assume!(away(mx.m[0], &[0.0, 1.0], 1e-4) && away(h_star, &[0.0, 1.0], 1e-4));
        }
        let model = corruption_model(&p).unwrap();
        let report = solve(&model, &SearchConfig::default()).unwrap();
        let got: Vec<&[f64]> = report.equilibria.iter().map(|c| c.m.as_slice()).collect();
        prop_assert_eq!(got.len(), want.len(), "got {:?}, want {:?}", got, want);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((0..3).all(|k| (g[k] - w[k]).abs() < 1e-6), "got {:?}, want {:?}", g, w);
        }
        for c in &report.equilibria {
            let g = assemble_generator(&model, &c.m, &c.pi).unwrap();
            prop_assert!(cut_residual(&g, &c.m, &[2]).unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn degenerate_distribution_is_rejected() {
    assert!(PopulationDistribution::new(vec![0.5, 0.6]).is_err());
    assert!(PopulationDistribution::new(vec![1.2, -0.2]).is_err());
}
