//! Gauss–Newton root finding in simplex coordinates.
//!
//! A distribution is parameterised by its first `S − 1` components; further unknowns
//! (mixing weights) follow. Steps use the minimum-norm least-squares solution so that
//! rank-deficient Jacobians (solution curves, singular roots) are handled.

use nalgebra::DVector;

use crate::linalg;

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual: f64,
}

/// Full distribution from simplex coordinates.
pub(crate) fn full_distribution(x: &DVector<f64>, s: usize) -> Vec<f64> {
    let mut m: Vec<f64> = x.iter().take(s - 1).copied().collect();
    let last = 1.0 - m.iter().sum::<f64>();
    m.push(last);
    m
}

/// Simplex coordinates from a full distribution.
pub(crate) fn coordinates(m: &[f64], extra: &[f64]) -> DVector<f64> {
    let s = m.len();
    DVector::from_iterator(s - 1 + extra.len(), m[..s - 1].iter().chain(extra).copied())
}

/// Clips the distribution part of `x` onto the simplex.
pub(crate) fn project(x: &mut DVector<f64>, s: usize) {
    let mut m = full_distribution(x, s);
    m.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = m.iter().sum();
    if total > 0.0 {
        for k in 0..s - 1 {
            x[k] = m[k] / total;
        }
    }
}

pub(crate) fn gauss_newton<F>(f: &F, x0: DVector<f64>, s: usize, tol: f64, max_iter: usize) -> NewtonOutcome
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut x = x0;
    project(&mut x, s);
    let mut fx = f(&x);
    let mut norm = fx.amax();
    for _ in 0..max_iter {
        if !norm.is_finite() {
            break;
        }
        if norm <= tol {
            return NewtonOutcome { x, residual: norm };
        }
        let jac = linalg::jacobian(f, &x, 1e-7);
        if jac.iter().any(|v| !v.is_finite()) {
            break;
        }
        let dx = linalg::lstsq(&jac, &(-&fx));
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-8 {
            let mut cand = &x + &dx * t;
            project(&mut cand, s);
            let fc = f(&cand);
            let nc = fc.amax();
            if nc.is_finite() && nc < norm * (1.0 - 1e-4 * t) {
                x = cand;
                fx = fc;
                norm = nc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    NewtonOutcome { x, residual: norm }
}
