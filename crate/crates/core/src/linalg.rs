//! Small dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{MfgError, Result};

/// Solves `a x = b` by LU with partial pivoting. Fails on (numerically) singular `a`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let lu = a.clone().lu();
    let u = lu.u();
    let min_pivot = (0..n).map(|k| u[(k, k)].abs()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > scale * 1e-14) {
        return Err(MfgError::SingularSystem(format!("pivot {min_pivot:e} relative to scale {scale:e}")));
    }
    let x = lu.solve(b).ok_or_else(|| MfgError::SingularSystem("LU solve failed".into()))?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(MfgError::SingularSystem("non-finite solution".into()))
    }
}

/// Minimum-norm least-squares solution of `a x ≈ b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let eps = svd.singular_values.max() * 1e-12 * (a.nrows().max(a.ncols()) as f64);
    svd.solve(b, eps.max(f64::MIN_POSITIVE)).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Number of singular values above `rtol · σ_max`.
pub fn numerical_rank(a: &DMatrix<f64>, rtol: f64) -> usize {
    let sv = a.clone().singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * top).count()
}

/// Non-negative least squares, `min ‖a x − b‖₂ s.t. x ≥ 0`, by the Lawson–Hanson
/// active-set method. Returns the solution and the residual norm.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-13 * a.amax().max(1.0) * b.amax().max(1.0) * (n.max(1) as f64);
    let max_outer = 3 * n + 10;

    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
        let sub = a.select_columns(&idx);
        let zs = lstsq(&sub, b);
        let mut z = DVector::zeros(n);
        for (k, &j) in idx.iter().enumerate() {
            z[j] = zs[k];
        }
        z
    };

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let cand = (0..n).filter(|&k| !passive[k] && w[k] > tol).max_by(|&p, &q| w[p].total_cmp(&w[q]));
        let Some(t) = cand else { break };
        passive[t] = true;
        let mut inner = 0;
        loop {
            inner += 1;
            let z = solve_passive(&passive);
            let bad: Vec<usize> = (0..n).filter(|&k| passive[k] && z[k] <= 0.0).collect();
            if bad.is_empty() || inner > 3 * n + 10 {
                x = z.map(|v| v.max(0.0));
                break;
            }
            let alpha = bad.iter().map(|&k| x[k] / (x[k] - z[k])).fold(f64::INFINITY, f64::min);
            x = &x + (z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k] <= 1e-15 {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    let res = (a * &x - b).norm();
    (x, res)
}

/// Closest point of `conv(columns of v)` to `p`. Returns the Euclidean distance and the
/// convex weights.
///
/// Uses the identity `min_{w ∈ Δ} ‖(V − p1ᵀ) w‖² = g/(1+g)` reformulation: the NNLS
/// problem `min_{u ≥ 0} ‖[V − p1ᵀ; 1ᵀ] u − e‖` has solution `u = w/(1+g)`, so `w = u/1ᵀu`.
pub fn simplex_least_squares(v: &DMatrix<f64>, p: &DVector<f64>) -> (f64, DVector<f64>) {
    let (d, k) = (v.nrows(), v.ncols());
    let mut aug = DMatrix::zeros(d + 1, k);
    for c in 0..k {
        for r in 0..d {
            aug[(r, c)] = v[(r, c)] - p[r];
        }
        aug[(d, c)] = 1.0;
    }
    let mut rhs = DVector::zeros(d + 1);
    rhs[d] = 1.0;
    let (u, _) = nnls(&aug, &rhs);
    let total = u.sum();
    let w = if total > 0.0 {
        u / total
    } else {
        // Degenerate: fall back to the nearest vertex.
        let best = (0..k).min_by(|&a, &b| (v.column(a) - p).norm().total_cmp(&(v.column(b) - p).norm())).unwrap_or(0);
        let mut w = DVector::zeros(k);
        w[best] = 1.0;
        w
    };
    let dist = (v * &w - p).norm();
    (dist, w)
}

/// Numerical Jacobian of `f` at `x` by central differences.
pub fn jacobian<F>(f: &F, x: &DVector<f64>, h: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += h;
        xm[k] -= h;
        cols.push((f(&xp) - f(&xm)) / (2.0 * h));
    }
    DMatrix::from_columns(&cols)
}
