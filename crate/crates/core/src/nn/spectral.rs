use rand_distr::{Distribution, StandardNormal};

use super::matrix::{axpy, dot, Matrix};
use crate::rng::from_seed;

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Largest singular value estimated from `iterations` power-iteration steps
/// on `W^T W`.
///
/// The iterates span a Krylov subspace; the estimate is the Rayleigh-Ritz
/// value over that subspace, which is never below the plain power-iteration
/// estimate and never above the true value. The start vector comes from a
/// fixed seed, so the result is deterministic.
pub fn largest_singular_value(weights: &Matrix, iterations: usize) -> f64 {
    let mut rng = from_seed(0x5eed_5eed);
    let mut v: Vec<f64> = (0..weights.cols())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    normalize(&mut v);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    push_orthonormal(&mut basis, &v);
    let mut u = vec![0.0; weights.rows()];
    for _ in 0..iterations.max(1) {
        for (r, ui) in u.iter_mut().enumerate() {
            *ui = dot(weights.row(r), &v);
        }
        if normalize(&mut u) == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x = 0.0);
        for (r, &ui) in u.iter().enumerate() {
            axpy(ui, weights.row(r), &mut v);
        }
        if normalize(&mut v) == 0.0 {
            break;
        }
        if basis.len() < weights.cols() {
            push_orthonormal(&mut basis, &v);
        }
    }

    // H = (W Q)^T (W Q), the Gram matrix restricted to the subspace
    let wq: Vec<Vec<f64>> = basis
        .iter()
        .map(|q| {
            (0..weights.rows())
                .map(|r| dot(weights.row(r), q))
                .collect()
        })
        .collect();
    let k = wq.len();
    let mut h = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let x = dot(&wq[i], &wq[j]);
            h[i][j] = x;
            h[j][i] = x;
        }
    }
    max_symmetric_eigenvalue(h).max(0.0).sqrt()
}

/// Gram-Schmidt `v` against `basis` (twice, for stability); dropped when
/// numerically dependent.
fn push_orthonormal(basis: &mut Vec<Vec<f64>>, v: &[f64]) {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for q in basis.iter() {
            let c = dot(&w, q);
            axpy(-c, q, &mut w);
        }
    }
    if normalize(&mut w) > 1e-10 {
        basis.push(w);
    }
}

/// Cyclic Jacobi sweeps on a small symmetric matrix.
#[allow(clippy::needless_range_loop)] // Jacobi rotations touch rows p and q together
fn max_symmetric_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    for _ in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::NEG_INFINITY, f64::max)
}

/// Divide `weights` by its estimated spectral norm.
///
/// Returns the input unchanged when the estimate is below `1e-12`.
pub fn spectral_normalize(weights: &Matrix, iterations: usize) -> Matrix {
    let sigma = largest_singular_value(weights, iterations);
    let mut out = weights.clone();
    if sigma >= 1e-12 {
        out.scale(1.0 / sigma);
    }
    out
}
