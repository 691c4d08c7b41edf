//! Small dense helpers shared by solvers and generators.

use crate::{Matrix, Vector};

/// Largest singular value of `a` by power iteration on `AᵀA`.
pub fn operator_norm(a: &Matrix) -> f64 {
    spectral_radius_gram(a).sqrt()
}

/// Largest eigenvalue of `AᵀA` (equivalently ‖A‖²).
pub fn spectral_radius_gram(a: &Matrix) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let mut v = Vector::from_element(n, 1.0 / (n as f64).sqrt());
    // Perturb the start so it is not orthogonal to the top singular vector
    // for structured matrices.
    for (i, vi) in v.iter_mut().enumerate() {
        *vi += 1e-3 * ((i as f64 + 1.0).sin());
    }
    v.normalize_mut();
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w = a.tr_mul(&(a * &v));
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - lambda).abs() <= 1e-15 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

/// Largest eigenvalue of a symmetric matrix.
pub fn symmetric_max_eigenvalue(q: &Matrix) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(q.clone());
    eig.eigenvalues.max()
}

/// Smallest eigenvalue of the symmetric part of `q`.
pub fn symmetric_min_eigenvalue(q: &Matrix) -> f64 {
    let sym = (q + q.transpose()) * 0.5;
    nalgebra::SymmetricEigen::new(sym).eigenvalues.min()
}

pub fn is_symmetric(q: &Matrix, tol: f64) -> bool {
    q.is_square() && (q - q.transpose()).amax() <= tol * (1.0 + q.amax())
}

/// Index of the smallest entry, lowest index on ties.
pub fn argmin(v: &Vector) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(v: &Vector) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

pub fn basis(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// `ln Σ exp(v_i)` with the maximum subtracted first.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Softmax with max subtraction.
pub fn softmax(v: &Vector) -> Vector {
    let m = v.max();
    let mut w = v.map(|x| (x - m).exp());
    let s = w.sum();
    w /= s;
    w
}
