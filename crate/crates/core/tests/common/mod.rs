//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's own eigen, norm or leverage routines.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use toepcov::FrequencyModel;

/// `M[j][k] = a[|j - k|]`, built entry by entry.
pub fn toeplitz_dense(a: &[f64]) -> DMatrix<f64> {
    let d = a.len();
    DMatrix::from_fn(d, d, |j, k| a[j.abs_diff(k)])
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (m[(i, j)] + m[(j, i)])).collect()).collect();
    let total: f64 = a.iter().flatten().map(|v| v * v).sum();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn max_abs_eigenvalue(m: &DMatrix<f64>) -> f64 {
    jacobi_eigenvalues(m).iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// `||Toep(truth) - Toep(est)||_2 / ||Toep(truth)||_2` via Jacobi.
pub fn oracle_rel_err(truth: &[f64], est: &[f64]) -> f64 {
    let diff: Vec<f64> = truth.iter().zip(est).map(|(a, b)| a - b).collect();
    max_abs_eigenvalue(&toeplitz_dense(&diff)) / max_abs_eigenvalue(&toeplitz_dense(truth))
}

/// `F[j][l] = exp(-2 pi i f_l j)`, entry by entry.
pub fn fourier_dense(freqs: &[f64], d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, freqs.len(), |j, l| {
        Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * freqs[l] * j as f64)
    })
}

/// Row norms squared of an orthonormal basis of `range(A)`, by modified
/// Gram-Schmidt with rank-deficient columns skipped.
pub fn gram_schmidt_leverage(a: &DMatrix<Complex64>) -> Vec<f64> {
    let (d, s) = a.shape();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let scale = (0..s)
        .map(|c| a.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    for c in 0..s {
        let mut v: Vec<Complex64> = a.column(c).iter().copied().collect();
        for _ in 0..2 {
            for q in &basis {
                let dot: Complex64 = q.iter().zip(&v).map(|(qi, vi)| qi.conj() * vi).sum();
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= dot * qi);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-10 * scale {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    (0..d).map(|j| basis.iter().map(|q| q[j].norm_sqr()).sum()).collect()
}

/// `pairs` conjugate pairs with `f` uniform in `(0, 1/2)`, plus `f = 0` when
/// `with_zero`, exponential weights normalized to sum 1.
pub fn random_model(rng: &mut ChaCha8Rng, d: usize, pairs: usize, with_zero: bool) -> FrequencyModel {
    let mut freqs = Vec::new();
    let mut weights = Vec::new();
    for _ in 0..pairs {
        let f: f64 = rng.random_range(0.01..0.49);
        let w: f64 = Exp1.sample(rng);
        freqs.extend([f, 1.0 - f]);
        weights.extend([w / 2.0, w / 2.0]);
    }
    if with_zero {
        freqs.push(0.0);
        weights.push(Exp1.sample(rng));
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    FrequencyModel::new(d, freqs, weights).unwrap()
}

/// Conjugate-paired frequencies with every pairwise circle distance at least `sep`.
pub fn separated_pairs(rng: &mut ChaCha8Rng, pairs: usize, sep: f64) -> Vec<f64> {
    loop {
        let half: Vec<f64> = (0..pairs).map(|_| rng.random_range(sep / 2.0..0.5 - sep / 2.0)).collect();
        let all: Vec<f64> = half.iter().flat_map(|&f| [f, 1.0 - f]).collect();
        let ok = all.iter().enumerate().all(|(i, &f)| {
            all[i + 1..].iter().all(|&g| {
                let d = (f - g).rem_euclid(1.0);
                d.min(1.0 - d) >= sep
            })
        });
        if ok {
            return all;
        }
    }
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Median of a slice, averaging the two middle values for even lengths.
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    }
}
