//! Prony's method and the estimators built on it.
//!
//! A real sample `x_t = sum_j y_j e^{-2 pi i f_j t}` is annihilated by
//! `q(z) = z^k + sum_{s=1}^k c_s z^{s-1}` where `P c = -b`, `P[i][j] = x[i+j]`
//! and `b[i] = x[k+i]` (0-based). The roots of `q` are `e^{-2 pi i f_j}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{monic_roots, numerical_rank, pinv, pinv_real, C64};
use crate::sampling::ObservationSet;
use crate::toeplitz::{avg, circle_distance, cosine_sum, fourier_matrix, FrequencyModel, FREQ_TOL};

use super::{EstimateReport, REGRESSION_RCOND};

/// Relative singular-value cutoff that decides the numerical rank of `P_k`.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Per-sample root sets closer than this (in cycles) count as agreeing.
const AGREEMENT_TOL: f64 = 1e-6;

/// Output of one Prony decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PronyFit {
    /// Frequencies in `[0, 1)`.
    pub freqs: Vec<f64>,
    /// Coefficients `y_hat`, one per frequency.
    pub coeffs: Vec<C64>,
    /// Raw polynomial roots before projection to the unit circle.
    pub roots: Vec<C64>,
}

impl PronyFit {
    pub fn rank(&self) -> usize {
        self.freqs.len()
    }

    pub fn radius_defect(&self) -> f64 {
        self.roots.iter().fold(0.0, |m, z| m.max((z.norm() - 1.0).abs()))
    }
}

fn hankel(x: &[f64], k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| x[i + j])
}

/// Frequencies of `x[..2k]` (roots only), after numerical-rank reduction.
fn prony_roots(x: &[f64], k: usize) -> Result<(Vec<f64>, Vec<C64>)> {
    if k == 0 {
        return Err(Error::param("k", "must be positive"));
    }
    if x.len() < 2 * k {
        return Err(Error::Dimension(format!("Prony with k={k} needs {} entries, got {}", 2 * k, x.len())));
    }
    let mut k = k;
    loop {
        let r = numerical_rank(&hankel(x, k), RANK_CUTOFF);
        if r == k {
            break;
        }
        if r == 0 {
            return Ok((Vec::new(), Vec::new()));
        }
        k = r;
    }
    let p = hankel(x, k);
    let b = DVector::from_fn(k, |i, _| -x[k + i]);
    let c = pinv_real(&p, RANK_CUTOFF) * b;
    let roots = monic_roots(c.as_slice())?;
    let freqs = roots.iter().map(|z| root_frequency(*z)).collect();
    Ok((freqs, roots))
}

/// `-arg(z) / 2 pi` folded into `[0, 1)`.
fn root_frequency(z: C64) -> f64 {
    let f = (-z.arg() / (2.0 * PI)).rem_euclid(1.0);
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

fn solve_coeffs(freqs: &[f64], rows: usize, x: &[f64]) -> Vec<C64> {
    if freqs.is_empty() {
        return Vec::new();
    }
    let f = fourier_matrix(freqs, rows);
    let rhs = DVector::from_fn(rows, |i, _| C64::new(x[i], 0.0));
    (pinv(&f, REGRESSION_RCOND) * rhs).iter().copied().collect()
}

/// Frequencies and coefficients of `x` from its first `2k` entries.
///
/// If `P_k` is numerically rank deficient the decomposition is retried with
/// `k` reduced to its numerical rank. Coefficients solve `F_R y = x[..k']`.
pub fn prony_decompose(x: &[f64], k: usize) -> Result<PronyFit> {
    let (freqs, roots) = prony_roots(x, k)?;
    let coeffs = solve_coeffs(&freqs, freqs.len(), x);
    Ok(PronyFit { freqs, coeffs, roots })
}

/// Nearest multiple of `step`, folded into `[0, 1)`.
pub fn snap_to_grid(f: f64, step: f64) -> f64 {
    let g = ((f / step).round() * step).rem_euclid(1.0);
    if g >= 1.0 - FREQ_TOL {
        0.0
    } else {
        g
    }
}

/// Prony with roots snapped to multiples of `2^(3 - beta/k)` and
/// coefficients regressed over all `2k` entries.
pub fn prony_inexact(x: &[f64], k: usize, beta: f64) -> Result<PronyFit> {
    let kf = k as f64;
    if k == 0 || !(beta >= kf * kf.log2()) || !beta.is_finite() {
        return Err(Error::param("beta", format!("{beta} below k log2 k for k={k}")));
    }
    let (raw, roots) = prony_roots(x, k)?;
    let step = (3.0 - beta / kf).exp2();
    let mut freqs: Vec<f64> = raw.iter().map(|&f| snap_to_grid(f, step)).collect();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup_by(|a, b| circle_distance(*a, *b) <= FREQ_TOL);
    if freqs.len() > 1 && circle_distance(freqs[0], *freqs.last().unwrap()) <= FREQ_TOL {
        freqs.pop();
    }
    let coeffs = solve_coeffs(&freqs, 2 * k, x);
    Ok(PronyFit { freqs, coeffs, roots })
}

fn observed_prefix(obs: &ObservationSet, k: usize) -> Result<DMatrix<f64>> {
    if k == 0 {
        return Err(Error::param("k", "must be positive"));
    }
    if 2 * k > obs.d() {
        return Err(Error::param("k", format!("2k={} exceeds d={}", 2 * k, obs.d())));
    }
    let idx: Vec<usize> = (1..=2 * k).collect();
    obs.select(&idx)
}

fn column(x: &DMatrix<f64>, l: usize) -> Vec<f64> {
    x.column(l).iter().copied().collect()
}

/// `D_l = (1/n) sum_j |y_l^(j)|^2` for per-sample coefficient vectors.
fn mean_power(coeffs: &[Vec<C64>], r: usize) -> Vec<f64> {
    let n = coeffs.len() as f64;
    (0..r).map(|l| coeffs.iter().map(|y| y[l].norm_sqr()).sum::<f64>() / n).collect()
}

/// `sqrt(sum ||F_R y - x||^2 / sum ||x||^2)` over the observed prefix.
fn relative_residual(freqs: &[f64], coeffs: &[Vec<C64>], x: &DMatrix<f64>) -> f64 {
    let rows = x.nrows();
    let f = fourier_matrix(freqs, rows);
    let (mut num, mut den) = (0.0, 0.0);
    for (l, y) in coeffs.iter().enumerate() {
        let fit = if freqs.is_empty() { DVector::zeros(rows) } else { &f * DVector::from_column_slice(y) };
        for i in 0..rows {
            num += (fit[i] - C64::new(x[(i, l)], 0.0)).norm_sqr();
            den += x[(i, l)] * x[(i, l)];
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

fn same_set(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|&f| b.iter().any(|&g| circle_distance(f, g) <= tol))
}

fn finish(obs: &ObservationSet, freqs: Vec<f64>, power: Vec<f64>) -> Result<EstimateReport> {
    let d = obs.d();
    let t_hat = cosine_sum(&freqs, &power, d);
    let mut report = EstimateReport::new("prony", t_hat, obs);
    report.model = FrequencyModel::new(d, freqs, power).ok();
    Ok(report)
}

/// Shared frequencies from the first sample, per-sample coefficients from
/// `F_R y = x[..k']`, and `T_hat = F_R diag(D) F_R^*`.
pub fn estimate_prony_exact(obs: &ObservationSet, k: usize) -> Result<EstimateReport> {
    let x = observed_prefix(obs, k)?;
    let n = x.ncols();
    let first = prony_decompose(&column(&x, 0), k)?;
    let r = first.rank();
    let freqs = first.freqs.clone();

    let coeffs: Vec<Vec<C64>> = if r == 0 {
        vec![Vec::new(); n]
    } else {
        let solver = pinv(&fourier_matrix(&freqs, r), REGRESSION_RCOND);
        (0..n)
            .map(|l| {
                let rhs = DVector::from_fn(r, |i, _| C64::new(x[(i, l)], 0.0));
                (&solver * rhs).iter().copied().collect()
            })
            .collect()
    };
    let disagreeing = (1..n)
        .into_par_iter()
        .map(|l| match prony_roots(&column(&x, l), k) {
            Ok((f, _)) if same_set(&f, &freqs, AGREEMENT_TOL) => 0,
            _ => 1,
        })
        .sum::<usize>();

    let power = mean_power(&coeffs, r);
    let residual = relative_residual(&freqs, &coeffs, &x);
    let mut report = finish(obs, freqs, power)?;
    let diag = &mut report.diagnostics;
    diag.effective_rank = Some(r);
    diag.root_radius_defect = Some(first.radius_defect());
    diag.residual = Some(residual);
    diag.disagreeing_samples = Some(disagreeing);
    if disagreeing > 0 {
        diag.warning = Some(format!(
            "{disagreeing} of {n} samples produced a different frequency set; T may not be exactly rank {k}"
        ));
    }
    Ok(report)
}

/// Reconstructs every sample from `2k` entries by inexact Prony and averages
/// the diagonals of the empirical covariance of the reconstructions.
pub fn estimate_prony_denoise(obs: &ObservationSet, k: usize, beta: f64) -> Result<EstimateReport> {
    let x = observed_prefix(obs, k)?;
    let (d, n) = (obs.d(), x.ncols());
    let fits = (0..n)
        .into_par_iter()
        .map(|l| prony_inexact(&column(&x, l), k, beta))
        .collect::<Result<Vec<_>>>()?;

    let mut xhat = DMatrix::<f64>::zeros(d, n);
    let (mut num, mut den) = (0.0, 0.0);
    for (l, fit) in fits.iter().enumerate() {
        if fit.freqs.is_empty() {
            for i in 0..2 * k {
                den += x[(i, l)] * x[(i, l)];
                num += x[(i, l)] * x[(i, l)];
            }
            continue;
        }
        let y = DVector::from_column_slice(&fit.coeffs);
        let full = fourier_matrix(&fit.freqs, d) * y;
        for i in 0..d {
            xhat[(i, l)] = full[i].re;
        }
        for i in 0..2 * k {
            num += (xhat[(i, l)] - x[(i, l)]).powi(2);
            den += x[(i, l)] * x[(i, l)];
        }
    }
    let emp = &xhat * xhat.transpose() / n as f64;
    let mut report = EstimateReport::new("prony-denoise", avg(&emp)?, obs);
    let diag = &mut report.diagnostics;
    diag.effective_rank = Some(fits.iter().map(PronyFit::rank).max().unwrap_or(0));
    diag.root_radius_defect = Some(fits.iter().fold(0.0, |m, f| m.max(f.radius_defect())));
    diag.residual = Some(if den == 0.0 { 0.0 } else { (num / den).sqrt() });
    Ok(report)
}

/// `beta = k^2 log2 d + k log2(kappa / eps)`.
pub fn conditioned_beta(k: usize, d: usize, kappa: f64, eps: f64) -> f64 {
    let kf = k as f64;
    let beta = kf * kf * (d as f64).log2() + kf * (kappa / eps).log2();
    // never below the precondition of the inexact solver
    beta.max(kf * kf.max(1.0).log2())
}

/// Chord distance `1 / (2 sqrt(d kappa))` under which two roots are merged.
pub fn cluster_tolerance(d: usize, kappa: f64) -> f64 {
    1.0 / (2.0 * (d as f64 * kappa).sqrt())
}

fn chord(f: f64, g: f64) -> f64 {
    2.0 * (PI * circle_distance(f, g)).sin()
}

/// Single-linkage clusters of points on the circle; returns circular means.
fn cluster_circle(points: &mut [f64], tol: f64) -> Vec<f64> {
    if points.is_empty() {
        return Vec::new();
    }
    points.sort_by(f64::total_cmp);
    let m = points.len();
    // open the circle at its widest gap so no cluster straddles the cut
    let (mut start, mut widest) = (0, -1.0);
    for i in 0..m {
        let gap = (points[(i + 1) % m] - points[i]).rem_euclid(1.0);
        let gap = if m == 1 { 1.0 } else { gap };
        if gap > widest {
            widest = gap;
            start = (i + 1) % m;
        }
    }
    let ordered: Vec<f64> = (0..m).map(|i| points[(start + i) % m]).collect();
    let mut centers = Vec::new();
    let mut acc = C64::new(0.0, 0.0);
    for (i, &f) in ordered.iter().enumerate() {
        if i > 0 && chord(ordered[i - 1], f) > tol {
            centers.push(acc);
            acc = C64::new(0.0, 0.0);
        }
        acc += C64::from_polar(1.0, 2.0 * PI * f);
    }
    centers.push(acc);
    let mut out: Vec<f64> = centers
        .into_iter()
        .map(|z| (z.arg() / (2.0 * PI)).rem_euclid(1.0))
        .map(|f| if f >= 1.0 { 0.0 } else { f })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Inexact Prony per sample with `beta` from [`conditioned_beta`], root
/// sets clustered into one shared frequency set, coefficients regressed
/// per sample, `T_hat = F_R diag(D) F_R^*`.
pub fn estimate_prony_conditioned(
    obs: &ObservationSet,
    k: usize,
    kappa: f64,
    eps: f64,
) -> Result<EstimateReport> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::param("kappa", format!("{kappa} is not a condition number >= 1")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param("eps", format!("{eps} outside (0, 1]")));
    }
    let x = observed_prefix(obs, k)?;
    let (d, n) = (obs.d(), x.ncols());
    let beta = conditioned_beta(k, d, kappa, eps);
    let fits = (0..n)
        .into_par_iter()
        .map(|l| prony_inexact(&column(&x, l), k, beta))
        .collect::<Result<Vec<_>>>()?;

    let rank = fits.iter().map(PronyFit::rank).max().unwrap_or(0);
    let mut pooled: Vec<f64> = fits.iter().flat_map(|f| f.freqs.iter().copied()).collect();
    let tol = cluster_tolerance(d, kappa);
    let freqs = cluster_circle(&mut pooled, tol);
    let r = freqs.len();

    let coeffs: Vec<Vec<C64>> = if r == 0 {
        vec![Vec::new(); n]
    } else {
        let solver = pinv(&fourier_matrix(&freqs, 2 * k), REGRESSION_RCOND);
        (0..n)
            .map(|l| {
                let rhs = DVector::from_fn(2 * k, |i, _| C64::new(x[(i, l)], 0.0));
                (&solver * rhs).iter().copied().collect()
            })
            .collect()
    };
    let disagreeing = fits.iter().filter(|f| !same_set(&f.freqs, &freqs, tol)).count();
    let power = mean_power(&coeffs, r);
    let residual = relative_residual(&freqs, &coeffs, &x);
    let mut report = finish(obs, freqs, power)?;
    let diag = &mut report.diagnostics;
    diag.effective_rank = Some(rank);
    diag.root_radius_defect = Some(fits.iter().fold(0.0, |m, f| m.max(f.radius_defect())));
    diag.residual = Some(residual);
    diag.disagreeing_samples = Some(disagreeing);
    if r < rank {
        diag.warning = Some(format!(
            "{r} frequency clusters for numerical rank {rank}: roots closer than {tol:.3e} were merged"
        ));
    }
    Ok(report)
}
