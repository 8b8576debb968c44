//! Symmetric Toeplitz matrices, off-grid Fourier models and spectral measurement.
//!
//! A symmetric Toeplitz matrix is stored by its first column `a`, with
//! `Toep(a)[j, k] = a[|j - k|]`. A [`FrequencyModel`] describes the same kind of
//! matrix as a nonnegative combination of off-grid Fourier atoms
//! `T = F_S D F_S^*`, which is how low-rank test covariances are generated.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Eigenvalues down to `-PSD_TOL * a_0` are treated as rounding noise.
pub const PSD_TOL: f64 = 1e-8;
/// Tolerance for matching a frequency with its conjugate partner.
pub const FREQ_TOL: f64 = 1e-9;

/// First column of a real symmetric Toeplitz matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzVector {
    a: Vec<f64>,
}

impl ToeplitzVector {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::param("a", "must contain at least one value"));
        }
        if let Some(bad) = a.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("a", format!("non-finite entry {bad}")));
        }
        Ok(Self { a })
    }

    pub fn zeros(d: usize) -> Self {
        Self { a: vec![0.0; d.max(1)] }
    }

    /// Diagonal vector of the d x d identity.
    pub fn identity(d: usize) -> Self {
        let mut a = vec![0.0; d.max(1)];
        a[0] = 1.0;
        Self { a }
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn into_values(self) -> Vec<f64> {
        self.a
    }

    pub fn sub(&self, other: &ToeplitzVector) -> Result<ToeplitzVector> {
        if self.d() != other.d() {
            return Err(Error::Dimension(format!(
                "toeplitz vectors of length {} and {}",
                self.d(),
                other.d()
            )));
        }
        Ok(ToeplitzVector {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
        })
    }

    /// Smallest eigenvalue of the densified matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(densify(self)).eigenvalues.min()
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL * self.a[0].abs().max(f64::MIN_POSITIVE)
    }
}

/// The d x d symmetric Toeplitz matrix with diagonal values `t`.
pub fn densify(t: &ToeplitzVector) -> DMatrix<f64> {
    let d = t.d();
    DMatrix::from_fn(d, d, |j, k| t.a[j.abs_diff(k)])
}

/// Average each diagonal `|j - k| = s` of a square matrix.
pub fn avg(m: &DMatrix<f64>) -> Result<ToeplitzVector> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "avg needs a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let d = m.nrows();
    let mut a = vec![0.0; d];
    for s in 0..d {
        let mut acc = 0.0;
        for j in 0..d - s {
            acc += m[(j, j + s)];
            if s > 0 {
                acc += m[(j + s, j)];
            }
        }
        let count = if s == 0 { d } else { 2 * (d - s) };
        a[s] = acc / count as f64;
    }
    Ok(ToeplitzVector { a })
}

/// Complex diagonal averages, for estimators that work with `F W F^*`.
pub fn avg_complex(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "avg needs a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let d = m.nrows();
    let mut a = vec![C64::new(0.0, 0.0); d];
    for (s, slot) in a.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..d - s {
            acc += m[(j, j + s)];
            if s > 0 {
                acc += m[(j + s, j)];
            }
        }
        let count = if s == 0 { d } else { 2 * (d - s) };
        *slot = acc / count as f64;
    }
    Ok(a)
}

/// Off-grid frequencies with nonnegative weights: `T = F_S diag(weights) F_S^*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyModel {
    d: usize,
    freqs: Vec<f64>,
    weights: Vec<f64>,
}

/// Distance between two frequencies on the unit circle, in cycles.
pub fn circle_distance(f: f64, g: f64) -> f64 {
    let diff = (f - g).rem_euclid(1.0);
    diff.min(1.0 - diff)
}

impl FrequencyModel {
    pub fn new(d: usize, freqs: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "must be positive"));
        }
        if freqs.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} frequencies but {} weights",
                freqs.len(),
                weights.len()
            )));
        }
        for &f in &freqs {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::param("freqs", format!("{f} outside [0, 1]")));
            }
        }
        for &w in &weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::param("weights", format!("{w} is not a nonnegative real")));
            }
        }
        for i in 0..freqs.len() {
            for j in i + 1..freqs.len() {
                if circle_distance(freqs[i], freqs[j]) <= FREQ_TOL {
                    return Err(Error::param(
                        "freqs",
                        format!("{} and {} coincide on the unit circle", freqs[i], freqs[j]),
                    ));
                }
            }
        }
        Ok(Self { d, freqs, weights })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rank(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// Every frequency must have a partner `f'` with `f + f' = 0 (mod 1)` and the same weight.
    pub fn check_conjugate_closure(&self) -> Result<()> {
        for (i, (&f, &w)) in self.freqs.iter().zip(&self.weights).enumerate() {
            let paired = self.freqs.iter().zip(&self.weights).enumerate().any(|(j, (&g, &v))| {
                let mirrored = circle_distance(f, (1.0 - g).rem_euclid(1.0)) <= FREQ_TOL;
                let same_weight = (w - v).abs() <= FREQ_TOL * w.abs().max(v.abs()).max(1.0);
                mirrored && same_weight && (i == j || circle_distance(f, g) > FREQ_TOL)
            });
            if !paired {
                return Err(Error::UnpairedFrequency { freq: f, weight: w });
            }
        }
        Ok(())
    }
}

/// `a_s = sum_j w_j cos(2 pi f_j s)`: the real part of the first column of
/// `F_S diag(w) F_S^*`. Exact for conjugate-closed inputs.
pub fn cosine_sum(freqs: &[f64], weights: &[f64], d: usize) -> ToeplitzVector {
    let mut a = vec![0.0; d.max(1)];
    for (&f, &w) in freqs.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (s, slot) in a.iter_mut().enumerate() {
            *slot += w * (2.0 * PI * f * s as f64).cos();
        }
    }
    ToeplitzVector { a }
}

/// Forward Vandermonde synthesis of a conjugate-closed frequency model.
pub fn synthesize(fm: &FrequencyModel) -> Result<ToeplitzVector> {
    fm.check_conjugate_closure()?;
    Ok(cosine_sum(&fm.freqs, &fm.weights, fm.d))
}

/// d x |freqs| matrix with column j equal to `[1, e^{-2 pi i f_j}, ..., e^{-2 pi i (d-1) f_j}]`.
pub fn fourier_matrix(freqs: &[f64], d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, freqs.len(), |row, col| {
        C64::from_polar(1.0, -2.0 * PI * freqs[col] * row as f64)
    })
}

/// Outcome of a power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralNorm {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration for the largest absolute eigenvalue of a symmetric matrix.
///
/// Each step takes the larger of `||M v||` and the largest absolute Ritz value
/// on `span{v, M v}` for the current unit iterate `v`. Both are lower bounds on
/// `|lambda|_max`. The Ritz value resolves a pair `+-lambda` of nearly equal
/// magnitude, where `||M v||` alone stalls between the two. Iteration stops once
/// the step estimate changes by less than `rel_tol` relative; the reported value
/// is the largest estimate seen.
#[derive(Debug, Clone, Copy)]
pub struct PowerIteration {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            rel_tol: 1e-9,
            seed: 0x5eed_cafe,
        }
    }
}

impl PowerIteration {
    pub fn run(&self, m: &DMatrix<f64>) -> SpectralNorm {
        let d = m.nrows();
        assert_eq!(d, m.ncols(), "spectral_norm needs a square matrix");
        self.run_operator(d, |v, w| w.gemv(1.0, m, v, 0.0))
    }

    /// Power iteration on a symmetric operator given by its action `w = M v`.
    pub fn run_operator<F>(&self, d: usize, mut apply: F) -> SpectralNorm
    where
        F: FnMut(&DVector<f64>, &mut DVector<f64>),
    {
        if d == 0 {
            return SpectralNorm { value: 0.0, iterations: 0, converged: true };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut v = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        v.normalize_mut();
        let mut w = DVector::zeros(d);
        let mut u = DVector::zeros(d);
        apply(&v, &mut w);
        let (mut best, mut prev) = (0.0f64, 0.0f64);
        for it in 1..=self.max_iter {
            let norm = w.norm();
            if norm == 0.0 || !norm.is_finite() {
                return SpectralNorm { value: norm, iterations: it, converged: norm == 0.0 };
            }
            apply(&w, &mut u);
            // Rayleigh-Ritz on span{v, w}: q2 = r / |r| with r = w - (v.w) v
            let alpha = v.dot(&w);
            let r = &w - &v * alpha;
            let rn = r.norm();
            let mut cur = norm;
            if rn > 1e-12 * norm {
                let c = u.dot(&r) / (rn * rn) - alpha;
                let ritz = ((alpha + c) / 2.0).abs() + (((alpha - c) / 2.0).powi(2) + rn * rn).sqrt();
                if ritz.is_finite() {
                    cur = cur.max(ritz);
                }
            }
            best = best.max(cur);
            let change = (cur - prev).abs();
            prev = cur;
            std::mem::swap(&mut v, &mut w);
            std::mem::swap(&mut w, &mut u);
            v.unscale_mut(norm);
            w.unscale_mut(norm);
            if it > 1 && change <= self.rel_tol * cur {
                return SpectralNorm { value: best, iterations: it, converged: true };
            }
        }
        SpectralNorm { value: best, iterations: self.max_iter, converged: false }
    }
}

/// `Toep(a) v` through a circulant embedding of length `2d`.
struct ToeplitzMatvec {
    d: usize,
    symbol: Vec<C64>,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
    buf: Vec<C64>,
    scratch: Vec<C64>,
}

impl ToeplitzMatvec {
    fn new(t: &ToeplitzVector) -> Self {
        let d = t.d();
        let len = 2 * d;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let mut symbol = vec![C64::new(0.0, 0.0); len];
        symbol[0] = C64::new(t.a[0], 0.0);
        for s in 1..d {
            symbol[s] = C64::new(t.a[s], 0.0);
            symbol[len - s] = C64::new(t.a[s], 0.0);
        }
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let mut scratch = vec![C64::new(0.0, 0.0); scratch_len];
        fwd.process_with_scratch(&mut symbol, &mut scratch);
        let scale = 1.0 / len as f64;
        symbol.iter_mut().for_each(|z| *z *= scale);
        Self { d, symbol, fwd, inv, buf: vec![C64::new(0.0, 0.0); len], scratch }
    }

    fn apply(&mut self, v: &DVector<f64>, w: &mut DVector<f64>) {
        let d = self.d;
        for (i, b) in self.buf.iter_mut().enumerate() {
            *b = C64::new(if i < d { v[i] } else { 0.0 }, 0.0);
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        self.buf.iter_mut().zip(&self.symbol).for_each(|(b, s)| *b *= s);
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        for i in 0..d {
            w[i] = self.buf[i].re;
        }
    }
}

/// Largest absolute eigenvalue of a symmetric matrix with default power-iteration settings.
pub fn spectral_norm(m: &DMatrix<f64>) -> SpectralNorm {
    PowerIteration::default().run(m)
}

/// `||Toep(t)||_2`.
///
/// Same power iteration as [`spectral_norm`], with the matrix applied by FFT
/// instead of being formed.
pub fn toeplitz_norm(t: &ToeplitzVector) -> f64 {
    if t.a.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let mut op = ToeplitzMatvec::new(t);
    PowerIteration::default().run_operator(t.d(), |v, w| op.apply(v, w)).value
}

/// `||Toep(truth) - Toep(estimate)||_2 / ||Toep(truth)||_2`, with `0/0 = 0`.
pub fn relative_error(truth: &ToeplitzVector, estimate: &ToeplitzVector) -> Result<f64> {
    let num = toeplitz_norm(&truth.sub(estimate)?);
    let den = toeplitz_norm(truth);
    Ok(relative_error_with_norm(num, den))
}

pub(crate) fn relative_error_with_norm(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Values of `L_a(x) = a_0 + 2 sum_{s>=1} a_s cos(2 pi s x)` on `x = g / grid_points`.
fn dtft_on_grid(t: &ToeplitzVector, grid_points: usize) -> Vec<f64> {
    let d = t.d();
    let g = grid_points.max(d).max(1);
    let mut buf = vec![C64::new(0.0, 0.0); g];
    buf[0] = C64::new(t.a[0], 0.0);
    for s in 1..d {
        buf[s] = C64::new(2.0 * t.a[s], 0.0);
    }
    FftPlanner::new().plan_fft_forward(g).process(&mut buf);
    buf.iter().map(|z| z.re).collect()
}

/// Maximum of the symbol `L_a` over a uniform grid of `grid_points` points on [0, 1).
///
/// Meant to be called with `grid_points >= 4 d^2`; the gap to the true supremum is
/// bounded by [`dtft_grid_slack`]. Grids smaller than `d` are enlarged to `d`.
pub fn dtft_norm_bound(t: &ToeplitzVector, grid_points: usize) -> f64 {
    dtft_on_grid(t, grid_points)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Upper bound on `sup_x L_a(x) - dtft_norm_bound(t, grid_points)`.
///
/// Bernstein's inequality gives `|L'| <= 2 pi (d-1) sup|L|`, and every point is
/// within half a grid step of the grid, so with `r = pi (d-1) / G`:
/// `sup|L| <= max_grid|L| / (1 - r)` and the slack is at most `r sup|L|`.
/// Returns infinity when the grid is too coarse for the bound (`r >= 1`).
pub fn dtft_grid_slack(t: &ToeplitzVector, grid_points: usize) -> f64 {
    let vals = dtft_on_grid(t, grid_points);
    let g = vals.len() as f64;
    let r = PI * (t.d() as f64 - 1.0) / g;
    if r >= 1.0 {
        return f64::INFINITY;
    }
    let max_abs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    r * max_abs / (1.0 - r)
}

/// `B` with `B B^T = Toep(t)`: eigenvectors scaled by the square roots of the
/// eigenvalues. Eigenvalues in `[-PSD_TOL a_0, 0)` are clamped to zero and
/// columns whose eigenvalue is negligible (`<= 1e-14 lambda_max`) are dropped,
/// so the result is `d x r` with `r` the numerical rank.
pub fn sqrt_factor(t: &ToeplitzVector) -> Result<DMatrix<f64>> {
    let d = t.d();
    let eig = SymmetricEigen::new(densify(t));
    let tol = PSD_TOL * t.a[0].abs();
    let min_eig = eig.eigenvalues.min();
    if min_eig < -tol {
        return Err(Error::NotPsd { min_eig, tol });
    }
    let lmax = eig.eigenvalues.max().max(0.0);
    let keep: Vec<usize> = (0..d)
        .filter(|&i| eig.eigenvalues[i] > 1e-14 * lmax && eig.eigenvalues[i] > 0.0)
        .collect();
    let mut b = DMatrix::zeros(d, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].max(0.0).sqrt();
        b.set_column(c, &(eig.eigenvectors.column(i) * s));
    }
    Ok(b)
}

/// Tail quantities of the eigenvalue spectrum used in low-rank error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowRankStats {
    /// `||T - T_k||_2`
    pub norm2_tail: f64,
    /// `tr(T - T_k)`
    pub trace_tail: f64,
    /// `tr(T)`
    pub trace: f64,
}

pub fn low_rank_stats(t: &ToeplitzVector, k: usize) -> Result<LowRankStats> {
    let d = t.d();
    if k > d {
        return Err(Error::param("k", format!("{k} exceeds d = {d}")));
    }
    let mut sv: Vec<f64> = SymmetricEigen::new(densify(t))
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    // Rounding noise on exactly-zero eigenvalues is not reported as tail mass.
    let floor = 1e-12 * sv[0].max(f64::MIN_POSITIVE);
    let clean = |v: f64| if v <= floor { 0.0 } else { v };
    let norm2_tail = sv.get(k).copied().map(clean).unwrap_or(0.0);
    let trace_tail = sv[k..].iter().copied().map(clean).sum();
    Ok(LowRankStats {
        norm2_tail,
        trace_tail,
        trace: d as f64 * t.a[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tv(a: &[f64]) -> ToeplitzVector {
        ToeplitzVector::new(a.to_vec()).unwrap()
    }

    #[test]
    fn densify_examples() {
        assert_eq!(densify(&tv(&[1.0, 0.0, 0.0])), DMatrix::identity(3, 3));
        assert_eq!(
            densify(&tv(&[2.0, 1.0])),
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])
        );
        let ones = densify(&tv(&[1.0, 1.0, 1.0]));
        assert!(ones.iter().all(|&v| v == 1.0));
        let mut eig: Vec<f64> = SymmetricEigen::new(ones).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        assert_relative_eq!(eig[0], 3.0, epsilon = 1e-12);
        assert!(eig[1].abs() < 1e-12 && eig[2].abs() < 1e-12);
    }

    #[test]
    fn avg_examples() {
        let t = tv(&[3.0, -1.0, 0.5, 2.0]);
        assert_eq!(avg(&densify(&t)).unwrap(), t);

        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert_eq!(avg(&m).unwrap().values(), &[1.0, 1.0]);

        // x x^T with x = [1, 2]: diagonal {1, 4}, off-diagonal {2, 2}
        let x = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(avg(&(&x * x.transpose())).unwrap().values(), &[2.5, 2.0]);

        assert!(avg(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn synthesize_examples() {
        let fm = FrequencyModel::new(3, vec![0.0], vec![1.0]).unwrap();
        assert_eq!(synthesize(&fm).unwrap().values(), &[1.0, 1.0, 1.0]);

        let fm = FrequencyModel::new(2, vec![0.5], vec![1.0]).unwrap();
        let a = synthesize(&fm).unwrap();
        assert_relative_eq!(a.values()[0], 1.0);
        assert_relative_eq!(a.values()[1], -1.0);

        let fm = FrequencyModel::new(3, vec![0.25, 0.75], vec![0.5, 0.5]).unwrap();
        let a = synthesize(&fm).unwrap();
        for (got, want) in a.values().iter().zip([1.0, 0.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn synthesize_rejects_unpaired_frequency() {
        let fm = FrequencyModel::new(4, vec![0.1, 0.9, 0.3], vec![1.0, 1.0, 2.0]).unwrap();
        match synthesize(&fm) {
            Err(Error::UnpairedFrequency { freq, .. }) => assert_eq!(freq, 0.3),
            other => panic!("expected unpaired frequency, got {other:?}"),
        }
        // pair exists but weights differ
        let fm = FrequencyModel::new(4, vec![0.1, 0.9], vec![1.0, 2.0]).unwrap();
        assert!(matches!(synthesize(&fm), Err(Error::UnpairedFrequency { .. })));
    }

    #[test]
    fn frequency_model_rejects_bad_input() {
        assert!(FrequencyModel::new(0, vec![], vec![]).is_err());
        assert!(FrequencyModel::new(4, vec![0.1], vec![]).is_err());
        assert!(FrequencyModel::new(4, vec![1.5], vec![1.0]).is_err());
        assert!(FrequencyModel::new(4, vec![0.1], vec![-1.0]).is_err());
        assert!(FrequencyModel::new(4, vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn synthesize_matches_matrix_product() {
        let freqs = vec![0.0, 0.137, 0.863, 0.5];
        let weights = vec![0.7, 1.3, 1.3, 0.2];
        let fm = FrequencyModel::new(9, freqs.clone(), weights.clone()).unwrap();
        let dense = densify(&synthesize(&fm).unwrap());
        let f = fourier_matrix(&freqs, 9);
        let dmat = DMatrix::from_diagonal(&DVector::from_vec(weights).map(|w| C64::new(w, 0.0)));
        let prod = &f * dmat * f.adjoint();
        let diff: f64 = prod
            .iter()
            .zip(dense.iter())
            .map(|(p, q)| (p - C64::new(*q, 0.0)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-10 * dense.norm());
    }

    #[test]
    fn fourier_matrix_examples() {
        let f = fourier_matrix(&[0.0], 4);
        assert!(f.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        let f = fourier_matrix(&[0.5], 4);
        for (z, want) in f.iter().zip([1.0, -1.0, 1.0, -1.0]) {
            assert!((z - C64::new(want, 0.0)).norm() < 1e-12);
        }
        let d = 8;
        let grid: Vec<f64> = (0..d).map(|j| j as f64 / d as f64).collect();
        let f = fourier_matrix(&grid, d);
        let gram = f.adjoint() * &f;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { d as f64 } else { 0.0 };
                assert!((gram[(i, j)] - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn spectral_norm_examples() {
        let id = spectral_norm(&DMatrix::identity(5, 5));
        assert!(id.converged);
        assert_relative_eq!(id.value, 1.0, max_relative = 1e-6);
        assert_relative_eq!(spectral_norm(&DMatrix::from_element(4, 4, 1.0)).value, 4.0, max_relative = 1e-6);
        let tri = spectral_norm(&densify(&tv(&[2.0, 1.0, 0.0])));
        assert_relative_eq!(tri.value, 2.0 + 2f64.sqrt(), max_relative = 1e-6);
        assert_eq!(spectral_norm(&DMatrix::zeros(3, 3)).value, 0.0);
    }

    #[test]
    fn spectral_norm_reports_non_convergence() {
        // eigenvalues 1 and 0.9999: far too slow for a 5-iteration cap
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.9999, 0.5]));
        let res = PowerIteration { max_iter: 5, ..Default::default() }.run(&m);
        assert!(!res.converged);
        assert!(res.value <= 1.0 + 1e-12 && res.value > 0.5);
    }

    #[test]
    fn spectral_norm_handles_symmetric_pair() {
        // eigenvalues +3 and -3: sign oscillation must not stall the estimate
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]);
        assert_relative_eq!(spectral_norm(&m).value, 3.0, max_relative = 1e-9);
    }

    #[test]
    fn spectral_norm_separates_near_opposite_pair() {
        // |lambda| 1, 1 - 1e-4 with opposite signs, plus a bulk that mixes both into v
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g: DMatrix<f64> = DMatrix::from_fn(6, 6, |_, _| StandardNormal.sample(&mut rng));
        let q = g.qr().q();
        let lam = DVector::from_vec(vec![1.0, -(1.0 - 1e-4), 0.97, -0.5, 0.3, 0.0]);
        let m = &q * DMatrix::from_diagonal(&lam) * q.transpose();
        assert_relative_eq!(spectral_norm(&m).value, 1.0, max_relative = 1e-7);
    }

    #[test]
    fn fft_norm_matches_dense_norm() {
        for (d, seed) in [(1usize, 0u64), (2, 1), (7, 2), (64, 3), (129, 4)] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let t = tv(&a);
            let dense = spectral_norm(&densify(&t)).value;
            assert_relative_eq!(toeplitz_norm(&t), dense, max_relative = 1e-7);
        }
        assert_eq!(toeplitz_norm(&ToeplitzVector::zeros(5)), 0.0);
    }

    #[test]
    fn dtft_examples() {
        assert_relative_eq!(dtft_norm_bound(&tv(&[1.0, 0.0, 0.0]), 36), 1.0, epsilon = 1e-12);
        assert_relative_eq!(dtft_norm_bound(&tv(&[1.0, 1.0]), 16), 3.0, epsilon = 1e-12);
        assert_relative_eq!(dtft_norm_bound(&tv(&[1.0, -1.0]), 16), 3.0, epsilon = 1e-12);
        // r = pi/16: slack = 3 r / (1 - r)
        let r = PI / 16.0;
        assert_relative_eq!(dtft_grid_slack(&tv(&[1.0, 1.0]), 16), 3.0 * r / (1.0 - r), epsilon = 1e-12);
        assert!(dtft_grid_slack(&tv(&[1.0, 1.0]), 4096) < 3e-3);
        assert!(dtft_grid_slack(&tv(&[1.0, 0.5, 0.2, 0.1]), 2).is_infinite());
    }

    #[test]
    fn sqrt_factor_examples() {
        let b = sqrt_factor(&ToeplitzVector::identity(3)).unwrap();
        assert!((&b * b.transpose() - DMatrix::identity(3, 3)).norm() < 1e-10);

        let b = sqrt_factor(&tv(&[4.0, 0.0])).unwrap();
        assert!((&b * b.transpose() - DMatrix::identity(2, 2) * 4.0).norm() < 1e-10);

        let b = sqrt_factor(&tv(&[1.0, 1.0])).unwrap();
        assert_eq!(b.ncols(), 1);
        assert!((&b * b.transpose() - DMatrix::from_element(2, 2, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn sqrt_factor_rejects_indefinite() {
        // eigenvalues 1 +/- 2
        assert!(matches!(sqrt_factor(&tv(&[1.0, 2.0])), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn low_rank_stats_examples() {
        let s = low_rank_stats(&ToeplitzVector::identity(4), 4).unwrap();
        assert_eq!((s.norm2_tail, s.trace_tail, s.trace), (0.0, 0.0, 4.0));
        let s = low_rank_stats(&tv(&[1.0, 1.0, 1.0]), 1).unwrap();
        assert_eq!((s.norm2_tail, s.trace_tail, s.trace), (0.0, 0.0, 3.0));
        let s = low_rank_stats(&ToeplitzVector::identity(4), 1).unwrap();
        assert_relative_eq!(s.norm2_tail, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.trace_tail, 3.0, epsilon = 1e-12);
        assert_eq!(s.trace, 4.0);
        assert!(low_rank_stats(&ToeplitzVector::identity(4), 5).is_err());
    }
}
