//! Leverage scores, the closed-form bound for Fourier matrices, and
//! leverage-weighted row sampling.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Eigenvalues of `A* A` below this fraction of the largest are treated as zero.
pub const PINV_CUTOFF: f64 = 1e-12;

/// Default constant `c` in `p_j = min(1, tau_j c ln(d/delta) / eps^2)`.
pub const DEFAULT_OVERSAMPLING: f64 = 8.0;

/// Row leverage scores `tau_j = a_j (A* A)^+ a_j*`.
pub fn leverage_scores(a: &DMatrix<C64>) -> Vec<f64> {
    let (d, s) = a.shape();
    if d == 0 || s == 0 {
        return vec![0.0; d];
    }
    let gram = a.adjoint() * a;
    let eig = SymmetricEigen::new(gram);
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    let mut inv = DMatrix::<C64>::zeros(s, s);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > PINV_CUTOFF * lmax && lam > 0.0 {
            let v = eig.eigenvectors.column(i);
            inv += (&v * v.adjoint()).unscale(lam);
        }
    }
    let y = a * inv;
    (0..d)
        .map(|j| {
            let t: f64 = (0..s).map(|k| (y[(j, k)] * a[(j, k)].conj()).re).sum();
            t.clamp(0.0, 1.0)
        })
        .collect()
}

pub fn leverage_scores_real(a: &DMatrix<f64>) -> Vec<f64> {
    leverage_scores(&a.map(|x| C64::new(x, 0.0)))
}

/// Upper bounds on the leverage scores of any `d x s` Fourier matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeverageProfile {
    pub d: usize,
    pub s: usize,
    pub tau_bar: Vec<f64>,
}

impl LeverageProfile {
    pub fn sum(&self) -> f64 {
        self.tau_bar.iter().sum()
    }

    /// `2 + 2 s (1 + ln ceil(d/2))`
    pub fn sum_bound(&self) -> f64 {
        let half = self.d.div_ceil(2).max(1) as f64;
        2.0 + 2.0 * self.s as f64 * (1.0 + half.ln())
    }
}

/// `tau_bar_j = min(1, s / min(j, d + 1 - j))` for `j = 1..=d`.
pub fn fourier_leverage_bound(d: usize, s: usize) -> Result<LeverageProfile> {
    fourier_leverage_bound_with(d, s, None)
}

/// As [`fourier_leverage_bound`], additionally capped by the uniform bound
/// `c s^6 ln^3(s + 1) / d` when `uniform_c` is given.
pub fn fourier_leverage_bound_with(
    d: usize,
    s: usize,
    uniform_c: Option<f64>,
) -> Result<LeverageProfile> {
    if s == 0 || s > d {
        return Err(Error::param("s", format!("need 1 <= s <= d, got s={s}, d={d}")));
    }
    let uniform = match uniform_c {
        Some(c) if !(c > 0.0) => return Err(Error::param("uniform_c", "must be positive")),
        Some(c) => {
            let sf = s as f64;
            c * sf.powi(6) * (sf + 1.0).ln().powi(3) / d as f64
        }
        None => f64::INFINITY,
    };
    let tau_bar = (1..=d)
        .map(|j| {
            let dist = j.min(d + 1 - j) as f64;
            (s as f64 / dist).min(uniform).min(1.0)
        })
        .collect();
    Ok(LeverageProfile { d, s, tau_bar })
}

/// Parameters of a leverage-weighted row sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SketchParams {
    pub eps: f64,
    pub delta: f64,
    pub oversampling: f64,
    pub seed: u64,
    /// ChaCha stream; distinct streams give independent sketches from one seed.
    pub stream: u64,
}

impl SketchParams {
    pub fn new(eps: f64, delta: f64, seed: u64) -> Self {
        Self { eps, delta, oversampling: DEFAULT_OVERSAMPLING, seed, stream: 0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::param("eps", format!("{} outside (0, 1]", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::param("delta", format!("{} outside (0, 1]", self.delta)));
        }
        if !(self.oversampling > 0.0 && self.oversampling.is_finite()) {
            return Err(Error::param("oversampling", "must be positive and finite"));
        }
        Ok(())
    }

    /// `c ln(d / delta) / eps^2`
    pub fn multiplier(&self, d: usize) -> f64 {
        self.oversampling * (d as f64 / self.delta).ln() / (self.eps * self.eps)
    }

    pub fn probabilities(&self, profile: &LeverageProfile) -> Vec<f64> {
        let m = self.multiplier(profile.d);
        profile.tau_bar.iter().map(|&t| (t * m).min(1.0)).collect()
    }

    pub fn draw(&self, profile: &LeverageProfile) -> Result<SamplingMatrix> {
        self.validate()?;
        let probs = self.probabilities(profile);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        let mut rows = Vec::new();
        for (j, &p) in probs.iter().enumerate() {
            // one uniform per index keeps selections aligned across probability changes
            let u: f64 = rng.random();
            if p > 0.0 && u < p {
                rows.push(SampledRow { index: j + 1, p, scale: 1.0 / p.sqrt() });
            }
        }
        Ok(SamplingMatrix { d: profile.d, rows, seed: self.seed, expected_rows: probs.iter().sum() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledRow {
    /// 1-based source index.
    pub index: usize,
    pub p: f64,
    pub scale: f64,
}

/// Diagonal-weighted row selection `S`: row `r` of `S M` is `scale_r * M[index_r]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingMatrix {
    pub d: usize,
    pub rows: Vec<SampledRow>,
    pub seed: u64,
    pub expected_rows: f64,
}

impl SamplingMatrix {
    /// Keeps every index with unit scale.
    pub fn identity(d: usize) -> Self {
        let rows = (1..=d).map(|index| SampledRow { index, p: 1.0, scale: 1.0 }).collect();
        Self { d, rows, seed: 0, expected_rows: d as f64 }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.index).collect()
    }

    pub fn apply(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_rows(m.nrows())?;
        Ok(DMatrix::from_fn(self.rows.len(), m.ncols(), |r, c| {
            let row = &self.rows[r];
            row.scale * m[(row.index - 1, c)]
        }))
    }

    pub fn apply_complex(&self, m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        self.check_rows(m.nrows())?;
        Ok(DMatrix::from_fn(self.rows.len(), m.ncols(), |r, c| {
            let row = &self.rows[r];
            m[(row.index - 1, c)] * row.scale
        }))
    }

    fn check_rows(&self, nrows: usize) -> Result<()> {
        if nrows != self.d {
            return Err(Error::Dimension(format!(
                "sampling matrix over d={} applied to {nrows} rows",
                self.d
            )));
        }
        Ok(())
    }
}

/// [`SketchParams::draw`] with the default oversampling constant.
pub fn draw_sampling_matrix(
    profile: &LeverageProfile,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SamplingMatrix> {
    SketchParams::new(eps, delta, seed).draw(profile)
}
