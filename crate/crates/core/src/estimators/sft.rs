//! Grid-search estimator over frequency multisets with two-sided sketched regression.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leverage::{fourier_leverage_bound, SamplingMatrix, SketchParams, DEFAULT_OVERSAMPLING};
use crate::linalg::{frobenius_c, pinv, C64};
use crate::sampling::{ObservationSet, Pattern};
use crate::toeplitz::{avg_complex, fourier_matrix, ToeplitzVector};

use super::{EstimateReport, REGRESSION_RCOND};

fn default_m() -> usize {
    1
}
fn default_c1() -> f64 {
    2.0
}
fn default_c2() -> f64 {
    10.0
}
fn default_oversampling() -> f64 {
    DEFAULT_OVERSAMPLING
}
fn default_cap() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SftParams {
    /// Number of frequencies per candidate.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Net spacing; `1 / (4d)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net_step: Option<f64>,
    /// Sketch accuracy is `1 / c1`.
    #[serde(default = "default_c1")]
    pub c1: f64,
    /// Sketch failure probability is `net_step^m / c2`.
    #[serde(default = "default_c2")]
    pub c2: f64,
    #[serde(default = "default_oversampling")]
    pub oversampling: f64,
    /// Seed of the two sketches; fixed per plan, independent of the samples.
    #[serde(default)]
    pub sketch_seed: u64,
    #[serde(default = "default_cap")]
    pub candidate_cap: u64,
    /// When the net exceeds the cap, evaluate this many uniformly drawn
    /// candidates instead of failing. A heuristic, not an exhaustive search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_search: Option<u64>,
}

impl Default for SftParams {
    fn default() -> Self {
        Self {
            m: default_m(),
            net_step: None,
            c1: default_c1(),
            c2: default_c2(),
            oversampling: default_oversampling(),
            sketch_seed: 0,
            candidate_cap: default_cap(),
            random_search: None,
        }
    }
}

/// `{j * step : j * step < 1}`.
pub fn net(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::param("net_step", format!("{step} outside (0, 1]")));
    }
    let mut out = Vec::new();
    let mut j = 0u64;
    loop {
        let v = j as f64 * step;
        if v >= 1.0 - 1e-12 {
            break;
        }
        out.push(v);
        j += 1;
    }
    Ok(out)
}

/// `C(n + m - 1, m)`, saturating.
fn multiset_count(n: usize, m: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..m as u128 {
        c = c.saturating_mul(n as u128 + i) / (i + 1);
    }
    c
}

/// Sketches and net, fixed before any sample is seen.
#[derive(Debug, Clone)]
pub struct SftPlan {
    pub d: usize,
    pub params: SftParams,
    pub net_step: f64,
    pub net: Vec<f64>,
    pub s1: SamplingMatrix,
    pub s2: SamplingMatrix,
}

impl SftPlan {
    pub fn new(d: usize, params: &SftParams) -> Result<Self> {
        if params.m == 0 || params.m > d {
            return Err(Error::param("m", format!("need 1 <= m <= d, got m={}, d={d}", params.m)));
        }
        if !(params.c1 >= 1.0) || !(params.c2 > 0.0) {
            return Err(Error::param("c1/c2", "need c1 >= 1 and c2 > 0"));
        }
        let net_step = params.net_step.unwrap_or(1.0 / (4.0 * d as f64));
        let net = net(net_step)?;
        let profile = fourier_leverage_bound(d, (2 * params.m).min(d))?;
        let delta = (net_step.powi(params.m as i32) / params.c2).clamp(1e-300, 1.0);
        let sketch = SketchParams {
            eps: 1.0 / params.c1,
            delta,
            oversampling: params.oversampling,
            seed: params.sketch_seed,
            stream: 1,
        };
        let s1 = sketch.draw(&profile)?;
        let s2 = SketchParams { stream: 2, ..sketch }.draw(&profile)?;
        Ok(Self { d, params: params.clone(), net_step, net, s1, s2 })
    }

    /// Union of the two sketches' rows.
    pub fn pattern(&self) -> Pattern {
        Pattern::from_sketches(&[&self.s1, &self.s2])
    }

    pub fn candidate_count(&self) -> u128 {
        multiset_count(self.net.len(), self.params.m)
    }
}

/// Nondecreasing index tuples of length `m` over `0..n`, in lexicographic order.
fn multisets(n: usize, m: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![0u32; m];
    loop {
        out.push(cur.clone());
        let mut i = m;
        while i > 0 && cur[i - 1] as usize == n - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let v = cur[i - 1] + 1;
        cur[i - 1..].iter_mut().for_each(|c| *c = v);
    }
}

fn sketched_rows(obs: &ObservationSet, s: &SamplingMatrix, unit: f64) -> Result<DMatrix<f64>> {
    let mut y = obs.select(&s.indices())?;
    for (r, row) in s.rows.iter().enumerate() {
        y.row_mut(r).scale_mut(row.scale * unit);
    }
    Ok(y)
}

struct Candidate {
    residual: f64,
    tuple: Vec<u32>,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    match a.residual.total_cmp(&b.residual) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if a.tuple <= b.tuple {
                a
            } else {
                b
            }
        }
    }
}

/// `A1^+ C (A2^*)^+` with `A_i = S_i F_M`, and its residual.
fn fit(a1: &DMatrix<C64>, a2: &DMatrix<C64>, c: &DMatrix<C64>) -> (DMatrix<C64>, f64) {
    let w = pinv(a1, REGRESSION_RCOND) * c * pinv(&a2.adjoint(), REGRESSION_RCOND);
    let res = frobenius_c(&(a1 * &w * a2.adjoint() - c));
    (w, res)
}

/// Best frequency multiset by sketched residual, then `avg(F_M W F_M^*)`.
///
/// Unscaled observations are scaled by `1/sqrt(n)` here. Ties go to the
/// lexicographically smallest frequency tuple, so the result does not
/// depend on evaluation order.
pub fn estimate_sft(obs: &ObservationSet, plan: &SftPlan) -> Result<EstimateReport> {
    let d = obs.d();
    if plan.d != d {
        return Err(Error::Dimension(format!("plan for d={} applied to d={d}", plan.d)));
    }
    let unit = if obs.is_scaled() { 1.0 } else { 1.0 / (obs.n() as f64).sqrt() };
    let y1 = sketched_rows(obs, &plan.s1, unit)?;
    let y2 = sketched_rows(obs, &plan.s2, unit)?;
    let c = (&y1 * y2.transpose()).map(|v| C64::new(v, 0.0));

    let f_net = fourier_matrix(&plan.net, d);
    let a1_net = plan.s1.apply_complex(&f_net)?;
    let a2_net = plan.s2.apply_complex(&f_net)?;
    let columns = |a: &DMatrix<C64>, t: &[u32]| {
        DMatrix::from_fn(a.nrows(), t.len(), |r, j| a[(r, t[j] as usize)])
    };

    let m = plan.params.m;
    let required = plan.candidate_count();
    let cap = plan.params.candidate_cap as u128;
    let (tuples, random) = if required <= cap {
        (multisets(plan.net.len(), m), false)
    } else if let Some(draws) = plan.params.random_search {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.params.sketch_seed);
        rng.set_stream(3);
        let mut ts: Vec<Vec<u32>> = (0..draws)
            .map(|_| {
                let mut t: Vec<u32> =
                    (0..m).map(|_| rng.random_range(0..plan.net.len() as u32)).collect();
                t.sort_unstable();
                t
            })
            .collect();
        ts.sort();
        ts.dedup();
        (ts, true)
    } else {
        return Err(Error::NetTooLarge { required, cap });
    };

    let best = tuples
        .par_iter()
        .map(|t| {
            let (_, residual) = fit(&columns(&a1_net, t), &columns(&a2_net, t), &c);
            Candidate { residual, tuple: t.clone() }
        })
        .reduce_with(better)
        .ok_or_else(|| Error::param("net_step", "empty candidate set"))?;

    let (w, residual) = fit(&columns(&a1_net, &best.tuple), &columns(&a2_net, &best.tuple), &c);
    let f_m = columns(&f_net, &best.tuple);
    let full = &f_m * &w * f_m.adjoint();
    let a = avg_complex(&full)?;
    let (mut re2, mut im2) = (0.0, 0.0);
    for (s, z) in a.iter().enumerate() {
        let mult = if s == 0 { d } else { 2 * (d - s) } as f64;
        re2 += mult * z.re * z.re;
        im2 += mult * z.im * z.im;
    }
    let t_hat = ToeplitzVector::new(a.iter().map(|z| z.re).collect())?;

    let mut report = EstimateReport::new("sft", t_hat, obs);
    let diag = &mut report.diagnostics;
    diag.residual = Some(residual);
    diag.net_size = Some(plan.net.len());
    diag.candidates_evaluated = Some(tuples.len() as u64);
    diag.random_search = random;
    diag.effective_rank = Some(m);
    diag.imag_ratio = Some(if re2 == 0.0 { 0.0 } else { (im2 / re2).sqrt() });
    if diag.imag_ratio.unwrap_or(0.0) > 1e-8 {
        diag.warning = Some("estimate carried a non-negligible imaginary part; real part kept".into());
    }
    let freqs: Vec<f64> = best.tuple.iter().map(|&i| plan.net[i as usize]).collect();
    let power: Vec<f64> = (0..m).map(|i| w[(i, i)].re.max(0.0)).collect();
    report.model = crate::toeplitz::FrequencyModel::new(d, freqs, power).ok();
    Ok(report)
}

/// Sketched residual of every candidate, in enumeration order. For tests
/// and diagnostics; the estimator itself only keeps the best one.
pub fn candidate_residuals(obs: &ObservationSet, plan: &SftPlan) -> Result<Vec<(Vec<f64>, f64)>> {
    let d = obs.d();
    let unit = if obs.is_scaled() { 1.0 } else { 1.0 / (obs.n() as f64).sqrt() };
    let y1 = sketched_rows(obs, &plan.s1, unit)?;
    let y2 = sketched_rows(obs, &plan.s2, unit)?;
    let c = (&y1 * y2.transpose()).map(|v| C64::new(v, 0.0));
    let f_net = fourier_matrix(&plan.net, d);
    let a1 = plan.s1.apply_complex(&f_net)?;
    let a2 = plan.s2.apply_complex(&f_net)?;
    Ok(multisets(plan.net.len(), plan.params.m)
        .into_iter()
        .map(|t| {
            let pick = |a: &DMatrix<C64>| DMatrix::from_fn(a.nrows(), t.len(), |r, j| a[(r, t[j] as usize)]);
            let (_, res) = fit(&pick(&a1), &pick(&a2), &c);
            (t.iter().map(|&i| plan.net[i as usize]).collect(), res)
        })
        .collect())
}
