//! Parameter sweeps: per-trial error records, median-based targets and CSV output.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::matrix_spec::MatrixSpec;
use crate::sampling::{observe, Sampler};
use crate::toeplitz::{relative_error_with_norm, toeplitz_norm, ToeplitzVector};

pub const DEFAULT_N_CAP: u64 = 1 << 22;

/// Ground-truth families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    Identity,
    /// `d` frequencies in conjugate pairs, uniform on the circle, unit-exponential weights normalized to sum 1.
    RandomFull,
    /// As `RandomFull` with `k` frequencies.
    Lowrank { k: usize },
    /// A fixed matrix, independent of `d` and seed.
    Spec { spec: MatrixSpec },
}

impl Generator {
    pub fn rank(&self) -> Option<usize> {
        match self {
            Generator::Lowrank { k } => Some(*k),
            _ => None,
        }
    }

    pub fn generate(&self, d: usize, seed: u64) -> Result<MatrixSpec> {
        if d == 0 {
            return Err(Error::param("d", "must be positive"));
        }
        match self {
            Generator::Identity => {
                let mut a = vec![0.0; d];
                a[0] = 1.0;
                Ok(MatrixSpec::Toeplitz { d, a })
            }
            Generator::RandomFull => Ok(random_frequency_spec(d, d, seed)),
            Generator::Lowrank { k } => {
                if *k == 0 || *k > d {
                    return Err(Error::param("k", format!("need 1 <= k <= d, got k={k}, d={d}")));
                }
                Ok(random_frequency_spec(d, *k, seed))
            }
            Generator::Spec { spec } => {
                if spec.d() != d {
                    return Err(Error::param("d", format!("fixed spec has d={}, sweep asks {d}", spec.d())));
                }
                Ok(spec.clone())
            }
        }
    }
}

/// `count` frequencies: `count / 2` pairs `{f, 1 - f}` with `f` uniform in `(0, 1/2)`,
/// plus `f = 0` when `count` is odd.
fn random_frequency_spec(d: usize, count: usize, seed: u64) -> MatrixSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freqs = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for _ in 0..count / 2 {
        let f: f64 = loop {
            let f = rng.random::<f64>() * 0.5;
            if f > 0.0 {
                break f;
            }
        };
        let w: f64 = Exp1.sample(&mut rng);
        freqs.extend([f, 1.0 - f]);
        weights.extend([w, w]);
    }
    if count % 2 == 1 {
        freqs.push(0.0);
        weights.push(Exp1.sample(&mut rng));
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    MatrixSpec::Frequency { d, freqs, weights }
}

/// SplitMix64 finalizer, used to derive independent seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn matrix_seed(base: u64, d: usize) -> u64 {
    mix(mix(base ^ 0x6d61_7472_6978) ^ d as u64)
}

/// Sample seed of one trial; shared by all methods so they see the same vectors.
pub fn trial_seed(base: u64, d: usize, trial: usize) -> u64 {
    mix(mix(mix(base) ^ d as u64) ^ trial as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: String,
    pub d: usize,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub n: usize,
    pub esc: usize,
    pub tsc: usize,
    pub rel_err: f64,
    pub seed: u64,
    pub wall_ms: f64,
}

/// A ground truth prepared for repeated trials.
#[derive(Debug, Clone)]
pub struct Instance {
    pub d: usize,
    pub k: Option<usize>,
    pub truth: ToeplitzVector,
    truth_norm: f64,
    sampler: Sampler,
}

impl Instance {
    pub fn new(truth: ToeplitzVector, k: Option<usize>) -> Result<Self> {
        let sampler = Sampler::new(&truth)?;
        Ok(Self { d: truth.d(), k, truth_norm: toeplitz_norm(&truth), truth, sampler })
    }

    pub fn from_generator(g: &Generator, d: usize, base_seed: u64) -> Result<Self> {
        let spec = g.generate(d, matrix_seed(base_seed, d))?;
        Self::new(spec.truth()?, g.rank())
    }

    /// One estimate on `n` samples drawn with `seed`; only the method's rows are generated.
    pub fn trial(&self, method: &Method, n: usize, seed: u64) -> Result<BenchRecord> {
        let start = Instant::now();
        let pattern = method.pattern(self.d)?;
        let rows = pattern.indices(self.d)?;
        let batch = self.sampler.draw_rows(&rows, n, seed)?;
        let obs = observe(&batch, pattern)?;
        let report = method.estimate(&obs)?;
        let diff = self.truth.sub(&report.t_hat)?;
        let rel_err = relative_error_with_norm(toeplitz_norm(&diff), self.truth_norm);
        Ok(BenchRecord {
            method: method.tag().to_string(),
            d: self.d,
            k: self.k.or(method.rank()),
            alpha: method.alpha(),
            n,
            esc: report.counters.esc,
            tsc: report.counters.tsc,
            rel_err,
            seed,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }
}

/// One record per trial at a fixed `n`.
pub fn run_point(
    inst: &Instance,
    method: &Method,
    n: usize,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<BenchRecord>> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| inst.trial(method, n, trial_seed(base_seed, inst.d, t)))
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSearch {
    /// Smallest passing `n`; `None` when the cap was hit.
    pub n: Option<usize>,
    pub tsc: Option<usize>,
    pub unbounded: bool,
    /// Every `(n, median rel_err)` evaluated, in order.
    pub ladder: Vec<(usize, f64)>,
    /// Records at the returned `n`.
    pub records: Vec<BenchRecord>,
}

/// Knobs of [`tsc_to_target`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetOptions {
    pub trials: usize,
    pub base_seed: u64,
    pub n_cap: u64,
    /// Bisection stops once `hi - lo <= max(1, resolution * lo)`.
    pub resolution: f64,
}

impl Default for TargetOptions {
    fn default() -> Self {
        Self { trials: 5, base_seed: 0, n_cap: DEFAULT_N_CAP, resolution: 0.0 }
    }
}

/// Smallest `n` on a doubling-then-bisection ladder whose median relative
/// error is at most `eps`, reported as `tsc = n * esc`.
pub fn tsc_to_target(inst: &Instance, method: &Method, eps: f64, opts: &TargetOptions) -> Result<TargetSearch> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param("eps", format!("{eps} outside (0, 1]")));
    }
    let mut ladder = Vec::new();
    let mut eval = |n: usize| -> Result<(bool, Vec<BenchRecord>)> {
        let recs = run_point(inst, method, n, opts.trials, opts.base_seed)?;
        let med = median(&recs.iter().map(|r| r.rel_err).collect::<Vec<_>>());
        ladder.push((n, med));
        Ok((med <= eps, recs))
    };

    let mut n = 1usize;
    let (mut ok, mut recs) = eval(n)?;
    let mut lo = 0usize;
    while !ok {
        lo = n;
        n *= 2;
        if n as u64 > opts.n_cap {
            return Ok(TargetSearch { n: None, tsc: None, unbounded: true, ladder, records: Vec::new() });
        }
        (ok, recs) = eval(n)?;
    }
    let mut hi = n;
    let step = |lo: usize| ((opts.resolution * lo as f64) as usize).max(1);
    while hi - lo > step(lo) {
        let mid = lo + (hi - lo) / 2;
        let (pass, r) = eval(mid)?;
        if pass {
            hi = mid;
            recs = r;
        } else {
            lo = mid;
        }
    }
    let tsc = recs.first().map(|r| r.tsc).unwrap_or(0);
    Ok(TargetSearch { n: Some(hi), tsc: Some(tsc), unbounded: false, ladder, records: recs })
}

fn default_trials() -> usize {
    5
}
fn default_n_cap() -> u64 {
    DEFAULT_N_CAP
}

/// A sweep over dimensions and methods, either at fixed sample counts
/// (`n`) or searching the count that reaches `eps`, or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub generator: Generator,
    pub d: Vec<usize>,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n_cap")]
    pub n_cap: u64,
    #[serde(default)]
    pub resolution: f64,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| {
            Error::Spec(format!("sweep config line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(Error::param("eps", format!("{eps} outside (0, 1]")));
            }
        }
        if self.d.is_empty() || self.methods.is_empty() {
            return Err(Error::param("d/methods", "sweep needs at least one dimension and one method"));
        }
        if self.n.is_empty() && self.eps.is_none() {
            return Err(Error::param("n/eps", "give fixed sample counts, a target eps, or both"));
        }
        if self.n.contains(&0) {
            return Err(Error::param("n", "sample counts must be positive"));
        }
        Ok(())
    }
}

/// Summary line of a target search, one per (method, d).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub method: String,
    pub d: usize,
    pub n: Option<usize>,
    pub tsc: Option<usize>,
    pub unbounded: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub records: Vec<BenchRecord>,
    pub targets: Vec<TargetSummary>,
}

/// Runs every point; records come back sorted by `(method, d, n, seed)`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let mut out = SweepOutput::default();
    for &d in &cfg.d {
        let inst = Instance::from_generator(&cfg.generator, d, cfg.seed)?;
        for method in &cfg.methods {
            for &n in &cfg.n {
                out.records.extend(run_point(&inst, method, n, cfg.trials, cfg.seed)?);
            }
            if let Some(eps) = cfg.eps {
                let opts = TargetOptions {
                    trials: cfg.trials,
                    base_seed: cfg.seed,
                    n_cap: cfg.n_cap,
                    resolution: cfg.resolution,
                };
                let search = tsc_to_target(&inst, method, eps, &opts)?;
                out.targets.push(TargetSummary {
                    method: method.tag().to_string(),
                    d,
                    n: search.n,
                    tsc: search.tsc,
                    unbounded: search.unbounded,
                });
                out.records.extend(search.records);
            }
        }
    }
    out.records.sort_by(|a, b| {
        (&a.method, a.d, a.n, a.seed)
            .cmp(&(&b.method, b.d, b.n, b.seed))
            .then(a.alpha.unwrap_or(0.0).total_cmp(&b.alpha.unwrap_or(0.0)))
    });
    out.records.dedup_by(|a, b| {
        a.method == b.method && a.d == b.d && a.n == b.n && a.seed == b.seed && a.alpha == b.alpha
    });
    Ok(out)
}

pub const CSV_HEADER: &str = "method,d,k,alpha,n,esc,tsc,rel_err,seed,wall_ms";

fn float9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_csv<W: Write>(records: &[BenchRecord], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.d,
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.alpha.map(float9).unwrap_or_default(),
            r.n,
            r.esc,
            r.tsc,
            float9(r.rel_err),
            r.seed,
            float9(r.wall_ms),
        )?;
    }
    w.flush()?;
    Ok(())
}
