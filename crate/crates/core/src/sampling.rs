//! Seeded Gaussian samples and entry-level observation.
//!
//! Column `l` of a batch is `B g_l` where `B B^T = Toep(a)` and `g_l` is
//! drawn from ChaCha8 stream `l` of the batch seed, so a batch of `n`
//! columns is a prefix of every larger batch with the same seed. A batch
//! may be materialized on a subset of rows only; those rows are bitwise
//! equal to the same rows of the full batch.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leverage::SamplingMatrix;
use crate::rulers::Ruler;
use crate::toeplitz::{sqrt_factor, ToeplitzVector};

/// Reusable square-root factor of a covariance.
#[derive(Debug, Clone)]
pub struct Sampler {
    factor: DMatrix<f64>,
}

impl Sampler {
    pub fn new(t: &ToeplitzVector) -> Result<Self> {
        Ok(Self { factor: sqrt_factor(t)? })
    }

    pub fn d(&self) -> usize {
        self.factor.nrows()
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    fn gaussians(&self, n: usize, seed: u64) -> DMatrix<f64> {
        let r = self.rank();
        let mut g = vec![0.0; r * n];
        if r > 0 {
            g.par_chunks_mut(r).enumerate().for_each(|(col, chunk)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(col as u64);
                for v in chunk.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                }
            });
        }
        DMatrix::from_vec(r, n, g)
    }

    pub fn draw(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        let rows: Vec<usize> = (1..=self.d()).collect();
        self.draw_rows(&rows, n, seed)
    }

    /// Materializes only `rows` (1-based) of the batch.
    pub fn draw_rows(&self, rows: &[usize], n: usize, seed: u64) -> Result<SampleBatch> {
        if n == 0 {
            return Err(Error::param("n", "need at least one sample"));
        }
        let d = self.d();
        let rows = normalize_indices(rows, d)?;
        let sub = DMatrix::from_fn(rows.len(), self.rank(), |i, j| self.factor[(rows[i] - 1, j)]);
        let values = sub * self.gaussians(n, seed);
        Ok(SampleBatch { d, n, rows, values, seed, scaled: false })
    }
}

fn normalize_indices(indices: &[usize], d: usize) -> Result<Vec<usize>> {
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > d) {
        return Err(Error::IndexOutOfRange { index: bad, d });
    }
    let mut v = indices.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// `n` vector samples in dimension `d`, possibly materialized on a row subset.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    d: usize,
    n: usize,
    /// Sorted 1-based rows present in `values`.
    rows: Vec<usize>,
    values: DMatrix<f64>,
    seed: u64,
    /// Columns carry the `1/sqrt(n)` factor.
    scaled: bool,
}

impl SampleBatch {
    /// Full batch from explicit columns.
    pub fn from_columns(values: DMatrix<f64>, seed: u64) -> Result<Self> {
        let (d, n) = values.shape();
        if d == 0 || n == 0 {
            return Err(Error::Dimension("batch must be non-empty".into()));
        }
        Ok(Self { d, n, rows: (1..=d).collect(), values, seed, scaled: false })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.d
    }

    /// Materialized rows only, in the order of [`SampleBatch::rows`].
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Copy whose columns are multiplied by `1/sqrt(n)`; idempotent.
    pub fn scaled(&self) -> Self {
        if self.scaled {
            return self.clone();
        }
        let mut out = self.clone();
        out.values /= (self.n as f64).sqrt();
        out.scaled = true;
        out
    }

    /// Entry `(i, l)` with `i` 1-based; NaN when row `i` was not materialized.
    pub fn get(&self, i: usize, l: usize) -> f64 {
        match self.rows.binary_search(&i) {
            Ok(r) => self.values[(r, l)],
            Err(_) => f64::NAN,
        }
    }
}

/// `draw_samples(t, n, seed)`: `n` unit-scale samples from `N(0, Toep(t))`.
pub fn draw_samples(t: &ToeplitzVector, n: usize, seed: u64) -> Result<SampleBatch> {
    Sampler::new(t)?.draw(n, seed)
}

/// Which entries of every sample vector are read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "indices", rename_all = "snake_case")]
pub enum Pattern {
    Full,
    Ruler(Vec<usize>),
    /// Union of sketch rows.
    Sketch(Vec<usize>),
    /// The first `m` entries.
    Prefix(usize),
}

impl Pattern {
    pub fn from_ruler(r: &Ruler) -> Self {
        Pattern::Ruler(r.indices().to_vec())
    }

    pub fn from_sketches(sketches: &[&SamplingMatrix]) -> Self {
        let mut idx: Vec<usize> = sketches.iter().flat_map(|s| s.indices()).collect();
        idx.sort_unstable();
        idx.dedup();
        Pattern::Sketch(idx)
    }

    /// Sorted, deduplicated 1-based indices.
    pub fn indices(&self, d: usize) -> Result<Vec<usize>> {
        match self {
            Pattern::Full => Ok((1..=d).collect()),
            Pattern::Prefix(m) if *m > d => Err(Error::IndexOutOfRange { index: *m, d }),
            Pattern::Prefix(m) => Ok((1..=*m).collect()),
            Pattern::Ruler(v) | Pattern::Sketch(v) => normalize_indices(v, d),
        }
    }
}

/// Sample-complexity counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub esc: usize,
    pub vsc: usize,
    pub tsc: usize,
}

/// The observed entries of a batch. Every other entry reads as NaN.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    d: usize,
    pattern: Pattern,
    indices: Vec<usize>,
    values: DMatrix<f64>,
    scaled: bool,
    counters: Counters,
}

/// Restricts `batch` to `pattern`. The same entries are read in every vector,
/// so `esc = |pattern|`, `vsc = n` and `tsc = n esc`.
pub fn observe(batch: &SampleBatch, pattern: Pattern) -> Result<ObservationSet> {
    let d = batch.d;
    let indices = pattern.indices(d)?;
    let mut values = DMatrix::zeros(indices.len(), batch.n);
    for (r, &i) in indices.iter().enumerate() {
        let src = batch.rows.binary_search(&i).map_err(|_| {
            Error::Pattern(format!("row {i} was not materialized in the sample batch"))
        })?;
        values.row_mut(r).copy_from(&batch.values.row(src));
    }
    let esc = indices.len();
    let counters = Counters { esc, vsc: batch.n, tsc: esc * batch.n };
    Ok(ObservationSet { d, pattern, indices, values, scaled: batch.scaled, counters })
}

impl ObservationSet {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.d
    }

    /// Observed rows, ordered as [`ObservationSet::indices`].
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Position of 1-based index `i` among the observed rows.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.indices.binary_search(&i).ok()
    }

    /// Entry `(i, l)` with `i` 1-based; NaN (the poisoned sentinel) when unobserved.
    pub fn get(&self, i: usize, l: usize) -> f64 {
        match self.position(i) {
            Some(r) => self.values[(r, l)],
            None => f64::NAN,
        }
    }

    /// `d x n` view with unobserved entries set to NaN.
    pub fn dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::from_element(self.d, self.n(), f64::NAN);
        for (r, &i) in self.indices.iter().enumerate() {
            out.row_mut(i - 1).copy_from(&self.values.row(r));
        }
        out
    }

    /// Observed rows at the given 1-based indices, each of which must be observed.
    pub fn select(&self, wanted: &[usize]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(wanted.len(), self.n());
        for (r, &i) in wanted.iter().enumerate() {
            let src = self
                .position(i)
                .ok_or_else(|| Error::Pattern(format!("entry {i} is not observed")))?;
            out.row_mut(r).copy_from(&self.values.row(src));
        }
        Ok(out)
    }
}

/// Writes `d, n, seed, scaled` as little-endian u64 followed by the
/// column-major entries as little-endian f64. Unmaterialized rows are NaN.
pub fn write_batch<W: Write>(batch: &SampleBatch, mut w: W) -> Result<()> {
    for h in [batch.d as u64, batch.n as u64, batch.seed, batch.scaled as u64] {
        w.write_all(&h.to_le_bytes())?;
    }
    let mut col = vec![f64::NAN; batch.d];
    for l in 0..batch.n {
        col.fill(f64::NAN);
        for (r, &i) in batch.rows.iter().enumerate() {
            col[i - 1] = batch.values[(r, l)];
        }
        for v in &col {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_batch<R: Read>(mut r: R) -> Result<SampleBatch> {
    let mut word = [0u8; 8];
    let mut header = [0u64; 4];
    for h in header.iter_mut() {
        r.read_exact(&mut word)?;
        *h = u64::from_le_bytes(word);
    }
    let [d, n, seed, scaled] = header;
    let (d, n) = (d as usize, n as usize);
    if d == 0 || n == 0 {
        return Err(Error::Dimension(format!("batch header d={d}, n={n}")));
    }
    if scaled > 1 {
        return Err(Error::Dimension(format!("scale flag {scaled} is not 0 or 1")));
    }
    let mut full = DMatrix::zeros(d, n);
    for v in full.iter_mut() {
        r.read_exact(&mut word)?;
        *v = f64::from_le_bytes(word);
    }
    let rows: Vec<usize> = (0..d).filter(|&i| !full.row(i).iter().all(|v| v.is_nan())).collect();
    let values = DMatrix::from_fn(rows.len(), n, |a, l| full[(rows[a], l)]);
    Ok(SampleBatch {
        d,
        n,
        rows: rows.into_iter().map(|i| i + 1).collect(),
        values,
        seed,
        scaled: scaled == 1,
    })
}
