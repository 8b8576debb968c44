//! Rulers: index sets that realize every distance `0..d-1`.
//!
//! Indices are 1-based throughout this module, matching how ruler
//! constructions are usually written down.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A complete ruler over `1..=d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ruler {
    d: usize,
    indices: Vec<usize>,
    /// Indices appended by the completeness repair of [`alpha_ruler`].
    repairs: usize,
}

impl Ruler {
    /// Validates range and completeness; duplicates are removed and the indices sorted.
    pub fn new(d: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "must be positive"));
        }
        let mut indices: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > d) {
            return Err(Error::IndexOutOfRange { index: bad, d });
        }
        indices.sort_unstable();
        indices.dedup();
        if let Some(missing) = first_missing_distance(&indices, d) {
            return Err(Error::IncompleteRuler { d, missing });
        }
        Ok(Self { d, indices, repairs: 0 })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Sorted 1-based indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn repairs(&self) -> usize {
        self.repairs
    }

    pub fn distance_index(&self) -> DistanceIndex {
        DistanceIndex::new(&self.indices, self.d)
    }
}

/// Ordered pairs of ruler positions grouped by distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceIndex {
    /// `pairs[s]` lists every ordered `(j, k)` with `|j - k| = s`, 1-based.
    pairs: Vec<Vec<(usize, usize)>>,
}

impl DistanceIndex {
    pub fn new(indices: &[usize], d: usize) -> Self {
        let mut pairs = vec![Vec::new(); d];
        for &j in indices {
            for &k in indices {
                let s = j.abs_diff(k);
                if s < d {
                    pairs[s].push((j, k));
                }
            }
        }
        Self { pairs }
    }

    /// `|R_s|`
    pub fn count(&self, s: usize) -> usize {
        self.pairs[s].len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.pairs.iter().map(Vec::len).collect()
    }

    pub fn pairs(&self, s: usize) -> &[(usize, usize)] {
        &self.pairs[s]
    }

    pub fn total_pairs(&self) -> usize {
        self.pairs.iter().map(Vec::len).sum()
    }
}

fn first_missing_distance(sorted: &[usize], d: usize) -> Option<usize> {
    let mut seen = vec![false; d];
    for (a, &j) in sorted.iter().enumerate() {
        for &k in &sorted[a..] {
            let s = k - j;
            if s < d {
                seen[s] = true;
            }
        }
    }
    seen.iter().position(|&hit| !hit)
}

/// True iff every distance `0..d-1` is realized by a pair of `indices`.
pub fn is_ruler(indices: &[usize], d: usize) -> bool {
    if d == 0 || indices.iter().any(|&i| i == 0 || i > d) {
        return false;
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    first_missing_distance(&sorted, d).is_none()
}

pub fn full_ruler(d: usize) -> Result<Ruler> {
    Ruler::new(d, 1..=d)
}

fn ceil_sqrt(d: usize) -> usize {
    let mut c = (d as f64).sqrt().ceil() as usize;
    while c * c < d {
        c += 1;
    }
    while c > 1 && (c - 1) * (c - 1) >= d {
        c -= 1;
    }
    c
}

/// `{1, ..., c} ∪ {d, d - c, d - 2c, ...}` with `c = ceil(sqrt(d))`; the
/// progression stops at its last value above `c`. At most `2c - 1` indices.
pub fn sqrt_ruler(d: usize) -> Result<Ruler> {
    if d == 0 {
        return Err(Error::param("d", "must be positive"));
    }
    let c = ceil_sqrt(d);
    let mut idx: Vec<usize> = (1..=c).collect();
    let mut v = d;
    while v > c {
        idx.push(v);
        v -= c;
    }
    Ruler::new(d, idx)
}

/// `x` rounded to an integer when it is within floating-point noise of one.
fn snap_power(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        x
    }
}

/// Interpolating ruler `{1..ceil(d^a)} ∪ {d - j floor(d^(1-a)) : j < ceil(d^a)}`.
///
/// Any distance left uncovered after rounding is repaired greedily by
/// appending the smallest index that realizes it; see [`Ruler::repairs`].
pub fn alpha_ruler(d: usize, alpha: f64) -> Result<Ruler> {
    if d == 0 {
        return Err(Error::param("d", "must be positive"));
    }
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::param("alpha", format!("{alpha} outside [1/2, 1]")));
    }
    let df = d as f64;
    let head = (snap_power(df.powf(alpha)).ceil() as usize).clamp(1, d);
    let step = (snap_power(df.powf(1.0 - alpha)).floor() as usize).max(1);
    let mut idx: Vec<usize> = (1..=head).collect();
    for j in 0..head {
        match d.checked_sub(j * step) {
            Some(v) if v >= 1 => idx.push(v),
            _ => break,
        }
    }
    idx.sort_unstable();
    idx.dedup();

    let mut repairs = 0;
    while let Some(missing) = first_missing_distance(&idx, d) {
        // smallest i with i - missing or i + missing already present
        let fix = (1..=d)
            .find(|&i| {
                idx.binary_search(&i).is_err()
                    && ((i > missing && idx.binary_search(&(i - missing)).is_ok())
                        || idx.binary_search(&(i + missing)).is_ok())
            })
            .expect("some index always realizes a distance below d");
        let pos = idx.binary_search(&fix).unwrap_err();
        idx.insert(pos, fix);
        repairs += 1;
    }
    let mut ruler = Ruler::new(d, idx)?;
    ruler.repairs = repairs;
    Ok(ruler)
}

/// `Delta(R) = sum_s 1 / |R_s|`, by explicit pair enumeration.
pub fn coverage_coefficient(r: &Ruler) -> Result<f64> {
    let di = r.distance_index();
    let mut total = 0.0;
    for s in 0..r.d {
        let c = di.count(s);
        if c == 0 {
            return Err(Error::IncompleteRuler { d: r.d, missing: s });
        }
        total += 1.0 / c as f64;
    }
    Ok(total)
}

/// `2 d^(2-2a) + d^(1-a) (1 + ln ceil(d^(2a-1)))`, the coverage bound for [`alpha_ruler`].
pub fn alpha_coverage_bound(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    let tail = snap_power(df.powf(2.0 * alpha - 1.0)).ceil();
    2.0 * df.powf(2.0 - 2.0 * alpha) + df.powf(1.0 - alpha) * (1.0 + tail.ln())
}

/// `1 + (1 + ln d) / 2`, the harmonic-sum bound on `Delta` of the full ruler.
pub fn full_coverage_bound(d: usize) -> f64 {
    1.0 + 0.5 * (1.0 + (d as f64).ln())
}
