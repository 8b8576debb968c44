//! Small dense linear-algebra helpers shared by the estimators.
//!
//! Everything here sits on top of `nalgebra`; the functions only add the
//! relative cutoffs and conventions the estimators rely on.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Moore-Penrose pseudoinverse with singular values below `rcond * sigma_max` dropped.
pub fn pinv(a: &DMatrix<C64>, rcond: f64) -> DMatrix<C64> {
    if a.is_empty() {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = rcond * smax;
    let u = svd.u.expect("requested u");
    let v_t = svd.v_t.expect("requested v_t");
    let mut out = DMatrix::<C64>::zeros(a.ncols(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            // out += v_i * (1/s) * u_i^*
            let vi = v_t.row(i).adjoint();
            let ui = u.column(i).adjoint();
            out += (vi * ui).unscale(s);
        }
    }
    out
}

/// Real pseudoinverse, same cutoff convention as [`pinv`].
pub fn pinv_real(a: &DMatrix<f64>, rcond: f64) -> DMatrix<f64> {
    if a.is_empty() {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = rcond * smax;
    let u = svd.u.expect("requested u");
    let v_t = svd.v_t.expect("requested v_t");
    let mut out = DMatrix::<f64>::zeros(a.ncols(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += (v_t.row(i).transpose() * u.column(i).transpose()) / s;
        }
    }
    out
}

/// Number of singular values above `rcond * sigma_max`.
pub fn numerical_rank(a: &DMatrix<f64>, rcond: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rcond * smax).count()
}

/// Least-squares solution `argmin ||a y - b||` through the pseudoinverse.
pub fn lstsq(a: &DMatrix<C64>, b: &DVector<C64>, rcond: f64) -> DVector<C64> {
    pinv(a, rcond) * b
}

/// Diagonal similarity scaling by powers of two (Parlett-Reinsch), in place.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    const RADIX: f64 = 2.0;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Roots of the monic polynomial `z^k + sum_{s<k} coeffs[s] z^s`.
///
/// Eigenvalues of the balanced companion matrix.
pub fn monic_roots(coeffs: &[f64]) -> Result<Vec<C64>> {
    let k = coeffs.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k == 1 {
        return Ok(vec![C64::new(-coeffs[0], 0.0)]);
    }
    let mut comp = DMatrix::<f64>::zeros(k, k);
    for i in 1..k {
        comp[(i, i - 1)] = 1.0;
    }
    for (s, &c) in coeffs.iter().enumerate() {
        comp[(s, k - 1)] = -c;
    }
    balance(&mut comp);
    let schur = Schur::try_new(comp, f64::EPSILON, 10_000 * k)
        .ok_or_else(|| Error::Dimension("companion eigensolve did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn frobenius_c(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
