use nalgebra::DMatrix;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::sampling::ObservationSet;
use crate::toeplitz::ToeplitzVector;

use super::EstimateReport;

/// `lambda_j = (1/n) sum_l |(F^* x_l)_j|^2` with `F` the unitary DFT.
pub fn circulant_spectrum_complex(x: &DMatrix<C64>) -> Vec<f64> {
    let (d, n) = x.shape();
    let mut lam = vec![0.0; d];
    if d == 0 || n == 0 {
        return lam;
    }
    let fft = FftPlanner::new().plan_fft_forward(d);
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for col in x.column_iter() {
        buf.iter_mut().zip(col.iter()).for_each(|(b, v)| *b = *v);
        fft.process(&mut buf);
        for (l, z) in lam.iter_mut().zip(&buf) {
            *l += z.norm_sqr();
        }
    }
    let scale = 1.0 / (d as f64 * n as f64);
    lam.iter_mut().for_each(|l| *l *= scale);
    lam
}

pub fn circulant_spectrum(x: &DMatrix<f64>) -> Vec<f64> {
    circulant_spectrum_complex(&x.map(|v| C64::new(v, 0.0)))
}

/// Circulant estimate `F diag(lambda) F^*`, returned as its first row.
pub fn estimate_circulant(obs: &ObservationSet) -> Result<EstimateReport> {
    if !obs.is_full() {
        return Err(Error::Pattern("the circulant estimator needs every entry of every sample".into()));
    }
    let d = obs.d();
    let lam = circulant_spectrum(obs.values());
    let mut row: Vec<C64> = lam.iter().map(|&l| C64::new(l, 0.0)).collect();
    FftPlanner::new().plan_fft_inverse(d).process(&mut row);
    let a: Vec<f64> = row.iter().map(|z| z.re / d as f64).collect();
    let mut report = EstimateReport::new("circulant", ToeplitzVector::new(a)?, obs);
    report.diagnostics.circulant = true;
    report.diagnostics.eigenvalues = Some(lam);
    Ok(report)
}
