use crate::error::{Error, Result};
use crate::rulers::Ruler;
use crate::sampling::ObservationSet;
use crate::toeplitz::ToeplitzVector;

use super::EstimateReport;

/// `a_s = (1 / (n |R_s|)) sum_l sum_{(j,k) in R_s} x_j x_k`.
///
/// The ruler must be observed in full; extra observed entries are ignored.
pub fn estimate_by_ruler(obs: &ObservationSet, ruler: &Ruler) -> Result<EstimateReport> {
    let d = obs.d();
    if ruler.d() != d {
        return Err(Error::Dimension(format!("ruler over d={} for samples of d={d}", ruler.d())));
    }
    let idx = ruler.indices();
    let x = obs.select(idx)?;
    let n = x.ncols() as f64;
    let gram = &x * x.transpose();

    let mut sums = vec![0.0; d];
    let mut counts = vec![0usize; d];
    for (a, &j) in idx.iter().enumerate() {
        for (b, &k) in idx.iter().enumerate() {
            let s = j.abs_diff(k);
            sums[s] += gram[(a, b)];
            counts[s] += 1;
        }
    }
    let mut est = vec![0.0; d];
    for s in 0..d {
        if counts[s] == 0 {
            return Err(Error::IncompleteRuler { d, missing: s });
        }
        est[s] = sums[s] / (n * counts[s] as f64);
    }
    Ok(EstimateReport::new("ruler", ToeplitzVector::new(est)?, obs))
}
