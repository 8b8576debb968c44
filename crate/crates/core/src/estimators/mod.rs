//! Covariance estimators. Each consumes an [`ObservationSet`] and never
//! touches entries outside its pattern.

mod circulant;
mod prony;
mod ruler;
mod sft;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rulers::{alpha_ruler, full_ruler, sqrt_ruler};
use crate::sampling::{Counters, ObservationSet, Pattern};
use crate::toeplitz::{FrequencyModel, ToeplitzVector};

pub use circulant::{circulant_spectrum, circulant_spectrum_complex, estimate_circulant};
pub use prony::{
    cluster_tolerance, conditioned_beta, estimate_prony_conditioned, estimate_prony_denoise,
    estimate_prony_exact, prony_decompose, prony_inexact, snap_to_grid, PronyFit, RANK_CUTOFF,
};
pub use ruler::estimate_by_ruler;
pub use sft::{candidate_residuals, estimate_sft, net, SftParams, SftPlan};

/// Relative singular-value cutoff for the regression pseudoinverses.
pub const REGRESSION_RCOND: f64 = 1e-10;

/// Numbers an estimator reports about its own run. Fields that do not apply are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates_evaluated: Option<u64>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub random_search: bool,
    /// `||Im avg(F W F*)||_F / ||Re avg(F W F*)||_F`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imag_ratio: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub circulant: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    /// Rank actually used after numerical-rank reduction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_rank: Option<usize>,
    /// Largest `| |z| - 1 |` over the raw polynomial roots.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_radius_defect: Option<f64>,
    /// Samples whose own root set disagrees with the shared frequency set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disagreeing_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: String,
    pub t_hat: ToeplitzVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<FrequencyModel>,
    pub counters: Counters,
    pub diagnostics: Diagnostics,
}

impl EstimateReport {
    pub(crate) fn new(method: &str, t_hat: ToeplitzVector, obs: &ObservationSet) -> Self {
        Self {
            method: method.to_string(),
            t_hat,
            model: None,
            counters: obs.counters(),
            diagnostics: Diagnostics::default(),
        }
    }
}

fn default_beta_for(k: usize) -> f64 {
    // comfortably above k log2 k and fine enough that snapping is far below sampling noise
    (k as f64) * 40.0
}

/// An estimator together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Method {
    Full,
    SqrtRuler,
    AlphaRuler {
        alpha: f64,
    },
    Circulant,
    Prony {
        k: usize,
    },
    PronyDenoise {
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
    PronyCond {
        k: usize,
        kappa: f64,
        eps: f64,
    },
    Sft(SftParams),
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::SqrtRuler => "sqrt-ruler",
            Method::AlphaRuler { .. } => "alpha-ruler",
            Method::Circulant => "circulant",
            Method::Prony { .. } => "prony",
            Method::PronyDenoise { .. } => "prony-denoise",
            Method::PronyCond { .. } => "prony-cond",
            Method::Sft(_) => "sft",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Method::AlphaRuler { alpha } => Some(*alpha),
            Method::Sft(p) => p.net_step,
            _ => None,
        }
    }

    /// Rank parameter, if the method takes one.
    pub fn rank(&self) -> Option<usize> {
        match self {
            Method::Prony { k } | Method::PronyDenoise { k, .. } | Method::PronyCond { k, .. } => {
                Some(*k)
            }
            Method::Sft(p) => Some(p.m),
            _ => None,
        }
    }

    /// Entries this method reads from every sample vector.
    pub fn pattern(&self, d: usize) -> Result<Pattern> {
        let prony_rows = |k: usize| {
            if k == 0 || 2 * k > d {
                Err(Error::param("k", format!("need 1 <= 2k <= d, got k={k}, d={d}")))
            } else {
                Ok(Pattern::Prefix(2 * k))
            }
        };
        match self {
            Method::Full | Method::Circulant => Ok(Pattern::Full),
            Method::SqrtRuler => Ok(Pattern::from_ruler(&sqrt_ruler(d)?)),
            Method::AlphaRuler { alpha } => Ok(Pattern::from_ruler(&alpha_ruler(d, *alpha)?)),
            Method::Prony { k } | Method::PronyDenoise { k, .. } | Method::PronyCond { k, .. } => {
                prony_rows(*k)
            }
            Method::Sft(p) => Ok(SftPlan::new(d, p)?.pattern()),
        }
    }

    pub fn estimate(&self, obs: &ObservationSet) -> Result<EstimateReport> {
        let d = obs.d();
        let out = match self {
            Method::Full => full_ruler(d).and_then(|r| estimate_by_ruler(obs, &r)),
            Method::SqrtRuler => sqrt_ruler(d).and_then(|r| estimate_by_ruler(obs, &r)),
            Method::AlphaRuler { alpha } => {
                alpha_ruler(d, *alpha).and_then(|r| estimate_by_ruler(obs, &r))
            }
            Method::Circulant => estimate_circulant(obs),
            Method::Prony { k } => estimate_prony_exact(obs, *k),
            Method::PronyDenoise { k, beta } => {
                estimate_prony_denoise(obs, *k, beta.unwrap_or_else(|| default_beta_for(*k)))
            }
            Method::PronyCond { k, kappa, eps } => estimate_prony_conditioned(obs, *k, *kappa, *eps),
            Method::Sft(p) => SftPlan::new(d, p).and_then(|plan| estimate_sft(obs, &plan)),
        };
        out.map(|mut r| {
            r.method = self.tag().to_string();
            r
        })
        .map_err(|e| Error::Method { method: self.tag().to_string(), source: Box::new(e) })
    }
}
