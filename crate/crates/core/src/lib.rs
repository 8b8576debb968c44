//! Sample-efficient estimation of Toeplitz covariance matrices.
//!
//! The crate is organised bottom-up: [`toeplitz`] holds the matrix
//! representations and error metrics, [`rulers`] and [`leverage`] decide
//! which coordinates to observe, [`sampling`] draws Gaussian samples and
//! applies observation patterns, and [`estimators`] turns observed samples
//! into a Toeplitz estimate. [`bench`] drives parameter sweeps.

pub mod bench;
pub mod error;
pub mod estimators;
pub mod leverage;
pub mod linalg;
pub mod matrix_spec;
pub mod rulers;
pub mod sampling;
pub mod toeplitz;

pub use error::{Error, Result};
pub use estimators::{EstimateReport, Method};
pub use matrix_spec::MatrixSpec;
pub use rulers::{alpha_ruler, coverage_coefficient, full_ruler, is_ruler, sqrt_ruler, Ruler};
pub use sampling::{observe, ObservationSet, Pattern, SampleBatch, Sampler};
pub use toeplitz::{FrequencyModel, ToeplitzVector};
