//! JSON description of a ground-truth covariance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::toeplitz::{synthesize, PSD_TOL, FrequencyModel, ToeplitzVector};

/// `{"kind":"toeplitz","d":N,"a":[...]}` or
/// `{"kind":"frequency","d":N,"freqs":[...],"weights":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MatrixSpec {
    Toeplitz { d: usize, a: Vec<f64> },
    Frequency { d: usize, freqs: Vec<f64>, weights: Vec<f64> },
}

#[derive(Deserialize)]
struct KindOnly {
    kind: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct ToeplitzRepr {
    kind: String,
    d: usize,
    a: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct FrequencyRepr {
    kind: String,
    d: usize,
    freqs: Vec<f64>,
    weights: Vec<f64>,
}

impl MatrixSpec {
    /// Parses and validates; schema errors carry the line, column and field.
    pub fn from_json(text: &str) -> Result<Self> {
        // Dispatch on `kind` first, then parse the text again as the concrete
        // shape so that errors keep their source position.
        let located = |e: serde_json::Error| Error::Spec(e.to_string());
        let kind: KindOnly = serde_json::from_str(text).map_err(located)?;
        let spec = match kind.kind.as_str() {
            "toeplitz" => {
                let r: ToeplitzRepr = serde_json::from_str(text).map_err(located)?;
                let spec = MatrixSpec::Toeplitz { d: r.d, a: r.a };
                let lam = spec.truth()?.min_eigenvalue();
                if lam < -PSD_TOL {
                    return Err(Error::Spec(format!(
                        "field `a`: not positive semidefinite, smallest eigenvalue {lam:.3e}"
                    )));
                }
                spec
            }
            "frequency" => {
                let r: FrequencyRepr = serde_json::from_str(text).map_err(located)?;
                MatrixSpec::Frequency { d: r.d, freqs: r.freqs, weights: r.weights }
            }
            other => {
                return Err(Error::Spec(format!(
                    "field `kind`: unknown kind `{other}`, expected `toeplitz` or `frequency`"
                )))
            }
        };
        spec.truth()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn d(&self) -> usize {
        match self {
            MatrixSpec::Toeplitz { d, .. } | MatrixSpec::Frequency { d, .. } => *d,
        }
    }

    pub fn model(&self) -> Result<Option<FrequencyModel>> {
        match self {
            MatrixSpec::Toeplitz { .. } => Ok(None),
            MatrixSpec::Frequency { d, freqs, weights } => {
                let fm = FrequencyModel::new(*d, freqs.clone(), weights.clone())
                    .map_err(|e| Error::Spec(format!("field `freqs`/`weights`: {e}")))?;
                Ok(Some(fm))
            }
        }
    }

    /// The covariance's first column.
    pub fn truth(&self) -> Result<ToeplitzVector> {
        match self {
            MatrixSpec::Toeplitz { d, a } => {
                if a.len() != *d {
                    return Err(Error::Spec(format!(
                        "field `a`: expected {d} entries, found {}",
                        a.len()
                    )));
                }
                ToeplitzVector::new(a.clone()).map_err(|e| Error::Spec(format!("field `a`: {e}")))
            }
            MatrixSpec::Frequency { .. } => {
                let fm = self.model()?.expect("frequency spec has a model");
                synthesize(&fm).map_err(|e| Error::Spec(format!("field `freqs`: {e}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_kinds() {
        let t = MatrixSpec::from_json(r#"{"kind":"toeplitz","d":2,"a":[1.0,0.5]}"#).unwrap();
        assert_eq!(t.truth().unwrap().values(), &[1.0, 0.5]);
        let f = MatrixSpec::from_json(
            r#"{"kind":"frequency","d":3,"freqs":[0.25,0.75],"weights":[0.5,0.5]}"#,
        )
        .unwrap();
        let a = f.truth().unwrap();
        assert!((a.values()[0] - 1.0).abs() < 1e-12 && (a.values()[2] + 1.0).abs() < 1e-12);
        let back = MatrixSpec::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = MatrixSpec::from_json("{\"kind\":\"toeplitz\",\n\"d\":2,\"b\":[1]}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("`b`"), "{msg}");

        let err = MatrixSpec::from_json(r#"{"kind":"toeplitz","d":3,"a":[1.0]}"#).unwrap_err();
        assert!(err.to_string().contains("field `a`"));

        let err = MatrixSpec::from_json(r#"{"kind":"frequency","d":3,"freqs":[0.1],"weights":[1]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("freqs"));

        assert!(MatrixSpec::from_json(r#"{"kind":"circulant","d":3}"#).is_err());

        let err = MatrixSpec::from_json(r#"{"kind":"toeplitz","d":2,"a":[1.0,2.0]}"#).unwrap_err();
        assert!(err.to_string().contains("field `a`"));
    }
}
