//! ZZ feature map: `U(x) = (exp(i Σ_S φ_S(x) Π_{i∈S} Z_i) · H^{⊗n})^r`
//! with `φ_i(x) = x_i` and `φ_ij(x) = (π − x_i)(π − x_j)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{check_qubits, StateVector, DEFAULT_MAX_QUBITS};

/// Which qubit pairs receive a ZZ phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    /// Nearest neighbours `(i, i+1)`.
    Linear,
    /// Every unordered pair.
    Full,
}

impl Entanglement {
    pub fn pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Linear => (0..n_qubits.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            Entanglement::Full => (0..n_qubits)
                .flat_map(|i| (i + 1..n_qubits).map(move |j| (i, j)))
                .collect(),
        }
    }
}

impl fmt::Display for Entanglement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entanglement::Linear => "linear",
            Entanglement::Full => "full",
        })
    }
}

impl FromStr for Entanglement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Entanglement::Linear),
            "full" => Ok(Entanglement::Full),
            other => Err(Error::Config(format!(
                "unknown entanglement strategy {other:?} (expected \"linear\" or \"full\")"
            ))),
        }
    }
}

fn default_repetitions() -> usize {
    1
}

fn default_max_qubits() -> usize {
    DEFAULT_MAX_QUBITS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMapConfig {
    pub n_qubits: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub entanglement: Entanglement,
    #[serde(default = "default_max_qubits")]
    pub max_qubits: usize,
}

impl FeatureMapConfig {
    pub fn new(n_qubits: usize, repetitions: usize, entanglement: Entanglement) -> Self {
        Self {
            n_qubits,
            repetitions,
            entanglement,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }

    pub fn with_qubits(self, n_qubits: usize) -> Self {
        Self { n_qubits, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_qubits(self.n_qubits, self.max_qubits)?;
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.entanglement.pairs(self.n_qubits)
    }
}

/// A classical datum. Only finite feature values are accepted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint(Vec<f64>);

impl DataPoint {
    pub fn new(features: Vec<f64>) -> Result<Self> {
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("feature {i} is not finite")));
        }
        Ok(Self(features))
    }

    pub fn features(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for DataPoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodingAngles {
    pub singles: Vec<f64>,
    pub pairs: BTreeMap<(usize, usize), f64>,
}

pub fn encoding_angles(x: &DataPoint, cfg: &FeatureMapConfig) -> Result<EncodingAngles> {
    let n = cfg.n_qubits;
    if x.len() < n {
        return Err(Error::Shape {
            expected: n,
            got: x.len(),
        });
    }
    let f = x.features();
    let singles = f[..n].to_vec();
    let pairs = cfg
        .pairs()
        .into_iter()
        .map(|(i, j)| ((i, j), (PI - f[i]) * (PI - f[j])))
        .collect();
    Ok(EncodingAngles { singles, pairs })
}

impl EncodingAngles {
    /// Diagonal phase of `exp(i Σ φ_S Π Z)` on every basis state, with
    /// `z_i(b) = +1` when bit `i` of `b` is 0.
    pub fn basis_phases(&self) -> Vec<f64> {
        let n = self.singles.len();
        let z = |b: usize, i: usize| if b >> i & 1 == 0 { 1.0 } else { -1.0 };
        (0..1usize << n)
            .map(|b| {
                let single: f64 = self.singles.iter().enumerate().map(|(i, &a)| a * z(b, i)).sum();
                let pair: f64 = self
                    .pairs
                    .iter()
                    .map(|(&(i, j), &a)| a * z(b, i) * z(b, j))
                    .sum();
                single + pair
            })
            .collect()
    }
}

/// `U(x)|0⟩`.
pub fn embed(x: &DataPoint, cfg: &FeatureMapConfig) -> Result<StateVector> {
    cfg.validate()?;
    let phases = encoding_angles(x, cfg)?.basis_phases();
    let mut state = StateVector::vacuum_with_cap(cfg.n_qubits, cfg.max_qubits)?;
    for _ in 0..cfg.repetitions {
        state = state.apply_hadamard_layer().apply_diagonal_phase(&phases)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn point(v: &[f64]) -> DataPoint {
        DataPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn angles() {
        let full2 = FeatureMapConfig::new(2, 1, Entanglement::Full);
        let a = encoding_angles(&point(&[PI, PI]), &full2).unwrap();
        assert_eq!(a.singles, vec![PI, PI]);
        assert_eq!(a.pairs[&(0, 1)], 0.0);

        let b = encoding_angles(&point(&[0.0, 0.0]), &full2).unwrap();
        assert_abs_diff_eq!(b.pairs[&(0, 1)], PI * PI, epsilon = 1e-15);

        let x4 = point(&[0.1, 0.2, 0.3, 0.4]);
        let full4 = FeatureMapConfig::new(4, 1, Entanglement::Full);
        let lin4 = FeatureMapConfig::new(4, 1, Entanglement::Linear);
        assert_eq!(encoding_angles(&x4, &full4).unwrap().pairs.len(), 6);
        assert_eq!(encoding_angles(&x4, &lin4).unwrap().pairs.len(), 3);

        assert!(matches!(
            encoding_angles(&point(&[0.1]), &full2),
            Err(Error::Shape { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn single_qubit_embedding() {
        let x0 = 0.83;
        let cfg = FeatureMapConfig::new(1, 1, Entanglement::Linear);
        let s = embed(&point(&[x0]), &cfg).unwrap();
        let expect = [
            Complex64::from_polar(FRAC_1_SQRT_2, x0),
            Complex64::from_polar(FRAC_1_SQRT_2, -x0),
        ];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert_abs_diff_eq!((a - e).norm(), 0.0, epsilon = 1e-15);
        }

        let twice = embed(&point(&[0.0]), &FeatureMapConfig::new(1, 2, Entanglement::Linear)).unwrap();
        assert_abs_diff_eq!(twice.amplitudes()[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(twice.amplitudes()[1].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn embedding_is_normalized_and_deterministic() {
        let cfg = FeatureMapConfig::new(5, 3, Entanglement::Full);
        let x = point(&[0.3, -1.2, 2.5, 0.7, -0.1]);
        let a = embed(&x, &cfg).unwrap();
        let b = embed(&x, &cfg).unwrap();
        assert_abs_diff_eq!(a.norm_sqr(), 1.0, epsilon = 1e-10);
        assert_eq!(a, b);
    }

    #[test]
    fn config_errors() {
        let x = point(&[0.0; 20]);
        assert!(embed(&x, &FeatureMapConfig::new(0, 1, Entanglement::Full)).is_err());
        assert!(embed(&x, &FeatureMapConfig::new(2, 0, Entanglement::Full)).is_err());
        assert!(embed(&x, &FeatureMapConfig::new(15, 1, Entanglement::Full)).is_err());
        assert!("ring".parse::<Entanglement>().is_err());
        assert_eq!("full".parse::<Entanglement>().unwrap(), Entanglement::Full);
        assert!(DataPoint::new(vec![f64::NAN]).is_err());
    }
}
