//! Calibration parameter vectors: the flat vector the optimizer moves through,
//! its packing/unpacking against named model parameters, and uniform
//! initialization sampling.
//!
//! Flat-vector convention: `v_max` first, then the car length `L` when the
//! model has one, then the network weights `theta` in layer-major order
//! (within each layer matrix row-major, bias row first).

use rand::distr::{Distribution, Uniform};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("parameter vector has dimension {got}, layout expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("named parameters do not match layout: {0}")]
    RecordMismatch(String),
    #[error("parameter vector contains a non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("initialization box has lower > upper at coordinate {0}")]
    InvalidBox(usize),
}

/// Flat calibration vector `u`. All entries finite; dimension fixed per problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ParamError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ParamError::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn euclidean_distance(&self, other: &ParamVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Where each named model parameter lives inside the flat vector.
///
/// Slots are disjoint, contiguous and cover `[0, dim)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    /// Weight count of the network slot, 0 when the model has no network.
    theta_len: usize,
    has_car_length: bool,
}

impl ParamLayout {
    /// Layout `(v_max, L)` of the follow-the-leader models.
    pub fn lwr() -> Self {
        Self {
            theta_len: 0,
            has_car_length: true,
        }
    }

    /// Layout `(v_max, theta)` of the network-driven models.
    pub fn nn(theta_len: usize) -> Self {
        Self {
            theta_len,
            has_car_length: false,
        }
    }

    pub fn dim(&self) -> usize {
        1 + usize::from(self.has_car_length) + self.theta_len
    }

    /// Index of `v_max` in the flat vector.
    pub fn v_max_index(&self) -> usize {
        0
    }

    /// Index of the car length, when the layout has one.
    pub fn car_length_index(&self) -> Option<usize> {
        self.has_car_length.then_some(1)
    }

    /// Index range of the network weights, when the layout has them.
    pub fn theta_range(&self) -> Option<std::ops::Range<usize>> {
        (self.theta_len > 0).then(|| {
            let start = 1 + usize::from(self.has_car_length);
            start..start + self.theta_len
        })
    }

    /// Writes a named-parameter record into a flat vector.
    pub fn pack(&self, params: &ModelParams) -> Result<ParamVector, ParamError> {
        let mut values = vec![0.0; self.dim()];
        match (params, self.has_car_length) {
            (ModelParams::Lwr { v_max, car_length }, true) => {
                values[0] = *v_max;
                values[1] = *car_length;
            }
            (ModelParams::Nn { v_max, theta }, false) => {
                if theta.len() != self.theta_len {
                    return Err(ParamError::DimensionMismatch {
                        expected: self.theta_len,
                        got: theta.len(),
                    });
                }
                values[0] = *v_max;
                values[1..].copy_from_slice(theta);
            }
            (record, _) => {
                return Err(ParamError::RecordMismatch(format!(
                    "{record:?} does not fit this layout"
                )));
            }
        }
        ParamVector::new(values)
    }

    /// Inverse of [`pack`](Self::pack).
    pub fn unpack(&self, u: &ParamVector) -> Result<ModelParams, ParamError> {
        if u.len() != self.dim() {
            return Err(ParamError::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        let values = u.as_slice();
        Ok(if self.has_car_length {
            ModelParams::Lwr {
                v_max: values[0],
                car_length: values[1],
            }
        } else {
            ModelParams::Nn {
                v_max: values[0],
                theta: values[1..].to_vec(),
            }
        })
    }
}

/// Named model parameters, the human-readable side of [`ParamLayout::pack`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelParams {
    Lwr { v_max: f64, car_length: f64 },
    Nn { v_max: f64, theta: Vec<f64> },
}

impl ModelParams {
    pub fn v_max(&self) -> f64 {
        match self {
            ModelParams::Lwr { v_max, .. } | ModelParams::Nn { v_max, .. } => *v_max,
        }
    }

    pub fn car_length(&self) -> Option<f64> {
        match self {
            ModelParams::Lwr { car_length, .. } => Some(*car_length),
            ModelParams::Nn { .. } => None,
        }
    }

    pub fn theta(&self) -> Option<&[f64]> {
        match self {
            ModelParams::Lwr { .. } => None,
            ModelParams::Nn { theta, .. } => Some(theta),
        }
    }
}

/// Per-coordinate uniform sampling intervals for the initial ensemble.
///
/// Only initialization is constrained; the CBO dynamics may leave the box.
#[derive(Debug, Clone, PartialEq)]
pub struct InitBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl InitBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ParamError> {
        if lower.len() != upper.len() {
            return Err(ParamError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(ParamError::NonFinite(i));
            }
            if lo > hi {
                return Err(ParamError::InvalidBox(i));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Same interval `[lo, hi]` on every one of `dim` coordinates.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self, ParamError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, u: &ParamVector) -> bool {
        u.len() == self.dim()
            && u.as_slice()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// Draws `n` independent uniform samples from the box.
///
/// Coordinates are drawn agent-major in index order, so the output is a pure
/// function of `(box, n, rng state)`.
pub fn sample_initial(init: &InitBox, n: usize, rng: &mut ChaCha8Rng) -> Vec<ParamVector> {
    let dists: Vec<Uniform<f64>> = init
        .lower
        .iter()
        .zip(&init.upper)
        .map(|(&lo, &hi)| Uniform::new_inclusive(lo, hi).expect("box validated at construction"))
        .collect();
    (0..n)
        .map(|_| {
            let values = dists.iter().map(|d| d.sample(rng)).collect();
            ParamVector { values }
        })
        .collect()
}
