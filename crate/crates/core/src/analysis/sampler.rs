use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of input points used by Monte-Carlo scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSampler {
    /// Independent uniform components in `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Uniform choice among fixed points.
    Points { points: Vec<Vec<f64>> },
}

impl DataSampler {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        DataSampler::Uniform { lo, hi }
    }

    /// Fails when every draw would produce the same point.
    pub fn check_nondegenerate(&self) -> Result<()> {
        match self {
            DataSampler::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                    return Err(Error::InvalidArgument(format!("bad range [{lo}, {hi}]")));
                }
                if lo == hi {
                    return Err(Error::DegenerateSampler(format!("constant range [{lo}, {hi}]")));
                }
            }
            DataSampler::Points { points } => {
                if points.windows(2).all(|w| w[0] == w[1]) {
                    return Err(Error::DegenerateSampler("fewer than two distinct points".into()));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Vec<f64> {
        match self {
            DataSampler::Uniform { lo, hi } => (0..dim).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect(),
            DataSampler::Points { points } => points[rng.random_range(0..points.len())].clone(),
        }
    }

    /// Two distinct inputs.
    pub fn sample_pair<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        loop {
            let a = self.sample(dim, rng);
            let b = self.sample(dim, rng);
            if a != b {
                return (a, b);
            }
        }
    }
}
