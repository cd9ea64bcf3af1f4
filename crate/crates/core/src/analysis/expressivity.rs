use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::DataSampler;
use crate::embeddings::{embed, embed_parameterized, EmbeddingSpec};
use crate::error::{Error, Result};
use crate::quantum::{check_qubit_count, hermitian_eigenvalues, CMatrix, StateVector, C64};
use crate::rng::stream;

/// Largest register for which the second-moment operator is formed.
pub const EXPRESSIVITY_CAP: usize = 6;

const BATCHES: usize = 10;
const BLOCK: usize = 64;

/// Distance of an ensemble's second moment from the Haar value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpressivityEstimate {
    pub epsilon: f64,
    /// Batch-means standard error of `epsilon`.
    pub mc_error: f64,
    pub samples: usize,
    pub num_qubits: usize,
}

/// Coordinates of `psi ⊗ psi` in an orthonormal basis of the symmetric
/// subspace: `|ii>` and `(|ij> + |ji>)/sqrt(2)` for `i < j`.
fn symmetric_coords(psi: &[C64], out: &mut [C64]) {
    let mut k = 0;
    for i in 0..psi.len() {
        out[k] = psi[i] * psi[i];
        k += 1;
        for j in i + 1..psi.len() {
            out[k] = psi[i] * psi[j] * std::f64::consts::SQRT_2;
            k += 1;
        }
    }
}

/// Running sum of `(psi psi^†)^{⊗2}` restricted to the symmetric subspace.
struct Moment {
    sum: CMatrix,
    block: CMatrix,
    filled: usize,
    count: usize,
}

impl Moment {
    fn new(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        let dim = d * (d + 1) / 2;
        Moment {
            sum: CMatrix::zeros(dim, dim),
            block: CMatrix::zeros(dim, BLOCK),
            filled: 0,
            count: 0,
        }
    }

    fn push(&mut self, psi: &StateVector) {
        let mut col = self.block.column_mut(self.filled);
        symmetric_coords(psi.amplitudes(), col.as_mut_slice());
        self.filled += 1;
        self.count += 1;
        if self.filled == BLOCK {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.filled == 0 {
            return;
        }
        let w = self.block.columns(0, self.filled);
        self.sum.gemm(C64::new(1.0, 0.0), &w, &w.adjoint(), C64::new(1.0, 0.0));
        self.filled = 0;
    }

    fn finish(mut self) -> (CMatrix, usize) {
        self.flush();
        (self.sum, self.count)
    }
}

/// `sum |1/D - lambda|` over the eigenvalues of `sum / count`.
fn epsilon_of(sum: &CMatrix, count: usize) -> f64 {
    let dim = sum.nrows();
    let g = sum.map(|z| z / count as f64);
    hermitian_eigenvalues(&g)
        .into_iter()
        .map(|l| (1.0 / dim as f64 - l).abs())
        .sum()
}

/// Expressivity of the uniform ensemble over `states`.
pub fn expressivity_of_states(states: &[StateVector]) -> Result<f64> {
    let n = states
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?
        .num_qubits();
    check_qubit_count(n, EXPRESSIVITY_CAP, "expressivity")?;
    let mut m = Moment::new(n);
    for s in states {
        if s.num_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.num_qubits(),
            });
        }
        m.push(s);
    }
    let (sum, count) = m.finish();
    Ok(epsilon_of(&sum, count))
}

fn sample_state<R: Rng + ?Sized>(spec: &EmbeddingSpec, sampler: &DataSampler, rng: &mut R) -> Result<StateVector> {
    let x = sampler.sample(spec.data_dim().unwrap_or(spec.num_qubits), rng);
    if spec.param_dim() > 0 {
        let theta: Vec<f64> = (0..spec.param_dim())
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        embed_parameterized(spec, &x, &theta)
    } else {
        embed(spec, &x)
    }
}

/// Monte-Carlo expressivity of the states `U(x)|0...0>` with `x` drawn from
/// `sampler` (and `theta` uniform on `[0, 2pi)` for parameterized families).
pub fn expressivity_epsilon(
    spec: &EmbeddingSpec,
    sampler: &DataSampler,
    samples: usize,
    seed: u64,
) -> Result<ExpressivityEstimate> {
    spec.validate()?;
    check_qubit_count(spec.num_qubits, EXPRESSIVITY_CAP, "expressivity")?;
    sampler.check_nondegenerate()?;
    if samples < 2 {
        return Err(Error::InvalidArgument("at least two samples required".into()));
    }
    let batches = BATCHES.min(samples);
    let parts: Vec<(CMatrix, usize, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, &[b as u64]);
            let count = samples / batches + usize::from(b < samples % batches);
            let mut m = Moment::new(spec.num_qubits);
            for _ in 0..count {
                m.push(&sample_state(spec, sampler, &mut rng)?);
            }
            let (sum, count) = m.finish();
            let eps = epsilon_of(&sum, count);
            Ok((sum, count, eps))
        })
        .collect::<Result<_>>()?;
    let batch_eps: Vec<f64> = parts.iter().map(|p| p.2).collect();
    let mut total = CMatrix::zeros(parts[0].0.nrows(), parts[0].0.ncols());
    for (sum, _, _) in &parts {
        total += sum;
    }
    let epsilon = epsilon_of(&total, samples);
    let mean = batch_eps.iter().sum::<f64>() / batches as f64;
    let var = batch_eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0).max(1.0);
    Ok(ExpressivityEstimate {
        epsilon,
        mc_error: (var / batches as f64).sqrt(),
        samples,
        num_qubits: spec.num_qubits,
    })
}
