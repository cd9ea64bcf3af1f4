use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{bound_expressivity, bound_global};
use super::sampler::DataSampler;
use super::stats::RunningStats;
use crate::embeddings::{EmbeddingSpec, Family};
use crate::error::{Error, Result};
use crate::kernels::{prepare, prepare_parameterized, prepared_kernel, KernelKind, Prepared};
use crate::rng::stream;

/// Pairs handled by one RNG stream; fixes the reduction order.
const CHUNK: usize = 1024;

/// A named upper bound on the kernel variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedBound {
    pub name: String,
    pub value: f64,
}

/// Empirical moments of kernel values over random input pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub num_qubits: usize,
    pub layers: usize,
    pub kernel: KernelKind,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of `mean`.
    pub mean_std_error: f64,
    pub pairs: usize,
    pub bounds: Vec<NamedBound>,
    pub seed: u64,
}

impl ConcentrationReport {
    pub fn with_bound(mut self, name: impl Into<String>, value: f64) -> Self {
        self.bounds.push(NamedBound {
            name: name.into(),
            value,
        });
        self
    }

    pub fn bound(&self, name: &str) -> Option<f64> {
        self.bounds.iter().find(|b| b.name == name).map(|b| b.value)
    }
}

fn input_dim(spec: &EmbeddingSpec) -> usize {
    spec.data_dim().unwrap_or(spec.num_qubits)
}

fn prepare_pair<R: Rng + ?Sized>(
    spec: &EmbeddingSpec,
    kind: KernelKind,
    sampler: &DataSampler,
    rng: &mut R,
) -> Result<(Prepared, Prepared)> {
    let (x, y) = sampler.sample_pair(input_dim(spec), rng);
    if spec.param_dim() > 0 {
        let theta: Vec<f64> = (0..spec.param_dim())
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        Ok((
            prepare_parameterized(spec, &x, &theta, kind)?,
            prepare_parameterized(spec, &y, &theta, kind)?,
        ))
    } else {
        Ok((prepare(spec, &x, kind)?, prepare(spec, &y, kind)?))
    }
}

/// Bounds that hold for `spec` without an expressivity estimate.
fn default_bounds(spec: &EmbeddingSpec, kind: KernelKind) -> Vec<NamedBound> {
    let n = spec.num_qubits;
    let mut out = Vec::new();
    match (&spec.family, kind) {
        (Family::HaarFamily { .. }, _) => out.push(NamedBound {
            name: "expressivity".into(),
            value: bound_expressivity(0.0, n, kind, None),
        }),
        (Family::TensorProductRy, KernelKind::Fidelity) => out.push(NamedBound {
            name: "global".into(),
            value: bound_global(n, None).expect("no per-qubit list"),
        }),
        _ => {}
    }
    out
}

/// Mean and unbiased variance of `kind` over `pairs` distinct input pairs.
///
/// Parameterized families draw `theta` uniformly from `[0, 2pi)` per pair and
/// share it between both inputs.
pub fn variance_scan(
    spec: &EmbeddingSpec,
    kind: KernelKind,
    sampler: &DataSampler,
    pairs: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    spec.validate()?;
    kind.validate()?;
    sampler.check_nondegenerate()?;
    if pairs < 2 {
        return Err(Error::InvalidArgument("at least two pairs required".into()));
    }
    let chunks = pairs.div_ceil(CHUNK);
    let partial: Vec<RunningStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, &[c as u64]);
            let count = CHUNK.min(pairs - c * CHUNK);
            let mut s = RunningStats::new();
            for _ in 0..count {
                let (a, b) = prepare_pair(spec, kind, sampler, &mut rng)?;
                s.push(prepared_kernel(&a, &b, kind)?);
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let stats = partial.iter().fold(RunningStats::new(), |acc, s| acc.merge(s));
    Ok(ConcentrationReport {
        num_qubits: spec.num_qubits,
        layers: spec.num_layers(),
        kernel: kind,
        mean: stats.mean,
        variance: stats.variance(),
        mean_std_error: stats.std_error(),
        pairs,
        bounds: default_bounds(spec, kind),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_kernel_has_zero_variance() {
        // Every input maps to |0>, so the kernel is identically one.
        let spec = EmbeddingSpec::tensor_product_ry(2);
        let s = DataSampler::Points {
            points: vec![vec![0.0, 0.0], vec![2.0 * PI, 0.0]],
        };
        let r = variance_scan(&spec, KernelKind::Fidelity, &s, 100, 1).unwrap();
        assert!(r.variance < 1e-24);
        assert!((r.mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_moments_n3() {
        let spec = EmbeddingSpec::tensor_product_ry(3);
        let r = variance_scan(&spec, KernelKind::Fidelity, &DataSampler::uniform(-PI, PI), 100_000, 7).unwrap();
        let expected = 0.375f64.powi(3) - 0.25f64.powi(3);
        assert!((r.variance - expected).abs() / expected < 0.05, "{}", r.variance);
        assert!((r.mean - 0.125).abs() < 0.05 * 0.125);
        assert!(r.variance <= r.bound("global").unwrap());
    }

    #[test]
    fn haar_below_bound_n4() {
        let spec = EmbeddingSpec::new(4, Family::HaarFamily { seed: 3 }).unwrap();
        let r = variance_scan(&spec, KernelKind::Fidelity, &DataSampler::uniform(0.0, 1.0), 100_000, 2).unwrap();
        assert!(r.variance <= 1.0 / (8.0 * 17.0));
        assert!(r.variance <= r.bound("expressivity").unwrap());
    }

    #[test]
    fn result_independent_of_thread_count() {
        let spec = EmbeddingSpec::hardware_efficient(2, 2);
        let s = DataSampler::uniform(-PI, PI);
        let a = variance_scan(&spec, KernelKind::projected(), &s, 5000, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| variance_scan(&spec, KernelKind::projected(), &s, 5000, 11).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let spec = EmbeddingSpec::tensor_product_ry(2);
        let s = DataSampler::uniform(0.0, 0.0);
        assert!(matches!(
            variance_scan(&spec, KernelKind::Fidelity, &s, 10, 0),
            Err(Error::DegenerateSampler(_))
        ));
        let s = DataSampler::uniform(0.0, 1.0);
        assert!(variance_scan(&spec, KernelKind::Fidelity, &s, 1, 0).is_err());
    }
}
