use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use qkonc_core::analysis::DataSampler;
use qkonc_core::learning::Method;
use qkonc_core::{EstimatorSpec, Family, KernelKind, RidgeSign, Strategy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VarianceScan,
    Expressivity,
    NoiseScan,
    Gram,
    Train,
    Generalization,
    Indistinguishability,
    KtaScan,
    ShotsBudget,
    Bounds,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::VarianceScan => "variance-scan",
            Experiment::Expressivity => "expressivity",
            Experiment::NoiseScan => "noise-scan",
            Experiment::Gram => "gram",
            Experiment::Train => "train",
            Experiment::Generalization => "generalization",
            Experiment::Indistinguishability => "indistinguishability",
            Experiment::KtaScan => "kta-scan",
            Experiment::ShotsBudget => "shots-budget",
            Experiment::Bounds => "bounds",
        }
    }
}

/// Where input rows come from. Generated sets take their dimension from the
/// embedding at each register size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
    },
    Uniform {
        n_s: usize,
        lo: f64,
        hi: f64,
    },
    Hypercube {
        n_s: usize,
    },
    Engineered {
        n_train: usize,
        n_test: usize,
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub strategy: Strategy,
    #[serde(default)]
    pub shots: u64,
}

impl EstimatorConfig {
    /// Estimator with a per-point seed.
    pub fn with_seed(&self, seed: u64) -> Result<EstimatorSpec, CliError> {
        if self.strategy == Strategy::Exact {
            return Ok(EstimatorSpec::exact());
        }
        Ok(EstimatorSpec::new(self.strategy, self.shots, seed)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioTest {
    Zero,
    Success,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default)]
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub layers: Vec<usize>,
    #[serde(default)]
    pub noise: Vec<f64>,
    #[serde(default)]
    pub shots: Vec<u64>,
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub pairs: Option<usize>,
    pub samples: Option<usize>,
    pub trials: Option<usize>,
    pub n_s: Option<usize>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub sign: Option<RidgeSign>,
    pub method: Option<Method>,
    pub baseline: Option<usize>,
    pub repeats: Option<usize>,
    pub test: Option<RatioTest>,
    pub rel_err: Option<f64>,
    pub failure_p: Option<f64>,
    pub obs_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub embedding: Option<Family>,
    #[serde(default)]
    pub kernel: Option<KernelKind>,
    #[serde(default)]
    pub estimator: Option<EstimatorConfig>,
    #[serde(default)]
    pub dataset: Option<DatasetSource>,
    #[serde(default)]
    pub test_dataset: Option<DatasetSource>,
    #[serde(default)]
    pub sampler: Option<DataSampler>,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub params: Params,
}

pub const DEFAULT_OUTPUT: &str = "qkonc-out";

/// Per-experiment fallbacks for `params`; listed in the README defaults table.
pub mod defaults {
    pub const PAIRS_VARIANCE: usize = 10_000;
    pub const PAIRS_NOISE: usize = 10;
    pub const SAMPLES_EXPRESSIVITY: usize = 2_000;
    pub const SAMPLES_KTA: usize = 500;
    pub const TRIALS: usize = 10;
    pub const N_S: usize = 25;
    pub const GAMMA: f64 = 1.0;
    pub const ALPHA: f64 = 0.01;
    pub const LAMBDA: f64 = 0.0;
    pub const REPEATS: usize = 1;
    pub const REL_ERR: f64 = 0.1;
    pub const FAILURE_P: f64 = 0.05;
    pub const OBS_NORM: f64 = 1.0;
}

fn invalid(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation {
        field: field.into(),
        message: message.to_string(),
    }
}

fn nonempty<T>(field: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(invalid(field, "sweep axis must be nonempty"));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated")
    }

    pub fn kernel(&self) -> KernelKind {
        self.kernel.unwrap_or(KernelKind::Fidelity)
    }

    pub fn estimator(&self) -> EstimatorConfig {
        self.estimator.unwrap_or(EstimatorConfig {
            strategy: Strategy::Exact,
            shots: 0,
        })
    }

    pub fn sampler(&self) -> DataSampler {
        self.sampler.clone().unwrap_or(DataSampler::Uniform { lo: -PI, hi: PI })
    }

    pub fn family(&self) -> &Family {
        self.embedding.as_ref().expect("validated")
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma.unwrap_or(defaults::GAMMA)
    }

    /// Makes relative dataset paths relative to the config file's directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        for source in [&mut self.dataset, &mut self.test_dataset].into_iter().flatten() {
            if let DatasetSource::Csv { path } = source {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
    }

    pub fn validate(&self, experiment: Experiment) -> Result<(), CliError> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(invalid(
                    "experiment",
                    format!("config is for {} but {} was requested", e.name(), experiment.name()),
                ));
            }
        }
        if self.seed.is_none() {
            return Err(invalid("seed", "a seed is required in the config or via --seed"));
        }
        if let Some(k) = &self.kernel {
            k.validate().map_err(|e| invalid("kernel", e))?;
        }
        if let Some(est) = &self.estimator {
            if est.strategy != Strategy::Exact {
                est.with_seed(0).map_err(|e| invalid("estimator", e))?;
                self.kernel()
                    .check_estimator(est.strategy)
                    .map_err(|e| invalid("estimator", e))?;
            }
        }
        if let Some(s) = &self.sampler {
            s.check_nondegenerate().map_err(|e| invalid("sampler", e))?;
        }
        if self.gamma() <= 0.0 || !self.gamma().is_finite() {
            return Err(invalid("params.gamma", "must be positive"));
        }
        for (name, source) in [("dataset", &self.dataset), ("test_dataset", &self.test_dataset)] {
            if let Some(DatasetSource::Csv { path }) = source {
                if !path.is_file() {
                    return Err(invalid(name, format!("file not found: {}", path.display())));
                }
            }
        }
        let sw = &self.sweep;
        let needs_embedding = !matches!(
            experiment,
            Experiment::Indistinguishability | Experiment::ShotsBudget | Experiment::Bounds
        );
        if needs_embedding {
            let family = self
                .embedding
                .as_ref()
                .ok_or_else(|| invalid("embedding", "required"))?;
            qkonc_core::EmbeddingSpec::new(1, family.clone()).map_err(|e| invalid("embedding", e))?;
        }
        if experiment != Experiment::ShotsBudget {
            nonempty("sweep.qubits", &sw.qubits)?;
            if sw.qubits.contains(&0) {
                return Err(invalid("sweep.qubits", "qubit counts must be positive"));
            }
        }
        if sw.layers.contains(&0) {
            return Err(invalid("sweep.layers", "layer counts must be positive"));
        }
        match experiment {
            Experiment::VarianceScan | Experiment::Expressivity | Experiment::Bounds => {}
            Experiment::NoiseScan => {
                nonempty("sweep.noise", &sw.noise)?;
            }
            Experiment::Gram => match &self.dataset {
                None => return Err(invalid("dataset", "required")),
                Some(DatasetSource::Engineered { .. }) => {
                    return Err(invalid("dataset", "engineered tasks are only used by generalization"))
                }
                _ => {}
            },
            Experiment::Train => {
                if sw.qubits.len() != 1 {
                    return Err(invalid("sweep.qubits", "train takes exactly one register size"));
                }
                for (name, source) in [("dataset", &self.dataset), ("test_dataset", &self.test_dataset)] {
                    if let Some(DatasetSource::Engineered { .. }) = source {
                        return Err(invalid(name, "engineered tasks are only used by generalization"));
                    }
                }
                if self.dataset.is_none() {
                    return Err(invalid("dataset", "required"));
                }
            }
            Experiment::Generalization => {
                if !matches!(self.dataset, Some(DatasetSource::Engineered { .. })) {
                    return Err(invalid("dataset", "generalization needs an engineered dataset"));
                }
                nonempty("sweep.sizes", &sw.sizes)?;
            }
            Experiment::Indistinguishability => {
                nonempty("sweep.shots", &sw.shots)?;
                if let Some(f) = &self.embedding {
                    if *f != Family::TensorProductRy {
                        return Err(invalid(
                            "embedding",
                            "indistinguishability scans use the product embedding",
                        ));
                    }
                }
            }
            Experiment::KtaScan => {
                if !matches!(self.embedding, Some(Family::Parameterized { .. })) {
                    return Err(invalid("embedding", "kta-scan needs a parameterized embedding"));
                }
                match &self.dataset {
                    Some(DatasetSource::Hypercube { .. } | DatasetSource::Csv { .. }) => {}
                    _ => return Err(invalid("dataset", "kta-scan needs a hypercube or labelled csv dataset")),
                }
            }
            Experiment::ShotsBudget => {
                nonempty("sweep.variance", &sw.variance)?;
            }
        }
        Ok(())
    }
}
