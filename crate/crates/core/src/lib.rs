//! Quantum kernel simulation and exponential-concentration diagnostics.

pub mod analysis;
pub mod datasets;
pub mod embeddings;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod learning;
pub mod noise;
pub mod quantum;
pub mod rng;

pub use analysis::{ConcentrationReport, DataSampler, ExpressivityEstimate};
pub use datasets::Dataset;
pub use embeddings::{EmbeddingSpec, Entangler, Family};
pub use error::{Error, Result};
pub use estimators::{EstimatorSpec, ShotRecord, Strategy};
pub use kernels::{GramMatrix, KernelKind, Provenance};
pub use learning::{RidgeSign, TrainedModel};
pub use noise::PauliNoiseParams;
pub use quantum::{BlochVector, DensityMatrix, StateVector};
