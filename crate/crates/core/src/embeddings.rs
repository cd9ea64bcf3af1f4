//! Data-embedding circuit families.
//!
//! Every family decomposes into an ordered list of layers. Applying the
//! layers to `|0...0>` reproduces [`embed`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{haar_random_state, haar_random_unitary, CMatrix, Gate, StateVector, STATEVECTOR_CAP};
use crate::rng;

/// Nearest-neighbour two-qubit gate ladder on pairs `(0,1), (1,2), ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    #[default]
    CzLadder,
    CnotLadder,
}

impl Entangler {
    pub fn gates(self, num_qubits: usize) -> Vec<Gate> {
        (0..num_qubits.saturating_sub(1))
            .map(|k| match self {
                Entangler::CzLadder => Gate::CZ { a: k, b: k + 1 },
                Entangler::CnotLadder => Gate::CNOT {
                    control: k,
                    target: k + 1,
                },
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `⊗_k Ry(x_k)`.
    TensorProductRy,
    /// Per qubit `Rx(x_k)`, `Ry(x_k)`, `H`, `Rz(x_k)` in that order.
    SingleLayerRotations,
    /// `layers` repetitions of an `Rx(x_k)` layer followed by an entangler
    /// ladder. With `reupload` each layer reads the same `n` components;
    /// otherwise layer `l` reads components `l*n .. (l+1)*n`.
    HardwareEfficient {
        layers: usize,
        #[serde(default)]
        entangler: Entangler,
        #[serde(default = "default_true")]
        reupload: bool,
    },
    /// `U_d(x) U_p(theta)`: `U_p` is `Ry(theta_k)` on every qubit followed by
    /// an entangler ladder, so `theta` has length `n`.
    Parameterized {
        base: Box<Family>,
        #[serde(default)]
        entangler: Entangler,
    },
    /// A Haar-random unitary per input, seeded by the input's bit pattern.
    HaarFamily { seed: u64 },
}

fn default_true() -> bool {
    true
}

/// An embedding family on a fixed register. The initial state is always
/// `|0...0>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub num_qubits: usize,
    pub family: Family,
}

/// One factor of `U(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Gates(Vec<Gate>),
    Dense(CMatrix),
}

impl Layer {
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match self {
            Layer::Gates(gates) => gates.iter().try_for_each(|g| state.apply(g)),
            Layer::Dense(u) => state.apply_unitary(u),
        }
    }
}

impl EmbeddingSpec {
    pub fn new(num_qubits: usize, family: Family) -> Result<Self> {
        let spec = Self { num_qubits, family };
        spec.validate()?;
        Ok(spec)
    }

    pub fn tensor_product_ry(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            family: Family::TensorProductRy,
        }
    }

    pub fn hardware_efficient(num_qubits: usize, layers: usize) -> Self {
        Self {
            num_qubits,
            family: Family::HardwareEfficient {
                layers,
                entangler: Entangler::CzLadder,
                reupload: true,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::InvalidArgument("at least one qubit required".into()));
        }
        validate_family(&self.family, false)
    }

    /// Required input dimension, or `None` when any dimension is accepted.
    pub fn data_dim(&self) -> Option<usize> {
        family_data_dim(&self.family, self.num_qubits)
    }

    /// Length of the trainable parameter vector (zero if not parameterized).
    pub fn param_dim(&self) -> usize {
        match self.family {
            Family::Parameterized { .. } => self.num_qubits,
            _ => 0,
        }
    }

    /// Number of data layers `L`.
    pub fn num_layers(&self) -> usize {
        family_layers(&self.family)
    }

    fn data_family(&self) -> &Family {
        match &self.family {
            Family::Parameterized { base, .. } => base,
            f => f,
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        self.validate()?;
        if let Some(d) = self.data_dim() {
            if x.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: x.len(),
                });
            }
        } else if x.is_empty() {
            return Err(Error::InvalidArgument("empty data point".into()));
        }
        Ok(())
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim(),
                found: theta.len(),
            });
        }
        Ok(())
    }
}

fn validate_family(family: &Family, nested: bool) -> Result<()> {
    match family {
        Family::HardwareEfficient { layers, .. } if *layers == 0 => Err(Error::InvalidArgument(
            "hardware-efficient embedding needs at least one layer".into(),
        )),
        Family::Parameterized { base, .. } => {
            if nested {
                return Err(Error::InvalidArgument(
                    "parameterized embeddings cannot be nested".into(),
                ));
            }
            validate_family(base, true)
        }
        _ => Ok(()),
    }
}

fn family_data_dim(family: &Family, n: usize) -> Option<usize> {
    match family {
        Family::TensorProductRy | Family::SingleLayerRotations => Some(n),
        Family::HardwareEfficient { layers, reupload, .. } => Some(if *reupload { n } else { n * layers }),
        Family::Parameterized { base, .. } => family_data_dim(base, n),
        Family::HaarFamily { .. } => None,
    }
}

fn family_layers(family: &Family) -> usize {
    match family {
        Family::HardwareEfficient { layers, .. } => *layers,
        Family::Parameterized { base, .. } => family_layers(base),
        _ => 1,
    }
}

fn haar_seed(seed: u64, x: &[f64]) -> u64 {
    let bits: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
    rng::derive_seed(seed, &bits)
}

fn data_layers(family: &Family, n: usize, x: &[f64]) -> Result<Vec<Layer>> {
    Ok(match family {
        Family::TensorProductRy => vec![Layer::Gates(
            (0..n).map(|k| Gate::Ry { qubit: k, angle: x[k] }).collect(),
        )],
        Family::SingleLayerRotations => vec![Layer::Gates(
            (0..n)
                .flat_map(|k| {
                    [
                        Gate::Rx { qubit: k, angle: x[k] },
                        Gate::Ry { qubit: k, angle: x[k] },
                        Gate::Hadamard { qubit: k },
                        Gate::Rz { qubit: k, angle: x[k] },
                    ]
                })
                .collect(),
        )],
        Family::HardwareEfficient {
            layers,
            entangler,
            reupload,
        } => (0..*layers)
            .map(|l| {
                let offset = if *reupload { 0 } else { l * n };
                let mut gates: Vec<Gate> = (0..n)
                    .map(|k| Gate::Rx {
                        qubit: k,
                        angle: x[offset + k],
                    })
                    .collect();
                gates.extend(entangler.gates(n));
                Layer::Gates(gates)
            })
            .collect(),
        Family::HaarFamily { seed } => {
            let mut r = rng::seeded(haar_seed(*seed, x));
            vec![Layer::Dense(haar_random_unitary(n, &mut r)?)]
        }
        Family::Parameterized { .. } => unreachable!("handled by the caller"),
    })
}

/// The trainable block `U_p(theta)` as a single layer.
pub fn parameter_layer(spec: &EmbeddingSpec, theta: &[f64]) -> Result<Layer> {
    let Family::Parameterized { entangler, .. } = &spec.family else {
        return Err(Error::InvalidArgument("embedding has no trainable parameters".into()));
    };
    spec.check_params(theta)?;
    let n = spec.num_qubits;
    let mut gates: Vec<Gate> = (0..n)
        .map(|k| Gate::Ry {
            qubit: k,
            angle: theta[k],
        })
        .collect();
    gates.extend(entangler.gates(n));
    Ok(Layer::Gates(gates))
}

/// Ordered data layers of `U(x)`; their product applied to `|0...0>` equals
/// [`embed`]. For parameterized families these are the `U_d(x)` layers.
pub fn layer_decomposition(spec: &EmbeddingSpec, x: &[f64]) -> Result<Vec<Layer>> {
    spec.check_input(x)?;
    data_layers(spec.data_family(), spec.num_qubits, x)
}

/// `U(x)|0...0>`.
pub fn embed(spec: &EmbeddingSpec, x: &[f64]) -> Result<StateVector> {
    spec.check_input(x)?;
    let n = spec.num_qubits;
    if n > STATEVECTOR_CAP {
        return Err(Error::CapExceeded {
            what: "state vector",
            requested: n,
            cap: STATEVECTOR_CAP,
        });
    }
    match &spec.family {
        Family::HaarFamily { seed } => {
            let mut r = rng::seeded(haar_seed(*seed, x));
            haar_random_state(n, &mut r)
        }
        Family::Parameterized { .. } => Err(Error::InvalidArgument(
            "parameterized embedding needs parameters; use embed_parameterized".into(),
        )),
        family => {
            let mut state = StateVector::zero(n)?;
            for layer in data_layers(family, n, x)? {
                layer.apply(&mut state)?;
            }
            Ok(state)
        }
    }
}

/// `U_d(x) U_p(theta)|0...0>`.
pub fn embed_parameterized(spec: &EmbeddingSpec, x: &[f64], theta: &[f64]) -> Result<StateVector> {
    let p = parameter_layer(spec, theta)?;
    let layers = layer_decomposition(spec, x)?;
    let mut state = StateVector::zero(spec.num_qubits)?;
    p.apply(&mut state)?;
    for layer in &layers {
        layer.apply(&mut state)?;
    }
    Ok(state)
}
