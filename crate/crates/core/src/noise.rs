//! Local Pauli noise interleaved with embedding layers.

use serde::{Deserialize, Serialize};

use crate::embeddings::{layer_decomposition, parameter_layer, EmbeddingSpec, Layer};
use crate::error::{Error, Result};
use crate::kernels::projected_from_bloch;
use crate::quantum::{
    hermitian_eigenvalues, overlap, sandwiched_renyi2_vs_maxmixed, schatten2_distance, CMatrix, DensityMatrix,
    StateVector, C64,
};

/// Default register limit for noisy density-matrix simulation.
pub const NOISY_CAP: usize = 6;

/// Per-qubit channel scaling the Pauli components `X, Y, Z` by `q_x, q_y, q_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct PauliNoiseParams {
    q_x: f64,
    q_y: f64,
    q_z: f64,
}

#[derive(Deserialize)]
struct RawParams {
    q_x: f64,
    q_y: f64,
    q_z: f64,
}

impl TryFrom<RawParams> for PauliNoiseParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Self::new(r.q_x, r.q_y, r.q_z)
    }
}

impl PauliNoiseParams {
    /// Accepts `|q_sigma| <= 1` for which the channel is completely positive.
    pub fn new(q_x: f64, q_y: f64, q_z: f64) -> Result<Self> {
        for q in [q_x, q_y, q_z] {
            if !(-1.0..=1.0).contains(&q) {
                return Err(Error::OutOfRange {
                    value: q,
                    range: "[-1, 1]",
                });
            }
        }
        let p = Self { q_x, q_y, q_z };
        let min_eig = hermitian_eigenvalues(&p.choi_matrix())[0];
        if min_eig < -1e-12 {
            return Err(Error::NotCompletelyPositive {
                qx: q_x,
                qy: q_y,
                qz: q_z,
            });
        }
        Ok(p)
    }

    /// `q_x = q_y = q_z = q`.
    pub fn depolarizing(q: f64) -> Result<Self> {
        Self::new(q, q, q)
    }

    pub fn q_x(&self) -> f64 {
        self.q_x
    }

    pub fn q_y(&self) -> f64 {
        self.q_y
    }

    pub fn q_z(&self) -> f64 {
        self.q_z
    }

    /// Characteristic parameter `max |q_sigma|`.
    pub fn q(&self) -> f64 {
        self.q_x.abs().max(self.q_y.abs()).max(self.q_z.abs())
    }

    /// Probabilities of applying `I, X, Y, Z`.
    pub fn pauli_probabilities(&self) -> [f64; 4] {
        let (x, y, z) = (self.q_x, self.q_y, self.q_z);
        [
            (1.0 + x + y + z) / 4.0,
            (1.0 + x - y - z) / 4.0,
            (1.0 - x + y - z) / 4.0,
            (1.0 - x - y + z) / 4.0,
        ]
    }

    /// The channel on a single-qubit operator.
    fn apply_2x2(&self, m: &CMatrix) -> CMatrix {
        let tr = m[(0, 0)] + m[(1, 1)];
        let tx = m[(0, 1)] + m[(1, 0)];
        let ty = C64::new(0.0, 1.0) * (m[(0, 1)] - m[(1, 0)]);
        let tz = m[(0, 0)] - m[(1, 1)];
        let i = C64::new(0.0, 1.0);
        let (cx, cy, cz) = (tx * self.q_x, ty * self.q_y, tz * self.q_z);
        CMatrix::from_row_slice(
            2,
            2,
            &[
                (tr + cz) * 0.5,
                (cx - i * cy) * 0.5,
                (cx + i * cy) * 0.5,
                (tr - cz) * 0.5,
            ],
        )
    }

    /// Choi matrix `sum_ij |i><j| ⊗ N(|i><j|)`.
    pub fn choi_matrix(&self) -> CMatrix {
        let mut choi = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                let mut e = CMatrix::zeros(2, 2);
                e[(i, j)] = C64::ONE;
                let out = self.apply_2x2(&e);
                for a in 0..2 {
                    for b in 0..2 {
                        choi[(2 * i + a, 2 * j + b)] = out[(a, b)];
                    }
                }
            }
        }
        choi
    }
}

/// Applies the channel to every qubit. Each Pauli-string coefficient is
/// multiplied by `q_x^x q_y^y q_z^z` for its letter counts.
pub fn apply_local_pauli_channel(rho: &DensityMatrix, params: &PauliNoiseParams) -> DensityMatrix {
    let n = rho.num_qubits();
    let d = rho.dim();
    let mut m = rho.matrix().clone();
    let (zs, zd) = ((1.0 + params.q_z) / 2.0, (1.0 - params.q_z) / 2.0);
    let (xs, xd) = ((params.q_x + params.q_y) / 2.0, (params.q_x - params.q_y) / 2.0);
    for k in 0..n {
        let mask = 1usize << (n - 1 - k);
        let src = m.clone();
        for j in 0..d {
            for i in 0..d {
                let flipped = src[(i ^ mask, j ^ mask)];
                let (a, b) = if (i & mask == 0) == (j & mask == 0) {
                    (zs, zd)
                } else {
                    (xs, xd)
                };
                m[(i, j)] = src[(i, j)] * a + flipped * b;
            }
        }
    }
    DensityMatrix::from_matrix_unchecked(n, m)
}

fn check_cap(spec: &EmbeddingSpec) -> Result<()> {
    if spec.num_qubits > NOISY_CAP {
        return Err(Error::CapExceeded {
            what: "noisy density matrix",
            requested: spec.num_qubits,
            cap: NOISY_CAP,
        });
    }
    Ok(())
}

fn run_noisy(n: usize, layers: &[Layer], params: &PauliNoiseParams) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::from_pure(&StateVector::zero(n)?)?;
    rho = apply_local_pauli_channel(&rho, params);
    for layer in layers {
        match layer {
            Layer::Gates(gates) => {
                for g in gates {
                    rho.apply(g)?;
                }
            }
            Layer::Dense(u) => rho.apply_unitary(u)?,
        }
        rho = apply_local_pauli_channel(&rho, params);
    }
    Ok(rho)
}

/// Noise before the first layer and after each of the `L` layers.
pub fn noisy_embed(spec: &EmbeddingSpec, x: &[f64], params: &PauliNoiseParams) -> Result<DensityMatrix> {
    check_cap(spec)?;
    run_noisy(spec.num_qubits, &layer_decomposition(spec, x)?, params)
}

/// [`noisy_embed`] for a parameterized family; the trainable block counts as
/// one extra layer.
pub fn noisy_embed_parameterized(
    spec: &EmbeddingSpec,
    x: &[f64],
    theta: &[f64],
    params: &PauliNoiseParams,
) -> Result<DensityMatrix> {
    check_cap(spec)?;
    let mut layers = vec![parameter_layer(spec, theta)?];
    layers.extend(layer_decomposition(spec, x)?);
    run_noisy(spec.num_qubits, &layers, params)
}

/// `Tr[rho~(x) rho~(x')]`.
pub fn noisy_fidelity_kernel(spec: &EmbeddingSpec, x: &[f64], y: &[f64], params: &PauliNoiseParams) -> Result<f64> {
    overlap(&noisy_embed(spec, x, params)?, &noisy_embed(spec, y, params)?)
}

/// Projected kernel on the noisy single-qubit marginals.
pub fn noisy_projected_kernel(
    spec: &EmbeddingSpec,
    x: &[f64],
    y: &[f64],
    gamma: f64,
    params: &PauliNoiseParams,
) -> Result<f64> {
    let a = noisy_embed(spec, x, params)?;
    let b = noisy_embed(spec, y, params)?;
    Ok(projected_from_bloch(&a.bloch_vectors(), &b.bloch_vectors(), gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBounds {
    /// Bound on `|kappa~_FQ - 1/2^n|`.
    pub fidelity_bound: f64,
    /// Bound on `|1 - kappa~_PQ|`.
    pub projected_bound: f64,
    /// Bound on `||rho~ - I/2^n||_2`.
    pub state_bound: f64,
}

/// Exponent factor `1/(2 ln 2)` of the projected-kernel bound.
pub const PROJECTED_RATE: f64 = 1.0 / (2.0 * std::f64::consts::LN_2);

/// Concentration bounds after `L` noisy layers starting from `rho0`.
pub fn noise_bounds(params: &PauliNoiseParams, layers: usize, gamma: f64, rho0: &DensityMatrix) -> Result<NoiseBounds> {
    let n = rho0.num_qubits();
    let q = params.q();
    let l = layers as f64;
    let dist0 = schatten2_distance(rho0, &DensityMatrix::maximally_mixed(n)?)?;
    let s2 = sandwiched_renyi2_vs_maxmixed(rho0);
    Ok(NoiseBounds {
        fidelity_bound: q.powf(2.0 * l + 1.0) * dist0,
        projected_bound: 8.0 * std::f64::consts::LN_2 * gamma * n as f64 * q.powf(PROJECTED_RATE * (l + 1.0)) * s2,
        state_bound: q.powf(l + 1.0) * dist0,
    })
}
