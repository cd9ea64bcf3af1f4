use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::gate::{bit_mask, check_unitary, Gate};
use super::{hermitian_eigen, CMatrix};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const NEGATIVE_EIG_TOL: f64 = 1e-9;

/// Largest register held as a dense state vector.
pub const STATEVECTOR_CAP: usize = 20;
/// Largest register held as a dense density matrix.
pub const DENSITY_MATRIX_CAP: usize = 10;

/// A normalized pure state on `num_qubits` qubits. Qubit 0 is the most
/// significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(num_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_qubit_count(num_qubits, STATEVECTOR_CAP, "state vector")?;
        let dim = 1usize << num_qubits;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amps.len(),
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} differs from 1")));
        }
        Ok(Self { num_qubits, amps })
    }

    /// Normalizes `amps` before validating.
    pub fn from_unnormalized(num_qubits: usize, mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(num_qubits, amps)
    }

    /// The computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(num_qubits, STATEVECTOR_CAP, "state vector")?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![C64::ZERO; dim];
        amps[index] = C64::ONE;
        Ok(Self { num_qubits, amps })
    }

    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.check_qubits(self.num_qubits)?;
        gate.apply_to_slice(&mut self.amps, self.num_qubits);
        Ok(())
    }

    /// Multiplies by a full `2^n x 2^n` unitary.
    pub fn apply_unitary(&mut self, u: &CMatrix) -> Result<()> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        self.amps = (u * v).as_slice().to_vec();
        Ok(())
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let mat = CMatrix::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj());
        DensityMatrix {
            num_qubits: self.num_qubits,
            mat,
        }
    }

    /// Single-qubit reduced state of qubit `k` as a Bloch vector.
    pub fn bloch_vector(&self, k: usize) -> Result<BlochVector> {
        check_index(k, self.num_qubits)?;
        let mask = bit_mask(self.num_qubits, k);
        let (mut p0, mut p1, mut off) = (0.0, 0.0, C64::ZERO);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a, b) = (self.amps[i], self.amps[i | mask]);
                p0 += a.norm_sqr();
                p1 += b.norm_sqr();
                off += a * b.conj();
            }
        }
        Ok(BlochVector {
            c_x: 2.0 * off.re,
            c_y: -2.0 * off.im,
            c_z: p0 - p1,
        })
    }

    /// Bloch vectors of every qubit, in qubit order.
    pub fn bloch_vectors(&self) -> Vec<BlochVector> {
        (0..self.num_qubits)
            .map(|k| self.bloch_vector(k).expect("index in range"))
            .collect()
    }
}

/// Returns `(gate ⊗ identity) · state`.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// A mixed state on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(num_qubits: usize, mat: CMatrix) -> Result<Self> {
        check_qubit_count(num_qubits, DENSITY_MATRIX_CAP, "density matrix")?;
        let dim = 1usize << num_qubits;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: mat.nrows(),
            });
        }
        let herm_dev = (&mat - mat.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_dev > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm_dev:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (evals, _) = hermitian_eigen(&mat);
        let min = evals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -NEGATIVE_EIG_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { num_qubits, mat })
    }

    /// Wraps a matrix known to be a valid state (e.g. the output of a
    /// completely positive trace-preserving map).
    pub(crate) fn from_matrix_unchecked(num_qubits: usize, mat: CMatrix) -> Self {
        Self { num_qubits, mat }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_qubit_count(num_qubits, DENSITY_MATRIX_CAP, "density matrix")?;
        let dim = 1usize << num_qubits;
        let mat = CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        Ok(Self { num_qubits, mat })
    }

    pub fn from_pure(state: &StateVector) -> Result<Self> {
        check_qubit_count(state.num_qubits(), DENSITY_MATRIX_CAP, "density matrix")?;
        Ok(state.to_density())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// `Tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `rho -> G rho G^dagger` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.check_qubits(self.num_qubits)?;
        let n = self.num_qubits;
        let d = self.dim();
        for col in self.mat.as_mut_slice().chunks_mut(d) {
            gate.apply_to_slice(col, n);
        }
        self.mat.adjoint_mut();
        for col in self.mat.as_mut_slice().chunks_mut(d) {
            gate.apply_to_slice(col, n);
        }
        self.mat.adjoint_mut();
        Ok(())
    }

    /// `rho -> U rho U^dagger` for a full unitary.
    pub fn apply_unitary(&mut self, u: &CMatrix) -> Result<()> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        check_unitary(u)?;
        self.mat = u * &self.mat * u.adjoint();
        Ok(())
    }

    /// Partial trace onto qubit `k`.
    pub fn reduce_to_qubit(&self, k: usize) -> Result<DensityMatrix> {
        check_index(k, self.num_qubits)?;
        let mask = bit_mask(self.num_qubits, k);
        let mut r = CMatrix::zeros(2, 2);
        for i in 0..self.dim() {
            if i & mask == 0 {
                let j = i | mask;
                r[(0, 0)] += self.mat[(i, i)];
                r[(0, 1)] += self.mat[(i, j)];
                r[(1, 0)] += self.mat[(j, i)];
                r[(1, 1)] += self.mat[(j, j)];
            }
        }
        Ok(DensityMatrix { num_qubits: 1, mat: r })
    }

    /// Bloch vector of qubit `k`'s reduced state.
    pub fn bloch_vector(&self, k: usize) -> Result<BlochVector> {
        Ok(BlochVector::from_qubit_density(&self.reduce_to_qubit(k)?))
    }

    pub fn bloch_vectors(&self) -> Vec<BlochVector> {
        (0..self.num_qubits)
            .map(|k| self.bloch_vector(k).expect("index in range"))
            .collect()
    }
}

/// Pauli coefficients of a single-qubit state `(I + c·sigma)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub c_x: f64,
    pub c_y: f64,
    pub c_z: f64,
}

impl BlochVector {
    pub fn new(c_x: f64, c_y: f64, c_z: f64) -> Result<Self> {
        let b = Self { c_x, c_y, c_z };
        if b.norm_sqr() > 1.0 + 1e-9 {
            return Err(Error::InvalidState(format!(
                "Bloch vector length {} exceeds 1",
                b.norm_sqr().sqrt()
            )));
        }
        Ok(b)
    }

    /// Reads the coefficients of a 2x2 density matrix.
    pub fn from_qubit_density(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        Self {
            c_x: 2.0 * m[(0, 1)].re,
            c_y: -2.0 * m[(0, 1)].im,
            c_z: (m[(0, 0)] - m[(1, 1)]).re,
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        let h = C64::new(0.5, 0.0);
        let mat = CMatrix::from_row_slice(
            2,
            2,
            &[
                h * (1.0 + self.c_z),
                C64::new(self.c_x, -self.c_y) * 0.5,
                C64::new(self.c_x, self.c_y) * 0.5,
                h * (1.0 - self.c_z),
            ],
        );
        DensityMatrix { num_qubits: 1, mat }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_x * self.c_x + self.c_y * self.c_y + self.c_z * self.c_z
    }

    /// `||rho - sigma||_2^2 = |c - c'|^2 / 2` for single-qubit states.
    pub fn schatten2_distance_sqr(&self, other: &BlochVector) -> f64 {
        let dx = self.c_x - other.c_x;
        let dy = self.c_y - other.c_y;
        let dz = self.c_z - other.c_z;
        0.5 * (dx * dx + dy * dy + dz * dz)
    }
}

/// Partial trace onto one qubit of a pure or mixed state.
pub trait ReduceToQubit {
    fn reduce_to_qubit(&self, k: usize) -> Result<DensityMatrix>;
}

impl ReduceToQubit for StateVector {
    fn reduce_to_qubit(&self, k: usize) -> Result<DensityMatrix> {
        Ok(self.bloch_vector(k)?.to_density())
    }
}

impl ReduceToQubit for DensityMatrix {
    fn reduce_to_qubit(&self, k: usize) -> Result<DensityMatrix> {
        DensityMatrix::reduce_to_qubit(self, k)
    }
}

pub fn reduce_to_qubit<S: ReduceToQubit>(state: &S, k: usize) -> Result<DensityMatrix> {
    state.reduce_to_qubit(k)
}

pub(crate) fn check_qubit_count(n: usize, cap: usize, what: &'static str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one qubit required".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded {
            what,
            requested: n,
            cap,
        });
    }
    Ok(())
}

fn check_index(k: usize, n: usize) -> Result<()> {
    if k >= n {
        Err(Error::QubitOutOfRange {
            index: k,
            num_qubits: n,
        })
    } else {
        Ok(())
    }
}
