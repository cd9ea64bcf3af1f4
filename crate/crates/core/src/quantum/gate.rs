use num_complex::Complex64 as C64;

use super::CMatrix;
use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-10;

pub(crate) type M2 = [[C64; 2]; 2];
pub(crate) type M4 = [[C64; 4]; 4];

/// A one- or two-qubit gate with its target qubits.
///
/// For two-qubit matrices the basis order is `|q0 q1>` with `q0` the more
/// significant bit.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    Hadamard { qubit: usize },
    CZ { a: usize, b: usize },
    CNOT { control: usize, target: usize },
    Arbitrary2x2 { qubit: usize, matrix: M2 },
    Arbitrary4x4 { q0: usize, q1: usize, matrix: Box<M4> },
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl Gate {
    /// A single-qubit gate from an explicit matrix, rejected unless unitary.
    pub fn arbitrary_2x2(qubit: usize, matrix: M2) -> Result<Self> {
        let m = CMatrix::from_fn(2, 2, |i, j| matrix[i][j]);
        check_unitary(&m)?;
        Ok(Gate::Arbitrary2x2 { qubit, matrix })
    }

    /// A two-qubit gate from an explicit matrix, rejected unless unitary.
    pub fn arbitrary_4x4(q0: usize, q1: usize, matrix: M4) -> Result<Self> {
        let m = CMatrix::from_fn(4, 4, |i, j| matrix[i][j]);
        check_unitary(&m)?;
        if q0 == q1 {
            return Err(Error::InvalidArgument("two-qubit gate needs distinct qubits".into()));
        }
        Ok(Gate::Arbitrary4x4 {
            q0,
            q1,
            matrix: Box::new(matrix),
        })
    }

    /// Qubits the gate acts on, in matrix order.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Rx { qubit, .. }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::Hadamard { qubit }
            | Gate::Arbitrary2x2 { qubit, .. } => vec![*qubit],
            Gate::CZ { a, b } => vec![*a, *b],
            Gate::CNOT { control, target } => vec![*control, *target],
            Gate::Arbitrary4x4 { q0, q1, .. } => vec![*q0, *q1],
        }
    }

    pub(crate) fn single_qubit_matrix(&self) -> Option<(usize, M2)> {
        match *self {
            Gate::Rx { qubit, angle } => {
                let (s, co) = (angle / 2.0).sin_cos();
                Some((qubit, [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]))
            }
            Gate::Ry { qubit, angle } => {
                let (s, co) = (angle / 2.0).sin_cos();
                Some((qubit, [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]))
            }
            Gate::Rz { qubit, angle } => {
                let (s, co) = (angle / 2.0).sin_cos();
                Some((qubit, [[c(co, -s), C64::ZERO], [C64::ZERO, c(co, s)]]))
            }
            Gate::Hadamard { qubit } => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                Some((qubit, [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]))
            }
            Gate::Arbitrary2x2 { qubit, matrix } => Some((qubit, matrix)),
            _ => None,
        }
    }

    /// The gate's own 2x2 or 4x4 matrix.
    pub fn matrix(&self) -> CMatrix {
        if let Some((_, m)) = self.single_qubit_matrix() {
            return CMatrix::from_fn(2, 2, |i, j| m[i][j]);
        }
        let one = C64::ONE;
        match self {
            Gate::CZ { .. } => {
                let mut m = CMatrix::identity(4, 4);
                m[(3, 3)] = -one;
                m
            }
            Gate::CNOT { .. } => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = one;
                m[(1, 1)] = one;
                m[(2, 3)] = one;
                m[(3, 2)] = one;
                m
            }
            Gate::Arbitrary4x4 { matrix, .. } => CMatrix::from_fn(4, 4, |i, j| matrix[i][j]),
            _ => unreachable!("single-qubit gates handled above"),
        }
    }

    pub(crate) fn check_qubits(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { index: q, num_qubits });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::InvalidArgument("two-qubit gate needs distinct qubits".into()));
        }
        Ok(())
    }

    /// Applies the gate in place to a vector of `2^num_qubits` amplitudes.
    /// Qubit indices must already be validated.
    pub(crate) fn apply_to_slice(&self, amps: &mut [C64], num_qubits: usize) {
        if let Some((q, m)) = self.single_qubit_matrix() {
            apply_1q(amps, num_qubits, q, &m);
            return;
        }
        match self {
            Gate::CZ { a, b } => {
                let ma = bit_mask(num_qubits, *a);
                let mb = bit_mask(num_qubits, *b);
                for (i, amp) in amps.iter_mut().enumerate() {
                    if i & ma != 0 && i & mb != 0 {
                        *amp = -*amp;
                    }
                }
            }
            Gate::CNOT { control, target } => {
                let mc = bit_mask(num_qubits, *control);
                let mt = bit_mask(num_qubits, *target);
                for i in 0..amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        amps.swap(i, i | mt);
                    }
                }
            }
            Gate::Arbitrary4x4 { q0, q1, matrix } => {
                apply_2q(amps, num_qubits, *q0, *q1, matrix);
            }
            _ => unreachable!("single-qubit gates handled above"),
        }
    }
}

/// Mask selecting qubit `q`'s bit; qubit 0 is the most significant.
pub(crate) fn bit_mask(num_qubits: usize, q: usize) -> usize {
    1usize << (num_qubits - 1 - q)
}

fn apply_1q(amps: &mut [C64], n: usize, q: usize, m: &M2) {
    let mask = bit_mask(n, q);
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a, b) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
    }
}

fn apply_2q(amps: &mut [C64], n: usize, q0: usize, q1: usize, m: &M4) {
    let m0 = bit_mask(n, q0);
    let m1 = bit_mask(n, q1);
    for i in 0..amps.len() {
        if i & m0 == 0 && i & m1 == 0 {
            let idx = [i, i | m1, i | m0, i | m0 | m1];
            let v = idx.map(|k| amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                amps[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }
}

/// Max-entry deviation of `U U^dagger` from the identity.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let prod = u * u.adjoint();
    let id = CMatrix::identity(u.nrows(), u.ncols());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn check_unitary(u: &CMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            found: u.ncols(),
        });
    }
    let deviation = unitarity_deviation(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_gate_matrices_are_unitary() {
        let gates = [
            Gate::Rx { qubit: 0, angle: 0.7 },
            Gate::Ry { qubit: 0, angle: -1.3 },
            Gate::Rz { qubit: 0, angle: 2.9 },
            Gate::Hadamard { qubit: 0 },
            Gate::CZ { a: 0, b: 1 },
            Gate::CNOT { control: 0, target: 1 },
        ];
        for g in gates {
            assert!(unitarity_deviation(&g.matrix()) < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn non_unitary_matrix_is_rejected() {
        let m = [[C64::ONE, C64::ONE], [C64::ZERO, C64::ONE]];
        assert!(matches!(Gate::arbitrary_2x2(0, m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn arbitrary_4x4_matches_cnot() {
        let cnot = Gate::CNOT { control: 0, target: 1 }.matrix();
        let m: M4 = std::array::from_fn(|i| std::array::from_fn(|j| cnot[(i, j)]));
        let g = Gate::arbitrary_4x4(0, 1, m).unwrap();
        for basis in 0..4 {
            let mut a = vec![C64::ZERO; 4];
            a[basis] = C64::ONE;
            let mut b = a.clone();
            g.apply_to_slice(&mut a, 2);
            Gate::CNOT { control: 0, target: 1 }.apply_to_slice(&mut b, 2);
            assert_eq!(a, b);
        }
    }
}
