//! Dense state-vector and density-matrix simulation.

mod gate;
mod haar;
mod measures;
mod state;

#[cfg(test)]
mod tests;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use gate::{unitarity_deviation, Gate};
pub use haar::{haar_random_state, haar_random_unitary, haar_random_unitary_with_cap, HAAR_UNITARY_CAP};
pub use measures::{
    fidelity, overlap, relative_entropy, sandwiched_renyi2_vs_maxmixed, schatten2_distance, trace_norm,
    trace_norm_distance,
};
pub use state::{
    apply_gate, reduce_to_qubit, BlochVector, DensityMatrix, ReduceToQubit, StateVector, DENSITY_MATRIX_CAP,
    STATEVECTOR_CAP,
};

pub(crate) use state::check_qubit_count;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let evals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (evals, vecs)
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut evals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    evals.sort_by(f64::total_cmp);
    evals
}
