use super::state::{DensityMatrix, StateVector};
use super::{hermitian_eigen, CMatrix};
use crate::error::{Error, Result};

const CLIP_TOL: f64 = 1e-9;
const ZERO_EIG: f64 = 1e-12;
const SUPPORT_TOL: f64 = 1e-10;

/// `|<a|b>|^2`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// `Tr[rho sigma]`.
pub fn overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(rho
        .matrix()
        .iter()
        .zip(sigma.matrix().iter())
        .map(|(a, b)| (a * b.conj()).re)
        .sum())
}

/// Schatten 2-norm (Frobenius norm) of `rho - sigma`.
pub fn schatten2_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok((rho.matrix() - sigma.matrix()).norm())
}

/// Schatten 1-norm of `rho - sigma` (twice the trace distance).
pub fn trace_norm_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(hermitian: &CMatrix) -> f64 {
    let (evals, _) = hermitian_eigen(hermitian);
    evals.iter().map(|e| e.abs()).sum()
}

/// Quantum relative entropy `Tr[rho (log2 rho - log2 sigma)]` in bits.
///
/// Eigenvalues in `[-1e-9, 0)` are clipped to zero. Fails when the support
/// of `rho` is not contained in that of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let (lr, vr) = clipped_eigen(rho.matrix())?;
    let (ls, vs) = clipped_eigen(sigma.matrix())?;
    let overlaps = vr.adjoint() * &vs;
    let mut s = 0.0;
    for (i, &l) in lr.iter().enumerate() {
        if l <= ZERO_EIG {
            continue;
        }
        s += l * l.log2();
        for (j, &m) in ls.iter().enumerate() {
            let w = l * overlaps[(i, j)].norm_sqr();
            if m <= ZERO_EIG {
                if w > SUPPORT_TOL {
                    return Err(Error::InfiniteRelativeEntropy);
                }
                continue;
            }
            s -= w * m.log2();
        }
    }
    Ok(s.max(0.0))
}

/// `log2(2^n Tr[rho^2])`, the sandwiched 2-Renyi divergence from `I/2^n`.
pub fn sandwiched_renyi2_vs_maxmixed(rho: &DensityMatrix) -> f64 {
    (rho.num_qubits() as f64 + rho.purity().log2()).max(0.0)
}

fn clipped_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let (mut evals, vecs) = hermitian_eigen(m);
    for e in evals.iter_mut() {
        if *e < -CLIP_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {e:.3e}")));
        }
        if *e < 0.0 {
            *e = 0.0;
        }
    }
    Ok((evals, vecs))
}

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: a.num_qubits(),
            found: b.num_qubits(),
        });
    }
    Ok(())
}
