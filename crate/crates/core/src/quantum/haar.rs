use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::state::{check_qubit_count, StateVector, STATEVECTOR_CAP};
use super::CMatrix;
use crate::error::Result;

/// Default register size limit for dense Haar unitaries.
pub const HAAR_UNITARY_CAP: usize = 8;

fn ginibre_entry<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary on `n` qubits, capped at [`HAAR_UNITARY_CAP`].
pub fn haar_random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    haar_random_unitary_with_cap(n, HAAR_UNITARY_CAP, rng)
}

/// QR decomposition of a complex Ginibre matrix, with the phases of `R`'s
/// diagonal moved into `Q` so the result is Haar distributed.
pub fn haar_random_unitary_with_cap<R: Rng + ?Sized>(n: usize, cap: usize, rng: &mut R) -> Result<CMatrix> {
    check_qubit_count(n, cap, "Haar unitary")?;
    let d = 1usize << n;
    let mut entries = Vec::with_capacity(d * d);
    for _ in 0..d * d {
        entries.push(ginibre_entry(rng));
    }
    let g = CMatrix::from_vec(d, d, entries);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::ONE };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    Ok(q)
}

/// Haar-random pure state on `n` qubits.
///
/// Consumes the same random stream as the first column of
/// [`haar_random_unitary`], and returns that column.
pub fn haar_random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    check_qubit_count(n, STATEVECTOR_CAP, "Haar state")?;
    let d = 1usize << n;
    let amps: Vec<C64> = (0..d).map(|_| ginibre_entry(rng)).collect();
    StateVector::from_unnormalized(n, amps)
}
