//! Closed-form upper bounds on kernel variances, kernel deviations and
//! distinguishing success probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{projected_kernel, KernelKind};
use crate::quantum::{relative_entropy, trace_norm_distance, DensityMatrix, StateVector};

/// `2 / (d (d + 1))` with `d = 2^n`.
pub fn beta_haar(n: usize) -> f64 {
    let d = (n as f64).exp2();
    2.0 / (d * (d + 1.0))
}

/// `3 / (2^(n+1) + 2)`.
pub fn beta_tilde_haar(n: usize) -> f64 {
    3.0 / ((n as f64 + 1.0).exp2() + 2.0)
}

/// Variance bound for an ensemble with expressivity `eps`.
///
/// With `eps2` the two inputs are drawn from ensembles of expressivity `eps`
/// and `eps2`; `eps2 = Some(eps)` reproduces the single-ensemble value.
pub fn bound_expressivity(eps: f64, n: usize, kind: KernelKind, eps2: Option<f64>) -> f64 {
    let b = beta_haar(n);
    let bt = beta_tilde_haar(n);
    let nf = n as f64;
    match (kind, eps2) {
        (KernelKind::Fidelity, None) => b + eps * (eps + 2.0 * b.sqrt()),
        (KernelKind::Fidelity, Some(e2)) => b + eps * e2 + b.sqrt() * (eps + e2),
        (KernelKind::Projected { gamma }, None) => 4.0 * gamma * nf * (bt + eps),
        (KernelKind::Projected { gamma }, Some(e2)) => 2.0 * gamma * nf * (2.0 * bt + eps + e2),
    }
}

/// Entanglement-induced deviation of the projected kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementBound {
    /// `2 ln 2 * gamma * gamma_s`.
    pub bound: f64,
    /// `|1 - kappa|` for the actual pair.
    pub deviation: f64,
    /// `sum_k (sqrt(S(rho_k || I/2)) + sqrt(S(rho'_k || I/2)))^2`, entropies in bits.
    pub gamma_s: f64,
}

pub fn bound_entanglement(a: &StateVector, b: &StateVector, gamma: f64) -> Result<EntanglementBound> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: a.num_qubits(),
            found: b.num_qubits(),
        });
    }
    let mixed = DensityMatrix::maximally_mixed(1)?;
    let entropy = |bv: crate::quantum::BlochVector| relative_entropy(&bv.to_density(), &mixed);
    let mut gamma_s = 0.0;
    for (ba, bb) in a.bloch_vectors().into_iter().zip(b.bloch_vectors()) {
        let s = entropy(ba)?.sqrt() + entropy(bb)?.sqrt();
        gamma_s += s * s;
    }
    Ok(EntanglementBound {
        bound: 2.0 * std::f64::consts::LN_2 * gamma * gamma_s,
        deviation: (1.0 - projected_kernel(a, b, gamma)?).abs(),
        gamma_s,
    })
}

/// Variance factor for global-measurement kernels on product embeddings:
/// `(3/8)^n`, or the product of `1/3 + e (e + sqrt(4/3))` over per-qubit
/// expressivities.
pub fn bound_global(n: usize, per_qubit_eps: Option<&[f64]>) -> Result<f64> {
    match per_qubit_eps {
        None => Ok(0.375f64.powi(n as i32)),
        Some(eps) => {
            if eps.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: eps.len(),
                });
            }
            let c = (4.0f64 / 3.0).sqrt();
            Ok(eps.iter().map(|e| 1.0 / 3.0 + e * (e + c)).product())
        }
    }
}

/// Best success probability for telling two Bernoulli distributions whose
/// means differ by `eps` apart from `n` samples.
pub fn distinguish_success_bound(n: u64, eps: f64) -> f64 {
    (0.5 + n as f64 * eps.abs() / 2.0).min(1.0)
}

/// Success bound for distinguishing `rho` from `sigma` with `copies` copies.
pub fn helstrom_bound(rho: &DensityMatrix, sigma: &DensityMatrix, copies: u64) -> Result<f64> {
    let d = trace_norm_distance(rho, sigma)?;
    Ok((0.5 + copies as f64 * d / 4.0).min(1.0))
}

/// Shots sufficient for relative error `rel_err` with failure probability
/// `failure_p` when the observable has operator norm `obs_norm`.
pub fn shots_budget(variance: f64, rel_err: f64, failure_p: f64, obs_norm: f64) -> Result<u64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::OutOfRange {
            value: variance,
            range: "(0, inf)",
        });
    }
    if !(rel_err > 0.0 && rel_err.is_finite()) {
        return Err(Error::OutOfRange {
            value: rel_err,
            range: "(0, inf)",
        });
    }
    if !(failure_p > 0.0 && failure_p < 1.0) {
        return Err(Error::OutOfRange {
            value: failure_p,
            range: "(0, 1)",
        });
    }
    if !(obs_norm > 0.0 && obs_norm.is_finite()) {
        return Err(Error::OutOfRange {
            value: obs_norm,
            range: "(0, inf)",
        });
    }
    let x = 2.0 * obs_norm * obs_norm * (2.0 / failure_p).ln() / (rel_err * rel_err * variance);
    // Absorb rounding so exact integers are not bumped up by one.
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 * x { r } else { x.ceil() };
    if n >= u64::MAX as f64 {
        return Err(Error::CapExceeded {
            what: "shot budget",
            requested: usize::MAX,
            cap: usize::MAX,
        });
    }
    Ok(n as u64)
}

/// Which form of the alignment constant to use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KtaConstant {
    /// Cubic in the training-set size.
    #[default]
    Statement,
    /// Quadratic in the training-set size.
    Proof,
}

pub fn kta_constant(n_s: usize, variant: KtaConstant) -> f64 {
    let n = n_s as f64;
    let power = match variant {
        KtaConstant::Statement => n.powi(3),
        KtaConstant::Proof => n.powi(2),
    };
    (8.0 + power * (9.0 * (n - 1.0).powi(2) + 16.0)) / (4.0 * n)
}

/// Upper bound on the variance of kernel target alignment given the
/// variances of the individual kernel entries.
pub fn kta_bound(kernel_variances: &[f64], n_s: usize, variant: KtaConstant) -> f64 {
    kta_constant(n_s, variant) * kernel_variances.iter().sum::<f64>()
}
