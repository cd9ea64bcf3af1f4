//! Shot-noise simulation of kernel measurement protocols.
//!
//! Shots are drawn from the exact binary outcome distribution of each
//! protocol. Counts are sampled by inverting the binomial CDF with a single
//! uniform draw, so for a fixed random stream the count is nondecreasing in
//! the success probability.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};
use crate::quantum::{BlochVector, StateVector};

/// Measurement protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exact,
    LoschmidtEcho,
    SwapTest,
    Tomography,
    LocalSwap,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Exact => "exact",
            Strategy::LoschmidtEcho => "loschmidt_echo",
            Strategy::SwapTest => "swap_test",
            Strategy::Tomography => "tomography",
            Strategy::LocalSwap => "local_swap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Strategy::Exact,
            Strategy::LoschmidtEcho,
            Strategy::SwapTest,
            Strategy::Tomography,
            Strategy::LocalSwap,
        ]
        .into_iter()
        .find(|st| st.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub strategy: Strategy,
    /// Shots per measured quantity.
    pub shots: u64,
    pub seed: u64,
}

impl EstimatorSpec {
    pub fn exact() -> Self {
        Self {
            strategy: Strategy::Exact,
            shots: 0,
            seed: 0,
        }
    }

    pub fn new(strategy: Strategy, shots: u64, seed: u64) -> Result<Self> {
        let spec = Self { strategy, shots, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategy != Strategy::Exact && self.shots == 0 {
            return Err(Error::InvalidArgument("shot count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn is_exact(&self) -> bool {
        self.strategy == Strategy::Exact
    }
}

/// How outcomes are labelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alphabet {
    /// Outcomes 1 (success) and 0.
    ZeroOne,
    /// Outcomes +1 (success) and -1.
    PlusMinus,
}

/// Outcome counts of `shots` i.i.d. binary measurements.
///
/// Shots are exchangeable, so the count of successes is a sufficient record.
/// [`ShotRecord::outcomes`] expands it to a canonical sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub alphabet: Alphabet,
    pub shots: u64,
    pub successes: u64,
}

impl ShotRecord {
    /// Empirical mean of the outcomes.
    pub fn estimate(&self) -> f64 {
        let n = self.shots as f64;
        let s = self.successes as f64;
        match self.alphabet {
            Alphabet::ZeroOne => s / n,
            Alphabet::PlusMinus => (2.0 * s - n) / n,
        }
    }

    /// Outcomes with all successes first.
    pub fn outcomes(&self) -> Vec<i8> {
        let (hi, lo) = match self.alphabet {
            Alphabet::ZeroOne => (1, 0),
            Alphabet::PlusMinus => (1, -1),
        };
        let mut v = vec![hi; self.successes as usize];
        v.resize(self.shots as usize, lo);
        v
    }
}

/// Binomial(`n`, `p`) count from one uniform draw by CDF inversion.
pub fn sample_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    binomial_quantile(n, p, u)
}

/// Smallest `k` with `P(X <= k) > u` for `X ~ Binomial(n, p)`, `u` in `[0, 1)`.
pub fn binomial_quantile(n: u64, p: f64, u: f64) -> u64 {
    if p <= 0.0 || n == 0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let pmf0 = ((n as f64) * (-p).ln_1p()).exp();
    if u < pmf0 {
        return 0;
    }
    if (n as f64) * p < 30.0 {
        // Sequential summation of the pmf from zero.
        let ratio = p / (1.0 - p);
        let mut pmf = pmf0;
        let mut cdf = pmf;
        let mut k = 0u64;
        while cdf <= u && k < n {
            pmf *= (n - k) as f64 / (k + 1) as f64 * ratio;
            k += 1;
            if pmf == 0.0 {
                break;
            }
            cdf += pmf;
        }
        return k;
    }
    let dist = Binomial::new(p, n).expect("p in (0,1)");
    // In the upper half compare survival probabilities to keep resolution.
    let upper = u >= 0.5;
    let tail = 1.0 - u;
    let exceeds = |k: u64| {
        if upper {
            dist.sf(k) < tail
        } else {
            dist.cdf(k) > u
        }
    };
    let (mut lo, mut hi) = (0u64, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if exceeds(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn check_probability(kappa: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&kappa) || kappa.is_nan() {
        return Err(Error::OutOfRange {
            value: kappa,
            range: "[0, 1]",
        });
    }
    Ok(())
}

fn check_shots(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("shot count must be at least 1".into()));
    }
    Ok(())
}

/// Loschmidt echo: each shot returns 1 with probability `kappa`.
pub fn estimate_loschmidt<R: Rng + ?Sized>(kappa: f64, shots: u64, rng: &mut R) -> Result<ShotRecord> {
    check_probability(kappa)?;
    check_shots(shots)?;
    Ok(ShotRecord {
        alphabet: Alphabet::ZeroOne,
        shots,
        successes: sample_binomial(shots, kappa, rng),
    })
}

/// SWAP test: each shot returns +1 with probability `(1 + kappa)/2`.
pub fn estimate_swap<R: Rng + ?Sized>(kappa: f64, shots: u64, rng: &mut R) -> Result<ShotRecord> {
    check_probability(kappa)?;
    pm_record((1.0 + kappa) / 2.0, shots, rng)
}

fn pm_record<R: Rng + ?Sized>(p_plus: f64, shots: u64, rng: &mut R) -> Result<ShotRecord> {
    check_shots(shots)?;
    Ok(ShotRecord {
        alphabet: Alphabet::PlusMinus,
        shots,
        successes: sample_binomial(shots, p_plus.clamp(0.0, 1.0), rng),
    })
}

/// Mean of `shots` fair +/-1 draws, a data-independent reference estimate.
pub fn sample_rand_kappa<R: Rng + ?Sized>(shots: u64, rng: &mut R) -> Result<f64> {
    Ok(pm_record(0.5, shots, rng)?.estimate())
}

/// Mean of `shots` +/-1 draws with `P(+1) = 3/4`.
pub fn sample_biased_rand_kappa<R: Rng + ?Sized>(shots: u64, rng: &mut R) -> Result<f64> {
    Ok(pm_record(0.75, shots, rng)?.estimate())
}

/// Estimates each Bloch coefficient from `shots` +/-1 outcomes with
/// `P(+1) = (1 + c)/2`. The estimate may lie outside the Bloch ball.
pub fn estimate_bloch_tomography<R: Rng + ?Sized>(bloch: &BlochVector, shots: u64, rng: &mut R) -> Result<BlochVector> {
    let mut draw = |c: f64| pm_record((1.0 + c) / 2.0, shots, rng).map(|r| r.estimate());
    Ok(BlochVector {
        c_x: draw(bloch.c_x)?,
        c_y: draw(bloch.c_y)?,
        c_z: draw(bloch.c_z)?,
    })
}

/// Total shots spent by [`estimate_projected`] on one pair of `n`-qubit states.
pub fn projected_shot_count(num_qubits: usize, strategy: Strategy, shots: u64) -> u64 {
    match strategy {
        Strategy::Tomography => 6 * shots * num_qubits as u64,
        Strategy::LocalSwap => 3 * shots * num_qubits as u64,
        _ => 0,
    }
}

/// Squared 2-norm distance of qubit reduced states estimated from shots.
///
/// `LocalSwap` estimates `Tr rho^2 + Tr sigma^2 - 2 Tr[rho sigma]` from three
/// independent SWAP tests; `Tomography` estimates both Bloch vectors. The
/// result is not clipped and may be negative.
pub fn estimate_qubit_distance_sqr<R: Rng + ?Sized>(
    a: &BlochVector,
    b: &BlochVector,
    strategy: Strategy,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    match strategy {
        Strategy::Tomography => {
            let ea = estimate_bloch_tomography(a, shots, rng)?;
            let eb = estimate_bloch_tomography(b, shots, rng)?;
            Ok(ea.schatten2_distance_sqr(&eb))
        }
        Strategy::LocalSwap => {
            let overlap =
                |u: &BlochVector, v: &BlochVector| 0.5 * (1.0 + u.c_x * v.c_x + u.c_y * v.c_y + u.c_z * v.c_z);
            let mut term = |m: f64| -> Result<f64> { Ok(estimate_swap(m.clamp(0.0, 1.0), shots, rng)?.estimate()) };
            let paa = term(overlap(a, a))?;
            let pbb = term(overlap(b, b))?;
            let pab = term(overlap(a, b))?;
            Ok(paa + pbb - 2.0 * pab)
        }
        Strategy::Exact => Ok(a.schatten2_distance_sqr(b)),
        Strategy::LoschmidtEcho | Strategy::SwapTest => Err(Error::IncompatibleEstimator {
            strategy: strategy.name(),
            kernel: "projected",
        }),
    }
}

/// Projected kernel estimate from per-qubit Bloch vectors.
pub fn estimate_projected_from_bloch<R: Rng + ?Sized>(
    a: &[BlochVector],
    b: &[BlochVector],
    gamma: f64,
    strategy: Strategy,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if strategy != Strategy::Exact {
        check_shots(shots)?;
    }
    let mut total = 0.0;
    for (ba, bb) in a.iter().zip(b) {
        total += estimate_qubit_distance_sqr(ba, bb, strategy, shots, rng)?;
    }
    Ok((-gamma * total).exp())
}

/// Projected kernel estimate for two states.
pub fn estimate_projected<R: Rng + ?Sized>(
    a: &StateVector,
    b: &StateVector,
    gamma: f64,
    strategy: Strategy,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: a.num_qubits(),
            found: b.num_qubits(),
        });
    }
    estimate_projected_from_bloch(&a.bloch_vectors(), &b.bloch_vectors(), gamma, strategy, shots, rng)
}
