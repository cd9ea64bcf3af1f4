//! Shot-noise experiments: how often finite-shot kernel estimates are
//! distinguishable from data-independent noise.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hypothesis::binomial_indistinguishability_test;
use super::stats::RunningStats;
use crate::error::{Error, Result};
use crate::estimators::{estimate_loschmidt, estimate_swap, sample_binomial, Alphabet, ShotRecord, Strategy};
use crate::kernels::{closed_form_product_fidelity, prepared_kernel, KernelKind, Prepared};
use crate::quantum::BlochVector;
use crate::rng::{derive_seed, stream};

/// `n_s` points with components uniform on `[0, 2pi)`.
pub fn uniform_angle_dataset<R: Rng + ?Sized>(n_s: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n_s)
        .map(|_| (0..dim).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect())
        .collect()
}

/// Kernel values above the diagonal, row-major.
pub fn off_diagonal_kernels(prepared: &[Prepared], kind: KernelKind) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(prepared.len() * prepared.len().saturating_sub(1) / 2);
    for i in 0..prepared.len() {
        for j in i + 1..prepared.len() {
            out.push(prepared_kernel(&prepared[i], &prepared[j], kind)?);
        }
    }
    Ok(out)
}

fn product_off_diagonal(points: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            out.push(closed_form_product_fidelity(&points[i][..n], &points[j][..n]));
        }
    }
    out
}

/// Fraction of Loschmidt-echo estimates that are exactly zero. Entry `e`
/// draws from stream `[e]` of `seed`.
pub fn loschmidt_zero_ratio(kappas: &[f64], shots: u64, seed: u64) -> Result<f64> {
    if kappas.is_empty() {
        return Err(Error::InvalidArgument("no kernel entries".into()));
    }
    let mut zeros = 0usize;
    for (e, &k) in kappas.iter().enumerate() {
        let r = estimate_loschmidt(k, shots, &mut stream(seed, &[e as u64]))?;
        zeros += usize::from(r.successes == 0);
    }
    Ok(zeros as f64 / kappas.len() as f64)
}

/// Fraction of SWAP-test records whose two-sided binomial test against fair
/// +/-1 outcomes gives a p-value below `alpha`.
pub fn swap_success_ratio(kappas: &[f64], shots: u64, seed: u64, alpha: f64) -> Result<f64> {
    if kappas.is_empty() {
        return Err(Error::InvalidArgument("no kernel entries".into()));
    }
    let mut hits = 0usize;
    for (e, &k) in kappas.iter().enumerate() {
        let r = estimate_swap(k, shots, &mut stream(seed, &[e as u64]))?;
        hits += usize::from(binomial_indistinguishability_test(&r, 0.5)? < alpha);
    }
    Ok(hits as f64 / kappas.len() as f64)
}

/// Grid of Gram sizes, register sizes and shot counts for the product
/// embedding with uniform `[0, 2pi)` data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioScan {
    pub qubits: Vec<usize>,
    pub shots: Vec<u64>,
    pub n_s: usize,
    pub trials: usize,
    pub seed: u64,
}

/// One grid point, averaged over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub num_qubits: usize,
    pub shots: u64,
    pub ratio: f64,
    pub std_error: f64,
    pub trials: usize,
}

#[derive(Clone, Copy)]
enum Measure {
    Zero,
    Success(f64),
}

impl RatioScan {
    fn validate(&self) -> Result<()> {
        if self.n_s < 2 || self.trials < 1 || self.qubits.is_empty() || self.shots.is_empty() {
            return Err(Error::InvalidArgument(
                "scan needs n_s >= 2, trials >= 1 and nonempty grids".into(),
            ));
        }
        if self.qubits.contains(&0) || self.shots.contains(&0) {
            return Err(Error::InvalidArgument("qubit and shot counts must be positive".into()));
        }
        Ok(())
    }

    /// Trial `t` draws one dataset at the largest register size and uses its
    /// leading components for smaller sizes; estimator randomness depends only
    /// on `t` and the entry index. Both choices make each trial's curve a
    /// common-random-number comparison across the grid.
    fn run(&self, measure: Measure) -> Result<Vec<RatioPoint>> {
        self.validate()?;
        let max_n = *self.qubits.iter().max().expect("nonempty");
        let per_trial: Vec<Vec<f64>> = (0..self.trials)
            .into_par_iter()
            .map(|t| {
                let data = uniform_angle_dataset(self.n_s, max_n, &mut stream(self.seed, &[0, t as u64]));
                let est_seed = derive_seed(self.seed, &[1, t as u64]);
                let mut out = Vec::with_capacity(self.qubits.len() * self.shots.len());
                for &n in &self.qubits {
                    let kappas = product_off_diagonal(&data, n);
                    for &shots in &self.shots {
                        out.push(match measure {
                            Measure::Zero => loschmidt_zero_ratio(&kappas, shots, est_seed)?,
                            Measure::Success(alpha) => swap_success_ratio(&kappas, shots, est_seed, alpha)?,
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut points = Vec::new();
        for (a, &n) in self.qubits.iter().enumerate() {
            for (b, &shots) in self.shots.iter().enumerate() {
                let s: RunningStats = per_trial.iter().map(|v| v[a * self.shots.len() + b]).collect();
                points.push(RatioPoint {
                    num_qubits: n,
                    shots,
                    ratio: s.mean,
                    std_error: s.std_error(),
                    trials: self.trials,
                });
            }
        }
        Ok(points)
    }
}

/// Loschmidt-echo zero ratio over the scan grid.
pub fn zero_ratio_scan(scan: &RatioScan) -> Result<Vec<RatioPoint>> {
    scan.run(Measure::Zero)
}

/// SWAP-test success ratio at significance `alpha` over the scan grid.
pub fn success_ratio_scan(scan: &RatioScan, alpha: f64) -> Result<Vec<RatioPoint>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange {
            value: alpha,
            range: "(0, 1)",
        });
    }
    scan.run(Measure::Success(alpha))
}

/// Shot counts `ceil(2^(k/steps))` for `k = 0, 1, ...` up to `max`, without
/// repeats.
pub fn geometric_shot_grid(steps_per_doubling: u32, max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut k = 0u32;
    loop {
        let v = (k as f64 / steps_per_doubling as f64).exp2().ceil() as u64;
        if v > max {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
        k += 1;
    }
    out
}

/// Smallest shot count on `grid` at which the trial-averaged Loschmidt zero
/// ratio is at most `target`, or `None` if never reached.
pub fn shots_for_zero_ratio(
    num_qubits: usize,
    target: f64,
    grid: &[u64],
    n_s: usize,
    trials: usize,
    seed: u64,
) -> Result<Option<u64>> {
    if grid.is_empty() || n_s < 2 || trials == 0 {
        return Err(Error::InvalidArgument("empty grid, dataset or trial set".into()));
    }
    // For each trial, count the entries still zero at every grid point.
    let counts: Vec<Vec<usize>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let data = uniform_angle_dataset(n_s, num_qubits, &mut stream(seed, &[0, t as u64]));
            let est_seed = derive_seed(seed, &[1, t as u64]);
            let mut zero_at = vec![0usize; grid.len()];
            for (e, &k) in product_off_diagonal(&data, num_qubits).iter().enumerate() {
                for (g, &shots) in grid.iter().enumerate() {
                    let r = estimate_loschmidt(k, shots, &mut stream(est_seed, &[e as u64]))?;
                    if r.successes > 0 {
                        break;
                    }
                    zero_at[g] += 1;
                }
            }
            Ok(zero_at)
        })
        .collect::<Result<_>>()?;
    let entries = (n_s * (n_s - 1) / 2 * trials) as f64;
    Ok(grid.iter().enumerate().find_map(|(g, &shots)| {
        let zeros: usize = counts.iter().map(|c| c[g]).sum();
        (zeros as f64 / entries <= target).then_some(shots)
    }))
}

fn pm_record<R: Rng + ?Sized>(p_plus: f64, shots: u64, rng: &mut R) -> ShotRecord {
    ShotRecord {
        alphabet: Alphabet::PlusMinus,
        shots,
        successes: sample_binomial(shots, p_plus.clamp(0.0, 1.0), rng),
    }
}

/// Fraction of the individual shot records behind projected-kernel estimates
/// that a binomial test at level `alpha` tells apart from data-independent
/// noise.
///
/// `LocalSwap` tests the three overlap records per pair and qubit against
/// `P(+1) = 3/4`; `Tomography` tests the three Pauli records per state and
/// qubit against `P(+1) = 1/2`.
pub fn projected_term_success_ratio(
    bloch: &[Vec<BlochVector>],
    strategy: Strategy,
    shots: u64,
    seed: u64,
    alpha: f64,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shot count must be at least 1".into()));
    }
    let mut rng = stream(seed, &[]);
    let mut hits = 0usize;
    let mut total = 0usize;
    let mut test = |p_plus: f64, null_p: f64, rng: &mut crate::rng::Rng| -> Result<()> {
        let r = pm_record(p_plus, shots, rng);
        hits += usize::from(binomial_indistinguishability_test(&r, null_p)? < alpha);
        total += 1;
        Ok(())
    };
    let overlap = |a: &BlochVector, b: &BlochVector| (1.0 + a.c_x * b.c_x + a.c_y * b.c_y + a.c_z * b.c_z) / 2.0;
    match strategy {
        Strategy::LocalSwap => {
            for i in 0..bloch.len() {
                for j in i + 1..bloch.len() {
                    for (a, b) in bloch[i].iter().zip(&bloch[j]) {
                        for m in [overlap(a, a), overlap(b, b), overlap(a, b)] {
                            test((1.0 + m) / 2.0, 0.75, &mut rng)?;
                        }
                    }
                }
            }
        }
        Strategy::Tomography => {
            for state in bloch {
                for c in state {
                    for v in [c.c_x, c.c_y, c.c_z] {
                        test((1.0 + v) / 2.0, 0.5, &mut rng)?;
                    }
                }
            }
        }
        other => {
            return Err(Error::IncompatibleEstimator {
                strategy: other.name(),
                kernel: "projected",
            })
        }
    }
    if total == 0 {
        return Err(Error::InvalidArgument("no records to test".into()));
    }
    Ok(hits as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::haar_random_state;
    use crate::rng::seeded;

    #[test]
    fn grid_is_geometric_and_distinct() {
        let g = geometric_shot_grid(8, 1 << 10);
        assert_eq!(g[0], 1);
        assert_eq!(*g.last().unwrap(), 1024);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_ratio_is_one_at_large_n() {
        let mut rng = seeded(3);
        let data = uniform_angle_dataset(25, 40, &mut rng);
        let kappas = product_off_diagonal(&data, 40);
        assert_eq!(kappas.len(), 300);
        assert_eq!(loschmidt_zero_ratio(&kappas, 1000, 9).unwrap(), 1.0);
    }

    #[test]
    fn zero_ratio_falls_with_shots_at_small_n() {
        let scan = RatioScan {
            qubits: vec![4],
            shots: vec![1, 10, 100, 10_000],
            n_s: 25,
            trials: 10,
            seed: 1,
        };
        let pts = zero_ratio_scan(&scan).unwrap();
        assert!(pts.windows(2).all(|w| w[1].ratio <= w[0].ratio));
        assert!(pts[3].ratio < 0.5 * pts[0].ratio);
    }

    #[test]
    fn zero_ratio_threshold_grows_with_n() {
        let grid = geometric_shot_grid(8, 1 << 24);
        let a = shots_for_zero_ratio(4, 0.75, &grid, 25, 20, 5).unwrap().unwrap();
        let b = shots_for_zero_ratio(6, 0.75, &grid, 25, 20, 5).unwrap().unwrap();
        assert!(b >= 2 * a, "{a} {b}");
    }

    #[test]
    fn swap_success_ratio_extremes() {
        let ones = vec![1.0; 50];
        assert_eq!(swap_success_ratio(&ones, 1000, 2, 0.01).unwrap(), 1.0);
        let tiny = vec![1e-9; 500];
        assert!(swap_success_ratio(&tiny, 1000, 2, 0.01).unwrap() <= 0.05);
    }

    #[test]
    fn haar_local_swap_terms_look_like_biased_noise() {
        let mut rng = seeded(21);
        let bloch: Vec<Vec<BlochVector>> = (0..8)
            .map(|_| haar_random_state(12, &mut rng).unwrap().bloch_vectors())
            .collect();
        let r = projected_term_success_ratio(&bloch, Strategy::LocalSwap, 1000, 4, 0.01).unwrap();
        assert!(r <= 0.05, "{r}");
        let r = projected_term_success_ratio(&bloch, Strategy::Tomography, 1000, 4, 0.01).unwrap();
        assert!(r <= 0.05, "{r}");
    }

    #[test]
    fn product_states_are_distinguishable() {
        let bloch = vec![
            vec![
                BlochVector {
                    c_x: 0.0,
                    c_y: 0.0,
                    c_z: 1.0
                };
                3
            ];
            4
        ];
        let r = projected_term_success_ratio(&bloch, Strategy::LocalSwap, 1000, 4, 0.01).unwrap();
        assert_eq!(r, 1.0);
        assert!(projected_term_success_ratio(&bloch, Strategy::SwapTest, 10, 0, 0.01).is_err());
    }
}
