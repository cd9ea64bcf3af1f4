use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, Discrete, DiscreteCDF};

use super::stats::RunningStats;
use crate::error::{Error, Result};
use crate::estimators::{sample_binomial, ShotRecord};
use crate::rng::stream;

/// Exact two-sided binomial test: the total probability under
/// `Binomial(n, p)` of counts no more likely than `k`.
pub fn binomial_two_sided_p(k: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let dist = Binomial::new(p, n).expect("p in (0, 1)");
    let m = n as f64 * p;
    let kf = k as f64;
    if kf == m {
        return 1.0;
    }
    // Relative slack so numerically tied probabilities count as equal.
    let threshold = dist.pmf(k) * (1.0 + 1e-7);
    let cdf = |x: i64| if x < 0 { 0.0 } else { dist.cdf(x as u64) };
    let sf = |x: i64| if x < 0 { 1.0 } else { dist.sf(x as u64) };
    let pval = if kf < m {
        // Upper tail: pmf decreases on [ceil(m), n].
        let ix = search(|x| -dist.pmf(x), -threshold, m.ceil() as i64, n as i64);
        let mut y = n as i64 - ix;
        if ix >= 0 && threshold == dist.pmf(ix as u64) {
            y += 1;
        }
        cdf(k as i64) + sf(n as i64 - y)
    } else {
        // Lower tail: pmf increases on [0, floor(m)].
        let ix = search(|x| dist.pmf(x), threshold, 0, m.floor() as i64);
        let y = ix + 1;
        cdf(y - 1) + sf(k as i64 - 1)
    };
    pval.min(1.0)
}

/// For nondecreasing `a` on `[lo, hi]`, an index `i` with `a(i) <= d < a(i+1)`
/// (`lo - 1` when `d < a(lo)`).
fn search(a: impl Fn(u64) -> f64, d: f64, mut lo: i64, mut hi: i64) -> i64 {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let v = a(mid as u64);
        if v < d {
            lo = mid + 1;
        } else if v > d {
            hi = mid - 1;
        } else {
            return mid;
        }
    }
    if a(lo.max(0) as u64) <= d {
        lo
    } else {
        lo - 1
    }
}

/// Two-sided p-value of a shot record against i.i.d. outcomes with success
/// probability `null_p`.
pub fn binomial_indistinguishability_test(record: &ShotRecord, null_p: f64) -> Result<f64> {
    if record.shots == 0 {
        return Err(Error::InvalidArgument("empty shot record".into()));
    }
    if !(0.0..=1.0).contains(&null_p) {
        return Err(Error::OutOfRange {
            value: null_p,
            range: "[0, 1]",
        });
    }
    Ok(binomial_two_sided_p(record.successes, record.shots, null_p))
}

/// Outcome of repeated binary hypothesis tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionSimulation {
    pub samples: u64,
    pub eps: f64,
    pub trials: usize,
    pub success_rate: f64,
    pub std_error: f64,
}

/// Log-likelihood ratio of count `k` out of `n` under `p1` versus `p0`.
fn log_likelihood_ratio(k: u64, n: u64, p0: f64, p1: f64) -> f64 {
    let term = |c: u64, a: f64, b: f64| {
        if c == 0 {
            0.0
        } else if a == 0.0 {
            f64::INFINITY
        } else if b == 0.0 {
            f64::NEG_INFINITY
        } else {
            c as f64 * (a / b).ln()
        }
    };
    term(k, p1, p0) + term(n - k, 1.0 - p1, 1.0 - p0)
}

/// Simulates the likelihood-ratio decision between `Bernoulli(p0)` and
/// `Bernoulli(p0 + eps)` from `samples` draws, each hypothesis a priori equally
/// likely. Ties are broken by a fair coin.
pub fn simulate_optimal_decision(
    samples: u64,
    p0: f64,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<DecisionSimulation> {
    let p1 = p0 + eps;
    if !(0.0..=1.0).contains(&p0) || !(0.0..=1.0).contains(&p1) {
        return Err(Error::OutOfRange {
            value: p1,
            range: "[0, 1]",
        });
    }
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials required".into()));
    }
    const CHUNK: usize = 4096;
    let chunks = trials.div_ceil(CHUNK);
    let stats = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, &[c as u64]);
            let count = CHUNK.min(trials - c * CHUNK);
            let mut s = RunningStats::new();
            for _ in 0..count {
                let truth: bool = rng.random();
                let k = sample_binomial(samples, if truth { p1 } else { p0 }, &mut rng);
                let llr = log_likelihood_ratio(k, samples, p0, p1);
                let guess = if llr > 0.0 {
                    true
                } else if llr < 0.0 {
                    false
                } else {
                    rng.random()
                };
                s.push(if guess == truth { 1.0 } else { 0.0 });
            }
            s
        })
        .collect::<Vec<_>>()
        .iter()
        .fold(RunningStats::new(), |acc, s| acc.merge(s));
    Ok(DecisionSimulation {
        samples,
        eps,
        trials,
        success_rate: stats.mean,
        std_error: stats.std_error(),
    })
}

/// Exact success probability of the same decision rule:
/// `1/2 + TV(Bin(n, p0), Bin(n, p0 + eps)) / 2`.
pub fn optimal_decision_success(samples: u64, p0: f64, eps: f64) -> f64 {
    let p1 = p0 + eps;
    let pmf = |p: f64, k: u64| {
        if p <= 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else if p >= 1.0 {
            if k == samples {
                1.0
            } else {
                0.0
            }
        } else {
            Binomial::new(p, samples).expect("p in (0, 1)").pmf(k)
        }
    };
    let tv: f64 = (0..=samples).map(|k| (pmf(p0, k) - pmf(p1, k)).abs()).sum::<f64>() / 2.0;
    0.5 + tv / 2.0
}
