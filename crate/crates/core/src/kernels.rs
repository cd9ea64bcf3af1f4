//! Fidelity and projected quantum kernels and Gram matrices.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::{embed, EmbeddingSpec, Family};
use crate::error::{Error, Result};
use crate::estimators::{estimate_loschmidt, estimate_projected_from_bloch, estimate_swap, EstimatorSpec, Strategy};
use crate::quantum::{fidelity, BlochVector, StateVector};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelKind {
    Fidelity,
    Projected {
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
}

pub const DEFAULT_GAMMA: f64 = 1.0;

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

impl KernelKind {
    pub fn projected() -> Self {
        KernelKind::Projected { gamma: DEFAULT_GAMMA }
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelKind::Projected { gamma } = *self {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::OutOfRange {
                    value: gamma,
                    range: "(0, inf)",
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Fidelity => "fidelity",
            KernelKind::Projected { .. } => "projected",
        }
    }

    /// Whether `strategy` measures this kernel.
    pub fn supports(&self, strategy: Strategy) -> bool {
        match self {
            KernelKind::Fidelity => matches!(strategy, Strategy::Exact | Strategy::LoschmidtEcho | Strategy::SwapTest),
            KernelKind::Projected { .. } => {
                matches!(strategy, Strategy::Exact | Strategy::Tomography | Strategy::LocalSwap)
            }
        }
    }

    pub fn check_estimator(&self, strategy: Strategy) -> Result<()> {
        if self.supports(strategy) {
            Ok(())
        } else {
            Err(Error::IncompatibleEstimator {
                strategy: strategy.name(),
                kernel: self.name(),
            })
        }
    }
}

/// `|<a|b>|^2`.
pub fn fidelity_kernel(a: &StateVector, b: &StateVector) -> Result<f64> {
    fidelity(a, b)
}

/// `exp(-gamma * sum_k ||rho_k - rho'_k||_2^2)` over single-qubit marginals.
pub fn projected_kernel(a: &StateVector, b: &StateVector, gamma: f64) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: a.num_qubits(),
            found: b.num_qubits(),
        });
    }
    KernelKind::Projected { gamma }.validate()?;
    Ok(projected_from_bloch(&a.bloch_vectors(), &b.bloch_vectors(), gamma))
}

pub fn projected_from_bloch(a: &[BlochVector], b: &[BlochVector], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x.schatten2_distance_sqr(y)).sum();
    (-gamma * d).exp()
}

/// Fidelity kernel of the `Ry` product embedding: `prod_k cos^2((x_k - x'_k)/2)`.
pub fn closed_form_product_fidelity(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| ((a - b) / 2.0).cos().powi(2)).product()
}

/// Projected kernel of the `Ry` product embedding. Each marginal has Bloch
/// vector `(sin x, 0, cos x)`, so the squared distance is `2 sin^2(dx/2)`.
pub fn closed_form_product_projected(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let d: f64 = x.iter().zip(y).map(|(a, b)| 2.0 * ((a - b) / 2.0).sin().powi(2)).sum();
    (-gamma * d).exp()
}

/// An input prepared once for repeated kernel evaluations.
#[derive(Debug, Clone)]
pub enum Prepared {
    /// Angles of the `Ry` product embedding; no state vector needed.
    ProductAngles(Vec<f64>),
    State {
        state: StateVector,
        bloch: Vec<BlochVector>,
    },
}

impl Prepared {
    pub fn bloch_vectors(&self) -> Vec<BlochVector> {
        match self {
            Prepared::ProductAngles(x) => x
                .iter()
                .map(|&a| BlochVector {
                    c_x: a.sin(),
                    c_y: 0.0,
                    c_z: a.cos(),
                })
                .collect(),
            Prepared::State { bloch, .. } => bloch.clone(),
        }
    }
}

/// Prepares `x` under `spec`. The `Ry` product family bypasses simulation so
/// any register size is supported.
pub fn prepare(spec: &EmbeddingSpec, x: &[f64], kind: KernelKind) -> Result<Prepared> {
    if spec.family == Family::TensorProductRy {
        spec.validate()?;
        if x.len() != spec.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: spec.num_qubits,
                found: x.len(),
            });
        }
        return Ok(Prepared::ProductAngles(x.to_vec()));
    }
    let state = embed(spec, x)?;
    let bloch = match kind {
        KernelKind::Projected { .. } => state.bloch_vectors(),
        KernelKind::Fidelity => Vec::new(),
    };
    Ok(Prepared::State { state, bloch })
}

/// Prepares `U_d(x) U_p(theta)|0...0>` for a parameterized family.
pub fn prepare_parameterized(spec: &EmbeddingSpec, x: &[f64], theta: &[f64], kind: KernelKind) -> Result<Prepared> {
    let state = crate::embeddings::embed_parameterized(spec, x, theta)?;
    let bloch = match kind {
        KernelKind::Projected { .. } => state.bloch_vectors(),
        KernelKind::Fidelity => Vec::new(),
    };
    Ok(Prepared::State { state, bloch })
}

/// Exact kernel value between two prepared inputs.
pub fn prepared_kernel(a: &Prepared, b: &Prepared, kind: KernelKind) -> Result<f64> {
    match (a, b, kind) {
        (Prepared::ProductAngles(x), Prepared::ProductAngles(y), KernelKind::Fidelity) => {
            Ok(closed_form_product_fidelity(x, y))
        }
        (Prepared::ProductAngles(x), Prepared::ProductAngles(y), KernelKind::Projected { gamma }) => {
            Ok(closed_form_product_projected(x, y, gamma))
        }
        (Prepared::State { state: sa, .. }, Prepared::State { state: sb, .. }, KernelKind::Fidelity) => {
            fidelity(sa, sb)
        }
        (Prepared::State { bloch: ba, .. }, Prepared::State { bloch: bb, .. }, KernelKind::Projected { gamma }) => {
            Ok(projected_from_bloch(ba, bb, gamma))
        }
        _ => Err(Error::InvalidArgument(
            "inputs prepared under different embeddings".into(),
        )),
    }
}

/// One kernel value, measured with `est` using the supplied random stream.
pub fn estimate_prepared<R: rand::Rng + ?Sized>(
    a: &Prepared,
    b: &Prepared,
    kind: KernelKind,
    est: &EstimatorSpec,
    rng: &mut R,
) -> Result<f64> {
    kind.check_estimator(est.strategy)?;
    match est.strategy {
        Strategy::Exact => prepared_kernel(a, b, kind),
        Strategy::LoschmidtEcho => {
            let k = prepared_kernel(a, b, kind)?.clamp(0.0, 1.0);
            Ok(estimate_loschmidt(k, est.shots, rng)?.estimate())
        }
        Strategy::SwapTest => {
            let k = prepared_kernel(a, b, kind)?.clamp(0.0, 1.0);
            Ok(estimate_swap(k, est.shots, rng)?.estimate())
        }
        Strategy::Tomography | Strategy::LocalSwap => {
            let KernelKind::Projected { gamma } = kind else {
                unreachable!("checked above")
            };
            estimate_projected_from_bloch(
                &a.bloch_vectors(),
                &b.bloch_vectors(),
                gamma,
                est.strategy,
                est.shots,
                rng,
            )
        }
    }
}

/// Exact kernel between two raw inputs.
pub fn kernel(spec: &EmbeddingSpec, x: &[f64], y: &[f64], kind: KernelKind) -> Result<f64> {
    kind.validate()?;
    prepared_kernel(&prepare(spec, x, kind)?, &prepare(spec, y, kind)?, kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provenance", rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Estimated(EstimatorSpec),
}

/// Symmetric kernel matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    pub kind: KernelKind,
    pub provenance: Provenance,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn from_entries(entries: DMatrix<f64>, kind: KernelKind, provenance: Provenance) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        Ok(Self {
            entries,
            kind,
            provenance,
        })
    }

    pub fn is_identity(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| self.entries[(i, j)] == if i == j { 1.0 } else { 0.0 }))
    }

    /// Smallest eigenvalue of the (symmetric) entries.
    pub fn min_eigenvalue(&self) -> f64 {
        self.entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    fn header(&self) -> String {
        let (strategy, shots, seed) = match self.provenance {
            Provenance::Exact => ("exact", 0, 0),
            Provenance::Estimated(e) => (e.strategy.name(), e.shots, e.seed),
        };
        let kind = match self.kind {
            KernelKind::Fidelity => "fidelity".to_string(),
            KernelKind::Projected { gamma } => format!("projected(gamma={gamma:.16e})"),
        };
        format!(
            "# n_s={};kind={};estimator={};shots={};seed={}",
            self.size(),
            kind,
            strategy,
            shots,
            seed
        )
    }

    /// Row-major CSV with a metadata comment line.
    pub fn to_csv(&self) -> String {
        let mut s = self.header();
        s.push('\n');
        for i in 0..self.size() {
            for j in 0..self.size() {
                if j > 0 {
                    s.push(',');
                }
                write!(s, "{:.16e}", self.entries[(i, j)]).expect("write to string");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = f.lines();
        let header = lines.next().ok_or(Error::Csv {
            line: 1,
            message: "empty file".into(),
        })??;
        let (size, kind, provenance) = parse_header(&header)?;
        let mut data = Vec::with_capacity(size * size);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Csv {
                    line: i + 2,
                    message: e.to_string(),
                })?;
            if row.len() != size {
                return Err(Error::Csv {
                    line: i + 2,
                    message: format!("expected {size} columns, found {}", row.len()),
                });
            }
            data.extend(row);
        }
        if data.len() != size * size {
            return Err(Error::Csv {
                line: 0,
                message: format!("expected {size} rows"),
            });
        }
        Self::from_entries(DMatrix::from_row_slice(size, size, &data), kind, provenance)
    }
}

fn parse_header(line: &str) -> Result<(usize, KernelKind, Provenance)> {
    let bad = |m: &str| Error::Csv {
        line: 1,
        message: m.to_string(),
    };
    let body = line.strip_prefix("# ").ok_or_else(|| bad("missing metadata header"))?;
    let mut size = None;
    let mut kind = None;
    let mut strategy = None;
    let mut shots = 0u64;
    let mut seed = 0u64;
    for field in body.split(';') {
        let (k, v) = field.split_once('=').ok_or_else(|| bad("malformed header field"))?;
        match k {
            "n_s" => size = Some(v.parse().map_err(|_| bad("bad n_s"))?),
            "kind" => {
                kind = Some(if v == "fidelity" {
                    KernelKind::Fidelity
                } else {
                    let g = v
                        .strip_prefix("projected(gamma=")
                        .and_then(|r| r.strip_suffix(')'))
                        .ok_or_else(|| bad("bad kind"))?;
                    KernelKind::Projected {
                        gamma: g.parse().map_err(|_| bad("bad gamma"))?,
                    }
                })
            }
            "estimator" => strategy = Some(Strategy::parse(v).ok_or_else(|| bad("bad estimator"))?),
            "shots" => shots = v.parse().map_err(|_| bad("bad shots"))?,
            "seed" => seed = v.parse().map_err(|_| bad("bad seed"))?,
            _ => return Err(bad("unknown header field")),
        }
    }
    let strategy = strategy.ok_or_else(|| bad("missing estimator"))?;
    let provenance = if strategy == Strategy::Exact {
        Provenance::Exact
    } else {
        Provenance::Estimated(EstimatorSpec { strategy, shots, seed })
    };
    Ok((
        size.ok_or_else(|| bad("missing n_s"))?,
        kind.ok_or_else(|| bad("missing kind"))?,
        provenance,
    ))
}

/// Gram matrix over `inputs`. Only the strict upper triangle is evaluated;
/// the diagonal is fixed to 1. Estimated entry `(i, j)` draws from a stream
/// derived from `(est.seed, i, j)`.
pub fn gram(spec: &EmbeddingSpec, inputs: &[Vec<f64>], kind: KernelKind, est: &EstimatorSpec) -> Result<GramMatrix> {
    kind.validate()?;
    est.validate()?;
    kind.check_estimator(est.strategy)?;
    let prepared: Vec<Prepared> = inputs
        .par_iter()
        .map(|x| prepare(spec, x, kind))
        .collect::<Result<_>>()?;
    gram_prepared(&prepared, kind, est)
}

/// [`gram`] over inputs that are already prepared.
pub fn gram_prepared(prepared: &[Prepared], kind: KernelKind, est: &EstimatorSpec) -> Result<GramMatrix> {
    kind.check_estimator(est.strategy)?;
    let n = prepared.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut r = rng::stream(est.seed, &[i as u64, j as u64]);
            estimate_prepared(&prepared[i], &prepared[j], kind, est, &mut r)
        })
        .collect::<Result<_>>()?;
    let mut entries = DMatrix::identity(n, n);
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        entries[(i, j)] = v;
        entries[(j, i)] = v;
    }
    let provenance = if est.is_exact() {
        Provenance::Exact
    } else {
        Provenance::Estimated(*est)
    };
    GramMatrix::from_entries(entries, kind, provenance)
}

/// Kernel values between test inputs (rows) and anchors (columns).
pub fn cross_kernel(
    test: &[Prepared],
    anchors: &[Prepared],
    kind: KernelKind,
    est: &EstimatorSpec,
) -> Result<DMatrix<f64>> {
    kind.check_estimator(est.strategy)?;
    let rows: Vec<Vec<f64>> = test
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            anchors
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    let mut r = rng::stream(est.seed, &[u64::MAX, i as u64, j as u64]);
                    estimate_prepared(t, a, kind, est, &mut r)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(test.len(), anchors.len(), |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand::Rng;

    use super::*;
    use crate::embeddings::Entangler;
    use crate::quantum::{haar_random_state, Gate};
    use crate::rng::seeded;

    #[test]
    fn self_kernels_are_one() {
        let a = haar_random_state(3, &mut seeded(1)).unwrap();
        assert!((fidelity_kernel(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((projected_kernel(&a, &a, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projected_orthogonal_qubits() {
        let z = StateVector::zero(1).unwrap();
        let o = StateVector::basis(1, 1).unwrap();
        // ||diag(1, -1)||_2^2 = 2.
        assert!((projected_kernel(&z, &o, 1.0).unwrap() - (-2f64).exp()).abs() < 1e-12);
        assert!((projected_kernel(&z, &o, 1.0).unwrap() - 0.135335).abs() < 1e-6);
        assert!(projected_kernel(&z, &o, 0.0).is_err());
    }

    #[test]
    fn projected_volume_law_pair_is_one() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |r: f64| num_complex::Complex64::new(r, 0.0);
        let bell = StateVector::new(2, vec![c(h), c(0.0), c(0.0), c(h)]).unwrap();
        let other = StateVector::new(2, vec![c(0.0), c(h), c(-h), c(0.0)]).unwrap();
        assert!((projected_kernel(&bell, &other, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_product_fidelity(&[0.3, 0.2], &[0.3, 0.2]), 1.0);
        assert!(closed_form_product_fidelity(&[PI], &[0.0]) < 1e-30);
        let v = closed_form_product_fidelity(&[PI / 2.0, PI / 2.0], &[0.0, 0.0]);
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gram_small_cases() {
        let spec = EmbeddingSpec::tensor_product_ry(2);
        let g = gram(&spec, &[vec![0.1, 0.2]], KernelKind::Fidelity, &EstimatorSpec::exact()).unwrap();
        assert_eq!(g.entries, DMatrix::from_element(1, 1, 1.0));
        let same = vec![vec![0.4, -0.3]; 3];
        let g = gram(&spec, &same, KernelKind::Fidelity, &EstimatorSpec::exact()).unwrap();
        assert!(g.entries.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let hee = EmbeddingSpec::hardware_efficient(2, 2);
        let g = gram(&hee, &same, KernelKind::projected(), &EstimatorSpec::exact()).unwrap();
        assert!(g.entries.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn gram_rejects_incompatible_estimator() {
        let spec = EmbeddingSpec::tensor_product_ry(2);
        let est = EstimatorSpec::new(Strategy::LoschmidtEcho, 10, 0).unwrap();
        let err = gram(&spec, &[vec![0.0, 0.0], vec![1.0, 1.0]], KernelKind::projected(), &est).unwrap_err();
        assert!(matches!(err, Error::IncompatibleEstimator { .. }));
        let est = EstimatorSpec::new(Strategy::Tomography, 10, 0).unwrap();
        assert!(gram(&spec, &[vec![0.0, 0.0]], KernelKind::Fidelity, &est).is_err());
    }

    #[test]
    fn loschmidt_gram_at_forty_qubits_is_identity() {
        let spec = EmbeddingSpec::tensor_product_ry(40);
        let mut hits = 0;
        for trial in 0..100u64 {
            let mut r = seeded(trial);
            let xs: Vec<Vec<f64>> = (0..25)
                .map(|_| (0..40).map(|_| r.random_range(0.0..2.0 * PI)).collect())
                .collect();
            let est = EstimatorSpec::new(Strategy::LoschmidtEcho, 1000, trial).unwrap();
            if gram(&spec, &xs, KernelKind::Fidelity, &est).unwrap().is_identity() {
                hits += 1;
            }
        }
        assert!(hits >= 99, "{hits}");
    }

    #[test]
    fn estimated_gram_is_deterministic() {
        let spec = EmbeddingSpec::hardware_efficient(3, 2);
        let mut r = seeded(3);
        let xs: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..3).map(|_| r.random_range(-PI..PI)).collect())
            .collect();
        for (kind, strategy) in [
            (KernelKind::Fidelity, Strategy::SwapTest),
            (KernelKind::projected(), Strategy::LocalSwap),
            (KernelKind::projected(), Strategy::Tomography),
        ] {
            let est = EstimatorSpec::new(strategy, 50, 11).unwrap();
            let a = gram(&spec, &xs, kind, &est).unwrap();
            let b = gram(&spec, &xs, kind, &est).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.entries, a.entries.transpose());
        }
    }

    #[test]
    fn csv_roundtrip() {
        let spec = EmbeddingSpec::tensor_product_ry(3);
        let mut r = seeded(8);
        let xs: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| r.random_range(-PI..PI)).collect())
            .collect();
        let est = EstimatorSpec::new(Strategy::LocalSwap, 100, 42).unwrap();
        let g = gram(&spec, &xs, KernelKind::Projected { gamma: 0.7 }, &est).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        g.write_csv(&p).unwrap();
        let back = GramMatrix::read_csv(&p).unwrap();
        assert_eq!(back, g);
        std::fs::write(&p, "# n_s=2;kind=fidelity;estimator=exact;shots=0;seed=0\n1,0\n0,x\n").unwrap();
        assert!(matches!(GramMatrix::read_csv(&p), Err(Error::Csv { line: 3, .. })));
    }

    #[test]
    fn prepared_product_matches_statevector_projected() {
        // Statevector route through a single-layer Ry embedding built gate by gate.
        let x = [0.3, -2.0, 1.4];
        let y = [1.0, 0.5, -0.2];
        let mut a = StateVector::zero(3).unwrap();
        let mut b = StateVector::zero(3).unwrap();
        for k in 0..3 {
            a.apply(&Gate::Ry { qubit: k, angle: x[k] }).unwrap();
            b.apply(&Gate::Ry { qubit: k, angle: y[k] }).unwrap();
        }
        let oracle = projected_kernel(&a, &b, 0.8).unwrap();
        assert!((closed_form_product_projected(&x, &y, 0.8) - oracle).abs() < 1e-12);
    }

    #[test]
    fn exact_fidelity_grams_are_psd() {
        for t in 0..50u64 {
            let mut r = seeded(500 + t);
            let n = 1 + (t % 6) as usize;
            let ns = 2 + (t % 19) as usize;
            let spec = if t % 2 == 0 {
                EmbeddingSpec::hardware_efficient(n, 2)
            } else {
                EmbeddingSpec::new(
                    n,
                    Family::HardwareEfficient {
                        layers: 3,
                        entangler: Entangler::CnotLadder,
                        reupload: true,
                    },
                )
                .unwrap()
            };
            let xs: Vec<Vec<f64>> = (0..ns)
                .map(|_| (0..n).map(|_| r.random_range(-PI..PI)).collect())
                .collect();
            let g = gram(&spec, &xs, KernelKind::Fidelity, &EstimatorSpec::exact()).unwrap();
            assert!(g.min_eigenvalue() >= -1e-8);
            assert!(g.entries.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn closed_form_matches_statevector(n in 1usize..=8, seed in any::<u64>()) {
            let mut r = seeded(seed);
            let spec = EmbeddingSpec::tensor_product_ry(n);
            let x: Vec<f64> = (0..n).map(|_| r.random_range(-PI..PI)).collect();
            let y: Vec<f64> = (0..n).map(|_| r.random_range(-PI..PI)).collect();
            let a = embed(&spec, &x).unwrap();
            let b = embed(&spec, &y).unwrap();
            prop_assert!((closed_form_product_fidelity(&x, &y) - fidelity_kernel(&a, &b).unwrap()).abs() < 1e-12);
            prop_assert!((closed_form_product_projected(&x, &y, 1.0) - projected_kernel(&a, &b, 1.0).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn projected_kernel_monotone_in_gamma(seed in any::<u64>()) {
            let a = haar_random_state(3, &mut seeded(seed)).unwrap();
            let b = haar_random_state(3, &mut seeded(seed.wrapping_add(1))).unwrap();
            let mut prev = 0.0;
            for g in [4.0, 1.0, 0.1, 1e-3, 1e-6] {
                let v = projected_kernel(&a, &b, g).unwrap();
                prop_assert!(v >= prev - 1e-15);
                prev = v;
            }
            prop_assert!((1.0 - prev) < 1e-5);
        }
    }
}
