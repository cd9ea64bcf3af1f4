//! Kernel ridge regression, the hinge-loss SVM dual, kernel target alignment
//! and learning-curve experiments.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{kta_bound, ConcentrationReport, KtaConstant, NamedBound, RunningStats};
use crate::datasets::{check_binary, Dataset};
use crate::embeddings::EmbeddingSpec;
use crate::error::{Error, Result};
use crate::estimators::EstimatorSpec;
use crate::kernels::{
    cross_kernel, estimate_prepared, gram_prepared, prepare, prepare_parameterized, prepared_kernel, KernelKind,
    Prepared, Provenance,
};
use crate::rng::stream;

/// Systems with a larger 2-norm condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Sign of the ridge term in the regression system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RidgeSign {
    /// Solve `(K - lambda I) a = y`.
    #[default]
    Subtract,
    /// Solve `(K + lambda I) a = y`.
    Add,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrrSolution {
    pub coefficients: Vec<f64>,
    pub condition: f64,
}

fn check_square(k: &DMatrix<f64>, n: usize) -> Result<()> {
    if k.nrows() != k.ncols() {
        return Err(Error::DimensionMismatch {
            expected: k.nrows(),
            found: k.ncols(),
        });
    }
    if k.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: k.nrows(),
            found: n,
        });
    }
    Ok(())
}

/// Direct solve of the ridge system for coefficients `a`.
pub fn krr_fit(k: &DMatrix<f64>, y: &[f64], lambda: f64, sign: RidgeSign) -> Result<KrrSolution> {
    check_square(k, y.len())?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::OutOfRange {
            value: lambda,
            range: "[0, inf)",
        });
    }
    let shift = match sign {
        RidgeSign::Subtract => -lambda,
        RidgeSign::Add => lambda,
    };
    let mut a = k.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += shift;
    }
    let sv = a.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularSystem { condition });
    }
    let x = a
        .lu()
        .solve(&DVector::from_column_slice(y))
        .ok_or(Error::SingularSystem { condition })?;
    Ok(KrrSolution {
        coefficients: x.iter().copied().collect(),
        condition,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSolution {
    pub coefficients: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const SVM_MAX_ITER: usize = 100_000;
pub const SVM_TOLERANCE: f64 = 1e-8;

fn svm_objective(a: &DVector<f64>, q: &DMatrix<f64>) -> f64 {
    a.sum() - 0.5 * a.dot(&(q * a))
}

fn svm_run(k: &DMatrix<f64>, y: &[f64], max_iter: usize, mut trace: Option<&mut Vec<f64>>) -> Result<SvmSolution> {
    check_square(k, y.len())?;
    check_binary(y)?;
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let sym = (k + k.transpose()) * 0.5;
    let lmax = sym.symmetric_eigenvalues().max().max(0.0);
    let step = 1.0 / (lmax + 1.0);
    let mut a = DVector::zeros(n);
    let mut f = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let grad = DVector::from_element(n, 1.0) - &q * &a;
        let next = (&a + grad * step).map(|v| v.max(0.0));
        let f_next = svm_objective(&next, &q);
        iterations += 1;
        a = next;
        let change = (f_next - f).abs();
        f = f_next;
        if let Some(t) = trace.as_deref_mut() {
            t.push(f);
        }
        if change <= SVM_TOLERANCE * f.abs() {
            converged = true;
            break;
        }
    }
    Ok(SvmSolution {
        coefficients: a.iter().copied().collect(),
        objective: f,
        iterations,
        converged,
    })
}

/// Maximizes `sum a - 1/2 sum a_i a_j y_i y_j K_ij` over `a >= 0` by
/// projected gradient ascent with step `1/(lambda_max(K) + 1)`.
pub fn svm_fit(k: &DMatrix<f64>, y: &[f64]) -> Result<SvmSolution> {
    svm_run(k, y, SVM_MAX_ITER, None)
}

/// `sum y_i y_j K_ij / sqrt(sum K_ij^2 * sum (y_i y_j)^2)` over all ordered
/// pairs including the diagonal.
pub fn kernel_target_alignment(k: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    check_square(k, y.len())?;
    check_binary(y)?;
    let n = y.len();
    let mut num = 0.0;
    let mut kk = 0.0;
    for i in 0..n {
        for j in 0..n {
            num += y[i] * y[j] * k[(i, j)];
            kk += k[(i, j)] * k[(i, j)];
        }
    }
    if kk == 0.0 {
        return Err(Error::InvalidArgument("kernel matrix is zero".into()));
    }
    Ok(num / (kk * (n * n) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Krr,
    Svm,
}

/// `h(x) = sum_i c_i kappa(x, anchor_i)`. For SVMs `c_i = a_i y_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub method: Method,
    pub coefficients: Vec<f64>,
    /// Row indices of the anchors in the training dataset.
    pub anchor_indices: Vec<usize>,
    pub anchors: Vec<Vec<f64>>,
    pub spec: EmbeddingSpec,
    pub kind: KernelKind,
    pub lambda: f64,
    pub sign: RidgeSign,
    pub provenance: Provenance,
}

impl TrainedModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.kind.validate()?;
        if self.coefficients.len() != self.anchors.len() || self.anchor_indices.len() != self.anchors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.anchors.len(),
                found: self.coefficients.len(),
            });
        }
        Ok(())
    }

    fn prepared_anchors(&self) -> Result<Vec<Prepared>> {
        self.anchors.iter().map(|x| prepare(&self.spec, x, self.kind)).collect()
    }
}

/// Fits `method` on `train` with a Gram matrix estimated per `est`.
pub fn train(
    spec: &EmbeddingSpec,
    kind: KernelKind,
    method: Method,
    train: &Dataset,
    lambda: f64,
    sign: RidgeSign,
    est: &EstimatorSpec,
) -> Result<TrainedModel> {
    train.validate()?;
    let y = train.labels()?;
    let prepared: Vec<Prepared> = train
        .inputs
        .iter()
        .map(|x| prepare(spec, x, kind))
        .collect::<Result<_>>()?;
    let gram = gram_prepared(&prepared, kind, est)?;
    let coefficients = match method {
        Method::Krr => krr_fit(&gram.entries, y, lambda, sign)?.coefficients,
        Method::Svm => svm_fit(&gram.entries, y)?
            .coefficients
            .iter()
            .zip(y)
            .map(|(a, yi)| a * yi)
            .collect(),
    };
    Ok(TrainedModel {
        method,
        coefficients,
        anchor_indices: (0..train.len()).collect(),
        anchors: train.inputs.clone(),
        spec: spec.clone(),
        kind,
        lambda,
        sign,
        provenance: gram.provenance,
    })
}

/// `sum_i c_i kappa_hat(x, anchor_i)` with kernel values estimated per `est`.
pub fn predict<R: Rng + ?Sized>(model: &TrainedModel, x: &[f64], est: &EstimatorSpec, rng: &mut R) -> Result<f64> {
    est.validate()?;
    model.kind.check_estimator(est.strategy)?;
    let px = prepare(&model.spec, x, model.kind)?;
    let mut h = 0.0;
    for (a, c) in model.prepared_anchors()?.iter().zip(&model.coefficients) {
        h += c * estimate_prepared(&px, a, model.kind, est, rng)?;
    }
    Ok(h)
}

/// Predictions for many inputs; entry `(i, j)` of the kernel block uses the
/// same stream as [`cross_kernel`].
pub fn predict_batch(model: &TrainedModel, xs: &[Vec<f64>], est: &EstimatorSpec) -> Result<Vec<f64>> {
    est.validate()?;
    let px: Vec<Prepared> = xs
        .iter()
        .map(|x| prepare(&model.spec, x, model.kind))
        .collect::<Result<_>>()?;
    let k = cross_kernel(&px, &model.prepared_anchors()?, model.kind, est)?;
    Ok((k * DVector::from_column_slice(&model.coefficients))
        .iter()
        .copied()
        .collect())
}

/// Spread of kernel target alignment over random trainable parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KtaScan {
    /// Mean and variance of the alignment; bounds named `kta_statement` and
    /// `kta_proof`.
    pub report: ConcentrationReport,
    /// `sum_{i,j} Var_theta[kappa(x_i, x_j)]` over ordered pairs.
    pub entry_variance_sum: f64,
}

/// Draws `samples` parameter vectors with angles uniform on `[0, 2pi)` and
/// records the alignment of the resulting Gram matrix with the labels.
pub fn kta_variance_over_theta(
    spec: &EmbeddingSpec,
    kind: KernelKind,
    data: &Dataset,
    samples: usize,
    seed: u64,
) -> Result<KtaScan> {
    spec.validate()?;
    kind.validate()?;
    let y = data.binary_labels()?;
    if samples < 2 {
        return Err(Error::InvalidArgument("at least two parameter samples required".into()));
    }
    let n = data.len();
    const CHUNK: usize = 32;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<(RunningStats, Vec<RunningStats>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, &[c as u64]);
            let mut ta = RunningStats::new();
            let mut entries = vec![RunningStats::new(); n * n];
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let theta: Vec<f64> = (0..spec.param_dim())
                    .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
                    .collect();
                let prepared: Vec<Prepared> = data
                    .inputs
                    .iter()
                    .map(|x| {
                        if theta.is_empty() {
                            prepare(spec, x, kind)
                        } else {
                            prepare_parameterized(spec, x, &theta, kind)
                        }
                    })
                    .collect::<Result<_>>()?;
                let mut k = DMatrix::identity(n, n);
                for i in 0..n {
                    for j in i + 1..n {
                        let v = prepared_kernel(&prepared[i], &prepared[j], kind)?;
                        k[(i, j)] = v;
                        k[(j, i)] = v;
                    }
                }
                ta.push(kernel_target_alignment(&k, y)?);
                for (s, v) in entries.iter_mut().zip(k.transpose().iter()) {
                    s.push(*v);
                }
            }
            Ok((ta, entries))
        })
        .collect::<Result<_>>()?;
    let mut ta = RunningStats::new();
    let mut entries = vec![RunningStats::new(); n * n];
    for (t, e) in &parts {
        ta = ta.merge(t);
        for (acc, s) in entries.iter_mut().zip(e) {
            *acc = acc.merge(s);
        }
    }
    let entry_variance_sum: f64 = entries.iter().map(RunningStats::variance).sum();
    let bound = |variant| NamedBound {
        name: match variant {
            KtaConstant::Statement => "kta_statement".into(),
            KtaConstant::Proof => "kta_proof".into(),
        },
        value: kta_bound(&[entry_variance_sum], n, variant),
    };
    Ok(KtaScan {
        report: ConcentrationReport {
            num_qubits: spec.num_qubits,
            layers: spec.num_layers(),
            kernel: kind,
            mean: ta.mean,
            variance: ta.variance(),
            mean_std_error: ta.std_error(),
            pairs: samples,
            bounds: vec![bound(KtaConstant::Statement), bound(KtaConstant::Proof)],
            seed,
        },
        entry_variance_sum,
    })
}

/// Test loss after training on the first `n_s` points, relative to the
/// baseline size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationPoint {
    pub n_s: usize,
    /// Mean squared error on the test set.
    pub test_loss: f64,
    /// `test_loss / test_loss(baseline)`.
    pub eta: f64,
    /// Mean squared error on the training points under the same Gram matrix.
    pub train_error: f64,
}

/// Kernel ridge regression on nested prefixes of `train`. One Gram matrix
/// and one test-by-train kernel block are estimated and sliced, so every
/// size shares the same kernel estimates.
#[allow(clippy::too_many_arguments)]
pub fn generalization_experiment(
    spec: &EmbeddingSpec,
    kind: KernelKind,
    train: &Dataset,
    test: &Dataset,
    sizes: &[usize],
    baseline: usize,
    est: &EstimatorSpec,
    lambda: f64,
    sign: RidgeSign,
) -> Result<Vec<GeneralizationPoint>> {
    if !sizes.contains(&baseline) {
        return Err(Error::InvalidArgument(format!(
            "size grid must include the baseline {baseline}"
        )));
    }
    let max = *sizes.iter().max().expect("nonempty");
    if max > train.len() || sizes.contains(&0) {
        return Err(Error::OutOfRange {
            value: max as f64,
            range: "1..=training set size",
        });
    }
    let y = train.labels()?;
    let y_test = test.labels()?;
    let pt: Vec<Prepared> = train.inputs[..max]
        .iter()
        .map(|x| prepare(spec, x, kind))
        .collect::<Result<_>>()?;
    let pq: Vec<Prepared> = test
        .inputs
        .iter()
        .map(|x| prepare(spec, x, kind))
        .collect::<Result<_>>()?;
    let gram = gram_prepared(&pt, kind, est)?;
    let cross = cross_kernel(&pq, &pt, kind, est)?;
    let mut raw = Vec::with_capacity(sizes.len());
    for &n_s in sizes {
        let k = gram.entries.view((0, 0), (n_s, n_s)).into_owned();
        let a = DVector::from_vec(krr_fit(&k, &y[..n_s], lambda, sign)?.coefficients);
        let fit = &k * &a;
        let train_error = fit.iter().zip(&y[..n_s]).map(|(h, t)| (h - t).powi(2)).sum::<f64>() / n_s as f64;
        let pred = cross.columns(0, n_s) * &a;
        let test_loss = pred.iter().zip(y_test).map(|(h, t)| (h - t).powi(2)).sum::<f64>() / y_test.len() as f64;
        raw.push((n_s, test_loss, train_error));
    }
    let base = raw.iter().find(|r| r.0 == baseline).expect("baseline present").1;
    Ok(raw
        .into_iter()
        .map(|(n_s, test_loss, train_error)| GeneralizationPoint {
            n_s,
            test_loss,
            eta: test_loss / base,
            train_error,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{engineered_task, gen_hypercube};
    use crate::embeddings::Family;
    use crate::estimators::Strategy;
    use crate::rng::seeded;
    use proptest::prelude::{prop_assert, proptest};
    use std::f64::consts::PI;

    fn m(n: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, v)
    }

    #[test]
    fn krr_examples() {
        let id = DMatrix::identity(3, 3);
        let y = [0.5, -1.0, 2.0];
        assert_eq!(krr_fit(&id, &y, 0.0, RidgeSign::Subtract).unwrap().coefficients, y);
        let a = krr_fit(&id, &y, 0.5, RidgeSign::Subtract).unwrap().coefficients;
        assert_eq!(a, vec![1.0, -2.0, 4.0]);
        let a = krr_fit(&id, &y, 1.0, RidgeSign::Add).unwrap().coefficients;
        assert_eq!(a, vec![0.25, -0.5, 1.0]);
        let k = m(2, &[1.0, 0.5, 0.5, 1.0]);
        let a = krr_fit(&k, &[1.0, -1.0], 0.0, RidgeSign::Subtract)
            .unwrap()
            .coefficients;
        assert!((a[0] - 2.0).abs() < 1e-12 && (a[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn krr_singular() {
        let id = DMatrix::<f64>::identity(2, 2);
        match krr_fit(&id, &[1.0, 1.0], 1.0, RidgeSign::Subtract) {
            Err(Error::SingularSystem { condition }) => assert!(condition > MAX_CONDITION),
            other => panic!("{other:?}"),
        }
        assert!(krr_fit(&id, &[1.0], 0.0, RidgeSign::Subtract).is_err());
    }

    proptest! {
        #[test]
        fn krr_residual_small(seed in 0u64..1000, lambda in 0.0..0.5f64) {
            let mut r = seeded(seed);
            let n = 6;
            let b = DMatrix::from_fn(n, n, |_, _| r.random::<f64>() - 0.5);
            let k = &b * b.transpose() + DMatrix::identity(n, n) * 2.0;
            let y: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
            let a = DVector::from_vec(krr_fit(&k, &y, lambda, RidgeSign::Subtract).unwrap().coefficients);
            let res = (&k - DMatrix::identity(n, n) * lambda) * a - DVector::from_vec(y);
            prop_assert!(res.amax() <= 1e-8);
        }

        #[test]
        fn alignment_label_flip_invariant(seed in 0u64..1000) {
            let d = gen_hypercube(2, 6, seed).unwrap();
            let spec = EmbeddingSpec::hardware_efficient(2, 1);
            let prepared: Vec<_> = d.inputs.iter().map(|x| prepare(&spec, x, KernelKind::Fidelity).unwrap()).collect();
            let k = DMatrix::from_fn(6, 6, |i, j| prepared_kernel(&prepared[i], &prepared[j], KernelKind::Fidelity).unwrap());
            let y = d.labels.unwrap();
            let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
            let a = kernel_target_alignment(&k, &y).unwrap();
            prop_assert!((a - kernel_target_alignment(&k, &flipped).unwrap()).abs() < 1e-14);
            prop_assert!((-1.0..=1.0).contains(&a));
        }

        #[test]
        fn svm_objective_permutation_invariant(seed in 0u64..200) {
            let d = gen_hypercube(2, 5, seed).unwrap();
            let spec = EmbeddingSpec::tensor_product_ry(2);
            let k = DMatrix::from_fn(5, 5, |i, j| crate::kernels::kernel(&spec, &d.inputs[i], &d.inputs[j], KernelKind::Fidelity).unwrap());
            let y = d.labels.unwrap();
            let perm = [3usize, 0, 4, 1, 2];
            let kp = DMatrix::from_fn(5, 5, |i, j| k[(perm[i], perm[j])]);
            let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
            let a = svm_fit(&k, &y).unwrap().objective;
            let b = svm_fit(&kp, &yp).unwrap().objective;
            prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
        }
    }

    #[test]
    fn svm_examples() {
        let id = DMatrix::identity(2, 2);
        let s = svm_fit(&id, &[1.0, 1.0]).unwrap();
        assert!(s.converged);
        assert!(s.coefficients.iter().all(|a| (a - 1.0).abs() < 1e-3), "{s:?}");
        let s = svm_fit(&DMatrix::identity(4, 4), &[1.0, -1.0, -1.0, 1.0]).unwrap();
        assert!(s.coefficients.iter().all(|a| (a - 1.0).abs() < 1e-3));
        assert!(s.objective >= 0.0);
        assert_eq!(svm_fit(&id, &[1.0, 0.0]).unwrap_err(), Error::NonBinaryLabel(0.0));
    }

    #[test]
    fn svm_objective_never_decreases() {
        let d = gen_hypercube(3, 12, 4).unwrap();
        let spec = EmbeddingSpec::hardware_efficient(3, 2);
        let prepared: Vec<_> = d
            .inputs
            .iter()
            .map(|x| prepare(&spec, x, KernelKind::Fidelity).unwrap())
            .collect();
        let k = DMatrix::from_fn(12, 12, |i, j| {
            prepared_kernel(&prepared[i], &prepared[j], KernelKind::Fidelity).unwrap()
        });
        let mut trace = Vec::new();
        let s = svm_run(&k, d.labels.as_ref().unwrap(), SVM_MAX_ITER, Some(&mut trace)).unwrap();
        assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(s.objective > 0.0);
        assert!(s.coefficients.iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn alignment_examples() {
        let y = [1.0, -1.0, 1.0];
        let ideal = DMatrix::from_fn(3, 3, |i, j| y[i] * y[j]);
        assert!((kernel_target_alignment(&ideal, &y).unwrap() - 1.0).abs() < 1e-15);
        assert!((kernel_target_alignment(&(-&ideal), &y).unwrap() + 1.0).abs() < 1e-15);
        let a = kernel_target_alignment(&DMatrix::identity(2, 2), &[1.0, -1.0]).unwrap();
        assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    fn small_model(est: &EstimatorSpec) -> (TrainedModel, Dataset) {
        let spec = EmbeddingSpec::hardware_efficient(2, 2);
        let mut d = gen_hypercube(2, 6, 1).unwrap();
        d.labels = Some(vec![0.3, -0.2, 0.9, 0.1, -0.5, 0.4]);
        (
            train(
                &spec,
                KernelKind::projected(),
                Method::Krr,
                &d,
                0.0,
                RidgeSign::Subtract,
                est,
            )
            .unwrap(),
            d,
        )
    }

    #[test]
    fn representer_consistency() {
        let (model, d) = small_model(&EstimatorSpec::exact());
        let prepared: Vec<_> = d
            .inputs
            .iter()
            .map(|x| prepare(&model.spec, x, model.kind).unwrap())
            .collect();
        let k = DMatrix::from_fn(6, 6, |i, j| {
            prepared_kernel(&prepared[i], &prepared[j], model.kind).unwrap()
        });
        let ka = &k * DVector::from_column_slice(&model.coefficients);
        let mut rng = seeded(0);
        for j in 0..6 {
            let h = predict(&model, &d.inputs[j], &EstimatorSpec::exact(), &mut rng).unwrap();
            assert!((h - ka[j]).abs() < 1e-10);
            assert!((h - d.labels.as_ref().unwrap()[j]).abs() < 1e-8);
        }
        let batch = predict_batch(&model, &d.inputs, &EstimatorSpec::exact()).unwrap();
        assert!(batch.iter().zip(ka.iter()).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn predict_rejects_incompatible_estimator() {
        let (model, d) = small_model(&EstimatorSpec::exact());
        let est = EstimatorSpec::new(Strategy::LoschmidtEcho, 10, 0).unwrap();
        assert!(matches!(
            predict(&model, &d.inputs[0], &est, &mut seeded(0)),
            Err(Error::IncompatibleEstimator { .. })
        ));
    }

    #[test]
    fn anchor_match_gives_its_coefficient() {
        let spec = EmbeddingSpec::tensor_product_ry(1);
        let model = TrainedModel {
            method: Method::Krr,
            coefficients: vec![0.7, -0.3],
            anchor_indices: vec![0, 1],
            anchors: vec![vec![0.0], vec![PI]],
            spec,
            kind: KernelKind::Fidelity,
            lambda: 0.0,
            sign: RidgeSign::Subtract,
            provenance: Provenance::Exact,
        };
        let h = predict(&model, &[0.0], &EstimatorSpec::exact(), &mut seeded(1)).unwrap();
        assert!((h - 0.7).abs() < 1e-15);
    }

    #[test]
    fn concentrated_prediction_is_zero() {
        let spec = EmbeddingSpec::tensor_product_ry(40);
        let d = crate::datasets::gen_uniform(40, 10, 0.0, 2.0 * PI, 2).unwrap();
        let mut d = d;
        d.labels = Some((0..10).map(|i| i as f64).collect());
        let est = EstimatorSpec::new(Strategy::LoschmidtEcho, 1000, 5).unwrap();
        let model = train(
            &spec,
            KernelKind::Fidelity,
            Method::Krr,
            &d,
            0.0,
            RidgeSign::Subtract,
            &est,
        )
        .unwrap();
        assert_eq!(model.coefficients, d.labels.clone().unwrap());
        let mut rng = seeded(3);
        let zeros = (0..100)
            .filter(|_| {
                let x: Vec<f64> = (0..40).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
                predict(&model, &x, &est, &mut rng).unwrap() == 0.0
            })
            .count();
        assert!(zeros >= 99);
    }

    #[test]
    fn model_json_roundtrip() {
        let est = EstimatorSpec::new(Strategy::SwapTest, 100, 4).unwrap();
        let (model, _) = {
            let spec = EmbeddingSpec::hardware_efficient(2, 1);
            let mut d = gen_hypercube(2, 4, 3).unwrap();
            d.labels = Some(vec![1.0, 2.0, 3.0, 4.0]);
            (
                train(&spec, KernelKind::Fidelity, Method::Krr, &d, 0.1, RidgeSign::Add, &est).unwrap(),
                d,
            )
        };
        let back = TrainedModel::from_json(&model.to_json()).unwrap();
        assert_eq!(back, model);
        assert!(TrainedModel::from_json("{}").is_err());
    }

    #[test]
    fn kta_theta_independent_kernel() {
        let d = gen_hypercube(2, 6, 1).unwrap();
        let spec = EmbeddingSpec::hardware_efficient(2, 1);
        let s = kta_variance_over_theta(&spec, KernelKind::Fidelity, &d, 20, 3).unwrap();
        assert!(s.report.variance < 1e-28);
        assert_eq!(s.entry_variance_sum, 0.0);
    }

    #[test]
    fn kta_scan_is_deterministic_and_bounded() {
        let d = gen_hypercube(3, 10, 2).unwrap();
        let spec = EmbeddingSpec::new(
            3,
            Family::Parameterized {
                base: Box::new(Family::HardwareEfficient {
                    layers: 1,
                    entangler: Default::default(),
                    reupload: true,
                }),
                entangler: Default::default(),
            },
        )
        .unwrap();
        let a = kta_variance_over_theta(&spec, KernelKind::Fidelity, &d, 100, 7).unwrap();
        let b = kta_variance_over_theta(&spec, KernelKind::Fidelity, &d, 100, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.report.variance > 0.0);
        assert!(a.report.variance <= a.report.bound("kta_statement").unwrap());
        assert!(a.report.variance <= a.report.bound("kta_proof").unwrap());
    }

    #[test]
    fn generalization_exact_and_concentrated() {
        let spec = EmbeddingSpec::tensor_product_ry(40);
        let t = engineered_task(&spec, KernelKind::Fidelity, 40, 10, 0.0, 2.0 * PI, 1).unwrap();
        let sizes = [10, 20, 40];
        let exact = generalization_experiment(
            &spec,
            KernelKind::Fidelity,
            &t.train,
            &t.test,
            &sizes,
            10,
            &EstimatorSpec::exact(),
            0.0,
            RidgeSign::Subtract,
        )
        .unwrap();
        assert!(exact[2].eta < 1e-6, "{exact:?}");
        assert!(exact.iter().all(|p| p.train_error <= 1e-8));
        let est = EstimatorSpec::new(Strategy::LoschmidtEcho, 1000, 9).unwrap();
        let noisy = generalization_experiment(
            &spec,
            KernelKind::Fidelity,
            &t.train,
            &t.test,
            &sizes,
            10,
            &est,
            0.0,
            RidgeSign::Subtract,
        )
        .unwrap();
        assert!(noisy.iter().all(|p| p.eta == 1.0 && p.train_error <= 1e-8), "{noisy:?}");
        assert!(generalization_experiment(
            &spec,
            KernelKind::Fidelity,
            &t.train,
            &t.test,
            &[20],
            10,
            &est,
            0.0,
            RidgeSign::Subtract
        )
        .is_err());
    }
}
