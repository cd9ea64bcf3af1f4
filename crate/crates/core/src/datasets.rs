//! Dataset generators and CSV ingestion.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingSpec;
use crate::error::{Error, Result};
use crate::kernels::{prepare, prepared_kernel, KernelKind};
use crate::rng::{seeded, stream};

/// Inputs in radians with optional labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Option<Vec<f64>>,
    /// Generator name, or `"csv"` for loaded data.
    pub generator: String,
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Option<Vec<f64>>) -> Result<Self> {
        let d = Dataset {
            inputs,
            labels,
            generator: "custom".into(),
            seed: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.inputs.first().map(Vec::len).unwrap_or(0);
        if self.inputs.is_empty() || dim == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs at least one point of dimension >= 1".into(),
            ));
        }
        if let Some(row) = self.inputs.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        if let Some(l) = &self.labels {
            if l.len() != self.inputs.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.inputs.len(),
                    found: l.len(),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.first().map(Vec::len).unwrap_or(0)
    }

    /// Labels, failing if the dataset is unlabeled.
    pub fn labels(&self) -> Result<&[f64]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("dataset has no labels".into()))
    }

    /// Labels, failing unless every label is `-1` or `+1`.
    pub fn binary_labels(&self) -> Result<&[f64]> {
        let l = self.labels()?;
        check_binary(l)?;
        Ok(l)
    }

    /// The first `n` points.
    pub fn head(&self, n: usize) -> Dataset {
        Dataset {
            inputs: self.inputs[..n].to_vec(),
            labels: self.labels.as_ref().map(|l| l[..n].to_vec()),
            generator: self.generator.clone(),
            seed: self.seed,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dim()).map(|k| format!("f{k}")).collect();
        out.push_str(&header.join(","));
        if self.labels.is_some() {
            out.push_str(",label");
        }
        out.push('\n');
        for (i, row) in self.inputs.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{v:.16e}").expect("write to string");
            }
            if let Some(l) = &self.labels {
                write!(out, ",{:.16e}", l[i]).expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses `f1,...,fd[,label]` CSV text.
    pub fn from_csv(text: &str) -> Result<Dataset> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Csv {
            line: 1,
            message: "missing header".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let has_label = cols.last() == Some(&"label");
        let dim = cols.len() - usize::from(has_label);
        for (k, c) in cols[..dim].iter().enumerate() {
            if *c != format!("f{}", k + 1) {
                return Err(Error::Csv {
                    line: 1,
                    message: format!("expected column f{}, found {c:?}", k + 1),
                });
            }
        }
        if dim == 0 {
            return Err(Error::Csv {
                line: 1,
                message: "no feature columns".into(),
            });
        }
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(Error::Csv {
                    line: lineno,
                    message: format!("expected {} fields, found {}", cols.len(), fields.len()),
                });
            }
            let values = fields
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Csv {
                            line: lineno,
                            message: format!("not a finite number: {f:?}"),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            inputs.push(values[..dim].to_vec());
            if has_label {
                labels.push(values[dim]);
            }
        }
        if inputs.is_empty() {
            return Err(Error::Csv {
                line: 2,
                message: "no data rows".into(),
            });
        }
        Ok(Dataset {
            inputs,
            labels: has_label.then_some(labels),
            generator: "csv".into(),
            seed: None,
        })
    }
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    Dataset::from_csv(&std::fs::read_to_string(path)?)
}

pub(crate) fn check_binary(labels: &[f64]) -> Result<()> {
    match labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
        Some(&y) => Err(Error::NonBinaryLabel(y)),
        None => Ok(()),
    }
}

fn uniform_rows<R: Rng + ?Sized>(dim: usize, n_s: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n_s)
        .map(|_| (0..dim).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect())
        .collect()
}

/// `n_s` unlabeled points with i.i.d. components uniform in `[lo, hi]`.
pub fn gen_uniform(dim: usize, n_s: usize, lo: f64, hi: f64, seed: u64) -> Result<Dataset> {
    if dim == 0 || n_s == 0 {
        return Err(Error::InvalidArgument("dimension and size must be positive".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidArgument(format!("bad range [{lo}, {hi}]")));
    }
    Ok(Dataset {
        inputs: uniform_rows(dim, n_s, lo, hi, &mut seeded(seed)),
        labels: None,
        generator: "uniform".into(),
        seed: Some(seed),
    })
}

/// `+1` inside the centered cube of half-width `pi / 2^(1/n)`, else `-1`.
/// The cube holds half the volume of `[-pi, pi]^n`.
pub fn hypercube_label(x: &[f64]) -> f64 {
    let half = std::f64::consts::PI / (1.0 / x.len() as f64).exp2();
    if x.iter().all(|v| v.abs() < half) {
        1.0
    } else {
        -1.0
    }
}

/// Points uniform in `[-pi, pi]^n` labeled by [`hypercube_label`].
pub fn gen_hypercube(n: usize, n_s: usize, seed: u64) -> Result<Dataset> {
    let pi = std::f64::consts::PI;
    let mut d = gen_uniform(n, n_s, -pi, pi, seed)?;
    d.labels = Some(d.inputs.iter().map(|x| hypercube_label(x)).collect());
    d.generator = "hypercube".into();
    Ok(d)
}

/// Labels `points` with `y(x) = sum_i w_i kappa(anchor_i, x)` using exact
/// kernels.
pub fn engineered_labels(
    anchors: &Dataset,
    w: &[f64],
    kind: KernelKind,
    spec: &EmbeddingSpec,
    points: &Dataset,
) -> Result<Dataset> {
    if w.len() != anchors.len() {
        return Err(Error::DimensionMismatch {
            expected: anchors.len(),
            found: w.len(),
        });
    }
    let pa = anchors
        .inputs
        .iter()
        .map(|x| prepare(spec, x, kind))
        .collect::<Result<Vec<_>>>()?;
    let labels = points
        .inputs
        .iter()
        .map(|x| {
            let px = prepare(spec, x, kind)?;
            pa.iter()
                .zip(w)
                .try_fold(0.0, |acc, (a, wi)| Ok(acc + wi * prepared_kernel(a, &px, kind)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Dataset {
        inputs: points.inputs.clone(),
        labels: Some(labels),
        generator: "engineered".into(),
        seed: points.seed,
    })
}

/// A regression task whose target is a weighted kernel sum over the
/// training points, with weights uniform in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineeredTask {
    pub train: Dataset,
    pub test: Dataset,
    pub weights: Vec<f64>,
}

/// Inputs uniform in `[lo, hi]`; anchors are the `n_train` training points.
pub fn engineered_task(
    spec: &EmbeddingSpec,
    kind: KernelKind,
    n_train: usize,
    n_test: usize,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Result<EngineeredTask> {
    let dim = spec.data_dim().unwrap_or(spec.num_qubits);
    let train = gen_uniform(dim, n_train, lo, hi, seed)?;
    let test = Dataset {
        inputs: uniform_rows(dim, n_test, lo, hi, &mut stream(seed, &[1])),
        labels: None,
        generator: "uniform".into(),
        seed: Some(seed),
    };
    let mut wr = stream(seed, &[2]);
    let weights: Vec<f64> = (0..n_train).map(|_| wr.random::<f64>()).collect();
    Ok(EngineeredTask {
        train: engineered_labels(&train, &weights, kind, spec, &train)?,
        test: engineered_labels(&train, &weights, kind, spec, &test)?,
        weights,
    })
}
