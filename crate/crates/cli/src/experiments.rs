use qkonc_core::analysis::{
    beta_haar, beta_tilde_haar, bound_expressivity, bound_global, expressivity_epsilon, shots_budget,
    success_ratio_scan, variance_scan, zero_ratio_scan, RatioScan,
};
use qkonc_core::datasets::{engineered_task, gen_hypercube, gen_uniform, load_csv};
use qkonc_core::kernels::{gram, projected_from_bloch};
use qkonc_core::learning::{generalization_experiment, kta_variance_over_theta, predict_batch, train};
use qkonc_core::noise::{noise_bounds, noisy_embed};
use qkonc_core::quantum::{overlap, schatten2_distance};
use qkonc_core::rng::{derive_seed, stream};
use qkonc_core::{Dataset, DensityMatrix, EmbeddingSpec, Family, KernelKind, PauliNoiseParams, StateVector};
use rayon::prelude::*;

use crate::config::{defaults, DatasetSource, Experiment, ExperimentConfig, RatioTest};
use crate::error::CliError;
use crate::output::{Artifact, Cell, PointSeed, Table};

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub point_seeds: Vec<PointSeed>,
}

type Rows = Vec<Vec<Cell>>;

/// Evaluates sweep points on the worker pool and returns their rows in sweep
/// order.
fn sweep<P, F>(points: &[P], f: F) -> Result<Vec<Rows>, CliError>
where
    P: Sync,
    F: Fn(&P) -> Result<Rows, CliError> + Sync + Send,
{
    points.par_iter().map(f).collect()
}

fn point(master: u64, indices: Vec<usize>) -> PointSeed {
    let path: Vec<u64> = indices.iter().map(|&i| i as u64).collect();
    PointSeed {
        seed: derive_seed(master, &path),
        indices,
    }
}

fn table(header: Vec<&'static str>, rows: Vec<Rows>) -> Table {
    let mut t = Table::new(header);
    rows.into_iter().flatten().for_each(|r| t.push(r));
    t
}

/// `family` with its data-layer count replaced by `layers`.
fn with_layers(family: &Family, layers: Option<usize>) -> Result<Family, CliError> {
    let Some(l) = layers else {
        return Ok(family.clone());
    };
    match family {
        Family::HardwareEfficient {
            entangler, reupload, ..
        } => Ok(Family::HardwareEfficient {
            layers: l,
            entangler: *entangler,
            reupload: *reupload,
        }),
        Family::Parameterized { base, entangler } => Ok(Family::Parameterized {
            base: Box::new(with_layers(base, Some(l))?),
            entangler: *entangler,
        }),
        _ if l == 1 => Ok(family.clone()),
        _ => Err(CliError::Validation {
            field: "sweep.layers".into(),
            message: "the embedding family has a single fixed layer".into(),
        }),
    }
}

fn layer_axis(cfg: &ExperimentConfig) -> Vec<Option<usize>> {
    if cfg.sweep.layers.is_empty() {
        vec![None]
    } else {
        cfg.sweep.layers.iter().copied().map(Some).collect()
    }
}

fn input_dim(spec: &EmbeddingSpec) -> usize {
    spec.data_dim().unwrap_or(spec.num_qubits)
}

fn load_dataset(source: &DatasetSource, spec: &EmbeddingSpec, seed: u64) -> Result<Dataset, CliError> {
    let dim = input_dim(spec);
    let data = match source {
        DatasetSource::Csv { path } => load_csv(path)?,
        DatasetSource::Uniform { n_s, lo, hi } => gen_uniform(dim, *n_s, *lo, *hi, seed)?,
        DatasetSource::Hypercube { n_s } => gen_hypercube(dim, *n_s, seed)?,
        DatasetSource::Engineered { .. } => unreachable!("rejected by validation"),
    };
    if data.dim() != dim && spec.data_dim().is_some() {
        return Err(qkonc_core::Error::DimensionMismatch {
            expected: dim,
            found: data.dim(),
        }
        .into());
    }
    Ok(data)
}

pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match experiment {
        Experiment::VarianceScan => run_variance_scan(cfg),
        Experiment::Expressivity => run_expressivity(cfg),
        Experiment::NoiseScan => run_noise_scan(cfg),
        Experiment::Gram => run_gram(cfg),
        Experiment::Train => run_train(cfg),
        Experiment::Generalization => run_generalization(cfg),
        Experiment::Indistinguishability => run_indistinguishability(cfg),
        Experiment::KtaScan => run_kta_scan(cfg),
        Experiment::ShotsBudget => run_shots_budget(cfg),
        Experiment::Bounds => run_bounds(cfg),
    }
}

/// `(i, j, n, L)` over the qubit and layer axes.
fn qubit_layer_grid(cfg: &ExperimentConfig) -> Vec<(usize, usize, usize, Option<usize>)> {
    let layers = layer_axis(cfg);
    let mut grid = Vec::new();
    for (i, &n) in cfg.sweep.qubits.iter().enumerate() {
        for (j, &l) in layers.iter().enumerate() {
            grid.push((i, j, n, l));
        }
    }
    grid
}

fn run_variance_scan(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let master = cfg.seed();
    let pairs = cfg.params.pairs.unwrap_or(defaults::PAIRS_VARIANCE);
    let sampler = cfg.sampler();
    let projected = KernelKind::Projected { gamma: cfg.gamma() };
    let grid = qubit_layer_grid(cfg);
    let seeds: Vec<PointSeed> = grid.iter().map(|g| point(master, vec![g.0, g.1])).collect();
    let rows = sweep(&grid, |&(i, j, n, l)| {
        let spec = EmbeddingSpec::new(n, with_layers(cfg.family(), l)?)?;
        let seed = derive_seed(master, &[i as u64, j as u64]);
        // Both kernels see the same pairs.
        let fq = variance_scan(&spec, KernelKind::Fidelity, &sampler, pairs, seed)?;
        let pq = variance_scan(&spec, projected, &sampler, pairs, seed)?;
        Ok(vec![vec![
            n.into(),
            spec.num_layers().into(),
            fq.variance.into(),
            pq.variance.into(),
            pairs.into(),
            seed.into(),
        ]])
    })?;
    Ok(Outcome {
        artifacts: vec![Artifact::Csv(
            "variance-scan.csv".into(),
            table(vec!["n", "L", "var_fq", "var_pq", "pairs", "seed"], rows),
        )],
        point_seeds: seeds,
    })
}

fn run_expressivity(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let master = cfg.seed();
    let samples = cfg.params.samples.unwrap_or(defaults::SAMPLES_EXPRESSIVITY);
    let sampler = cfg.sampler();
    let projected = KernelKind::Projected { gamma: cfg.gamma() };
    let grid = qubit_layer_grid(cfg);
    let seeds: Vec<PointSeed> = grid.iter().map(|g| point(master, vec![g.0, g.1])).collect();
    let rows = sweep(&grid, |&(i, j, n, l)| {
        let spec = EmbeddingSpec::new(n, with_layers(cfg.family(), l)?)?;
        let seed = derive_seed(master, &[i as u64, j as u64]);
        let e = expressivity_epsilon(&spec, &sampler, samples, seed)?;
        Ok(vec![vec![
            n.into(),
            spec.num_layers().into(),
            e.epsilon.into(),
            e.mc_error.into(),
            bound_expressivity(e.epsilon, n, KernelKind::Fidelity, None).into(),
            bound_expressivity(e.epsilon, n, projected, None).into(),
            samples.into(),
            seed.into(),
        ]])
    })?;
    Ok(Outcome {
        artifacts: vec![Artifact::Csv(
            "expressivity.csv".into(),
            table(
                vec![
                    "n", "L", "epsilon", "mc_error", "bound_fq", "bound_pq", "samples", "seed",
                ],
                rows,
            ),
        )],
        point_seeds: seeds,
    })
}

fn run_noise_scan(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let master = cfg.seed();
    let pairs = cfg.params.pairs.unwrap_or(defaults::PAIRS_NOISE);
    let sampler = cfg.sampler();
    let gamma = cfg.gamma();
    let mut grid = Vec::new();
    for (i, j, n, l) in qubit_layer_grid(cfg) {
        for (k, &q) in cfg.sweep.noise.iter().enumerate() {
            grid.push((i, j, k, n, l, q));
        }
    }
    let seeds: Vec<PointSeed> = grid.iter().map(|g| point(master, vec![g.0, g.1, g.2])).collect();
    let rows = sweep(&grid, |&(i, j, k, n, l, q)| {
        let spec = EmbeddingSpec::new(n, with_layers(cfg.family(), l)?)?;
        let seed = derive_seed(master, &[i as u64, j as u64, k as u64]);
        let params = PauliNoiseParams::depolarizing(q)?;
        let rho0 = StateVector::zero(n)?.to_density();
        let mixed = DensityMatrix::maximally_mixed(n)?;
        let bounds = noise_bounds(&params, spec.num_layers(), gamma, &rho0)?;
        let mut rng = stream(seed, &[]);
        let (mut fq_dev, mut pq_dev, mut state_dist) = (0.0, 0.0, 0.0);
        for _ in 0..pairs {
            let (x, y) = sampler.sample_pair(input_dim(&spec), &mut rng);
            let a = noisy_embed(&spec, &x, &params)?;
            let b = noisy_embed(&spec, &y, &params)?;
            fq_dev += (overlap(&a, &b)? - 1.0 / mixed.dim() as f64).abs();
            pq_dev += (1.0 - projected_from_bloch(&a.bloch_vectors(), &b.bloch_vectors(), gamma)).abs();
            state_dist += schatten2_distance(&a, &mixed)? + schatten2_distance(&b, &mixed)?;
        }
        let m = pairs as f64;
        Ok(vec![vec![
            n.into(),
            spec.num_layers().into(),
            q.into(),
            (fq_dev / m).into(),
            (pq_dev / m).into(),
            (state_dist / (2.0 * m)).into(),
            bounds.fidelity_bound.into(),
            bounds.projected_bound.into(),
            bounds.state_bound.into(),
            pairs.into(),
            seed.into(),
        ]])
    })?;
    Ok(Outcome {
        artifacts: vec![Artifact::Csv(
            "noise-scan.csv".into(),
            table(
                vec![
                    "n",
                    "L",
                    "q",
                    "fq_deviation",
                    "pq_deviation",
                    "state_distance",
                    "fidelity_bound",
                    "projected_bound",
                    "state_bound",
                    "pairs",
                    "seed",
                ],
                rows,
            ),
        )],
        point_seeds: seeds,
    })
}

fn run_gram(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let master = cfg.seed();
    let kind = cfg.kernel();
    let source = cfg.dataset.as_ref().expect("validated");
    let grid: Vec<(usize, usize)> = cfg.sweep.qubits.iter().copied().enumerate().collect();
    let seeds: Vec<PointSeed> = grid.iter().map(|g| point(master, vec![g.0])).collect();
    let results = grid
        .par_iter()
        .map(|&(i, n)| {
            let spec = EmbeddingSpec::new(n, cfg.family().clone())?;
            let seed = derive_seed(master, &[i as u64]);
            let data = load_dataset(source, &spec, derive_seed(seed, &[0]))?;
            let est = cfg.estimator().with_seed(derive_seed(seed, &[1]))?;
            let g = gram(&spec, &data.inputs, kind, &est)?;
            let s = g.size();
            let off: Vec<f64> = (0..s)
                .flat_map(|r| (0..s).filter(move |&c| c != r).map(move |c| (r, c)))
                .map(|(r, c)| g.entries[(r, c)])
                .collect();
            let mean = off.iter().sum::<f64>() / off.len().max(1) as f64;
            let zeros = off.iter().filter(|v| **v == 0.0).count() as f64 / off.len().max(1) as f64;
            let row = vec![
                n.into(),
                s.into(),
                mean.into(),
                zeros.into(),
                g.min_eigenvalue().into(),
                Cell::Int(u64::from(g.is_identity())),
                seed.into(),
            ];
            Ok((Artifact::Text(format!("gram_n{n}.csv"), g.to_csv()), row))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut summary = Table::new(vec![
        "n",
        "size",
        "offdiag_mean",
        "zero_fraction",
        "min_eigenvalue",
        "identity",
        "seed",
    ]);
    let mut artifacts = Vec::new();
    for (a, row) in results {
        summary.push(row);
        artifacts.push(a);
    }
    artifacts.insert(0, Artifact::Csv("gram.csv".into(), summary));
    Ok(Outcome {
        artifacts,
        point_seeds: seeds,
    })
}

fn run_train(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let master = cfg.seed();
    let n = cfg.sweep.qubits[0];
    let spec = EmbeddingSpec::new(n, cfg.family().clone())?;
    let kind = cfg.kernel();
    let est = cfg.estimator();
    let train_data = load_dataset(
        cfg.dataset.as_ref().expect("validated"),
        &spec,
        derive_seed(master, &[0]),
    )?;
    let model = train(
        &spec,
        kind,
        cfg.params.method.unwrap_or_default(),
        &train_data,
        cfg.params.lambda.unwrap_or(defaults::LAMBDA),
        cfg.params.sign.unwrap_or_default(),
        &est.with_seed(derive_seed(master, &[1]))?,
    )?;
    let mut predictions = Table::new(vec!["split", "index", "label", "prediction"]);
    let mut splits = vec![("train", train_data)];
    if let Some(source) = &cfg.test_dataset {
        splits.push(("test", load_dataset(source, &spec, derive_seed(master, &[2]))?));
    }
    for (s, (name, data)) in splits.iter().enumerate() {
        let h = predict_batch(
            &model,
            &data.inputs,
            &est.with_seed(derive_seed(master, &[3, s as u64]))?,
        )?;
        for (i, hi) in h.into_iter().enumerate() {
            let label = data.labels.as_ref().map(|l| l[i]);
            predictions.push(vec![(*name).into(), i.into(), label.into(), hi.into()]);
        }
    }
    Ok(Outcome {
        artifacts: vec![
            Artifact::Text("model.json".into(), model.to_json() + "\n"),
            Artifact::Csv("predictions.csv".into(), predictions),
        ],
        point_seeds: vec![point(master, vec![0]), point(master, vec![1])],
    })
}

fn run_generalization(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let master = cfg.seed();
    let Some(DatasetSource::Engineered {
        n_train,
        n_test,
        lo,
        hi,
    }) = cfg.dataset.clone()
    else {
        unreachable!("validated")
    };
    let kind = cfg.kernel();
    let sizes = &cfg.sweep.sizes;
    let baseline = cfg.params.baseline.unwrap_or(sizes[0]);
    let repeats = cfg.params.repeats.unwrap_or(defaults::REPEATS);
    let mut grid = Vec::new();
    for (i, &n) in cfg.sweep.qubits.iter().enumerate() {
        for r in 0..repeats {
            grid.push((i, r, n));
        }
    }
    let seeds: Vec<PointSeed> = grid.iter().map(|g| point(master, vec![g.0, g.1])).collect();
    let rows = sweep(&grid, |&(i, r, n)| {
        let spec = EmbeddingSpec::new(n, cfg.family().clone())?;
        let seed = derive_seed(master, &[i as u64, r as u64]);
        let task = engineered_task(&spec, kind, n_train, n_test, lo, hi, derive_seed(seed, &[0]))?;
        let est = cfg.estimator().with_seed(derive_seed(seed, &[1]))?;
        let points = generalization_experiment(
            &spec,
            kind,
            &task.train,
            &task.test,
            sizes,
            baseline,
            &est,
            cfg.params.lambda.unwrap_or(defaults::LAMBDA),
            cfg.params.sign.unwrap_or_default(),
        )?;
        Ok(points
            .into_iter()
            .map(|p| {
                vec![
                    n.into(),
                    r.into(),
                    p.n_s.into(),
                    p.test_loss.into(),
                    p.eta.into(),
                    p.train_error.into(),
                    seed.into(),
                ]
            })
            .collect())
    })?;
    Ok(Outcome {
        artifacts: vec![Artifact::Csv(
            "generalization.csv".into(),
            table(
                vec!["n", "repeat", "n_s", "test_loss", "eta", "train_error", "seed"],
                rows,
            ),
        )],
        point_seeds: seeds,
    })
}

fn run_indistinguishability(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let master = cfg.seed();
    let scan = RatioScan {
        qubits: cfg.sweep.qubits.clone(),
        shots: cfg.sweep.shots.clone(),
        n_s: cfg.params.n_s.unwrap_or(defaults::N_S),
        trials: cfg.params.trials.unwrap_or(defaults::TRIALS),
        seed: master,
    };
    let test = cfg.params.test.unwrap_or(RatioTest::Zero);
    let (points, column) = match test {
        RatioTest::Zero => (zero_ratio_scan(&scan)?, "zero_ratio"),
        RatioTest::Success => (
            success_ratio_scan(&scan, cfg.params.alpha.unwrap_or(defaults::ALPHA))?,
            "success_ratio",
        ),
    };
    let mut t = Table::new(vec!["n", "N", column, "std_error", "trials", "seed"]);
    for p in points {
        t.push(vec![
            p.num_qubits.into(),
            p.shots.into(),
            p.ratio.into(),
            p.std_error.into(),
            p.trials.into(),
            master.into(),
        ]);
    }
    let point_seeds = (0..scan.trials)
        .flat_map(|t| [point(master, vec![0, t]), point(master, vec![1, t])])
        .collect();
    Ok(Outcome {
        artifacts: vec![Artifact::Csv("indistinguishability.csv".into(), t)],
        point_seeds,
    })
}

fn run_kta_scan(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let master = cfg.seed();
    let kind = cfg.kernel();
    let samples = cfg.params.samples.unwrap_or(defaults::SAMPLES_KTA);
    let source = cfg.dataset.as_ref().expect("validated");
    let grid: Vec<(usize, usize)> = cfg.sweep.qubits.iter().copied().enumerate().collect();
    let seeds: Vec<PointSeed> = grid.iter().map(|g| point(master, vec![g.0])).collect();
    let rows = sweep(&grid, |&(i, n)| {
        let spec = EmbeddingSpec::new(n, cfg.family().clone())?;
        let seed = derive_seed(master, &[i as u64]);
        let data = load_dataset(source, &spec, derive_seed(seed, &[0]))?;
        let s = kta_variance_over_theta(&spec, kind, &data, samples, derive_seed(seed, &[1]))?;
        Ok(vec![vec![
            n.into(),
            s.report.mean.into(),
            s.report.variance.into(),
            s.entry_variance_sum.into(),
            s.report.bound("kta_statement").into(),
            s.report.bound("kta_proof").into(),
            samples.into(),
            seed.into(),
        ]])
    })?;
    Ok(Outcome {
        artifacts: vec![Artifact::Csv(
            "kta-scan.csv".into(),
            table(
                vec![
                    "n",
                    "mean_ta",
                    "var_ta",
                    "entry_variance_sum",
                    "bound_statement",
                    "bound_proof",
                    "samples",
                    "seed",
                ],
                rows,
            ),
        )],
        point_seeds: seeds,
    })
}

fn run_shots_budget(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let rel_err = cfg.params.rel_err.unwrap_or(defaults::REL_ERR);
    let failure_p = cfg.params.failure_p.unwrap_or(defaults::FAILURE_P);
    let obs_norm = cfg.params.obs_norm.unwrap_or(defaults::OBS_NORM);
    let mut t = Table::new(vec!["variance", "rel_err", "failure_p", "obs_norm", "shots"]);
    for &v in &cfg.sweep.variance {
        let shots = shots_budget(v, rel_err, failure_p, obs_norm)?;
        t.push(vec![
            v.into(),
            rel_err.into(),
            failure_p.into(),
            obs_norm.into(),
            shots.into(),
        ]);
    }
    Ok(Outcome {
        artifacts: vec![Artifact::Csv("shots-budget.csv".into(), t)],
        point_seeds: Vec::new(),
    })
}

fn run_bounds(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let projected = KernelKind::Projected { gamma: cfg.gamma() };
    let eps_axis = if cfg.sweep.epsilon.is_empty() {
        vec![0.0]
    } else {
        cfg.sweep.epsilon.clone()
    };
    let mut t = Table::new(vec![
        "n",
        "epsilon",
        "beta_haar",
        "beta_tilde_haar",
        "global",
        "expressivity_fq",
        "expressivity_pq",
    ]);
    for &n in &cfg.sweep.qubits {
        let global = bound_global(n, None)?;
        for &eps in &eps_axis {
            t.push(vec![
                n.into(),
                eps.into(),
                beta_haar(n).into(),
                beta_tilde_haar(n).into(),
                global.into(),
                bound_expressivity(eps, n, KernelKind::Fidelity, None).into(),
                bound_expressivity(eps, n, projected, None).into(),
            ]);
        }
    }
    Ok(Outcome {
        artifacts: vec![Artifact::Csv("bounds.csv".into(), t)],
        point_seeds: Vec::new(),
    })
}
