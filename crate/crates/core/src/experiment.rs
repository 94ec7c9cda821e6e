//! End-to-end evaluation protocols: split the data, optionally select the
//! SVM regularization constant on the validation set, train on the training
//! split, and report test metrics. Sweep harnesses repeat the protocol over
//! dataset sizes, shape parameters, or defuzzification methods with derived
//! per-run seeds; repeats run in parallel and combine deterministically.

use rayon::prelude::*;

use crate::data::{self, FuzzyDataset, SplitSpec, SyntheticConfig};
use crate::defuzz::DefuzzMethod;
use crate::error::{Error, Result};
use crate::metrics;
use crate::mlp::{self, TrainConfig};
use crate::svm::{self, KernelSpec, SmoConfig};

pub use crate::util::mean_sd;

/// Classifier choice plus its hyperparameters (seeds are injected per run).
#[derive(Debug, Clone, Copy)]
pub enum ModelConfig {
    Svm {
        kernel: KernelSpec,
        c: f64,
        tol: f64,
        max_passes: usize,
    },
    Mlp {
        hidden: (usize, usize),
        learning_rate: f64,
        epochs: usize,
        batch_size: usize,
        weight_decay: f64,
    },
}

impl ModelConfig {
    pub fn svm(kernel: KernelSpec, c: f64) -> Self {
        Self::Svm {
            kernel,
            c,
            tol: 1e-3,
            max_passes: 100,
        }
    }

    pub fn mlp(hidden: (usize, usize), learning_rate: f64, epochs: usize) -> Self {
        Self::Mlp {
            hidden,
            learning_rate,
            epochs,
            batch_size: 32,
            weight_decay: 1e-4,
        }
    }

    fn with_c(&self, new_c: f64) -> Self {
        match *self {
            Self::Svm {
                kernel,
                tol,
                max_passes,
                ..
            } => Self::Svm {
                kernel,
                c: new_c,
                tol,
                max_passes,
            },
            other => other,
        }
    }
}

/// Test metrics of one run. Balanced accuracy and AUC are absent when a
/// class is missing from the evaluation truths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOutcome {
    pub accuracy: f64,
    pub balanced_accuracy: Option<f64>,
    pub macro_auc: Option<f64>,
}

fn optional(res: Result<f64>) -> Result<Option<f64>> {
    match res {
        Ok(v) => Ok(Some(v)),
        Err(Error::ClassAbsent(_)) => Ok(None),
        Err(other) => Err(other),
    }
}

/// Train on `train` and evaluate on `eval_set`.
pub fn train_and_eval(
    train: &FuzzyDataset,
    eval_set: &FuzzyDataset,
    model: &ModelConfig,
    method: DefuzzMethod,
    resolution: usize,
    seed: u64,
) -> Result<EvalOutcome> {
    let (preds, scores) = match *model {
        ModelConfig::Svm {
            kernel,
            c,
            tol,
            max_passes,
        } => {
            let cfg = SmoConfig {
                c,
                tol,
                max_passes,
                seed,
            };
            let trained = svm::train_df_svm(train, method, resolution, &kernel, &cfg)?;
            trained.predict_dataset(eval_set)?
        }
        ModelConfig::Mlp {
            hidden,
            learning_rate,
            epochs,
            batch_size,
            weight_decay,
        } => {
            let cfg = TrainConfig {
                batch_size,
                weight_decay,
                ..TrainConfig::new(learning_rate, epochs, seed)
            };
            let trained = mlp::train_df_mlp(train, hidden, &cfg, method, resolution)?;
            trained.predict_dataset(eval_set)?
        }
    };
    let truths = eval_set.labels();
    let k = eval_set.num_classes();
    Ok(EvalOutcome {
        accuracy: metrics::accuracy(&preds, &truths)?,
        balanced_accuracy: optional(metrics::balanced_accuracy(&preds, &truths, k))?,
        macro_auc: optional(metrics::macro_auc(&scores, &truths))?,
    })
}

/// Pick the grid value of `C` with the best validation accuracy (ties go to
/// the earliest grid entry).
pub fn select_svm_c(
    train: &FuzzyDataset,
    val: &FuzzyDataset,
    model: &ModelConfig,
    c_grid: &[f64],
    method: DefuzzMethod,
    resolution: usize,
    seed: u64,
) -> Result<f64> {
    if c_grid.is_empty() {
        return Err(Error::Domain("empty C grid".into()));
    }
    let mut best_c = c_grid[0];
    let mut best_acc = f64::NEG_INFINITY;
    for &c in c_grid {
        let outcome = train_and_eval(train, val, &model.with_c(c), method, resolution, seed)?;
        if outcome.accuracy > best_acc {
            best_acc = outcome.accuracy;
            best_c = c;
        }
    }
    Ok(best_c)
}

/// One full protocol run and where its hyperparameters came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolOutcome {
    pub test: EvalOutcome,
    pub chosen_c: Option<f64>,
}

/// Split -> (select C on validation) -> train -> test.
pub fn run_protocol(
    ds: &FuzzyDataset,
    split_spec: &SplitSpec,
    model: &ModelConfig,
    c_grid: Option<&[f64]>,
    method: DefuzzMethod,
    resolution: usize,
    train_seed: u64,
) -> Result<ProtocolOutcome> {
    let (train, val, test) = data::split(ds, split_spec)?;
    let (model, chosen_c) = match (model, c_grid) {
        (ModelConfig::Svm { .. }, Some(grid)) => {
            let c = select_svm_c(&train, &val, model, grid, method, resolution, train_seed)?;
            (model.with_c(c), Some(c))
        }
        _ => (*model, None),
    };
    let test_outcome = train_and_eval(&train, &test, &model, method, resolution, train_seed)?;
    Ok(ProtocolOutcome {
        test: test_outcome,
        chosen_c,
    })
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Distinct deterministic seed for (base, stream, index).
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    mix(base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03)))
}

/// Repeat the protocol on one dataset; repeat `r` re-splits with a derived
/// seed, the paper's data-scrambling step.
pub fn repeat_protocol(
    ds: &FuzzyDataset,
    model: &ModelConfig,
    c_grid: Option<&[f64]>,
    method: DefuzzMethod,
    resolution: usize,
    repeats: usize,
    base_seed: u64,
) -> Result<Vec<ProtocolOutcome>> {
    (0..repeats)
        .into_par_iter()
        .map(|r| {
            let split_seed = derive_seed(base_seed, 1, r as u64);
            let train_seed = derive_seed(base_seed, 2, r as u64);
            run_protocol(
                ds,
                &SplitSpec::standard(split_seed),
                model,
                c_grid,
                method,
                resolution,
                train_seed,
            )
        })
        .collect()
}

/// Learning-curve sweep over the dataset size: each (size, repeat) generates
/// a fresh synthetic dataset from `template` with a derived seed.
#[allow(clippy::too_many_arguments)]
pub fn size_sweep(
    sizes: &[usize],
    template: &SyntheticConfig,
    model: &ModelConfig,
    c_grid: Option<&[f64]>,
    method: DefuzzMethod,
    resolution: usize,
    repeats: usize,
    base_seed: u64,
) -> Result<Vec<(usize, Vec<ProtocolOutcome>)>> {
    sizes
        .iter()
        .enumerate()
        .map(|(si, &n)| {
            let runs = (0..repeats)
                .into_par_iter()
                .map(|r| {
                    let mut cfg = template.clone();
                    cfg.n = n;
                    cfg.seed = derive_seed(base_seed, (si as u64) << 20, r as u64);
                    let ds = data::generate_synthetic(&cfg)?;
                    run_protocol(
                        &ds,
                        &SplitSpec::standard(derive_seed(cfg.seed, 1, 0)),
                        model,
                        c_grid,
                        method,
                        resolution,
                        derive_seed(cfg.seed, 2, 0),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((n, runs))
        })
        .collect()
}

/// Sweep the interval-to-fuzzy shape parameter: convert, then run the
/// repeated protocol on each converted dataset.
#[allow(clippy::too_many_arguments)]
pub fn beta_sweep(
    interval_ds: &FuzzyDataset,
    betas: &[f64],
    model: &ModelConfig,
    c_grid: Option<&[f64]>,
    method: DefuzzMethod,
    resolution: usize,
    repeats: usize,
    base_seed: u64,
) -> Result<Vec<(f64, Vec<ProtocolOutcome>)>> {
    betas
        .iter()
        .map(|&beta| {
            let converted = data::convert_intervals(interval_ds, beta)?;
            let runs = repeat_protocol(
                &converted, model, c_grid, method, resolution, repeats, base_seed,
            )?;
            Ok((beta, runs))
        })
        .collect()
}

/// Compare defuzzification methods on one dataset under the same seeds.
pub fn defuzz_sweep(
    ds: &FuzzyDataset,
    methods: &[DefuzzMethod],
    model: &ModelConfig,
    c_grid: Option<&[f64]>,
    resolution: usize,
    repeats: usize,
    base_seed: u64,
) -> Result<Vec<(DefuzzMethod, Vec<ProtocolOutcome>)>> {
    methods
        .iter()
        .map(|&method| {
            let runs = repeat_protocol(ds, model, c_grid, method, resolution, repeats, base_seed)?;
            Ok((method, runs))
        })
        .collect()
}
