//! Command-line pipeline for fuzzy-feature classification: generate
//! synthetic data, convert interval columns, oversample, split, train and
//! evaluate classifiers, sweep parameters, estimate Rademacher complexity,
//! and compare result files.
//!
//! Every output file is accompanied by a `<out>.manifest` key-value file
//! recording the resolved flags and seed; re-running a command with the
//! flags from its manifest reproduces the output bit for bit.
//!
//! Exit codes: 0 success, 1 flag/validation error, 2 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fuzzyclass::csv_io;
use fuzzyclass::data::{self, FuzzyDataset, SplitSpec, SyntheticConfig};
use fuzzyclass::defuzz::{DefuzzMethod, DEFAULT_RESOLUTION};
use fuzzyclass::experiment::{self, mean_sd, ModelConfig, ProtocolOutcome};
use fuzzyclass::kv::KvDoc;
use fuzzyclass::metrics::{self, MetricsReport};
use fuzzyclass::mlp::{self, MlpModel, TrainConfig};
use fuzzyclass::svm::{self, Gram, KernelSpec, SmoConfig, SvmModel};
use fuzzyclass::theory;

#[derive(Parser)]
#[command(
    name = "fuzzyclass",
    about = "Classify observations with fuzzy-number or interval features",
    version
)]
struct Cli {
    /// Base seed for every random choice this run makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Suppress informational output.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset of triangular fuzzy observations.
    Gen {
        /// Number of instances.
        #[arg(long)]
        n: usize,
        /// Features per instance.
        #[arg(long, default_value_t = 20)]
        features: usize,
        /// Number of classes.
        #[arg(long, default_value_t = 5)]
        classes: usize,
        /// Class centers are drawn from U[0, spread] per coordinate.
        #[arg(long, default_value_t = 10.0)]
        spread: f64,
        /// Within-class standard deviation of the hidden true values.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Output fuzzy CSV path.
        #[arg(long)]
        out: PathBuf,
    },

    /// Convert interval columns to triangular columns with shape parameter beta.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        /// Apex position: 0 puts it at the upper end, 1 at the lower end.
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        out: PathBuf,
    },

    /// Oversample minority classes by interpolating same-class neighbors.
    Oversample {
        #[arg(long = "in")]
        input: PathBuf,
        /// Target instance count per class.
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = 5)]
        k_neighbors: usize,
        #[arg(long)]
        out: PathBuf,
    },

    /// Split a dataset into train/validation/test CSVs.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated fractions summing to 1.
        #[arg(long, default_value = "0.6,0.2,0.2")]
        fractions: String,
        /// Writes <prefix>_train.csv, <prefix>_val.csv, <prefix>_test.csv.
        #[arg(long)]
        out_prefix: String,
    },

    /// Train a classifier on a fuzzy CSV.
    Train {
        /// svm | mlp
        #[arg(long)]
        model: String,
        #[arg(long = "in")]
        input: PathBuf,
        /// Model file to write (key-value format).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonModelArgs,
        #[command(flatten)]
        svm: SvmArgs,
        #[command(flatten)]
        mlp: MlpArgs,
        /// Optional CSV of (epoch, loss) for MLP training.
        #[arg(long)]
        loss_out: Option<PathBuf>,
    },

    /// Evaluate a trained model on a fuzzy CSV.
    Eval {
        /// Model file written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated subset of accuracy,balanced,auc.
        #[arg(long, default_value = "accuracy,balanced,auc")]
        metrics: String,
        /// Optional report file (key-value format).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Repeat train/eval over a parameter grid and summarize.
    Sweep {
        /// m | beta | defuzz
        #[arg(long)]
        param: String,
        /// Comma-separated grid values.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Input dataset (required for beta sweeps; optional for defuzz).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Instances to generate when no input file is given.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        features: usize,
        #[arg(long, default_value_t = 5)]
        classes: usize,
        #[arg(long, default_value_t = 10.0)]
        spread: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// svm | mlp
        #[arg(long, default_value = "svm")]
        model: String,
        #[command(flatten)]
        common: CommonModelArgs,
        #[command(flatten)]
        svm: SvmArgs,
        #[command(flatten)]
        mlp: MlpArgs,
        /// Candidate C values; when present the best is picked per run.
        #[arg(long)]
        c_grid: Option<String>,
        /// Selection split for the C grid (only `val` is supported).
        #[arg(long, default_value = "val")]
        select_on: String,
        /// Per-run results CSV; a *.summary.csv is written next to it.
        #[arg(long)]
        out: PathBuf,
    },

    /// Estimate the kernel-class Rademacher complexity and compare with the
    /// closed-form bound.
    Rademacher {
        /// Input dataset; generated synthetically when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        features: usize,
        #[arg(long, default_value_t = 5)]
        classes: usize,
        /// Weight-norm bound of the hypothesis class.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 200)]
        draws: usize,
        #[command(flatten)]
        common: CommonModelArgs,
        #[command(flatten)]
        svm: SvmArgs,
        /// Optional report file (key-value format).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Wilcoxon rank-sum test between a metric column of two result CSVs.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Column to compare: accuracy | balanced_accuracy | auc.
        #[arg(long, default_value = "accuracy")]
        column: String,
    },
}

#[derive(Args)]
struct CommonModelArgs {
    /// Defuzzification method: mom | cog | alc | val | m1 | m2.
    #[arg(long, default_value = "val")]
    defuzz: String,
    /// Quadrature levels for integral defuzzifiers.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
}

#[derive(Args)]
struct SvmArgs {
    /// Kernel: linear | poly | rbf.
    #[arg(long, default_value = "rbf")]
    kernel: String,
    /// Regularization parameter.
    #[arg(long, default_value_t = 10.0)]
    c: f64,
    /// Kernel bandwidth; defaults to 1/features.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 3)]
    degree: u32,
    #[arg(long, default_value_t = 0.0)]
    coef0: f64,
    /// KKT tolerance of the SMO solver.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Stagnant-sweep budget of the SMO solver.
    #[arg(long, default_value_t = 100)]
    max_passes: usize,
}

#[derive(Args)]
struct MlpArgs {
    #[arg(long, default_value_t = 100)]
    hidden1: usize,
    #[arg(long, default_value_t = 100)]
    hidden2: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    weight_decay: f64,
}

/// Ends the process with exit code 1 (validation) or 2 (runtime).
enum CliError {
    Validation(String),
    Runtime(String),
}

type CliResult<T> = Result<T, CliError>;

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn runtime(err: fuzzyclass::Error) -> CliError {
    CliError::Runtime(err.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successful exits.
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn parse_defuzz(name: &str) -> CliResult<DefuzzMethod> {
    name.parse()
        .map_err(|e: fuzzyclass::Error| validation(e.to_string()))
}

fn parse_kernel(args: &SvmArgs, num_features: usize) -> CliResult<KernelSpec> {
    let gamma = args.gamma.unwrap_or(1.0 / num_features.max(1) as f64);
    let spec = match args.kernel.as_str() {
        "linear" => KernelSpec::Linear,
        "poly" => KernelSpec::Poly {
            gamma,
            degree: args.degree,
            coef0: args.coef0,
        },
        "rbf" => KernelSpec::Rbf { gamma },
        other => {
            return Err(validation(format!(
                "unknown kernel '{other}' (expected linear|poly|rbf)"
            )))
        }
    };
    spec.validate().map_err(|e| validation(e.to_string()))?;
    Ok(spec)
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> CliResult<Vec<T>> {
    let values: Result<Vec<T>, _> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(validation(format!("cannot parse {what} list '{raw}'"))),
    }
}

fn load_dataset(path: &Path) -> CliResult<FuzzyDataset> {
    csv_io::read_fuzzy_csv(path).map_err(runtime)
}

/// Writes `<out>.manifest` next to an output file.
fn write_manifest(out: &Path, command: &str, flags: &[(&str, String)]) -> CliResult<()> {
    let mut doc = KvDoc::new("run_manifest");
    doc.set("command", command);
    for (key, value) in flags {
        doc.set(key, value);
    }
    let mut path = out.as_os_str().to_owned();
    path.push(".manifest");
    doc.write_to(PathBuf::from(path)).map_err(runtime)
}

fn info(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        println!("{}", msg.as_ref());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let seed = cli.seed;
    let quiet = cli.quiet;
    match cli.command {
        Command::Gen {
            n,
            features,
            classes,
            spread,
            sigma,
            out,
        } => {
            let cfg = SyntheticConfig {
                n,
                num_features: features,
                num_classes: classes,
                seed,
                class_center_spread: spread,
                within_class_sigma: sigma,
            };
            let ds = data::generate_synthetic(&cfg).map_err(|e| validation(e.to_string()))?;
            csv_io::write_fuzzy_csv(&ds, &out).map_err(runtime)?;
            write_manifest(
                &out,
                "gen",
                &[
                    ("n", n.to_string()),
                    ("features", features.to_string()),
                    ("classes", classes.to_string()),
                    ("spread", spread.to_string()),
                    ("sigma", sigma.to_string()),
                    ("seed", seed.to_string()),
                ],
            )?;
            info(
                quiet,
                format!("wrote {} instances to {}", ds.len(), out.display()),
            );
            Ok(())
        }

        Command::Convert { input, beta, out } => {
            if !(0.0..=1.0).contains(&beta) {
                return Err(validation(format!("beta must lie in [0, 1], got {beta}")));
            }
            let ds = load_dataset(&input)?;
            let converted = data::convert_intervals(&ds, beta).map_err(runtime)?;
            csv_io::write_fuzzy_csv(&converted, &out).map_err(runtime)?;
            write_manifest(
                &out,
                "convert",
                &[
                    ("in", input.display().to_string()),
                    ("beta", beta.to_string()),
                    ("seed", seed.to_string()),
                ],
            )?;
            info(quiet, format!("converted interval columns at beta={beta}"));
            Ok(())
        }

        Command::Oversample {
            input,
            target,
            k_neighbors,
            out,
        } => {
            if k_neighbors == 0 {
                return Err(validation("k_neighbors must be at least 1"));
            }
            let ds = load_dataset(&input)?;
            let grown = data::smote_oversample(&ds, target, k_neighbors, seed).map_err(runtime)?;
            csv_io::write_fuzzy_csv(&grown, &out).map_err(runtime)?;
            write_manifest(
                &out,
                "oversample",
                &[
                    ("in", input.display().to_string()),
                    ("target", target.to_string()),
                    ("k_neighbors", k_neighbors.to_string()),
                    ("seed", seed.to_string()),
                ],
            )?;
            info(
                quiet,
                format!("class counts now {:?}", grown.class_counts()),
            );
            Ok(())
        }

        Command::Split {
            input,
            fractions,
            out_prefix,
        } => {
            let fracs: Vec<f64> = parse_list(&fractions, "fraction")?;
            if fracs.len() != 3 {
                return Err(validation("expected exactly three fractions"));
            }
            let spec = SplitSpec::new(fracs[0], fracs[1], fracs[2], seed)
                .map_err(|e| validation(e.to_string()))?;
            let ds = load_dataset(&input)?;
            let (train, val, test) = data::split(&ds, &spec).map_err(runtime)?;
            for (part, name) in [(&train, "train"), (&val, "val"), (&test, "test")] {
                let path = PathBuf::from(format!("{out_prefix}_{name}.csv"));
                csv_io::write_fuzzy_csv(part, &path).map_err(runtime)?;
            }
            write_manifest(
                Path::new(&out_prefix),
                "split",
                &[
                    ("in", input.display().to_string()),
                    ("fractions", fractions.clone()),
                    ("seed", seed.to_string()),
                ],
            )?;
            info(
                quiet,
                format!(
                    "split {} -> {}/{}/{}",
                    ds.len(),
                    train.len(),
                    val.len(),
                    test.len()
                ),
            );
            Ok(())
        }

        Command::Train {
            model,
            input,
            out,
            common,
            svm: svm_args,
            mlp: mlp_args,
            loss_out,
        } => {
            let method = parse_defuzz(&common.defuzz)?;
            if common.resolution < 2 {
                return Err(validation("resolution must be at least 2"));
            }
            let ds = load_dataset(&input)?;
            let mut flags: Vec<(&str, String)> = vec![
                ("model", model.clone()),
                ("in", input.display().to_string()),
                ("defuzz", method.to_string()),
                ("resolution", common.resolution.to_string()),
                ("seed", seed.to_string()),
            ];
            match model.as_str() {
                "svm" => {
                    let kernel = parse_kernel(&svm_args, ds.num_features())?;
                    let cfg = SmoConfig {
                        c: svm_args.c,
                        tol: svm_args.tol,
                        max_passes: svm_args.max_passes,
                        seed,
                    };
                    let trained = svm::train_df_svm(&ds, method, common.resolution, &kernel, &cfg)
                        .map_err(runtime)?;
                    for warning in trained.warnings() {
                        eprintln!("warning: {warning}");
                    }
                    trained.to_kv().write_to(&out).map_err(runtime)?;
                    flags.extend([
                        ("kernel", svm_args.kernel.clone()),
                        ("c", svm_args.c.to_string()),
                        (
                            "gamma",
                            svm_args
                                .gamma
                                .map(|g| g.to_string())
                                .unwrap_or_else(|| "auto".into()),
                        ),
                        ("tol", svm_args.tol.to_string()),
                        ("max_passes", svm_args.max_passes.to_string()),
                    ]);
                }
                "mlp" => {
                    let cfg = TrainConfig {
                        batch_size: mlp_args.batch_size,
                        weight_decay: mlp_args.weight_decay,
                        ..TrainConfig::new(mlp_args.lr, mlp_args.epochs, seed)
                    };
                    let trained = mlp::train_df_mlp(
                        &ds,
                        (mlp_args.hidden1, mlp_args.hidden2),
                        &cfg,
                        method,
                        common.resolution,
                    )
                    .map_err(runtime)?;
                    if let Some(loss_path) = &loss_out {
                        let mut csv = String::from("epoch,loss\n");
                        for (epoch, loss) in trained.loss_trace.iter().enumerate() {
                            csv.push_str(&format!("{epoch},{loss}\n"));
                        }
                        std::fs::write(loss_path, csv)
                            .map_err(|e| CliError::Runtime(e.to_string()))?;
                        write_manifest(
                            loss_path,
                            "train",
                            &[
                                ("model", model.clone()),
                                ("in", input.display().to_string()),
                                ("seed", seed.to_string()),
                            ],
                        )?;
                    }
                    trained.to_kv().write_to(&out).map_err(runtime)?;
                    flags.extend([
                        ("hidden1", mlp_args.hidden1.to_string()),
                        ("hidden2", mlp_args.hidden2.to_string()),
                        ("lr", mlp_args.lr.to_string()),
                        ("epochs", mlp_args.epochs.to_string()),
                        ("batch_size", mlp_args.batch_size.to_string()),
                        ("weight_decay", mlp_args.weight_decay.to_string()),
                    ]);
                }
                other => {
                    return Err(validation(format!(
                        "unknown model '{other}' (expected svm|mlp)"
                    )))
                }
            }
            write_manifest(&out, "train", &flags)?;
            info(quiet, format!("model written to {}", out.display()));
            Ok(())
        }

        Command::Eval {
            model,
            input,
            metrics: metric_list,
            out,
        } => {
            let requested: Vec<String> = parse_list(&metric_list, "metric")?;
            for name in &requested {
                if !["accuracy", "balanced", "auc"].contains(&name.as_str()) {
                    return Err(validation(format!(
                        "unknown metric '{name}' (expected accuracy|balanced|auc)"
                    )));
                }
            }
            let ds = load_dataset(&input)?;
            let doc = KvDoc::read_from(&model).map_err(runtime)?;
            let (preds, scores) = match doc.doc_type().map_err(runtime)? {
                "svm_model" => {
                    let model = SvmModel::from_kv(&doc).map_err(runtime)?;
                    model.predict_dataset(&ds).map_err(runtime)?
                }
                "mlp_model" => {
                    let model = MlpModel::from_kv(&doc).map_err(runtime)?;
                    model.predict_dataset(&ds).map_err(runtime)?
                }
                other => {
                    return Err(CliError::Runtime(format!(
                        "file {} holds a '{other}', not a model",
                        model.display()
                    )))
                }
            };
            let truths = ds.labels();
            let with_auc = requested.iter().any(|m| m == "auc");
            let report = MetricsReport::compute(
                &preds,
                &truths,
                if with_auc { Some(&scores) } else { None },
                ds.num_classes(),
            )
            .map_err(runtime)?;
            println!("{}", report.format_table());
            if let Some(out) = out {
                report.to_kv().write_to(&out).map_err(runtime)?;
                write_manifest(
                    &out,
                    "eval",
                    &[
                        ("model", model.display().to_string()),
                        ("in", input.display().to_string()),
                        ("metrics", metric_list.clone()),
                        ("seed", seed.to_string()),
                    ],
                )?;
            }
            Ok(())
        }

        Command::Sweep {
            param,
            values,
            repeats,
            input,
            n,
            features,
            classes,
            spread,
            sigma,
            model,
            common,
            svm: svm_args,
            mlp: mlp_args,
            c_grid,
            select_on,
            out,
        } => {
            if repeats == 0 {
                return Err(validation("repeats must be at least 1"));
            }
            if select_on != "val" {
                return Err(validation(format!(
                    "only validation-set selection is supported, got '{select_on}'"
                )));
            }
            if common.resolution < 2 {
                return Err(validation("resolution must be at least 2"));
            }
            let method = parse_defuzz(&common.defuzz)?;
            let grid: Option<Vec<f64>> = match &c_grid {
                Some(raw) => Some(parse_list(raw, "C")?),
                None => None,
            };
            let feature_count = match &input {
                Some(path) => load_dataset(path)?.num_features(),
                None => features,
            };
            let model_cfg = match model.as_str() {
                "svm" => ModelConfig::Svm {
                    kernel: parse_kernel(&svm_args, feature_count)?,
                    c: svm_args.c,
                    tol: svm_args.tol,
                    max_passes: svm_args.max_passes,
                },
                "mlp" => ModelConfig::Mlp {
                    hidden: (mlp_args.hidden1, mlp_args.hidden2),
                    learning_rate: mlp_args.lr,
                    epochs: mlp_args.epochs,
                    batch_size: mlp_args.batch_size,
                    weight_decay: mlp_args.weight_decay,
                },
                other => {
                    return Err(validation(format!(
                        "unknown model '{other}' (expected svm|mlp)"
                    )))
                }
            };

            // (value label, runs) per grid point.
            let results: Vec<(String, Vec<ProtocolOutcome>)> = match param.as_str() {
                "m" => {
                    let sizes: Vec<usize> = parse_list(&values, "m")?;
                    let template = SyntheticConfig {
                        n: 0,
                        num_features: features,
                        num_classes: classes,
                        seed,
                        class_center_spread: spread,
                        within_class_sigma: sigma,
                    };
                    experiment::size_sweep(
                        &sizes,
                        &template,
                        &model_cfg,
                        grid.as_deref(),
                        method,
                        common.resolution,
                        repeats,
                        seed,
                    )
                    .map_err(runtime)?
                    .into_iter()
                    .map(|(m, runs)| (m.to_string(), runs))
                    .collect()
                }
                "beta" => {
                    let betas: Vec<f64> = parse_list(&values, "beta")?;
                    if betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
                        return Err(validation("beta values must lie in [0, 1]"));
                    }
                    let path = input
                        .as_ref()
                        .ok_or_else(|| validation("beta sweeps need --in"))?;
                    let ds = load_dataset(path)?;
                    experiment::beta_sweep(
                        &ds,
                        &betas,
                        &model_cfg,
                        grid.as_deref(),
                        method,
                        common.resolution,
                        repeats,
                        seed,
                    )
                    .map_err(runtime)?
                    .into_iter()
                    .map(|(beta, runs)| (beta.to_string(), runs))
                    .collect()
                }
                "defuzz" => {
                    let methods: Vec<DefuzzMethod> = values
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(parse_defuzz)
                        .collect::<CliResult<_>>()?;
                    if methods.is_empty() {
                        return Err(validation("empty defuzz list"));
                    }
                    let ds = match &input {
                        Some(path) => load_dataset(path)?,
                        None => {
                            let cfg = SyntheticConfig {
                                n,
                                num_features: features,
                                num_classes: classes,
                                seed,
                                class_center_spread: spread,
                                within_class_sigma: sigma,
                            };
                            data::generate_synthetic(&cfg).map_err(runtime)?
                        }
                    };
                    experiment::defuzz_sweep(
                        &ds,
                        &methods,
                        &model_cfg,
                        grid.as_deref(),
                        common.resolution,
                        repeats,
                        seed,
                    )
                    .map_err(runtime)?
                    .into_iter()
                    .map(|(m, runs)| (m.to_string(), runs))
                    .collect()
                }
                other => {
                    return Err(validation(format!(
                        "unknown sweep parameter '{other}' (expected m|beta|defuzz)"
                    )))
                }
            };

            // Per-run rows.
            let mut csv = String::from("param,repeat,accuracy,balanced_accuracy,auc\n");
            for (value, runs) in &results {
                for (repeat, outcome) in runs.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        value,
                        repeat,
                        outcome.test.accuracy,
                        outcome.test.balanced_accuracy.unwrap_or(f64::NAN),
                        outcome.test.macro_auc.unwrap_or(f64::NAN),
                    ));
                }
            }
            std::fs::write(&out, &csv).map_err(|e| CliError::Runtime(e.to_string()))?;

            // Mean±sd summary per grid value.
            let mut summary = String::from(
                "param,accuracy_mean,accuracy_sd,balanced_mean,balanced_sd,auc_mean,auc_sd\n",
            );
            for (value, runs) in &results {
                let acc: Vec<f64> = runs.iter().map(|o| o.test.accuracy).collect();
                let bal: Vec<f64> = runs
                    .iter()
                    .filter_map(|o| o.test.balanced_accuracy)
                    .collect();
                let auc: Vec<f64> = runs.iter().filter_map(|o| o.test.macro_auc).collect();
                let (am, asd) = mean_sd(&acc);
                let (bm, bsd) = mean_sd(&bal);
                let (um, usd) = mean_sd(&auc);
                summary.push_str(&format!("{value},{am},{asd},{bm},{bsd},{um},{usd}\n"));
                info(
                    quiet,
                    format!("{param}={value}: accuracy {am:.4}±{asd:.4} auc {um:.4}±{usd:.4}"),
                );
            }
            let summary_path = summary_path_for(&out);
            std::fs::write(&summary_path, &summary)
                .map_err(|e| CliError::Runtime(e.to_string()))?;

            write_manifest(
                &out,
                "sweep",
                &[
                    ("param", param.clone()),
                    ("values", values.clone()),
                    ("repeats", repeats.to_string()),
                    ("model", model.clone()),
                    ("defuzz", method.to_string()),
                    ("c_grid", c_grid.clone().unwrap_or_default()),
                    ("select_on", select_on.clone()),
                    ("n", n.to_string()),
                    ("features", features.to_string()),
                    ("classes", classes.to_string()),
                    ("spread", spread.to_string()),
                    ("sigma", sigma.to_string()),
                    (
                        "in",
                        input
                            .as_ref()
                            .map(|p| p.display().to_string())
                            .unwrap_or_default(),
                    ),
                    ("seed", seed.to_string()),
                ],
            )?;
            info(
                quiet,
                format!(
                    "per-run rows in {}, summary in {}",
                    out.display(),
                    summary_path.display()
                ),
            );
            Ok(())
        }

        Command::Rademacher {
            input,
            n,
            features,
            classes,
            lambda,
            draws,
            common,
            svm: svm_args,
            out,
        } => {
            if !lambda.is_finite() || lambda <= 0.0 {
                return Err(validation("lambda must be positive"));
            }
            if draws == 0 {
                return Err(validation("draws must be at least 1"));
            }
            if common.resolution < 2 {
                return Err(validation("resolution must be at least 2"));
            }
            let method = parse_defuzz(&common.defuzz)?;
            let ds = match &input {
                Some(path) => load_dataset(path)?,
                None => {
                    let cfg = SyntheticConfig {
                        n,
                        num_features: features,
                        num_classes: classes,
                        seed,
                        class_center_spread: 10.0,
                        within_class_sigma: 1.0,
                    };
                    data::generate_synthetic(&cfg).map_err(runtime)?
                }
            };
            let kernel = parse_kernel(&svm_args, ds.num_features())?;
            let xs = ds.defuzzify(method, common.resolution).map_err(runtime)?;
            let gram = Gram::build(&xs, &kernel).map_err(runtime)?;
            let estimate =
                theory::empirical_kernel_rademacher(&gram, lambda, ds.num_classes(), draws, seed)
                    .map_err(runtime)?;
            let r = gram.max_diagonal().sqrt();
            let bound =
                theory::lemma1_bound(r, lambda, ds.num_classes(), ds.len()).map_err(runtime)?;
            println!(
                "empirical complexity {:.6} ± {:.6} (T = {draws})",
                estimate.mean, estimate.std_error
            );
            println!("closed-form bound    {bound:.6} (r = {r:.4})");
            println!(
                "estimate within bound: {}",
                estimate.mean <= bound + 3.0 * estimate.std_error
            );
            if let Some(out) = out {
                let mut doc = KvDoc::new("rademacher_report");
                doc.set("kernel", kernel.name());
                doc.set("lambda", lambda);
                doc.set("draws", draws);
                doc.set("classes", ds.num_classes());
                doc.set("sample_size", ds.len());
                doc.set("estimate", estimate.mean);
                doc.set("std_error", estimate.std_error);
                doc.set("r", r);
                doc.set("bound", bound);
                doc.write_to(&out).map_err(runtime)?;
                write_manifest(
                    &out,
                    "rademacher",
                    &[
                        (
                            "in",
                            input
                                .as_ref()
                                .map(|p| p.display().to_string())
                                .unwrap_or_default(),
                        ),
                        ("n", n.to_string()),
                        ("lambda", lambda.to_string()),
                        ("draws", draws.to_string()),
                        ("kernel", svm_args.kernel.clone()),
                        ("defuzz", method.to_string()),
                        ("seed", seed.to_string()),
                    ],
                )?;
            }
            Ok(())
        }

        Command::Compare { a, b, column } => {
            let col_idx = match column.as_str() {
                "accuracy" => 2,
                "balanced_accuracy" => 3,
                "auc" => 4,
                other => {
                    return Err(validation(format!(
                        "unknown column '{other}' (expected accuracy|balanced_accuracy|auc)"
                    )))
                }
            };
            let sample_a = read_result_column(&a, col_idx)?;
            let sample_b = read_result_column(&b, col_idx)?;
            let (statistic, p) =
                metrics::wilcoxon_rank_sum(&sample_a, &sample_b).map_err(runtime)?;
            println!(
                "rank-sum statistic {statistic} over {}+{} runs, two-sided p = {p:.6}",
                sample_a.len(),
                sample_b.len()
            );
            Ok(())
        }
    }
}

fn summary_path_for(out: &Path) -> PathBuf {
    match out.extension() {
        Some(ext) => out.with_extension(format!("summary.{}", ext.to_string_lossy())),
        None => out.with_extension("summary"),
    }
}

/// Reads one metric column from a sweep results CSV, skipping NaN entries.
fn read_result_column(path: &Path, index: usize) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cell = line.split(',').nth(index).ok_or_else(|| {
            CliError::Runtime(format!(
                "{}: row {} has no column {index}",
                path.display(),
                i + 1
            ))
        })?;
        let value: f64 = cell.trim().parse().map_err(|_| {
            CliError::Runtime(format!(
                "{}: row {} column {index} is not a number: '{cell}'",
                path.display(),
                i + 1
            ))
        })?;
        if value.is_finite() {
            values.push(value);
        }
    }
    if values.is_empty() {
        return Err(CliError::Runtime(format!(
            "{}: no finite values in column {index}",
            path.display()
        )));
    }
    Ok(values)
}
