//! One-vs-rest kernel SVM on defuzzified features.
//!
//! Training defuzzifies every input once, builds the Gram matrix, then for
//! each class solves the soft-margin dual
//!
//! ```text
//! min_a  1/2 * sum_ij a_i a_j y_i y_j K(x_i, x_j) - sum_i a_i
//! s.t.   sum_i a_i y_i = 0,   0 <= a_i <= C
//! ```
//!
//! with sequential minimal optimization: the maximal violating pair is
//! selected each iteration (ties broken by a seeded RNG) and optimized
//! analytically. The stopping gap is the standard KKT-violation bound, so at
//! convergence every instance satisfies the KKT conditions within `tol`.
//! Prediction is the argmax over per-class decision values
//! `sum_i a_i y_i K(x, x_i) + b`.
//!
//! The K subproblems share one Gram matrix and run in parallel; results are
//! deterministic because each subproblem derives its own seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::FuzzyDataset;
use crate::defuzz::{self, DefuzzMethod};
use crate::error::{Error, Result};
use crate::fuzzy::FuzzyVector;
use crate::kv::KvDoc;

/// Kernel family with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Poly { gamma: f64, degree: u32, coef0: f64 },
    Rbf { gamma: f64 },
}

impl KernelSpec {
    /// RBF kernel with the default bandwidth `gamma = 1/p`.
    pub fn rbf_default(num_features: usize) -> Self {
        Self::Rbf {
            gamma: 1.0 / num_features.max(1) as f64,
        }
    }

    /// Cubic polynomial kernel with `gamma = 1/p` and zero offset.
    pub fn poly_default(num_features: usize) -> Self {
        Self::Poly {
            gamma: 1.0 / num_features.max(1) as f64,
            degree: 3,
            coef0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Linear => Ok(()),
            Self::Poly {
                gamma,
                degree,
                coef0,
            } => {
                if !(gamma > 0.0) || degree < 1 || !(coef0 >= 0.0) {
                    Err(Error::Domain(format!(
                        "poly kernel needs gamma > 0, degree >= 1, coef0 >= 0; got gamma={gamma}, degree={degree}, coef0={coef0}"
                    )))
                } else {
                    Ok(())
                }
            }
            Self::Rbf { gamma } => {
                if gamma > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "rbf kernel needs gamma > 0, got {gamma}"
                    )))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Poly { .. } => "poly",
            Self::Rbf { .. } => "rbf",
        }
    }

    fn eval_unchecked(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            Self::Linear => dot(x, z),
            Self::Poly {
                gamma,
                degree,
                coef0,
            } => (gamma * dot(x, z) + coef0).powi(degree as i32),
            Self::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

fn dot(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| a * b).sum()
}

/// Evaluate the kernel on two equal-length vectors.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::InvalidInput(format!(
            "kernel arguments differ in length: {} vs {}",
            x.len(),
            z.len()
        )));
    }
    spec.validate()?;
    Ok(spec.eval_unchecked(x, z))
}

/// Dense symmetric kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    data: Vec<f64>,
    n: usize,
}

impl Gram {
    /// Kernel matrix of `xs` under `spec`, rows computed in parallel.
    pub fn build(xs: &[Vec<f64>], spec: &KernelSpec) -> Result<Self> {
        spec.validate()?;
        let n = xs.len();
        if let Some(bad) = xs.iter().find(|x| x.len() != xs[0].len()) {
            return Err(Error::InvalidInput(format!(
                "inconsistent input dimensions: {} vs {}",
                bad.len(),
                xs[0].len()
            )));
        }
        let data: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let spec = *spec;
                (0..n).map(move |j| spec.eval_unchecked(&xs[i], &xs[j]))
            })
            .collect();
        Ok(Self { data, n })
    }

    pub fn from_raw(data: Vec<f64>, n: usize) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Matrix(format!(
                "expected {} entries for an {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self { data, n })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n)
            .map(|i| self.get(i, i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute asymmetry `|G_ij - G_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Quadratic form `v' G v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            total += v[i] * dot(self.row(i), v);
        }
        total
    }
}

/// SMO solver configuration.
#[derive(Debug, Clone, Copy)]
pub struct SmoConfig {
    pub c: f64,
    /// KKT violation tolerance for the stopping gap.
    pub tol: f64,
    /// Stop after this many consecutive sweeps (m iterations each) without
    /// any coefficient change.
    pub max_passes: usize,
    pub seed: u64,
}

impl SmoConfig {
    pub fn new(c: f64, seed: u64) -> Self {
        Self {
            c,
            tol: 1e-3,
            max_passes: 100,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Domain(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Result of one binary dual solve.
#[derive(Debug, Clone)]
pub struct SmoOutcome {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Final KKT violation gap.
    pub gap: f64,
    /// Dual objective after every pair update (non-increasing).
    pub objective_trace: Vec<f64>,
}

fn pick_tied<R: Rng>(ties: &[usize], rng: &mut R) -> usize {
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.gen_range(0..ties.len())]
    }
}

/// Solve the binary soft-margin dual over a precomputed Gram matrix.
/// `labels` must be +1/-1 with both signs present.
pub fn solve_binary_smo(gram: &Gram, labels: &[f64], cfg: &SmoConfig) -> Result<SmoOutcome> {
    cfg.validate()?;
    let m = gram.size();
    if labels.len() != m || m == 0 {
        return Err(Error::InvalidInput(format!(
            "labels ({}) must match gram size ({m}) and be nonempty",
            labels.len()
        )));
    }
    if labels.iter().any(|y| *y != 1.0 && *y != -1.0) {
        return Err(Error::InvalidInput("labels must be +1 or -1".into()));
    }
    if !labels.iter().any(|y| *y > 0.0) || !labels.iter().any(|y| *y < 0.0) {
        return Err(Error::InvalidInput(
            "binary subproblem needs both labels present".into(),
        ));
    }

    let c = cfg.c;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut alpha = vec![0.0f64; m];
    // Gradient of the dual objective: grad_k = sum_j Q_kj a_j - 1.
    let mut grad = vec![-1.0f64; m];
    let mut objective = 0.0f64;
    let mut trace = Vec::new();

    let in_up = |y: f64, a: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |y: f64, a: f64| (y < 0.0 && a < c) || (y > 0.0 && a > 0.0);

    let mut iterations = 0usize;
    let mut gap;
    let sweep_len = m;
    let mut since_progress = 0usize;
    // Pathological-case guard; normal termination is the gap or stagnation.
    let hard_cap = 200_000.max(sweep_len * 200);

    loop {
        // value_k = -y_k grad_k = y_k - f0_k where f0 is the bias-free score.
        let mut best_up = f64::NEG_INFINITY;
        let mut ties_up: Vec<usize> = Vec::new();
        let mut best_low = f64::INFINITY;
        let mut ties_low: Vec<usize> = Vec::new();
        for k in 0..m {
            let v = -labels[k] * grad[k];
            if in_up(labels[k], alpha[k]) {
                if v > best_up {
                    best_up = v;
                    ties_up.clear();
                    ties_up.push(k);
                } else if v == best_up {
                    ties_up.push(k);
                }
            }
            if in_low(labels[k], alpha[k]) {
                if v < best_low {
                    best_low = v;
                    ties_low.clear();
                    ties_low.push(k);
                } else if v == best_low {
                    ties_low.push(k);
                }
            }
        }
        if ties_up.is_empty() || ties_low.is_empty() {
            gap = 0.0;
            break;
        }
        gap = best_up - best_low;
        if gap <= cfg.tol {
            break;
        }
        if iterations >= hard_cap || since_progress >= cfg.max_passes * sweep_len {
            break;
        }
        iterations += 1;

        let i = pick_tied(&ties_up, &mut rng);
        let j = pick_tied(&ties_low, &mut rng);
        let (yi, yj) = (labels[i], labels[j]);
        let (ai_old, aj_old) = (alpha[i], alpha[j]);

        // Feasible box for alpha_j given the equality constraint.
        let (lo, hi) = if yi != yj {
            ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
        } else {
            ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
        };
        if lo >= hi {
            since_progress += 1;
            continue;
        }

        let eta = gram.get(i, i) + gram.get(j, j) - 2.0 * gram.get(i, j);
        let quad = eta.max(1e-12);
        // grad is d/d(alpha); the unconstrained minimizer along the pair
        // direction moves alpha_j by yj*(ei - ej)/eta with e_k = f0_k - y_k.
        let ei = labels[i] * grad[i];
        let ej = labels[j] * grad[j];
        // Coefficients meant to land on a bound can round one ulp short of
        // it, leaving a permanently reselected violator whose pair box has
        // collapsed; snap near-bound values onto the bound exactly.
        let snap_eps = 1e-12 * c.max(1.0);
        let snap = |a: f64| -> f64 {
            if a <= snap_eps {
                0.0
            } else if a >= c - snap_eps {
                c
            } else {
                a
            }
        };
        let aj_new = snap((aj_old + yj * (ei - ej) / quad).clamp(lo, hi));
        let ai_new = snap((ai_old - yi * yj * (aj_new - aj_old)).clamp(0.0, c));
        let delta_j = aj_new - aj_old;
        let delta_i = ai_new - ai_old;
        if delta_j == 0.0 && delta_i == 0.0 {
            since_progress += 1;
            continue;
        }

        // Objective change along the step (gradient is pre-update).
        objective += grad[i] * delta_i
            + grad[j] * delta_j
            + 0.5
                * (gram.get(i, i) * delta_i * delta_i
                    + 2.0 * gram.get(i, j) * yi * yj * delta_i * delta_j
                    + gram.get(j, j) * delta_j * delta_j);
        trace.push(objective);

        alpha[i] = ai_new;
        alpha[j] = aj_new;
        for k in 0..m {
            grad[k] += labels[k] * (yi * gram.get(k, i) * delta_i + yj * gram.get(k, j) * delta_j);
        }
        since_progress = 0;
    }

    // Bias from free support vectors, falling back to the feasible midpoint.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for k in 0..m {
        if alpha[k] > 0.0 && alpha[k] < c {
            free_sum += -labels[k] * grad[k];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let up = (0..m)
            .filter(|&k| in_up(labels[k], alpha[k]))
            .map(|k| -labels[k] * grad[k])
            .fold(f64::NEG_INFINITY, f64::max);
        let low = (0..m)
            .filter(|&k| in_low(labels[k], alpha[k]))
            .map(|k| -labels[k] * grad[k])
            .fold(f64::INFINITY, f64::min);
        if up.is_finite() && low.is_finite() {
            0.5 * (up + low)
        } else {
            0.0
        }
    };

    let residual: f64 = alpha
        .iter()
        .zip(labels)
        .map(|(a, y)| a * y)
        .sum::<f64>()
        .abs();
    if residual > 1e-8 {
        return Err(Error::Convergence { residual });
    }

    Ok(SmoOutcome {
        alpha,
        bias,
        iterations,
        gap,
        objective_trace: trace,
    })
}

/// Coefficients of one one-vs-rest subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub alpha: Vec<f64>,
    pub bias: f64,
}

/// A trained one-vs-rest kernel SVM over defuzzified inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: KernelSpec,
    pub c: f64,
    pub defuzz: DefuzzMethod,
    pub resolution: usize,
    num_classes: usize,
    num_features: usize,
    inputs: Vec<Vec<f64>>,
    labels: Vec<usize>,
    per_class: Vec<BinarySvm>,
    warnings: Vec<String>,
}

/// +1 for members of `class`, -1 otherwise.
pub fn one_vs_rest_labels(labels: &[usize], class: usize) -> Vec<f64> {
    labels
        .iter()
        .map(|&y| if y == class { 1.0 } else { -1.0 })
        .collect()
}

use crate::util::argmax_tie_lowest;

/// Train a one-vs-rest SVM on `train` after defuzzifying with `method`.
pub fn train_df_svm(
    train: &FuzzyDataset,
    method: DefuzzMethod,
    resolution: usize,
    kernel: &KernelSpec,
    cfg: &SmoConfig,
) -> Result<SvmModel> {
    cfg.validate()?;
    kernel.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    let counts = train.class_counts();
    let mut warnings = Vec::new();
    for (class, &count) in counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::ClassAbsent(class));
        }
        if count == 1 {
            warnings.push(format!(
                "class {class} has a single training instance; its subproblem is degenerate"
            ));
        }
    }

    let inputs = train.defuzzify(method, resolution)?;
    let labels = train.labels();
    let gram = Gram::build(&inputs, kernel)?;

    let per_class: Vec<BinarySvm> = (0..train.num_classes())
        .into_par_iter()
        .map(|class| {
            let binary = one_vs_rest_labels(&labels, class);
            let class_cfg = SmoConfig {
                seed: cfg.seed.wrapping_add(class as u64),
                ..*cfg
            };
            solve_binary_smo(&gram, &binary, &class_cfg).map(|out| BinarySvm {
                alpha: out.alpha,
                bias: out.bias,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SvmModel {
        kernel: *kernel,
        c: cfg.c,
        defuzz: method,
        resolution,
        num_classes: train.num_classes(),
        num_features: train.num_features(),
        inputs,
        labels,
        per_class,
        warnings,
    })
}

impl SvmModel {
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn training_size(&self) -> usize {
        self.inputs.len()
    }

    pub fn per_class(&self) -> &[BinarySvm] {
        &self.per_class
    }

    pub fn training_labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Per-class decision values for an already-defuzzified input.
    pub fn scores_crisp(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.num_features {
            return Err(Error::SchemaMismatch(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.num_features
            )));
        }
        let kernel_row: Vec<f64> = self
            .inputs
            .iter()
            .map(|xi| self.kernel.eval_unchecked(xi, x))
            .collect();
        Ok((0..self.num_classes)
            .map(|class| {
                let sub = &self.per_class[class];
                let mut score = sub.bias;
                for (i, &k) in kernel_row.iter().enumerate() {
                    if sub.alpha[i] != 0.0 {
                        let y = if self.labels[i] == class { 1.0 } else { -1.0 };
                        score += sub.alpha[i] * y * k;
                    }
                }
                score
            })
            .collect())
    }

    /// Per-class decision values for a fuzzy input.
    pub fn scores(&self, x: &FuzzyVector) -> Result<Vec<f64>> {
        let crisp = defuzz::defuzzify_vector(x, self.defuzz, self.resolution)?;
        self.scores_crisp(&crisp)
    }

    /// Predicted class: argmax score, ties to the lowest index.
    pub fn predict(&self, x: &FuzzyVector) -> Result<usize> {
        Ok(argmax_tie_lowest(&self.scores(x)?))
    }

    /// Predictions and the score matrix for a whole dataset.
    pub fn predict_dataset(&self, ds: &FuzzyDataset) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
        if ds.num_features() != self.num_features {
            return Err(Error::SchemaMismatch(format!(
                "dataset has {} features, model expects {}",
                ds.num_features(),
                self.num_features
            )));
        }
        let crisp = ds.defuzzify(self.defuzz, self.resolution)?;
        let scores: Vec<Vec<f64>> = crisp
            .par_iter()
            .map(|x| self.scores_crisp(x))
            .collect::<Result<Vec<_>>>()?;
        let preds = scores.iter().map(|s| argmax_tie_lowest(s)).collect();
        Ok((preds, scores))
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new("svm_model");
        doc.set("kernel", self.kernel.name());
        match self.kernel {
            KernelSpec::Linear => {}
            KernelSpec::Poly {
                gamma,
                degree,
                coef0,
            } => {
                doc.set("gamma", gamma);
                doc.set("degree", degree);
                doc.set("coef0", coef0);
            }
            KernelSpec::Rbf { gamma } => doc.set("gamma", gamma),
        }
        doc.set("c", self.c);
        doc.set("defuzz", self.defuzz.as_str());
        doc.set("resolution", self.resolution);
        doc.set("classes", self.num_classes);
        doc.set("features", self.num_features);
        doc.set("train_size", self.inputs.len());
        doc.set_usize_list("labels", &self.labels);
        for (i, x) in self.inputs.iter().enumerate() {
            doc.set_f64_list(&format!("input_{i}"), x);
        }
        for (class, sub) in self.per_class.iter().enumerate() {
            doc.set_f64_list(&format!("class_{class}.alpha"), &sub.alpha);
            doc.set(&format!("class_{class}.bias"), sub.bias);
        }
        doc
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        doc.expect_type("svm_model")?;
        let kernel = match doc.get_str("kernel")? {
            "linear" => KernelSpec::Linear,
            "poly" => KernelSpec::Poly {
                gamma: doc.get_f64("gamma")?,
                degree: doc.get_usize("degree")? as u32,
                coef0: doc.get_f64("coef0")?,
            },
            "rbf" => KernelSpec::Rbf {
                gamma: doc.get_f64("gamma")?,
            },
            other => {
                return Err(Error::KvFormat {
                    line: 0,
                    msg: format!("unknown kernel '{other}'"),
                })
            }
        };
        let num_classes = doc.get_usize("classes")?;
        let num_features = doc.get_usize("features")?;
        let train_size = doc.get_usize("train_size")?;
        let labels = doc.get_usize_list("labels")?;
        if labels.len() != train_size {
            return Err(Error::KvFormat {
                line: 0,
                msg: format!(
                    "labels length {} does not match train_size {train_size}",
                    labels.len()
                ),
            });
        }
        let mut inputs = Vec::with_capacity(train_size);
        for i in 0..train_size {
            let x = doc.get_f64_list(&format!("input_{i}"))?;
            if x.len() != num_features {
                return Err(Error::KvFormat {
                    line: 0,
                    msg: format!("input_{i} has {} values, expected {num_features}", x.len()),
                });
            }
            inputs.push(x);
        }
        let mut per_class = Vec::with_capacity(num_classes);
        for class in 0..num_classes {
            let alpha = doc.get_f64_list(&format!("class_{class}.alpha"))?;
            if alpha.len() != train_size {
                return Err(Error::KvFormat {
                    line: 0,
                    msg: format!(
                        "class_{class}.alpha has {} values, expected {train_size}",
                        alpha.len()
                    ),
                });
            }
            per_class.push(BinarySvm {
                alpha,
                bias: doc.get_f64(&format!("class_{class}.bias"))?,
            });
        }
        Ok(Self {
            kernel,
            c: doc.get_f64("c")?,
            defuzz: doc.get_str("defuzz")?.parse()?,
            resolution: doc.get_usize("resolution")?,
            num_classes,
            num_features,
            inputs,
            labels,
            per_class,
            warnings: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnSpec, FeatureKind, FuzzyDataset};
    use crate::defuzz::DEFAULT_RESOLUTION;
    use crate::fuzzy::FuzzyNumber;

    #[test]
    fn kernel_eval_examples() {
        let x = [1.0, 2.0];
        let z = [3.0, 4.0];
        assert_eq!(kernel_eval(&KernelSpec::Linear, &x, &z).unwrap(), 11.0);
        let rbf = KernelSpec::Rbf { gamma: 0.5 };
        assert_eq!(kernel_eval(&rbf, &x, &x).unwrap(), 1.0);
        let poly = KernelSpec::Poly {
            gamma: 1.0,
            degree: 2,
            coef0: 0.0,
        };
        assert_eq!(kernel_eval(&poly, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert!(kernel_eval(&KernelSpec::Linear, &x, &[1.0]).is_err());
        assert!(KernelSpec::Rbf { gamma: 0.0 }.validate().is_err());
    }

    /// Four crisp 1-D points: -2, -1 labeled class 0 and 1, 2 labeled
    /// class 1. The max-margin separator sits at 0 with the inner points as
    /// free support vectors (alpha = 0.5 each in the binary subproblems).
    fn toy_dataset() -> FuzzyDataset {
        let schema = vec![ColumnSpec {
            name: "x".into(),
            kind: FeatureKind::Crisp,
        }];
        let instances = [(-2.0, 0), (-1.0, 0), (1.0, 1), (2.0, 1)]
            .iter()
            .map(|&(x, y)| {
                (
                    FuzzyVector::from_fuzzy(vec![FuzzyNumber::crisp(x).unwrap()]),
                    y,
                )
            })
            .collect();
        FuzzyDataset::new(schema, instances, 2).unwrap()
    }

    fn toy_model() -> SvmModel {
        let cfg = SmoConfig {
            tol: 1e-6,
            ..SmoConfig::new(10.0, 0)
        };
        train_df_svm(
            &toy_dataset(),
            DefuzzMethod::Val,
            DEFAULT_RESOLUTION,
            &KernelSpec::Linear,
            &cfg,
        )
        .unwrap()
    }

    #[test]
    fn toy_problem_matches_hand_solution() {
        let model = toy_model();
        // Hand solution of the 4-variable dual: alpha = (0, 1/2, 1/2, 0),
        // bias 0 for each subproblem.
        for sub in model.per_class() {
            assert!(sub.alpha[0].abs() < 1e-6, "alpha0 = {}", sub.alpha[0]);
            assert!((sub.alpha[1] - 0.5).abs() < 1e-6);
            assert!((sub.alpha[2] - 0.5).abs() < 1e-6);
            assert!(sub.alpha[3].abs() < 1e-6);
            assert!(sub.bias.abs() < 1e-6, "bias = {}", sub.bias);
        }
        // Boundary at 0: bracket the sign change of the class-1 margin.
        let score_at = |t: f64| {
            let fv = FuzzyVector::from_fuzzy(vec![FuzzyNumber::crisp(t).unwrap()]);
            let s = model.scores(&fv).unwrap();
            s[1] - s[0]
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        assert!(score_at(lo) < 0.0 && score_at(hi) > 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if score_at(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let boundary = 0.5 * (lo + hi);
        assert!(boundary.abs() <= 1e-3, "boundary = {boundary}");
    }

    #[test]
    fn toy_predictions() {
        let model = toy_model();
        let probe = |t: f64| {
            model
                .predict(&FuzzyVector::from_fuzzy(vec![
                    FuzzyNumber::crisp(t).unwrap()
                ]))
                .unwrap()
        };
        assert_eq!(probe(-1.5), 0);
        assert_eq!(probe(1.5), 1);
        assert_eq!(probe(-2.0), 0);
        assert_eq!(probe(2.0), 1);
        // All training points classified correctly.
        let (preds, _) = model.predict_dataset(&toy_dataset()).unwrap();
        assert_eq!(preds, vec![0, 0, 1, 1]);
    }

    #[test]
    fn dual_feasibility_and_kkt_hold() {
        let model = toy_model();
        let gram = Gram::build(
            &toy_dataset()
                .defuzzify(DefuzzMethod::Val, DEFAULT_RESOLUTION)
                .unwrap(),
            &KernelSpec::Linear,
        )
        .unwrap();
        for class in 0..2 {
            let sub = &model.per_class()[class];
            let y = one_vs_rest_labels(model.training_labels(), class);
            let feast: f64 = sub.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
            assert!(feast.abs() <= 1e-8, "sum alpha*y = {feast}");
            for (i, &a) in sub.alpha.iter().enumerate() {
                assert!((0.0..=model.c).contains(&a));
                let f: f64 = sub.bias
                    + sub
                        .alpha
                        .iter()
                        .zip(&y)
                        .enumerate()
                        .map(|(j, (aj, yj))| aj * yj * gram.get(i, j))
                        .sum::<f64>();
                let margin = y[i] * f;
                let tol = 1e-6;
                if a == 0.0 {
                    assert!(margin >= 1.0 - tol, "i={i}: margin {margin}");
                } else if a == model.c {
                    assert!(margin <= 1.0 + tol, "i={i}: margin {margin}");
                } else {
                    assert!((margin - 1.0).abs() <= tol, "i={i}: margin {margin}");
                }
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let a = toy_model();
        let b = toy_model();
        assert_eq!(a.per_class(), b.per_class());
    }

    #[test]
    fn objective_is_monotone_nonincreasing() {
        let ds = crate::data::generate_synthetic(&{
            let mut cfg = crate::data::SyntheticConfig::new(60, 17);
            cfg.num_features = 4;
            cfg.num_classes = 3;
            cfg.class_center_spread = 4.0;
            cfg
        })
        .unwrap();
        let inputs = ds.defuzzify(DefuzzMethod::Val, DEFAULT_RESOLUTION).unwrap();
        let gram = Gram::build(&inputs, &KernelSpec::rbf_default(4)).unwrap();
        let labels = one_vs_rest_labels(&ds.labels(), 0);
        let out = solve_binary_smo(&gram, &labels, &SmoConfig::new(5.0, 3)).unwrap();
        assert!(out.iterations > 0);
        for pair in out.objective_trace.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-9,
                "objective increased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn crisp_reduction_is_defuzzifier_independent() {
        // On crisp features every defuzzifier is the identity, so models and
        // predictions coincide across methods.
        let ds = toy_dataset();
        let cfg = SmoConfig::new(10.0, 0);
        let reference = train_df_svm(
            &ds,
            DefuzzMethod::Mom,
            DEFAULT_RESOLUTION,
            &KernelSpec::Linear,
            &cfg,
        )
        .unwrap();
        for method in [DefuzzMethod::Cog, DefuzzMethod::Alc, DefuzzMethod::Val] {
            let other =
                train_df_svm(&ds, method, DEFAULT_RESOLUTION, &KernelSpec::Linear, &cfg).unwrap();
            assert_eq!(reference.per_class(), other.per_class());
        }
    }

    #[test]
    fn argmax_breaks_ties_toward_lowest_class() {
        assert_eq!(argmax_tie_lowest(&[0.2, 0.9, -1.0]), 1);
        assert_eq!(argmax_tie_lowest(&[0.5, 0.5]), 0);
        assert_eq!(argmax_tie_lowest(&[-1.0, 0.5, 0.5]), 1);
    }

    #[test]
    fn degenerate_class_produces_warning() {
        let schema = vec![ColumnSpec {
            name: "x".into(),
            kind: FeatureKind::Crisp,
        }];
        let instances = [(0.0, 0), (1.0, 1), (2.0, 1)]
            .iter()
            .map(|&(x, y)| {
                (
                    FuzzyVector::from_fuzzy(vec![FuzzyNumber::crisp(x).unwrap()]),
                    y,
                )
            })
            .collect();
        let ds = FuzzyDataset::new(schema, instances, 2).unwrap();
        let model = train_df_svm(
            &ds,
            DefuzzMethod::Val,
            DEFAULT_RESOLUTION,
            &KernelSpec::Linear,
            &SmoConfig::new(1.0, 0),
        )
        .unwrap();
        assert_eq!(model.warnings().len(), 1);
        assert!(model.warnings()[0].contains("class 0"));
    }

    #[test]
    fn model_kv_round_trip_preserves_predictions() {
        let model = toy_model();
        let doc = model.to_kv();
        let restored = SvmModel::from_kv(&KvDoc::parse(&doc.render()).unwrap()).unwrap();
        let fv = FuzzyVector::from_fuzzy(vec![FuzzyNumber::crisp(0.7).unwrap()]);
        assert_eq!(model.scores(&fv).unwrap(), restored.scores(&fv).unwrap());
        assert_eq!(model.per_class(), restored.per_class());
    }

    #[test]
    fn free_support_vectors_sit_on_the_margin() {
        let model = toy_model();
        let ds = toy_dataset();
        for class in 0..2 {
            let sub = &model.per_class()[class];
            let y = one_vs_rest_labels(model.training_labels(), class);
            for (i, &a) in sub.alpha.iter().enumerate() {
                if a > 1e-9 && a < model.c - 1e-9 {
                    let scores = model.scores(&ds.instances()[i].0).unwrap();
                    let margin = y[i] * scores[class];
                    assert!(margin >= -1e-6, "support vector margin {margin}");
                    assert!((margin - 1.0).abs() <= 1e-5);
                }
            }
        }
    }
}
