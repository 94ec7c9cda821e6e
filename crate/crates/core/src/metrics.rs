//! Evaluation metrics and the rank-sum comparison test.
//!
//! Multi-class AUC is macro one-vs-rest: per class, the Mann-Whitney AUC of
//! that class's score column with mid-ranks for ties, averaged over classes.
//! The Wilcoxon rank-sum p-value uses the normal approximation with tie and
//! continuity corrections; an exact enumeration oracle for small samples
//! lives in the test suite.

use crate::error::{Error, Result};
use crate::kv::KvDoc;

/// Fraction of exact matches.
pub fn accuracy(preds: &[usize], truths: &[usize]) -> Result<f64> {
    check_paired(preds, truths)?;
    let hits = preds.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truths.len() as f64)
}

fn check_paired(preds: &[usize], truths: &[usize]) -> Result<()> {
    if preds.len() != truths.len() {
        return Err(Error::InvalidInput(format!(
            "predictions ({}) and truths ({}) differ in length",
            preds.len(),
            truths.len()
        )));
    }
    if truths.is_empty() {
        return Err(Error::InvalidInput("empty evaluation set".into()));
    }
    Ok(())
}

/// Confusion matrix with rows indexed by truth, columns by prediction.
pub fn confusion_matrix(preds: &[usize], truths: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    check_paired(preds, truths)?;
    let mut matrix = vec![vec![0usize; k]; k];
    for (&p, &t) in preds.iter().zip(truths) {
        if p >= k || t >= k {
            return Err(Error::InvalidInput(format!(
                "label out of range: prediction {p}, truth {t}, k = {k}"
            )));
        }
        matrix[t][p] += 1;
    }
    Ok(matrix)
}

/// Per-class recall `TP / (TP + FN)`. Every class must appear in `truths`.
pub fn per_class_recall(preds: &[usize], truths: &[usize], k: usize) -> Result<Vec<f64>> {
    let matrix = confusion_matrix(preds, truths, k)?;
    matrix
        .iter()
        .enumerate()
        .map(|(class, row)| {
            let total: usize = row.iter().sum();
            if total == 0 {
                Err(Error::ClassAbsent(class))
            } else {
                Ok(row[class] as f64 / total as f64)
            }
        })
        .collect()
}

/// Mean of per-class recalls.
pub fn balanced_accuracy(preds: &[usize], truths: &[usize], k: usize) -> Result<f64> {
    let recalls = per_class_recall(preds, truths, k)?;
    Ok(recalls.iter().sum::<f64>() / k as f64)
}

/// 1-based mid-ranks of `values` (ties share the average of their positions).
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j, 1-based ranks i+1..=j+1
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// One-vs-rest AUC of `scores` where `positive[i]` flags the positive class,
/// via the rank-sum (Mann-Whitney) formulation with tie mid-ranks.
fn binary_auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidInput(
            "auc needs at least one positive and one negative".into(),
        ));
    }
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(positive)
        .filter(|(_, &p)| p)
        .map(|(r, _)| r)
        .sum();
    let n_pos = n_pos as f64;
    let n_neg = n_neg as f64;
    Ok((rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
}

/// Macro one-vs-rest AUC over the `m x k` score matrix.
pub fn macro_auc(scores: &[Vec<f64>], truths: &[usize]) -> Result<f64> {
    if scores.len() != truths.len() || scores.is_empty() {
        return Err(Error::InvalidInput(
            "scores and truths must be nonempty and equal-length".into(),
        ));
    }
    let k = scores[0].len();
    if k < 2 {
        return Err(Error::InvalidInput(
            "macro auc needs at least 2 classes".into(),
        ));
    }
    for (i, row) in scores.iter().enumerate() {
        if row.len() != k {
            return Err(Error::InvalidInput(format!(
                "score row {i} has {} entries, expected {k}",
                row.len()
            )));
        }
        if row.iter().any(|s| !s.is_finite()) {
            return Err(Error::Numeric(format!("non-finite score in row {i}")));
        }
    }
    let mut total = 0.0;
    for class in 0..k {
        let column: Vec<f64> = scores.iter().map(|row| row[class]).collect();
        let positive: Vec<bool> = truths.iter().map(|&t| t == class).collect();
        if !positive.iter().any(|&p| p) {
            return Err(Error::ClassAbsent(class));
        }
        total += binary_auc(&column, &positive)?;
    }
    Ok(total / k as f64)
}

/// Standard normal CDF via the Abramowitz-Stegun 7.1.26 erf approximation
/// (absolute error below 1.5e-7, ample for rank-test p-values).
fn normal_cdf(z: f64) -> f64 {
    let x = z / std::f64::consts::SQRT_2;
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736
                + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    let erf = sign * (1.0 - poly * (-x * x).exp());
    0.5 * (1.0 + erf)
}

/// Wilcoxon rank-sum test. Returns the rank-sum statistic of `sample_a` and
/// the two-sided p-value from the normal approximation with tie and
/// continuity corrections.
pub fn wilcoxon_rank_sum(sample_a: &[f64], sample_b: &[f64]) -> Result<(f64, f64)> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::InvalidInput("both samples must be nonempty".into()));
    }
    let n_a = sample_a.len() as f64;
    let n_b = sample_b.len() as f64;
    let n = n_a + n_b;

    let mut combined: Vec<f64> = Vec::with_capacity(sample_a.len() + sample_b.len());
    combined.extend_from_slice(sample_a);
    combined.extend_from_slice(sample_b);
    if combined.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite sample value".into()));
    }
    let ranks = midranks(&combined);
    let statistic: f64 = ranks[..sample_a.len()].iter().sum();

    // Tie counts for the variance correction.
    let mut sorted = combined.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }

    let mean = n_a * (n + 1.0) / 2.0;
    let variance = n_a * n_b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        // All observations tied: no evidence of a difference.
        return Ok((statistic, 1.0));
    }
    let diff = statistic - mean;
    let corrected = if diff.abs() <= 0.5 {
        0.0
    } else {
        diff - 0.5 * diff.signum()
    };
    let z = corrected / variance.sqrt();
    let p = (2.0 * (1.0 - normal_cdf(z.abs()))).clamp(f64::MIN_POSITIVE, 1.0);
    Ok((statistic, p))
}

/// Bundle of evaluation metrics for one prediction run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub macro_auc: Option<f64>,
    pub per_class_recall: Vec<f64>,
    /// Rows indexed by truth, columns by prediction.
    pub confusion: Vec<Vec<usize>>,
}

impl MetricsReport {
    /// Compute all metrics; AUC only when a score matrix is supplied.
    pub fn compute(
        preds: &[usize],
        truths: &[usize],
        scores: Option<&[Vec<f64>]>,
        k: usize,
    ) -> Result<Self> {
        let recalls = per_class_recall(preds, truths, k)?;
        Ok(Self {
            accuracy: accuracy(preds, truths)?,
            balanced_accuracy: recalls.iter().sum::<f64>() / k as f64,
            macro_auc: match scores {
                Some(s) => Some(macro_auc(s, truths)?),
                None => None,
            },
            per_class_recall: recalls,
            confusion: confusion_matrix(preds, truths, k)?,
        })
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new("metrics_report");
        let k = self.per_class_recall.len();
        doc.set("classes", k);
        doc.set("accuracy", self.accuracy);
        doc.set("balanced_accuracy", self.balanced_accuracy);
        if let Some(auc) = self.macro_auc {
            doc.set("macro_auc", auc);
        }
        doc.set_f64_list("per_class_recall", &self.per_class_recall);
        for (i, row) in self.confusion.iter().enumerate() {
            doc.set_usize_list(&format!("confusion_row_{i}"), row);
        }
        doc
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        doc.expect_type("metrics_report")?;
        let k = doc.get_usize("classes")?;
        let mut confusion = Vec::with_capacity(k);
        for i in 0..k {
            confusion.push(doc.get_usize_list(&format!("confusion_row_{i}"))?);
        }
        Ok(Self {
            accuracy: doc.get_f64("accuracy")?,
            balanced_accuracy: doc.get_f64("balanced_accuracy")?,
            macro_auc: if doc.contains("macro_auc") {
                Some(doc.get_f64("macro_auc")?)
            } else {
                None
            },
            per_class_recall: doc.get_f64_list("per_class_recall")?,
            confusion,
        })
    }

    /// Aligned console rendering.
    pub fn format_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<20} {:>10}\n", "metric", "value"));
        out.push_str(&format!("{:<20} {:>10.4}\n", "accuracy", self.accuracy));
        out.push_str(&format!(
            "{:<20} {:>10.4}\n",
            "balanced_accuracy", self.balanced_accuracy
        ));
        if let Some(auc) = self.macro_auc {
            out.push_str(&format!("{:<20} {:>10.4}\n", "macro_auc", auc));
        }
        for (i, r) in self.per_class_recall.iter().enumerate() {
            out.push_str(&format!("{:<20} {:>10.4}\n", format!("recall[{i}]"), r));
        }
        out.push_str("confusion (rows = truth):\n");
        for row in &self.confusion {
            let cells: Vec<String> = row.iter().map(|c| format!("{c:>6}")).collect();
            out.push_str(&format!("  {}\n", cells.join(" ")));
        }
        out
    }
}
