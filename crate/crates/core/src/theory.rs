//! Computable counterparts of the generalization theory: a Monte Carlo
//! estimator of the empirical Rademacher complexity of the kernel hypothesis
//! class, and the matching closed-form bounds.
//!
//! For the class of kernel machines with per-class weight norms bounded by
//! `Lambda`, the supremum over hypotheses of the sign-correlation term has
//! the closed form `(Lambda / m) * sum_k sqrt(s_k' G s_k)` for a sign matrix
//! `s in {±1}^{m x K}` and Gram matrix `G` (Cauchy-Schwarz turns the inner
//! product with each weight vector into the norm of the signed feature sum).
//! The estimator averages that closed form over `T` independent sign draws.
//!
//! Draws derive independent seeds by index, so they can be evaluated in
//! parallel and still combine deterministically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::svm::Gram;
use crate::util::mean_sd;

/// Default number of Monte Carlo sign draws.
pub const DEFAULT_DRAWS: usize = 200;

/// Monte Carlo estimate of the empirical kernel Rademacher complexity.
#[derive(Debug, Clone, PartialEq)]
pub struct RademacherEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub draws: usize,
    pub lambda: f64,
    pub num_classes: usize,
    pub sample_size: usize,
}

/// Estimate the empirical Rademacher complexity of the kernel class with
/// per-class weight norm at most `lambda`, over `draws` sign draws.
///
/// `gram` must be symmetric positive semidefinite within `1e-8`; a sign
/// vector whose quadratic form falls below `-1e-8` is reported as a matrix
/// error.
pub fn empirical_kernel_rademacher(
    gram: &Gram,
    lambda: f64,
    num_classes: usize,
    draws: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if num_classes == 0 || draws == 0 {
        return Err(Error::Domain(
            "num_classes and draws must be at least 1".into(),
        ));
    }
    let m = gram.size();
    if m == 0 {
        return Err(Error::InvalidInput("empty gram matrix".into()));
    }
    let asym = gram.asymmetry();
    if asym > 1e-8 {
        return Err(Error::Matrix(format!(
            "gram matrix is not symmetric (max |G_ij - G_ji| = {asym:e})"
        )));
    }

    let values: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|draw| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(draw as u64 + 1);
            let mut total = 0.0;
            let mut signs = vec![0.0f64; m];
            for _ in 0..num_classes {
                for s in signs.iter_mut() {
                    *s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                }
                let quad = gram.quadratic_form(&signs);
                if quad < -1e-8 {
                    return Err(Error::Matrix(format!(
                        "gram matrix is not positive semidefinite (sign quadratic form {quad:e})"
                    )));
                }
                total += quad.max(0.0).sqrt();
            }
            Ok(lambda / m as f64 * total)
        })
        .collect::<Result<Vec<_>>>()?;

    let (mean, sd) = mean_sd(&values);
    Ok(RademacherEstimate {
        mean,
        std_error: sd / (draws as f64).sqrt(),
        draws,
        lambda,
        num_classes,
        sample_size: m,
    })
}

/// Closed-form complexity bound for the kernel class:
/// `K * sqrt(r^2 Lambda^2 / m)` where `r^2` bounds the kernel diagonal.
pub fn lemma1_bound(r: f64, lambda: f64, num_classes: usize, m: usize) -> Result<f64> {
    if !(r > 0.0) || !(lambda > 0.0) || m == 0 || num_classes == 0 {
        return Err(Error::Domain(format!(
            "bound needs r > 0, lambda > 0, K >= 1, m >= 1; got r={r}, lambda={lambda}, K={num_classes}, m={m}"
        )));
    }
    Ok(num_classes as f64 * (r * r * lambda * lambda / m as f64).sqrt())
}

/// Generalization-gap bound for kernel hypotheses with `l_lipschitz`-Lipschitz
/// losses bounded by `loss_bound`, at confidence `1 - delta`:
/// `2 K L sqrt(2 r^2 Lambda^2 / m) + C sqrt(2 ln(1/delta) / m)`.
#[allow(clippy::too_many_arguments)]
pub fn theorem3_gap_bound(
    num_classes: usize,
    l_lipschitz: f64,
    r: f64,
    lambda: f64,
    loss_bound: f64,
    delta: f64,
    m: usize,
) -> Result<f64> {
    if num_classes == 0
        || !(l_lipschitz > 0.0)
        || !(r > 0.0)
        || !(lambda > 0.0)
        || !(loss_bound > 0.0)
        || m == 0
    {
        return Err(Error::Domain(
            "bound needs positive K, L, r, lambda, C and m >= 1".into(),
        ));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let m = m as f64;
    let complexity_term =
        2.0 * num_classes as f64 * l_lipschitz * (2.0 * r * r * lambda * lambda / m).sqrt();
    let confidence_term = loss_bound * (2.0 * (1.0 / delta).ln() / m).sqrt();
    Ok(complexity_term + confidence_term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticConfig};
    use crate::defuzz::{DefuzzMethod, DEFAULT_RESOLUTION};
    use crate::svm::KernelSpec;

    #[test]
    fn single_point_gram_is_exact() {
        // One instance: sqrt(s^2 r^2) = r for either sign, so every draw
        // equals lambda * r.
        let r = 1.7;
        let gram = Gram::from_raw(vec![r * r], 1).unwrap();
        let est = empirical_kernel_rademacher(&gram, 2.0, 1, 25, 0).unwrap();
        assert!((est.mean - 2.0 * r).abs() < 1e-12);
        assert!(est.std_error < 1e-12);
    }

    #[test]
    fn identity_gram_is_exact() {
        // s' I s = m for every sign vector, so the estimate is
        // lambda * sqrt(m) / m with zero variance.
        let m = 36;
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            data[i * m + i] = 1.0;
        }
        let gram = Gram::from_raw(data, m).unwrap();
        let est = empirical_kernel_rademacher(&gram, 1.0, 1, 40, 9).unwrap();
        assert!((est.mean - 1.0 / (m as f64).sqrt()).abs() < 1e-12);
        assert!(est.std_error < 1e-12);
    }

    #[test]
    fn estimator_is_deterministic() {
        let gram = rbf_gram(60, 21);
        let a = empirical_kernel_rademacher(&gram, 1.0, 3, 50, 5).unwrap();
        let b = empirical_kernel_rademacher(&gram, 1.0, 3, 50, 5).unwrap();
        assert_eq!(a, b);
    }

    fn rbf_gram(m: usize, seed: u64) -> Gram {
        let mut cfg = SyntheticConfig::new(m, seed);
        cfg.num_features = 6;
        cfg.num_classes = 3;
        let ds = generate_synthetic(&cfg).unwrap();
        let xs = ds.defuzzify(DefuzzMethod::Val, DEFAULT_RESOLUTION).unwrap();
        Gram::build(&xs, &KernelSpec::rbf_default(6)).unwrap()
    }

    #[test]
    fn estimate_decreases_with_sample_size() {
        let small = empirical_kernel_rademacher(&rbf_gram(200, 2), 1.0, 1, 100, 3).unwrap();
        let large = empirical_kernel_rademacher(&rbf_gram(800, 2), 1.0, 1, 100, 3).unwrap();
        assert!(
            large.mean < small.mean,
            "m=800 estimate {} should be below m=200 estimate {}",
            large.mean,
            small.mean
        );
    }

    #[test]
    fn estimate_respects_lemma_bound() {
        let gram = rbf_gram(120, 8);
        let est = empirical_kernel_rademacher(&gram, 1.5, 3, 200, 1).unwrap();
        let r = gram.max_diagonal().sqrt();
        let bound = lemma1_bound(r, 1.5, 3, 120).unwrap();
        assert!(
            est.mean <= bound + 3.0 * est.std_error,
            "estimate {} exceeds bound {bound}",
            est.mean
        );
    }

    #[test]
    fn estimate_is_monotone_in_lambda_and_classes() {
        let gram = rbf_gram(80, 4);
        let base = empirical_kernel_rademacher(&gram, 1.0, 2, 100, 7).unwrap();
        let bigger_lambda = empirical_kernel_rademacher(&gram, 2.0, 2, 100, 7).unwrap();
        assert!(bigger_lambda.mean >= base.mean);
        let more_classes = empirical_kernel_rademacher(&gram, 1.0, 4, 100, 7).unwrap();
        assert!(more_classes.mean >= base.mean);
    }

    #[test]
    fn non_psd_gram_is_rejected() {
        // Symmetric but indefinite: eigenvalues 1 and -3.
        let gram = Gram::from_raw(vec![-1.0, 2.0, 2.0, -1.0], 2).unwrap();
        assert!(matches!(
            empirical_kernel_rademacher(&gram, 1.0, 1, 50, 0).unwrap_err(),
            Error::Matrix(_)
        ));
        // Asymmetric.
        let gram = Gram::from_raw(vec![1.0, 0.5, 0.0, 1.0], 2).unwrap();
        assert!(matches!(
            empirical_kernel_rademacher(&gram, 1.0, 1, 10, 0).unwrap_err(),
            Error::Matrix(_)
        ));
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_bound(1.0, 1.0, 1, 1).unwrap(), 1.0);
        assert_eq!(lemma1_bound(2.0, 3.0, 5, 100).unwrap(), 3.0);
        let base = lemma1_bound(1.3, 0.7, 4, 50).unwrap();
        let quadrupled = lemma1_bound(1.3, 0.7, 4, 200).unwrap();
        assert!((quadrupled - base / 2.0).abs() < 1e-12);
        assert!(lemma1_bound(-1.0, 1.0, 1, 1).is_err());
        assert!(lemma1_bound(1.0, 1.0, 1, 0).is_err());
    }

    #[test]
    fn theorem3_examples() {
        // delta = 1 kills the confidence term.
        let v = theorem3_gap_bound(2, 1.5, 1.0, 2.0, 3.0, 1.0, 64).unwrap();
        let expected = 2.0 * 2.0 * 1.5 * (2.0 * 4.0 / 64.0f64).sqrt();
        assert!((v - expected).abs() < 1e-12);

        // K=1, L=1, r=Lambda=1, C=1, delta=1/e, m=2 gives 2 + 1 = 3.
        let v = theorem3_gap_bound(1, 1.0, 1.0, 1.0, 1.0, (-1.0f64).exp(), 2).unwrap();
        assert!((v - 3.0).abs() < 1e-12);

        // Quadrupling m halves the whole bound.
        let a = theorem3_gap_bound(3, 2.0, 1.5, 1.0, 4.0, 0.05, 100).unwrap();
        let b = theorem3_gap_bound(3, 2.0, 1.5, 1.0, 4.0, 0.05, 400).unwrap();
        assert!((b - a / 2.0).abs() < 1e-12);

        assert!(theorem3_gap_bound(1, 1.0, 1.0, 1.0, 1.0, 0.0, 2).is_err());
        assert!(theorem3_gap_bound(1, 1.0, 1.0, 1.0, 1.0, 1.5, 2).is_err());
    }
}
