//! Dataset model and preprocessing: synthetic generation, interval-to-fuzzy
//! conversion, SMOTE-style oversampling, and train/validation/test splitting.
//!
//! All operations are deterministic given an explicit seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::defuzz::{self, DefuzzMethod, DEFAULT_RESOLUTION};
use crate::error::{Error, Result};
use crate::fuzzy::{FeatureValue, FuzzyNumber, FuzzyVector, Interval};

/// The shape stored in one dataset column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Triangular,
    Trapezoidal,
    Gaussian,
    Crisp,
    Interval,
}

impl FeatureKind {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Triangular => "tri",
            Self::Trapezoidal => "trap",
            Self::Gaussian => "gauss",
            Self::Crisp => "crisp",
            Self::Interval => "interval",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "tri" => Some(Self::Triangular),
            "trap" => Some(Self::Trapezoidal),
            "gauss" => Some(Self::Gaussian),
            "crisp" => Some(Self::Crisp),
            "interval" => Some(Self::Interval),
            _ => None,
        }
    }

    /// Number of numeric cells one value of this kind expands to in a CSV row.
    pub fn cell_count(&self) -> usize {
        match self {
            Self::Triangular => 3,
            Self::Trapezoidal => 4,
            Self::Gaussian => 2,
            Self::Crisp => 1,
            Self::Interval => 2,
        }
    }

    pub fn matches(&self, value: &FeatureValue) -> bool {
        matches!(
            (self, value),
            (
                Self::Triangular,
                FeatureValue::Fuzzy(FuzzyNumber::Triangular { .. })
            ) | (
                Self::Trapezoidal,
                FeatureValue::Fuzzy(FuzzyNumber::Trapezoidal { .. })
            ) | (
                Self::Gaussian,
                FeatureValue::Fuzzy(FuzzyNumber::Gaussian { .. })
            ) | (Self::Crisp, FeatureValue::Fuzzy(FuzzyNumber::Crisp { .. }))
                | (Self::Interval, FeatureValue::Interval(_))
        )
    }
}

/// Name and kind of one feature column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: FeatureKind,
}

/// A labeled dataset of fuzzy-feature observations.
///
/// Invariants enforced at construction: every instance matches the schema,
/// every label is below the class count.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyDataset {
    schema: Vec<ColumnSpec>,
    instances: Vec<(FuzzyVector, usize)>,
    num_classes: usize,
}

impl FuzzyDataset {
    pub fn new(
        schema: Vec<ColumnSpec>,
        instances: Vec<(FuzzyVector, usize)>,
        num_classes: usize,
    ) -> Result<Self> {
        for (i, (fv, label)) in instances.iter().enumerate() {
            if fv.len() != schema.len() {
                return Err(Error::SchemaMismatch(format!(
                    "instance {i} has {} features, schema has {}",
                    fv.len(),
                    schema.len()
                )));
            }
            for (j, feature) in fv.features().iter().enumerate() {
                if !schema[j].kind.matches(feature) {
                    return Err(Error::SchemaMismatch(format!(
                        "instance {i}, feature {j}: expected {}, got {}",
                        schema[j].kind.tag(),
                        feature.kind_name()
                    )));
                }
            }
            if *label >= num_classes {
                return Err(Error::SchemaMismatch(format!(
                    "instance {i} has label {label}, class count is {num_classes}"
                )));
            }
        }
        Ok(Self {
            schema,
            instances,
            num_classes,
        })
    }

    pub fn schema(&self) -> &[ColumnSpec] {
        &self.schema
    }

    /// Number of instances.
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Number of features per instance.
    pub fn num_features(&self) -> usize {
        self.schema.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn instances(&self) -> &[(FuzzyVector, usize)] {
        &self.instances
    }

    pub fn labels(&self) -> Vec<usize> {
        self.instances.iter().map(|(_, y)| *y).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes];
        for (_, y) in &self.instances {
            counts[*y] += 1;
        }
        counts
    }

    /// Defuzzify every instance with `method`, preserving order.
    pub fn defuzzify(&self, method: DefuzzMethod, resolution: usize) -> Result<Vec<Vec<f64>>> {
        self.instances
            .iter()
            .map(|(fv, _)| defuzz::defuzzify_vector(fv, method, resolution))
            .collect()
    }

    /// Dataset restricted to `indices`, in the given order. Class count is
    /// inherited so partitions of a K-class problem stay K-class.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            num_classes: self.num_classes,
        }
    }
}

/// Configuration for the synthetic fuzzy-feature generator.
///
/// True per-class values are drawn from Gaussians around uniformly placed
/// class centers; each value is then wrapped into a triangular observation
/// `(x - a, x + b, x + c)` with `a ~ U[1.5, 3]`, `b ~ U[-0.5, 0.5]`,
/// `c ~ U[2, 4]`.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub n: usize,
    pub num_features: usize,
    pub num_classes: usize,
    pub seed: u64,
    /// Class centers have coordinates drawn from `U[0, class_center_spread]`.
    pub class_center_spread: f64,
    /// Standard deviation of true values around their class center.
    pub within_class_sigma: f64,
}

impl SyntheticConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            num_features: 20,
            num_classes: 5,
            seed,
            class_center_spread: 10.0,
            within_class_sigma: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.num_features == 0 {
            return Err(Error::Domain(
                "synthetic generation needs at least one class and one feature".into(),
            ));
        }
        if self.n < self.num_classes {
            return Err(Error::Domain(format!(
                "n = {} is smaller than the class count {}",
                self.n, self.num_classes
            )));
        }
        if !(self.class_center_spread > 0.0) || !(self.within_class_sigma >= 0.0) {
            return Err(Error::Domain(
                "class_center_spread must be > 0 and within_class_sigma >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Generate a synthetic dataset of triangular observations around hidden
/// per-class true values. Deterministic given the seed; instances are split
/// as evenly as possible across classes.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<FuzzyDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let centers: Vec<Vec<f64>> = (0..cfg.num_classes)
        .map(|_| {
            (0..cfg.num_features)
                .map(|_| rng.gen_range(0.0..cfg.class_center_spread))
                .collect()
        })
        .collect();

    let noise = Normal::new(0.0, cfg.within_class_sigma)
        .map_err(|e| Error::Domain(format!("invalid within-class sigma: {e}")))?;

    let mut instances = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let class = i % cfg.num_classes;
        let mut features = Vec::with_capacity(cfg.num_features);
        for j in 0..cfg.num_features {
            let x = centers[class][j] + noise.sample(&mut rng);
            let a = rng.gen_range(1.5..3.0);
            let b = rng.gen_range(-0.5..0.5);
            let c = rng.gen_range(2.0..4.0);
            // a > b and c > b always, so the ordering constraint holds.
            let fz = FuzzyNumber::triangular(x - a, x + b, x + c)?;
            features.push(FeatureValue::Fuzzy(fz));
        }
        instances.push((FuzzyVector::new(features), class));
    }

    let schema = (0..cfg.num_features)
        .map(|j| ColumnSpec {
            name: format!("f{}", j + 1),
            kind: FeatureKind::Triangular,
        })
        .collect();
    FuzzyDataset::new(schema, instances, cfg.num_classes)
}

/// Map an interval `[A, B]` to the triangular fuzzy number
/// `(A, beta*A + (1-beta)*B, B)`. The apex moves linearly from `B` at
/// `beta = 0` to `A` at `beta = 1`.
pub fn interval_to_fuzzy(iv: &Interval, beta: f64) -> Result<FuzzyNumber> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    let apex = (beta * iv.lo() + (1.0 - beta) * iv.hi()).clamp(iv.lo(), iv.hi());
    FuzzyNumber::triangular(iv.lo(), apex, iv.hi())
}

/// Convert every interval column of `ds` to a triangular column using the
/// shape parameter `beta`. Non-interval columns pass through unchanged.
pub fn convert_intervals(ds: &FuzzyDataset, beta: f64) -> Result<FuzzyDataset> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    let schema: Vec<ColumnSpec> = ds
        .schema()
        .iter()
        .map(|col| ColumnSpec {
            name: col.name.clone(),
            kind: if col.kind == FeatureKind::Interval {
                FeatureKind::Triangular
            } else {
                col.kind
            },
        })
        .collect();
    let instances = ds
        .instances()
        .iter()
        .map(|(fv, y)| {
            let features = fv
                .features()
                .iter()
                .map(|feature| match feature {
                    FeatureValue::Interval(iv) => {
                        interval_to_fuzzy(iv, beta).map(FeatureValue::Fuzzy)
                    }
                    other => Ok(*other),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((FuzzyVector::new(features), *y))
        })
        .collect::<Result<Vec<_>>>()?;
    FuzzyDataset::new(schema, instances, ds.num_classes())
}

/// Numeric profile used for neighbor distances during oversampling: VAL for
/// fuzzy features, midpoint for interval features.
fn distance_profile(fv: &FuzzyVector) -> Vec<f64> {
    fv.features()
        .iter()
        .map(|feature| match feature {
            FeatureValue::Fuzzy(fz) => defuzz::val(fz, DEFAULT_RESOLUTION),
            FeatureValue::Interval(iv) => iv.midpoint(),
        })
        .collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn interpolate_features(u: &FuzzyVector, v: &FuzzyVector, lambda: f64) -> Result<FuzzyVector> {
    let features = u
        .features()
        .iter()
        .zip(v.features())
        .map(|(fu, fv)| {
            let mix = |a: f64, b: f64| -> f64 { lambda * a + (1.0 - lambda) * b };
            match (fu, fv) {
                (
                    FeatureValue::Fuzzy(FuzzyNumber::Triangular { a1, b1, a2 }),
                    FeatureValue::Fuzzy(FuzzyNumber::Triangular {
                        a1: c1,
                        b1: d1,
                        a2: c2,
                    }),
                ) => FuzzyNumber::triangular(mix(*a1, *c1), mix(*b1, *d1), mix(*a2, *c2))
                    .map(FeatureValue::Fuzzy),
                (
                    FeatureValue::Fuzzy(FuzzyNumber::Trapezoidal { a1, b1, b2, a2 }),
                    FeatureValue::Fuzzy(FuzzyNumber::Trapezoidal {
                        a1: c1,
                        b1: d1,
                        b2: d2,
                        a2: c2,
                    }),
                ) => FuzzyNumber::trapezoidal(
                    mix(*a1, *c1),
                    mix(*b1, *d1),
                    mix(*b2, *d2),
                    mix(*a2, *c2),
                )
                .map(FeatureValue::Fuzzy),
                (
                    FeatureValue::Fuzzy(FuzzyNumber::Gaussian { c, delta }),
                    FeatureValue::Fuzzy(FuzzyNumber::Gaussian {
                        c: c2,
                        delta: delta2,
                    }),
                ) => FuzzyNumber::gaussian(mix(*c, *c2), mix(*delta, *delta2))
                    .map(FeatureValue::Fuzzy),
                (
                    FeatureValue::Fuzzy(FuzzyNumber::Crisp { c }),
                    FeatureValue::Fuzzy(FuzzyNumber::Crisp { c: c2 }),
                ) => FuzzyNumber::crisp(mix(*c, *c2)).map(FeatureValue::Fuzzy),
                (FeatureValue::Interval(a), FeatureValue::Interval(b)) => {
                    Interval::new(mix(a.lo(), b.lo()), mix(a.hi(), b.hi()))
                        .map(FeatureValue::Interval)
                }
                _ => Err(Error::SchemaMismatch(
                    "cannot interpolate features of different kinds".into(),
                )),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FuzzyVector::new(features))
}

/// SMOTE-style oversampling: bring every class up to at least
/// `target_per_class` instances by interpolating the parameter tuples of
/// same-class neighbor pairs. Originals are preserved; synthetic instances
/// are appended grouped by class.
pub fn smote_oversample(
    ds: &FuzzyDataset,
    target_per_class: usize,
    k_neighbors: usize,
    seed: u64,
) -> Result<FuzzyDataset> {
    if k_neighbors == 0 {
        return Err(Error::Domain("k_neighbors must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes()];
    for (i, (_, y)) in ds.instances().iter().enumerate() {
        by_class[*y].push(i);
    }

    let profiles: Vec<Vec<f64>> = ds
        .instances()
        .iter()
        .map(|(fv, _)| distance_profile(fv))
        .collect();

    let mut instances = ds.instances().to_vec();
    for (class, members) in by_class.iter().enumerate() {
        let count = members.len();
        if count >= target_per_class {
            continue;
        }
        if count < 2 {
            return Err(Error::CannotInterpolate { class, count });
        }
        // k nearest same-class neighbors of each member, by VAL-profile
        // distance, ties broken by index.
        let k = k_neighbors.min(count - 1);
        let neighbors: Vec<Vec<usize>> = members
            .iter()
            .map(|&u| {
                let mut others: Vec<(f64, usize)> = members
                    .iter()
                    .filter(|&&v| v != u)
                    .map(|&v| (squared_distance(&profiles[u], &profiles[v]), v))
                    .collect();
                others.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
                others.into_iter().take(k).map(|(_, v)| v).collect()
            })
            .collect();

        for _ in 0..target_per_class - count {
            let u_pos = rng.gen_range(0..count);
            let u = members[u_pos];
            let v = neighbors[u_pos][rng.gen_range(0..k)];
            let lambda: f64 = rng.gen();
            let fv = interpolate_features(&instances[u].0, &instances[v].0, lambda)?;
            instances.push((fv, class));
        }
    }
    FuzzyDataset::new(ds.schema().to_vec(), instances, ds.num_classes())
}

/// Fractions and seed for a random three-way split.
#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64, seed: u64) -> Result<Self> {
        if !(train > 0.0 && val > 0.0 && test > 0.0) {
            return Err(Error::Domain("all split fractions must be positive".into()));
        }
        if (train + val + test - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "split fractions must sum to 1, got {}",
                train + val + test
            )));
        }
        Ok(Self {
            train,
            val,
            test,
            seed,
        })
    }

    /// The standard 60/20/20 protocol.
    pub fn standard(seed: u64) -> Self {
        Self {
            train: 0.6,
            val: 0.2,
            test: 0.2,
            seed,
        }
    }
}

/// Randomly partition `ds` into train/validation/test. Sizes are the rounded
/// fractions of `m`, with any rounding remainder assigned to train.
pub fn split(
    ds: &FuzzyDataset,
    spec: &SplitSpec,
) -> Result<(FuzzyDataset, FuzzyDataset, FuzzyDataset)> {
    let m = ds.len();
    if m < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 instances to split, got {m}"
        )));
    }
    let mut n_train = (m as f64 * spec.train).round() as i64;
    let n_val = (m as f64 * spec.val).round() as i64;
    let n_test = (m as f64 * spec.test).round() as i64;
    n_train += m as i64 - (n_train + n_val + n_test);
    if n_train < 1 || n_val < 1 || n_test < 1 {
        return Err(Error::EmptyPartition(format!(
            "sizes ({n_train}, {n_val}, {n_test}) for m = {m}"
        )));
    }
    let (n_train, n_val) = (n_train as usize, n_val as usize);

    let mut indices: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    indices.shuffle(&mut rng);

    let train = ds.subset(&indices[..n_train]);
    let val = ds.subset(&indices[n_train..n_train + n_val]);
    let test = ds.subset(&indices[n_train + n_val..]);
    Ok((train, val, test))
}
