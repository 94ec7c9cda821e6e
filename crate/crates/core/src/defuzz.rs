//! Defuzzification: mapping a fuzzy number to a single representative real.
//!
//! Four general-purpose operators are provided, plus the two mean-style
//! reductions used by crisp baselines:
//!
//! - `MOM`  — mean of the maximizers of the membership function;
//! - `COG`  — centre of gravity, `∫ t·μ(t) dt / ∫ μ(t) dt` over the support;
//! - `ALC`  — average level cuts, `½ ∫₀¹ (L(α) + U(α)) dα`;
//! - `VAL`  — value, `∫₀¹ α (L(α) + U(α)) dα` (alpha-weighted midpoints);
//! - `M1`   — mean of the four trapezoid parameters `(a1 + b1 + b2 + a2) / 4`;
//! - `M2`   — interval midpoint `(lo + hi) / 2`.
//!
//! Closed forms are used wherever the shape admits one; the only quadrature
//! path in production is COG over a truncated Gaussian support. `resolution`
//! controls the number of quadrature levels on that path.

use crate::error::{Error, Result};
use crate::fuzzy::{FeatureValue, FuzzyNumber, FuzzyVector, Interval};

/// Default number of quadrature levels for integral defuzzifiers.
pub const DEFAULT_RESOLUTION: usize = 1001;

/// The available defuzzification methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefuzzMethod {
    Mom,
    Cog,
    Alc,
    Val,
    M1,
    M2,
}

impl DefuzzMethod {
    pub const ALL: [DefuzzMethod; 6] = [
        DefuzzMethod::Mom,
        DefuzzMethod::Cog,
        DefuzzMethod::Alc,
        DefuzzMethod::Val,
        DefuzzMethod::M1,
        DefuzzMethod::M2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Mom => "mom",
            Self::Cog => "cog",
            Self::Alc => "alc",
            Self::Val => "val",
            Self::M1 => "m1",
            Self::M2 => "m2",
        }
    }
}

impl std::fmt::Display for DefuzzMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DefuzzMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mom" => Ok(Self::Mom),
            "cog" => Ok(Self::Cog),
            "alc" => Ok(Self::Alc),
            "val" => Ok(Self::Val),
            "m1" => Ok(Self::M1),
            "m2" => Ok(Self::M2),
            other => Err(Error::Domain(format!(
                "unknown defuzzification method '{other}' (expected mom|cog|alc|val|m1|m2)"
            ))),
        }
    }
}

/// Mean of maxima: the average of the membership maximizers.
pub fn mom(fz: &FuzzyNumber) -> f64 {
    match *fz {
        FuzzyNumber::Triangular { b1, .. } => b1,
        FuzzyNumber::Trapezoidal { b1, b2, .. } => 0.5 * (b1 + b2),
        FuzzyNumber::Gaussian { c, .. } => c,
        FuzzyNumber::Crisp { c } => c,
    }
}

/// Centre of gravity over the support.
///
/// Triangular and trapezoidal shapes use the exact centroid; crisp is a fixed
/// point; Gaussian integrates over the truncated support with composite
/// trapezoid quadrature at `resolution` sample points.
pub fn cog(fz: &FuzzyNumber, resolution: usize) -> f64 {
    match *fz {
        FuzzyNumber::Triangular { a1, b1, a2 } => (a1 + b1 + a2) / 3.0,
        FuzzyNumber::Trapezoidal { a1, b1, b2, a2 } => {
            let denom = a2 + b2 - a1 - b1;
            if denom == 0.0 {
                // Ordering forces a1 = b1 = b2 = a2 here.
                b1
            } else {
                (a2 * a2 + b2 * b2 + a2 * b2 - a1 * a1 - b1 * b1 - a1 * b1) / (3.0 * denom)
            }
        }
        FuzzyNumber::Gaussian { .. } => cog_quadrature(fz, resolution),
        FuzzyNumber::Crisp { c } => c,
    }
}

/// Average level cuts: unweighted average of alpha-cut midpoints.
pub fn alc(fz: &FuzzyNumber, _resolution: usize) -> f64 {
    match *fz {
        FuzzyNumber::Triangular { a1, b1, a2 } => (a1 + 2.0 * b1 + a2) / 4.0,
        FuzzyNumber::Trapezoidal { a1, b1, b2, a2 } => (a1 + b1 + b2 + a2) / 4.0,
        // Symmetric cuts: L(alpha) + U(alpha) = 2c for every level.
        FuzzyNumber::Gaussian { c, .. } => c,
        FuzzyNumber::Crisp { c } => c,
    }
}

/// Value of a fuzzy number: alpha-weighted average of cut midpoints.
pub fn val(fz: &FuzzyNumber, _resolution: usize) -> f64 {
    match *fz {
        FuzzyNumber::Triangular { a1, b1, a2 } => (a1 + 4.0 * b1 + a2) / 6.0,
        FuzzyNumber::Trapezoidal { a1, b1, b2, a2 } => (a1 + 2.0 * b1 + 2.0 * b2 + a2) / 6.0,
        FuzzyNumber::Gaussian { c, .. } => c,
        FuzzyNumber::Crisp { c } => c,
    }
}

/// Mean of the four characterizing parameters of a trapezoidal shape.
///
/// Triangular input is treated as the degenerate trapezoid `b1 = b2`; crisp
/// input as all four parameters equal. Gaussian shapes are rejected.
pub fn m1(fz: &FuzzyNumber) -> Result<f64> {
    match *fz {
        FuzzyNumber::Triangular { a1, b1, a2 } => Ok((a1 + 2.0 * b1 + a2) / 4.0),
        FuzzyNumber::Trapezoidal { a1, b1, b2, a2 } => Ok((a1 + b1 + b2 + a2) / 4.0),
        FuzzyNumber::Gaussian { .. } => Err(Error::UnsupportedKind {
            method: "m1".into(),
            kind: "gaussian".into(),
            index: 0,
        }),
        FuzzyNumber::Crisp { c } => Ok(c),
    }
}

/// Interval midpoint.
pub fn m2(iv: &Interval) -> f64 {
    iv.midpoint()
}

/// Apply `method` to a single feature value.
pub fn defuzzify(feature: &FeatureValue, method: DefuzzMethod, resolution: usize) -> Result<f64> {
    match (feature, method) {
        (FeatureValue::Fuzzy(fz), DefuzzMethod::Mom) => Ok(mom(fz)),
        (FeatureValue::Fuzzy(fz), DefuzzMethod::Cog) => Ok(cog(fz, resolution)),
        (FeatureValue::Fuzzy(fz), DefuzzMethod::Alc) => Ok(alc(fz, resolution)),
        (FeatureValue::Fuzzy(fz), DefuzzMethod::Val) => Ok(val(fz, resolution)),
        (FeatureValue::Fuzzy(fz), DefuzzMethod::M1) => m1(fz),
        (FeatureValue::Interval(iv), DefuzzMethod::M2) => Ok(m2(iv)),
        (feature, method) => Err(Error::UnsupportedKind {
            method: method.as_str().into(),
            kind: feature.kind_name().into(),
            index: 0,
        }),
    }
}

/// Apply `method` componentwise to a feature vector. Errors carry the index
/// of the offending feature.
pub fn defuzzify_vector(
    fv: &FuzzyVector,
    method: DefuzzMethod,
    resolution: usize,
) -> Result<Vec<f64>> {
    fv.features()
        .iter()
        .enumerate()
        .map(|(index, feature)| {
            defuzzify(feature, method, resolution).map_err(|err| match err {
                Error::UnsupportedKind { method, kind, .. } => Error::UnsupportedKind {
                    method,
                    kind,
                    index,
                },
                other => other,
            })
        })
        .collect()
}

/// Composite trapezoid quadrature of `∫ t μ(t) dt / ∫ μ(t) dt` over the support.
fn cog_quadrature(fz: &FuzzyNumber, resolution: usize) -> f64 {
    let levels = resolution.max(2);
    let support = fz.support();
    let (lo, hi) = (support.lo(), support.hi());
    if hi == lo {
        return lo;
    }
    let h = (hi - lo) / (levels - 1) as f64;
    let mut weighted = 0.0;
    let mut mass = 0.0;
    for i in 0..levels {
        let t = lo + i as f64 * h;
        let mu = fz.membership(t);
        let w = if i == 0 || i == levels - 1 { 0.5 } else { 1.0 };
        weighted += w * t * mu;
        mass += w * mu;
    }
    // Valid shapes have strictly positive mass over a nondegenerate support.
    weighted / mass
}
