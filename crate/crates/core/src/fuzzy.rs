//! Fuzzy number value types: membership evaluation, alpha-cuts, and supports.
//!
//! A fuzzy number here is one of four parametric shapes:
//!
//! - triangular `(a1, b1, a2)` with `a1 <= b1 <= a2`, apex at `b1`;
//! - trapezoidal `(a1, b1, b2, a2)` with `a1 <= b1 <= b2 <= a2`, plateau on `[b1, b2]`;
//! - Gaussian `(c, delta)` with membership `exp(-(t-c)^2 / (2 delta^2))`;
//! - crisp `c`, the degenerate indicator at a single point.
//!
//! All values are immutable after construction and all operations are pure,
//! so they can be shared and evaluated concurrently without restriction.

use crate::error::{Error, Result};

/// Gaussian membership has unbounded support; `support()` truncates it at
/// this membership level so integral defuzzifiers have finite limits.
pub const GAUSSIAN_SUPPORT_ALPHA: f64 = 1e-6;

/// A closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::Domain(format!(
                "interval requires lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    /// True if `self` is contained in `other`, with slack for float rounding.
    pub fn subset_of(&self, other: &Interval, tol: f64) -> bool {
        other.lo - tol <= self.lo && self.hi <= other.hi + tol
    }
}

/// A fuzzy number, tagged by shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FuzzyNumber {
    Triangular { a1: f64, b1: f64, a2: f64 },
    Trapezoidal { a1: f64, b1: f64, b2: f64, a2: f64 },
    Gaussian { c: f64, delta: f64 },
    Crisp { c: f64 },
}

impl FuzzyNumber {
    /// Triangular fuzzy number `(a1, b1, a2)`. Ties are allowed, so degenerate
    /// shapes (all parameters equal) are legal values.
    pub fn triangular(a1: f64, b1: f64, a2: f64) -> Result<Self> {
        if !(a1 <= b1 && b1 <= a2) {
            return Err(Error::InvalidFuzzyNumber(format!(
                "triangular requires a1 <= b1 <= a2, got ({a1}, {b1}, {a2})"
            )));
        }
        Ok(Self::Triangular { a1, b1, a2 })
    }

    /// Trapezoidal fuzzy number `(a1, b1, b2, a2)`.
    pub fn trapezoidal(a1: f64, b1: f64, b2: f64, a2: f64) -> Result<Self> {
        if !(a1 <= b1 && b1 <= b2 && b2 <= a2) {
            return Err(Error::InvalidFuzzyNumber(format!(
                "trapezoidal requires a1 <= b1 <= b2 <= a2, got ({a1}, {b1}, {b2}, {a2})"
            )));
        }
        Ok(Self::Trapezoidal { a1, b1, b2, a2 })
    }

    /// Gaussian fuzzy number centered at `c` with spread `delta > 0`.
    pub fn gaussian(c: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !c.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidFuzzyNumber(format!(
                "gaussian requires finite c and delta > 0, got ({c}, {delta})"
            )));
        }
        Ok(Self::Gaussian { c, delta })
    }

    /// Crisp (degenerate) fuzzy number: membership 1 at `c`, 0 elsewhere.
    pub fn crisp(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidFuzzyNumber(format!(
                "crisp requires a finite value, got {c}"
            )));
        }
        Ok(Self::Crisp { c })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Triangular { .. } => "triangular",
            Self::Trapezoidal { .. } => "trapezoidal",
            Self::Gaussian { .. } => "gaussian",
            Self::Crisp { .. } => "crisp",
        }
    }

    /// Membership degree of `t`, always in `[0, 1]`. Total function.
    pub fn membership(&self, t: f64) -> f64 {
        match *self {
            Self::Triangular { a1, b1, a2 } => trapezoid_membership(t, a1, b1, b1, a2),
            Self::Trapezoidal { a1, b1, b2, a2 } => trapezoid_membership(t, a1, b1, b2, a2),
            Self::Gaussian { c, delta } => {
                let z = (t - c) / delta;
                (-0.5 * z * z).exp()
            }
            Self::Crisp { c } => {
                if t == c {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Alpha-cut `{t : membership(t) >= alpha}` as an interval, for `alpha` in `(0, 1]`.
    pub fn alpha_cut(&self, alpha: f64) -> Result<Interval> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "alpha-cut requires alpha in (0, 1], got {alpha}"
            )));
        }
        let (lo, hi) = match *self {
            Self::Triangular { a1, b1, a2 } => (a1 + alpha * (b1 - a1), a2 - alpha * (a2 - b1)),
            Self::Trapezoidal { a1, b1, b2, a2 } => {
                (a1 + alpha * (b1 - a1), a2 - alpha * (a2 - b2))
            }
            Self::Gaussian { c, delta } => {
                let half_width = delta * (-2.0 * alpha.ln()).sqrt();
                (c - half_width, c + half_width)
            }
            Self::Crisp { c } => (c, c),
        };
        // Guard against rounding re-ordering a degenerate cut.
        Ok(Interval {
            lo: lo.min(hi),
            hi: hi.max(lo),
        })
    }

    /// Support interval. Gaussian support is truncated at
    /// [`GAUSSIAN_SUPPORT_ALPHA`] so it stays finite.
    pub fn support(&self) -> Interval {
        match *self {
            Self::Triangular { a1, a2, .. } => Interval { lo: a1, hi: a2 },
            Self::Trapezoidal { a1, a2, .. } => Interval { lo: a1, hi: a2 },
            Self::Gaussian { .. } => self
                .alpha_cut(GAUSSIAN_SUPPORT_ALPHA)
                .expect("alpha in (0,1]"),
            Self::Crisp { c } => Interval { lo: c, hi: c },
        }
    }

    /// Shift the whole shape by `offset`.
    pub fn translate(&self, offset: f64) -> Self {
        match *self {
            Self::Triangular { a1, b1, a2 } => Self::Triangular {
                a1: a1 + offset,
                b1: b1 + offset,
                a2: a2 + offset,
            },
            Self::Trapezoidal { a1, b1, b2, a2 } => Self::Trapezoidal {
                a1: a1 + offset,
                b1: b1 + offset,
                b2: b2 + offset,
                a2: a2 + offset,
            },
            Self::Gaussian { c, delta } => Self::Gaussian {
                c: c + offset,
                delta,
            },
            Self::Crisp { c } => Self::Crisp { c: c + offset },
        }
    }

    /// Scale the shape about the origin by `factor > 0` (preserves parameter ordering).
    pub fn scale(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::Domain(format!(
                "scale requires factor > 0, got {factor}"
            )));
        }
        Ok(match *self {
            Self::Triangular { a1, b1, a2 } => Self::Triangular {
                a1: a1 * factor,
                b1: b1 * factor,
                a2: a2 * factor,
            },
            Self::Trapezoidal { a1, b1, b2, a2 } => Self::Trapezoidal {
                a1: a1 * factor,
                b1: b1 * factor,
                b2: b2 * factor,
                a2: a2 * factor,
            },
            Self::Gaussian { c, delta } => Self::Gaussian {
                c: c * factor,
                delta: delta * factor,
            },
            Self::Crisp { c } => Self::Crisp { c: c * factor },
        })
    }

    /// The shape's characterizing parameters, in canonical order.
    pub fn parameters(&self) -> Vec<f64> {
        match *self {
            Self::Triangular { a1, b1, a2 } => vec![a1, b1, a2],
            Self::Trapezoidal { a1, b1, b2, a2 } => vec![a1, b1, b2, a2],
            Self::Gaussian { c, delta } => vec![c, delta],
            Self::Crisp { c } => vec![c],
        }
    }
}

fn trapezoid_membership(t: f64, a1: f64, b1: f64, b2: f64, a2: f64) -> f64 {
    if t < a1 || t > a2 {
        0.0
    } else if t >= b1 && t <= b2 {
        1.0
    } else if t < b1 {
        // a1 <= t < b1 implies b1 > a1.
        (t - a1) / (b1 - a1)
    } else {
        // b2 < t <= a2 implies a2 > b2.
        (a2 - t) / (a2 - b2)
    }
}

/// One feature of an observation: either a fuzzy number or a raw interval
/// awaiting shape conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue {
    Fuzzy(FuzzyNumber),
    Interval(Interval),
}

impl FeatureValue {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Fuzzy(fz) => fz.kind_name(),
            Self::Interval(_) => "interval",
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match self {
            Self::Fuzzy(fz) => fz.parameters(),
            Self::Interval(iv) => vec![iv.lo(), iv.hi()],
        }
    }
}

impl From<FuzzyNumber> for FeatureValue {
    fn from(fz: FuzzyNumber) -> Self {
        Self::Fuzzy(fz)
    }
}

impl From<Interval> for FeatureValue {
    fn from(iv: Interval) -> Self {
        Self::Interval(iv)
    }
}

/// An ordered sequence of feature values; all vectors of one dataset share
/// the same length and per-position kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyVector(Vec<FeatureValue>);

impl FuzzyVector {
    pub fn new(features: Vec<FeatureValue>) -> Self {
        Self(features)
    }

    pub fn from_fuzzy(numbers: Vec<FuzzyNumber>) -> Self {
        Self(numbers.into_iter().map(FeatureValue::Fuzzy).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&FeatureValue> {
        self.0.get(index)
    }

    pub fn features(&self) -> &[FeatureValue] {
        &self.0
    }
}

impl std::ops::Index<usize> for FuzzyVector {
    type Output = FeatureValue;

    fn index(&self, index: usize) -> &FeatureValue {
        &self.0[index]
    }
}
