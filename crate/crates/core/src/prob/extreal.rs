use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

/// A value in the extended non-negative reals `[0, ∞]`.
///
/// `∞` is an exact value, never a large float, and is absorbing under `+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps a finite non-negative value.
    ///
    /// Panics on NaN, infinities or negative input; callers that accumulate
    /// rounding error should clamp first.
    pub fn finite(v: f64) -> Self {
        assert!(v.is_finite() && v >= 0.0, "ExtReal::finite({v})");
        ExtReal::Finite(v)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    /// The finite value, or `None` for `∞`.
    pub fn value(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// `f64` view with `∞` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    /// Multiplication by a non-negative weight with the convention `0·∞ = 0`.
    pub fn scale(self, w: f64) -> Self {
        debug_assert!(w >= 0.0);
        match self {
            _ if w == 0.0 => ExtReal::ZERO,
            ExtReal::Finite(v) => ExtReal::Finite(v * w),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    /// Absolute difference for law checks: `0` when both sides are `∞`,
    /// `∞` when exactly one side is.
    pub fn distance(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite((a - b).abs()),
            (ExtReal::Infinite, ExtReal::Infinite) => ExtReal::ZERO,
            _ => ExtReal::Infinite,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> Self {
        iter.fold(ExtReal::ZERO, Add::add)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl From<f64> for ExtReal {
    /// `f64::INFINITY` maps to `∞`; negative zero and finite values pass
    /// through [`ExtReal::finite`].
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::Infinite
        } else {
            ExtReal::finite(v)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => fmt::Display::fmt(v, f),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

/// Logarithm base for reported entropies. Everything is computed in nats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    E,
    Two,
}

impl LogBase {
    pub fn convert(self, nats: ExtReal) -> ExtReal {
        match (self, nats) {
            (LogBase::E, v) => v,
            (LogBase::Two, ExtReal::Finite(v)) => ExtReal::Finite(v / std::f64::consts::LN_2),
            (LogBase::Two, ExtReal::Infinite) => ExtReal::Infinite,
        }
    }
}
