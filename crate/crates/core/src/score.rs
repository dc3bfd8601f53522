//! Negative log-probability arithmetic.
//!
//! A [`Score`] is `-ln(p)`. Probability zero maps to `+inf`, which acts as the
//! identity for [`score_add`] and as the absorbing element for [`Score::extend`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// `-ln(probability)`, stored in double precision.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Score(pub f64);

impl Score {
    pub const ZERO: Score = Score(0.0);
    pub const INFINITY: Score = Score(f64::INFINITY);

    pub fn from_prob(p: f64) -> Score {
        if p <= 0.0 {
            Score::INFINITY
        } else {
            Score(-p.ln())
        }
    }

    pub fn to_prob(self) -> f64 {
        (-self.0).exp()
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Probability product, i.e. score sum. `+inf` absorbs.
    pub fn extend(self, other: Score) -> Score {
        Score(add_costs(self.0, other.0))
    }

    /// Probability sum, see [`score_add`].
    pub fn log_add(self, other: Score) -> Score {
        Score(log_add(self.0, other.0))
    }

    /// Total order; scores never hold NaN.
    pub fn total_cmp(&self, other: &Score) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for Score {
    type Output = Score;

    fn add(self, rhs: Score) -> Score {
        self.extend(rhs)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// `-ln(e^{-a} + e^{-b})`.
pub fn score_add(a: Score, b: Score) -> Score {
    a.log_add(b)
}

/// Raw-float `-ln(e^{-a} + e^{-b})` with max-shifting. `+inf` is the identity.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi == f64::INFINITY {
        return lo;
    }
    lo - (-(hi - lo)).exp().ln_1p()
}

/// Score sum where an infinite operand stays infinite (no `inf - inf` NaN).
#[inline]
pub(crate) fn add_costs(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        f64::INFINITY
    } else {
        a + b
    }
}

/// Folds [`log_add`] over an iterator; empty input gives `+inf`.
pub fn log_sum<I: IntoIterator<Item = f64>>(scores: I) -> f64 {
    scores.into_iter().fold(f64::INFINITY, log_add)
}
