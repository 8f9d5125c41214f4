//! Tropical and lexicographic ⟨Tropical, Tropical⟩ weights.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

/// Semiring operations shared by lattice weights.
pub trait Semiring: Copy + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(self, other: Self) -> Self;
    fn times(self, other: Self) -> Self;

    fn is_zero(self) -> bool {
        self == Self::zero()
    }
}

/// A cost in the (min, +) semiring. `+∞` is the additive identity.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct TropicalWeight(f64);

impl TropicalWeight {
    pub const INFINITY: TropicalWeight = TropicalWeight(f64::INFINITY);

    /// Panics on NaN.
    pub fn new(value: f64) -> Self {
        assert!(!value.is_nan(), "tropical weight cannot be NaN");
        TropicalWeight(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Semiring for TropicalWeight {
    fn zero() -> Self {
        TropicalWeight(f64::INFINITY)
    }

    fn one() -> Self {
        TropicalWeight(0.0)
    }

    fn plus(self, other: Self) -> Self {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    fn times(self, other: Self) -> Self {
        TropicalWeight(self.0 + other.0)
    }
}

impl From<f64> for TropicalWeight {
    fn from(v: f64) -> Self {
        TropicalWeight::new(v)
    }
}

impl Default for TropicalWeight {
    fn default() -> Self {
        Self::one()
    }
}

impl fmt::Display for TropicalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Pair weight ordered edit-first, then language-model cost.
///
/// The first component carries edit-distance costs and decides the winning
/// path; the second carries language-model scores along for the ride and
/// only breaks ties.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LexWeight {
    pub edit: TropicalWeight,
    pub lm: TropicalWeight,
}

impl LexWeight {
    pub fn new(edit: f64, lm: f64) -> Self {
        LexWeight {
            edit: TropicalWeight::new(edit),
            lm: TropicalWeight::new(lm),
        }
    }

    /// Lexicographic order on (edit, lm).
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.edit
            .total_cmp(&other.edit)
            .then_with(|| self.lm.total_cmp(&other.lm))
    }
}

impl Semiring for LexWeight {
    fn zero() -> Self {
        LexWeight {
            edit: TropicalWeight::zero(),
            lm: TropicalWeight::zero(),
        }
    }

    fn one() -> Self {
        LexWeight {
            edit: TropicalWeight::one(),
            lm: TropicalWeight::one(),
        }
    }

    fn plus(self, other: Self) -> Self {
        if other.lex_cmp(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }

    fn times(self, other: Self) -> Self {
        let w = LexWeight {
            edit: self.edit.times(other.edit),
            lm: self.lm.times(other.lm),
        };
        // Any infinite component means the path is dead; keep zero canonical
        // so that zero annihilates under times.
        if w.edit.is_finite() && w.lm.is_finite() {
            w
        } else {
            LexWeight::zero()
        }
    }

    fn is_zero(self) -> bool {
        !(self.edit.is_finite() && self.lm.is_finite())
    }
}

impl Add for LexWeight {
    type Output = LexWeight;
    fn add(self, rhs: Self) -> Self {
        self.plus(rhs)
    }
}

impl Mul for LexWeight {
    type Output = LexWeight;
    fn mul(self, rhs: Self) -> Self {
        self.times(rhs)
    }
}

impl fmt::Display for LexWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.edit, self.lm)
    }
}

/// Drop the edit dimension, keeping only the language-model cost.
pub fn project_lm(weight: LexWeight) -> TropicalWeight {
    weight.lm
}
