//! Quaternion algebras `(a, b)` over `Q`, recorded by their Brauer class.
//!
//! A class is kept as the pair of square classes; everything is read off
//! from local Hilbert symbols. Two classes are equal exactly when they
//! ramify at the same places, since the local invariants determine a class.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::SquareClass;
use crate::error::{Error, Result};
use crate::symbols::{hilbert_symbol, invariant, symbol_support, HalfInvariant, Place};

/// The class of the algebra with `i^2 = a`, `j^2 = b`, `ji = -ij`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuaternionClass {
    pub a: SquareClass,
    pub b: SquareClass,
}

impl QuaternionClass {
    pub fn new(a: SquareClass, b: SquareClass) -> QuaternionClass {
        QuaternionClass { a, b }
    }

    pub fn from_i64(a: i64, b: i64) -> Result<QuaternionClass> {
        Ok(QuaternionClass::new(SquareClass::from_i64(a)?, SquareClass::from_i64(b)?))
    }

    pub fn swapped(&self) -> QuaternionClass {
        QuaternionClass::new(self.b.clone(), self.a.clone())
    }

    pub fn symbol(&self, v: Place) -> i8 {
        hilbert_symbol(&self.a, &self.b, v)
    }

    pub fn invariant(&self, v: Place) -> HalfInvariant {
        invariant(&self.a, &self.b, v)
    }

    pub fn support(&self) -> Result<BTreeSet<Place>> {
        symbol_support(&self.a, &self.b)
    }

    /// `(a, b)(a, c) = (a, bc)`. Other products are not supported.
    pub fn multiply_same_slot(&self, other: &QuaternionClass) -> Result<QuaternionClass> {
        if self.a != other.a {
            return Err(Error::InvalidArgument(format!(
                "first slots differ ({} vs {}); only (a, b)(a, c) = (a, bc) is supported",
                self.a, other.a
            )));
        }
        Ok(QuaternionClass::new(self.a.clone(), self.b.mul(&other.b)))
    }

    pub fn is_locally_trivial(&self, v: Place) -> bool {
        self.symbol(v) == 1
    }

    /// Places where the class does not split. Always of even size.
    pub fn ramification_set(&self) -> Result<BTreeSet<Place>> {
        Ok(self.support()?.into_iter().filter(|v| !self.is_locally_trivial(*v)).collect())
    }

    /// Trivial in `Br Q` iff trivial at every place.
    pub fn is_globally_trivial(&self) -> Result<bool> {
        Ok(self.ramification_set()?.is_empty())
    }

    /// Same class in `Br Q`.
    pub fn same_class(&self, other: &QuaternionClass) -> Result<bool> {
        Ok(self.ramification_set()? == other.ramification_set()?)
    }
}

impl fmt::Display for QuaternionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}
