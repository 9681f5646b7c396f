//! Scalar traits for exact integer linear algebra and polynomial rings.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact signed integers usable in Smith normal form.
///
/// Arithmetic goes through the checked operations so fixed-width types report
/// overflow instead of wrapping; arbitrary-precision types never fail.
pub trait IntegerScalar:
    Integer
    + Signed
    + Clone
    + Debug
    + Display
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
{
}

impl<T> IntegerScalar for T where
    T: Integer
        + Signed
        + Clone
        + Debug
        + Display
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
{
}

/// Commutative ring with unit: enough for polynomial and series arithmetic.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}
