//! Scalar abstraction over `f64` and a 256-bit binary float, so that the
//! closed-form density can be evaluated at either precision.

use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_base::{CubicRoot, SquareRoot};
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

/// Field operations plus the roots the closed form needs.
pub trait Real:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    /// Real (signed) cube root.
    fn cbrt(&self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::from_f64(1.0);
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn cbrt(&self) -> Self {
        f64::cbrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
}

/// Working precision of [`Wide`], in bits.
pub const WIDE_BITS: usize = 256;

/// Binary floating point number carrying [`WIDE_BITS`] bits of significand.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Wide(FBig<HalfEven, 2>);

impl Real for Wide {
    fn from_f64(v: f64) -> Self {
        let exact = FBig::<HalfEven, 2>::try_from(v).expect("finite input");
        Wide(exact.with_precision(WIDE_BITS).value())
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn sqrt(&self) -> Self {
        Wide(SquareRoot::sqrt(&self.0))
    }
    fn cbrt(&self) -> Self {
        if self.0 < FBig::<HalfEven, 2>::ZERO {
            Wide(-CubicRoot::cbrt(&-self.0.clone()))
        } else {
            Wide(CubicRoot::cbrt(&self.0))
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr for Wide {
            type Output = Wide;
            fn $method(self, rhs: Wide) -> Wide {
                Wide(self.0 $op rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);
forward_binop!(Div, div, /);

impl Neg for Wide {
    type Output = Wide;
    fn neg(self) -> Wide {
        Wide(-self.0)
    }
}
