//! Scalar abstractions shared by every numeric module.
//!
//! Two traits split the work:
//!
//! - [`Real`] is a concrete floating-point type (`f32`, `f64`) that the
//!   integrators, linear algebra and bundle geometry are generic over.
//! - [`Scalar`] is anything an [`Expression`](crate::Expression) can be
//!   evaluated on: a `Real` itself or a (possibly nested) [`Dual`](crate::Dual)
//!   number over one. Nesting duals gives second derivatives.
//!
//! The pure coordinate maps in [`geometry`](crate::geometry) only need ring
//! operations and are generic over [`Coefficient`], which also admits exact
//! rationals.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Float, FloatConst, FromPrimitive, Num};

/// Ring-like element with negation. Enough for block permutations and
/// bilinear forms; implemented for floats, integers and `Ratio<_>`.
pub trait Coefficient: Copy + Num + Neg<Output = Self> + Debug {}

impl<T> Coefficient for T where T: Copy + Num + Neg<Output = T> + Debug {}

/// Value an expression can be evaluated on.
pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    /// Underlying real type carried in the primal slot.
    type Base: Real;

    fn from_base(c: Self::Base) -> Self;

    /// Primal part, stripping every derivative channel.
    fn base(&self) -> Self::Base;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, k: i32) -> Self;
    /// Power with a constant real exponent.
    fn powf_const(self, e: Self::Base) -> Self;

    /// Constant with every derivative channel zero.
    fn constant(c: f64) -> Self {
        Self::from_base(<Self::Base as FromPrimitive>::from_f64(c).expect("f64 is representable"))
    }
}

/// Concrete floating-point scalar for the numeric engine.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Literal conversion for constants appearing in algorithms.
    fn lit(c: f64) -> Self {
        <Self as FromPrimitive>::from_f64(c).expect("literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

impl<T: Real> Scalar for T {
    type Base = T;

    #[inline]
    fn from_base(c: T) -> Self {
        c
    }
    #[inline]
    fn base(&self) -> T {
        *self
    }
    #[inline]
    fn sin(self) -> Self {
        Float::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        Float::cos(self)
    }
    #[inline]
    fn tan(self) -> Self {
        Float::tan(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        Float::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        Float::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        Float::ln(self)
    }
    #[inline]
    fn powi(self, k: i32) -> Self {
        Float::powi(self, k)
    }
    #[inline]
    fn powf_const(self, e: T) -> Self {
        Float::powf(self, e)
    }
}

/// Euclidean norm of a slice.
pub fn norm<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, &a| acc + a * a).sqrt()
}

/// Max-norm of a slice (zero for an empty slice).
pub fn max_norm<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, &a| acc.max(a.abs()))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Euclidean norm of `a - b`.
pub fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}
