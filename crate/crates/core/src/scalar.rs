//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the distribution code is generic over (`f32` or `f64`).
///
/// The two constants encode precision-dependent limits: the magnitude at
/// which recurrence mantissas are renormalized, and the residual target for
/// the root solvers.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Mantissas above this trigger a block rescale of the running table.
    fn rescale_threshold() -> Self;

    /// Target for |residual| in the median-boundary solvers, before the
    /// `max(1, kλ)` scaling.
    fn solver_tolerance() -> Self;

    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Exact for every count this crate produces (below 2^53 for `f64`).
    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }
}

impl Scalar for f64 {
    #[inline]
    fn rescale_threshold() -> Self {
        1e250
    }

    #[inline]
    fn solver_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    #[inline]
    fn rescale_threshold() -> Self {
        1e30
    }

    #[inline]
    fn solver_tolerance() -> Self {
        1e-5
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }

    /// Multiplies the accumulated value (and its carry) by `factor`.
    #[inline]
    pub fn scale(&mut self, factor: T) {
        self.sum = self.sum * factor;
        self.carry = self.carry * factor;
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `ln(Σ exp(x_i))` without overflow. Returns `-inf` for an empty slice.
pub fn log_sum_exp<T: Scalar>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    let acc: CompensatedSum<T> = xs.iter().map(|&x| (x - max).exp()).collect();
    max + acc.value().ln()
}

/// `ln(n!)` by direct summation of logarithms; exact enough for n ≤ 10^5.
pub fn ln_factorial<T: Scalar>(n: u64) -> T {
    let acc: CompensatedSum<T> = (2..=n).map(|i| T::from_count(i).ln()).collect();
    acc.value()
}
