//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point types the solvers and norms are generic over (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`, rounding when `Self` is narrower.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }

    /// Relative size of a unit roundoff, used when deriving default tolerances.
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise (tree) summation of `term(i)` for `i in 0..len`.
///
/// The reduction order depends only on `len`, so sums are reproducible
/// bit-for-bit and the rounding error grows like `log(len)`.
pub fn pairwise_sum<T: Real>(len: usize, term: &impl Fn(usize) -> T) -> T {
    fn rec<T: Real>(lo: usize, hi: usize, term: &impl Fn(usize) -> T) -> T {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut acc = T::zero();
            for i in lo..hi {
                acc += term(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, term) + rec(mid, hi, term)
        }
    }
    rec(0, len, term)
}

/// Pairwise sum of a slice.
pub fn pairwise_sum_slice<T: Real>(xs: &[T]) -> T {
    pairwise_sum(xs.len(), &|i| xs[i])
}

/// Euclidean inner product with pairwise reduction.
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    pairwise_sum(a.len(), &|i| a[i] * b[i])
}
