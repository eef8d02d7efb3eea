//! Scalar abstractions shared by the probability tables, the quadratic
//! bound solve, the statevector simulator and the semidefinite solvers.

use std::fmt::Debug;

use nalgebra::RealField;
use num_rational::Ratio;
use num_traits::{Num, Signed};

/// A number type probability tables can be written in.
///
/// Implemented for `f32`, `f64` and exact `Ratio<i64>`. Exact types use a
/// zero tolerance so every identity is checked with equality.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;

    /// Exact `num / den` for rationals, the nearest float otherwise.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Absolute tolerance for normalization and equality checks.
    fn tolerance() -> Self;

    fn approx_eq(&self, other: &Self, tol: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= *tol
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn from_i64(v: i64) -> Self {
        v as f32
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for Ratio<i64> {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }
}

/// Floating point scalars usable by the linear-algebra heavy code paths.
pub trait Real: Scalar + RealField + Copy {
    /// Nearest value to an `f64` literal.
    fn cast(v: f64) -> Self;
}

impl Real for f64 {
    fn cast(v: f64) -> Self {
        v
    }
}

impl Real for f32 {
    fn cast(v: f64) -> Self {
        v as f32
    }
}

/// Larger root of `a·s² + b·s + c = 0`, or `None` when the roots are complex
/// or `a` vanishes.
pub fn larger_quadratic_root<T: Real>(a: T, b: T, c: T) -> Option<T> {
    if a == T::zero() {
        return None;
    }
    let two = T::cast(2.0);
    let four = T::cast(4.0);
    let disc = b * b - four * a * c;
    if disc < T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    // q has the sign of -b so the subtraction below never cancels.
    let q = if b >= T::zero() { -(b + sq) / two } else { (sq - b) / two };
    let r1 = q / a;
    let r2 = if q == T::zero() { T::zero() } else { c / q };
    Some(if r1 > r2 { r1 } else { r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_root_matches_direct_formula() {
        // s² - 3s + 2 = (s-1)(s-2)
        assert_eq!(larger_quadratic_root(1.0_f64, -3.0, 2.0), Some(2.0));
        assert_eq!(larger_quadratic_root(1.0_f64, 0.0, 1.0), None);
        assert_eq!(larger_quadratic_root(0.0_f64, 1.0, 1.0), None);
        let r = larger_quadratic_root(2.0_f32, -8.0, 4.0).unwrap();
        assert!((r - (2.0 + 2f32.sqrt())).abs() < 1e-5);
    }

    #[test]
    fn rational_tolerance_is_exact() {
        let a = Ratio::<i64>::from_ratio(1, 3);
        let b = Ratio::<i64>::from_ratio(2, 6);
        assert!(a.approx_eq(&b, &Ratio::tolerance()));
        assert!(!a.approx_eq(&Ratio::from_ratio(1, 4), &Ratio::tolerance()));
        assert_eq!(a.to_f64(), 1.0 / 3.0);
    }
}
