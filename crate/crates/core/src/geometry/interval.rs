use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::scalar::Scalar;

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self, GeometryError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(GeometryError::InvalidInterval {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(v: T) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn mid(&self) -> T {
        (self.lo + self.hi) / T::lit(2.0)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_value(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains(&self, other: &Interval<T>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Closed-interval intersection; touching endpoints give a point.
    pub fn intersect(&self, other: &Interval<T>) -> Option<Interval<T>> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval<T>) -> Interval<T> {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn widen(&self, eps: T) -> Interval<T> {
        Interval {
            lo: self.lo - eps,
            hi: self.hi + eps,
        }
    }

    pub fn neg(&self) -> Interval<T> {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn add(&self, other: &Interval<T>) -> Interval<T> {
        Interval {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    pub fn sub(&self, other: &Interval<T>) -> Interval<T> {
        Interval {
            lo: self.lo - other.hi,
            hi: self.hi - other.lo,
        }
    }

    /// Product via the min/max of the four endpoint products.
    pub fn mul(&self, other: &Interval<T>) -> Interval<T> {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = p.iter().copied().fold(T::infinity(), T::min);
        let hi = p.iter().copied().fold(T::neg_infinity(), T::max);
        Interval { lo, hi }
    }

    /// Quotient; fails when the divisor contains zero.
    pub fn div(&self, other: &Interval<T>) -> Result<Interval<T>, GeometryError> {
        if other.contains_value(T::zero()) {
            return Err(GeometryError::DivisionByZero);
        }
        let inv = Interval {
            lo: T::one() / other.hi,
            hi: T::one() / other.lo,
        };
        Ok(self.mul(&inv))
    }

    pub fn abs(&self) -> Interval<T> {
        if self.lo >= T::zero() {
            *self
        } else if self.hi <= T::zero() {
            self.neg()
        } else {
            Interval {
                lo: T::zero(),
                hi: (-self.lo).max(self.hi),
            }
        }
    }

    pub fn sqr(&self) -> Interval<T> {
        let a = self.abs();
        Interval {
            lo: a.lo * a.lo,
            hi: a.hi * a.hi,
        }
    }

    /// Square root of the nonnegative part.
    pub fn sqrt(&self) -> Interval<T> {
        Interval {
            lo: self.lo.max(T::zero()).sqrt(),
            hi: self.hi.max(T::zero()).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval<f64> {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn four_product_rule() {
        assert_eq!(iv(1.0, 2.0).mul(&iv(-1.0, 3.0)), iv(-2.0, 6.0));
        assert_eq!(iv(-2.0, -1.0).mul(&iv(-3.0, -2.0)), iv(2.0, 6.0));
    }

    #[test]
    fn division_rejects_zero_straddle() {
        assert!(iv(1.0, 2.0).div(&iv(-1.0, 1.0)).is_err());
        assert!(iv(1.0, 2.0).div(&iv(0.0, 1.0)).is_err());
        assert_eq!(iv(1.0, 2.0).div(&iv(2.0, 4.0)).unwrap(), iv(0.25, 1.0));
    }

    #[test]
    fn rejects_inverted() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn abs_and_sqr() {
        assert_eq!(iv(-3.0, 1.0).abs(), iv(0.0, 3.0));
        assert_eq!(iv(-3.0, 1.0).sqr(), iv(0.0, 9.0));
        assert_eq!(iv(-3.0, -1.0).sqr(), iv(1.0, 9.0));
    }

    #[test]
    fn works_in_single_precision() {
        let a = Interval::new(1.0f32, 2.0).unwrap();
        assert_eq!(a.sub(&a), Interval::new(-1.0f32, 1.0).unwrap());
    }
}
