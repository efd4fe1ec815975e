//! Interval arithmetic and axis-aligned box operations.
//!
//! Boxes are closed: two boxes that touch at a face intersect in a degenerate
//! box, and a box with `lo == hi` in every dimension is a point. No outward
//! rounding is performed.

mod interval;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
pub use interval::Interval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("negative bloat {0} in dimension {1}")]
    NegativeBloat(f64, usize),
    #[error("a box needs at least one dimension")]
    Empty,
    #[error("interval division by a divisor containing zero")]
    DivisionByZero,
}

/// Axis-aligned box, one closed interval per state dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperRect<T> {
    dims: Vec<Interval<T>>,
}

impl<T: Scalar> HyperRect<T> {
    pub fn new(dims: Vec<Interval<T>>) -> Result<Self, GeometryError> {
        if dims.is_empty() {
            return Err(GeometryError::Empty);
        }
        for d in &dims {
            Interval::new(d.lo, d.hi)?;
        }
        Ok(HyperRect { dims })
    }

    pub fn from_bounds(lo: &[T], hi: &[T]) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return Err(GeometryError::DimensionMismatch {
                left: lo.len(),
                right: hi.len(),
            });
        }
        let dims = lo
            .iter()
            .zip(hi)
            .map(|(&l, &h)| Interval::new(l, h))
            .collect::<Result<Vec<_>, _>>()?;
        HyperRect::new(dims)
    }

    pub fn point(p: &[T]) -> Result<Self, GeometryError> {
        HyperRect::from_bounds(p, p)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[Interval<T>] {
        &self.dims
    }

    pub fn get(&self, i: usize) -> Interval<T> {
        self.dims[i]
    }

    pub fn set(&mut self, i: usize, iv: Interval<T>) {
        self.dims[i] = iv;
    }

    pub fn lo(&self) -> Vec<T> {
        self.dims.iter().map(|d| d.lo).collect()
    }

    pub fn hi(&self) -> Vec<T> {
        self.dims.iter().map(|d| d.hi).collect()
    }

    pub fn center(&self) -> Vec<T> {
        self.dims.iter().map(Interval::mid).collect()
    }

    pub fn widths(&self) -> Vec<T> {
        self.dims.iter().map(Interval::width).collect()
    }

    pub fn is_point(&self) -> bool {
        self.dims.iter().all(Interval::is_point)
    }

    pub fn contains_point(&self, p: &[T]) -> bool {
        p.len() == self.dim() && self.dims.iter().zip(p).all(|(d, &v)| d.contains_value(v))
    }

    fn check_dim(&self, other: &HyperRect<T>) -> Result<(), GeometryError> {
        if self.dim() != other.dim() {
            return Err(GeometryError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// `inner ⊆ self`, checked per dimension.
    pub fn contains(&self, inner: &HyperRect<T>) -> Result<bool, GeometryError> {
        self.check_dim(inner)?;
        Ok(self.dims.iter().zip(&inner.dims).all(|(o, i)| o.contains(i)))
    }

    /// Intersection box, `None` when some dimension is disjoint.
    pub fn intersect(&self, other: &HyperRect<T>) -> Result<Option<HyperRect<T>>, GeometryError> {
        self.check_dim(other)?;
        let mut dims = Vec::with_capacity(self.dim());
        for (a, b) in self.dims.iter().zip(&other.dims) {
            match a.intersect(b) {
                Some(iv) => dims.push(iv),
                None => return Ok(None),
            }
        }
        Ok(Some(HyperRect { dims }))
    }

    pub fn hull(&self, other: &HyperRect<T>) -> Result<HyperRect<T>, GeometryError> {
        self.check_dim(other)?;
        Ok(HyperRect {
            dims: self.dims.iter().zip(&other.dims).map(|(a, b)| a.hull(b)).collect(),
        })
    }

    /// Widen dimension `i` by `±eps[i]`.
    pub fn bloat(&self, eps: &[T]) -> Result<HyperRect<T>, GeometryError> {
        if eps.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                left: self.dim(),
                right: eps.len(),
            });
        }
        let mut dims = Vec::with_capacity(self.dim());
        for (i, (d, &e)) in self.dims.iter().zip(eps).enumerate() {
            if e.is_nan() || e < T::zero() {
                return Err(GeometryError::NegativeBloat(e.to_f64().unwrap_or(f64::NAN), i));
            }
            dims.push(d.widen(e));
        }
        Ok(HyperRect { dims })
    }

    /// Smallest box containing all points; `None` for an empty iterator.
    pub fn bounding<'a, I>(points: I) -> Option<HyperRect<T>>
    where
        I: IntoIterator<Item = &'a [T]>,
    {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut dims: Vec<Interval<T>> = first.iter().map(|&v| Interval::point(v)).collect();
        for p in it {
            for (d, &v) in dims.iter_mut().zip(p) {
                d.lo = d.lo.min(v);
                d.hi = d.hi.max(v);
            }
        }
        (!dims.is_empty()).then_some(HyperRect { dims })
    }

    pub fn is_finite(&self) -> bool {
        self.dims.iter().all(|d| d.lo.is_finite() && d.hi.is_finite())
    }
}

/// Box valid over the time window `[t_lo, t_hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedRect<T> {
    pub t_lo: T,
    pub t_hi: T,
    pub rect: HyperRect<T>,
}

impl<T: Scalar> TimedRect<T> {
    pub fn new(t_lo: T, t_hi: T, rect: HyperRect<T>) -> Result<Self, GeometryError> {
        if !(t_lo >= T::zero() && t_lo <= t_hi) {
            return Err(GeometryError::InvalidInterval {
                lo: t_lo.to_f64().unwrap_or(f64::NAN),
                hi: t_hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(TimedRect { t_lo, t_hi, rect })
    }

    pub fn covers_time(&self, t: T) -> bool {
        self.t_lo <= t && t <= self.t_hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(b: &[(f64, f64)]) -> HyperRect<f64> {
        let lo: Vec<f64> = b.iter().map(|x| x.0).collect();
        let hi: Vec<f64> = b.iter().map(|x| x.1).collect();
        HyperRect::from_bounds(&lo, &hi).unwrap()
    }

    #[test]
    fn contains_examples() {
        assert!(r(&[(0.0, 2.0)]).contains(&r(&[(0.0, 2.0)])).unwrap());
        assert!(!r(&[(0.0, 2.0)]).contains(&r(&[(1.0, 3.0)])).unwrap());
        assert!(r(&[(0.0, 2.0), (0.0, 2.0)])
            .contains(&r(&[(0.5, 1.0), (0.0, 2.0)]))
            .unwrap());
        assert!(r(&[(0.0, 2.0)]).contains(&r(&[(0.0, 1.0), (0.0, 1.0)])).is_err());
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(
            r(&[(0.0, 2.0)]).intersect(&r(&[(1.0, 3.0)])).unwrap(),
            Some(r(&[(1.0, 2.0)]))
        );
        assert_eq!(r(&[(0.0, 1.0)]).intersect(&r(&[(2.0, 3.0)])).unwrap(), None);
        assert_eq!(
            r(&[(0.0, 2.0), (0.0, 2.0)])
                .intersect(&r(&[(1.0, 3.0), (-1.0, 1.0)]))
                .unwrap(),
            Some(r(&[(1.0, 2.0), (0.0, 1.0)]))
        );
    }

    #[test]
    fn touching_boxes_intersect_in_a_point() {
        let i = r(&[(0.0, 1.0)]).intersect(&r(&[(1.0, 2.0)])).unwrap().unwrap();
        assert!(i.is_point());
        assert_eq!(i.get(0).lo, 1.0);
    }

    #[test]
    fn hull_examples() {
        assert_eq!(r(&[(0.0, 1.0)]).hull(&r(&[(0.0, 1.0)])).unwrap(), r(&[(0.0, 1.0)]));
        assert_eq!(r(&[(0.0, 1.0)]).hull(&r(&[(2.0, 3.0)])).unwrap(), r(&[(0.0, 3.0)]));
        assert_eq!(
            r(&[(0.0, 1.0), (5.0, 6.0)]).hull(&r(&[(2.0, 3.0), (4.0, 5.0)])).unwrap(),
            r(&[(0.0, 3.0), (4.0, 6.0)])
        );
    }

    #[test]
    fn bloat_examples() {
        assert_eq!(r(&[(1.0, 2.0)]).bloat(&[0.0]).unwrap(), r(&[(1.0, 2.0)]));
        assert_eq!(r(&[(1.0, 2.0)]).bloat(&[0.5]).unwrap(), r(&[(0.5, 2.5)]));
        assert_eq!(
            r(&[(0.0, 0.0), (3.0, 3.0)]).bloat(&[1.0, 2.0]).unwrap(),
            r(&[(-1.0, 1.0), (1.0, 5.0)])
        );
        assert!(matches!(
            r(&[(1.0, 2.0)]).bloat(&[-0.1]),
            Err(GeometryError::NegativeBloat(_, 0))
        ));
    }

    #[test]
    fn point_rects_are_valid() {
        let p = HyperRect::point(&[1.0, 2.0]).unwrap();
        assert!(p.is_point());
        assert!(p.contains(&p).unwrap());
    }

    #[test]
    fn timed_rect_rejects_negative_time() {
        let p = HyperRect::point(&[0.0]).unwrap();
        assert!(TimedRect::new(-1.0, 0.0, p.clone()).is_err());
        assert!(TimedRect::new(1.0, 0.5, p.clone()).is_err());
        assert!(TimedRect::new(0.0, 0.0, p).is_ok());
    }

    fn rect_strategy(n: usize) -> impl Strategy<Value = HyperRect<f64>> {
        prop::collection::vec((-10.0f64..10.0, 0.0f64..5.0), n).prop_map(|v| {
            let lo: Vec<f64> = v.iter().map(|x| x.0).collect();
            let hi: Vec<f64> = v.iter().map(|x| x.0 + x.1).collect();
            HyperRect::from_bounds(&lo, &hi).unwrap()
        })
    }

    proptest! {
        #[test]
        fn intersect_and_hull_bounds(a in rect_strategy(3), b in rect_strategy(3)) {
            if let Some(i) = a.intersect(&b).unwrap() {
                prop_assert!(a.contains(&i).unwrap());
                prop_assert!(b.contains(&i).unwrap());
            }
            let h = a.hull(&b).unwrap();
            prop_assert!(h.contains(&a).unwrap());
            prop_assert!(h.contains(&b).unwrap());
        }

        #[test]
        fn zero_bloat_is_identity(a in rect_strategy(4)) {
            prop_assert_eq!(a.bloat(&[0.0; 4]).unwrap(), a);
        }

        #[test]
        fn contains_is_a_partial_order(a in rect_strategy(2), b in rect_strategy(2), c in rect_strategy(2)) {
            prop_assert!(a.contains(&a).unwrap());
            if a.contains(&b).unwrap() && b.contains(&a).unwrap() {
                prop_assert_eq!(&a, &b);
            }
            // build a chain so transitivity is exercised on non-trivial triples
            let ab = a.hull(&b).unwrap();
            let abc = ab.hull(&c).unwrap();
            prop_assert!(abc.contains(&ab).unwrap() && ab.contains(&a).unwrap());
            prop_assert!(abc.contains(&a).unwrap());
            if a.contains(&b).unwrap() && b.contains(&c).unwrap() {
                prop_assert!(a.contains(&c).unwrap());
            }
        }
    }
}
