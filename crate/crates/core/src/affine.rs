//! Invertible affine maps of the line.

use crate::error::{Error, Result};
use crate::real::Real;

/// `x ↦ scale·x + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap<T> {
    scale: T,
    offset: T,
}

impl<T: Real> AffineMap<T> {
    pub fn new(scale: T, offset: T) -> Result<Self> {
        if !scale.is_finite() || !offset.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if scale == T::zero() {
            return Err(Error::SingularAffineMap);
        }
        Ok(AffineMap { scale, offset })
    }

    pub fn identity() -> Self {
        AffineMap {
            scale: T::one(),
            offset: T::zero(),
        }
    }

    /// The linear map sending `z` to `target` and fixing 0.
    pub fn sending(z: T, target: T) -> Result<Self> {
        if z == T::zero() {
            return Err(Error::SingularAffineMap);
        }
        AffineMap::new(target / z, T::zero())
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    #[inline]
    pub fn apply(&self, x: T) -> T {
        self.scale * x + self.offset
    }

    #[inline]
    pub fn apply_inverse(&self, y: T) -> T {
        (y - self.offset) / self.scale
    }

    pub fn inverse(&self) -> Self {
        let s = T::one() / self.scale;
        AffineMap {
            scale: s,
            offset: -(self.offset * s),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap<T>) -> Self {
        AffineMap {
            scale: self.scale * inner.scale,
            offset: self.scale * inner.offset + self.offset,
        }
    }

    pub fn to_f64(&self) -> AffineMap<f64> {
        AffineMap {
            scale: self.scale.to_f64(),
            offset: self.offset.to_f64(),
        }
    }
}
