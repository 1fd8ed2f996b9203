//! Scalar types used by the interval numerics.
//!
//! Everything in this crate is generic over [`Real`]. Two implementations
//! ship: hardware `f64` (53 bits) and [`DoubleDouble`] (an unevaluated sum of
//! two doubles, about 106 bits).

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Real:
    Copy
    + PartialOrd
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// Significand bits carried by the type.
    const BITS: u32;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;

    /// Unit roundoff.
    fn epsilon() -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn half(self) -> Self {
        self * Self::from_f64(0.5)
    }

    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    fn is_sign_negative(self) -> bool {
        self < Self::zero()
    }

    fn ln(self) -> f64 {
        libm::log(self.to_f64())
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

impl Real for f64 {
    const BITS: u32 = 53;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        libm::fabs(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

/// Double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

// Dekker splitting; avoids relying on a fused multiply-add.
#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, err)
}

impl DoubleDouble {
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::renorm(p, e + self.lo * b)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.hi, f)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        Self::renorm(s1, s2)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        Self::renorm(p, e)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        DoubleDouble { hi: q1, lo: q2 } + DoubleDouble::from_f64(q3)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, b: Self) {
        *self = *self * b;
    }
}

impl Real for DoubleDouble {
    const BITS: u32 = 106;

    fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::from_f64(libm::sqrt(self.hi));
        }
        // One Newton correction on top of the hardware root.
        let y = libm::sqrt(self.hi);
        let yy = DoubleDouble::from_f64(y) * DoubleDouble::from_f64(y);
        let corr = (self - yy).hi / (2.0 * y);
        let (h, l) = two_sum(y, corr);
        DoubleDouble::renorm(h, l)
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    fn epsilon() -> Self {
        // 2^-104
        DoubleDouble::from_f64(4.930_380_657_631_324e-32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_third_times_three() {
        let third = DoubleDouble::one() / DoubleDouble::from_f64(3.0);
        let back = third * DoubleDouble::from_f64(3.0) - DoubleDouble::one();
        assert!(back.abs().to_f64() < 1e-31);
    }

    #[test]
    fn dd_sqrt_two() {
        let r = DoubleDouble::from_f64(2.0).sqrt();
        let err = r * r - DoubleDouble::from_f64(2.0);
        assert!(err.abs().to_f64() < 1e-30);
        // Known digits of sqrt(2); the low word carries what f64 drops.
        assert_eq!(r.hi(), core::f64::consts::SQRT_2);
        assert!((r.lo() - (-9.667_293_313_452_913e-17)).abs() < 1e-30);
    }

    #[test]
    fn dd_cancellation_keeps_low_bits() {
        let a = DoubleDouble::from_f64(1.0) + DoubleDouble::from_f64(1e-20);
        let d = a - DoubleDouble::one();
        assert!((d.to_f64() - 1e-20).abs() < 1e-35);
    }

    #[test]
    fn ordering_uses_low_word() {
        let a = DoubleDouble::from_parts(1.0, 1e-20);
        let b = DoubleDouble::from_parts(1.0, -1e-20);
        assert!(a > b);
        assert_eq!(Real::max(a, b), a);
    }
}
