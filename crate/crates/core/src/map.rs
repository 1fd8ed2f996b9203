//! Multimodal maps of type N and their unimodal factors.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::affine::AffineMap;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::settings::Settings;

/// Value and first two derivatives at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub v: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Real> Jet<T> {
    pub fn variable(x: T) -> Self {
        Jet {
            v: x,
            d1: T::one(),
            d2: T::zero(),
        }
    }

    /// Jet of `g ∘ h` given `outer` = jet of g at h.v and `self` = jet of h.
    #[inline]
    pub fn then(self, outer: Jet<T>) -> Jet<T> {
        Jet {
            v: outer.v,
            d1: outer.d1 * self.d1,
            d2: outer.d2 * self.d1 * self.d1 + outer.d1 * self.d2,
        }
    }

    fn affine(self, a: &AffineMap<T>) -> Jet<T> {
        Jet {
            v: a.apply(self.v),
            d1: a.scale() * self.d1,
            d2: a.scale() * self.d2,
        }
    }

    fn affine_inverse(self, a: &AffineMap<T>) -> Jet<T> {
        let s = a.scale();
        Jet {
            v: a.apply_inverse(self.v),
            d1: self.d1 / s,
            d2: self.d2 / s,
        }
    }
}

/// `x ↦ Σ c_i x^{2i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvenPolynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Real> EvenPolynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient list"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(EvenPolynomial { coeffs })
    }

    /// Coefficients of x^0, x^2, x^4, ...
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    fn value(&self, x: T) -> T {
        let y = x * x;
        let mut acc = T::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * y + c;
        }
        acc
    }

    fn jet(&self, x: T) -> Jet<T> {
        // P(y), P'(y), P''(y) at y = x², then the chain rule for y = x².
        let y = x * x;
        let (mut p, mut dp, mut ddp) = (T::zero(), T::zero(), T::zero());
        for &c in self.coeffs.iter().rev() {
            ddp = ddp * y + dp + dp;
            dp = dp * y + p;
            p = p * y + c;
        }
        let two = T::from_f64(2.0);
        Jet {
            v: p,
            d1: two * x * dp,
            d2: two * dp + T::from_f64(4.0) * y * ddp,
        }
    }

    fn value_complex(&self, z: Complex64) -> Complex64 {
        let y = z * z;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * y + c.to_f64();
        }
        acc
    }

    fn value_complex_d(&self, z: Complex64) -> (Complex64, Complex64) {
        let y = z * z;
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * y + p;
            p = p * y + c.to_f64();
        }
        (p, dp * z * 2.0)
    }
}

/// `n` consecutive steps of a base map's extended dynamics, conjugated by
/// affine normalizers: `x ↦ outbound(F^count(inbound⁻¹(x)))`.
#[derive(Clone, Debug)]
pub struct IterateSegment<T> {
    base: Arc<MultimodalMap<T>>,
    start_fiber: usize,
    count: usize,
    inbound: AffineMap<T>,
    outbound: AffineMap<T>,
}

impl<T: Real> IterateSegment<T> {
    pub fn new(
        base: Arc<MultimodalMap<T>>,
        start_fiber: usize,
        count: usize,
        inbound: AffineMap<T>,
        outbound: AffineMap<T>,
    ) -> Result<Self> {
        if start_fiber >= base.n_type() {
            return Err(Error::InvalidArgument("start fiber out of range"));
        }
        if count == 0 {
            return Err(Error::InvalidArgument("iterate count must be positive"));
        }
        Ok(IterateSegment {
            base,
            start_fiber,
            count,
            inbound,
            outbound,
        })
    }

    pub fn base(&self) -> &Arc<MultimodalMap<T>> {
        &self.base
    }

    pub fn start_fiber(&self) -> usize {
        self.start_fiber
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn inbound(&self) -> &AffineMap<T> {
        &self.inbound
    }

    pub fn outbound(&self) -> &AffineMap<T> {
        &self.outbound
    }

    fn value(&self, x: T) -> T {
        let mut y = self.inbound.apply_inverse(x);
        let n = self.base.n_type();
        let mut fiber = self.start_fiber;
        for _ in 0..self.count {
            y = self.base.factor_value(fiber, y);
            fiber = (fiber + 1) % n;
        }
        self.outbound.apply(y)
    }

    fn jet(&self, x: T) -> Jet<T> {
        let mut j = Jet::variable(x).affine_inverse(&self.inbound);
        let n = self.base.n_type();
        let mut fiber = self.start_fiber;
        for _ in 0..self.count {
            j = j.then(self.base.factor_jet(fiber, j.v));
            fiber = (fiber + 1) % n;
        }
        j.affine(&self.outbound)
    }

    fn value_complex_d(&self, z: Complex64) -> (Complex64, Complex64) {
        let a_in = self.inbound.to_f64();
        let a_out = self.outbound.to_f64();
        let mut w = (z - a_in.offset()) / a_in.scale();
        let mut d = Complex64::new(1.0 / a_in.scale(), 0.0);
        let n = self.base.n_type();
        let mut fiber = self.start_fiber;
        for _ in 0..self.count {
            let (v, dv) = self.base.factor_complex_d(fiber, w);
            w = v;
            d *= dv;
            fiber = (fiber + 1) % n;
        }
        (w * a_out.scale() + a_out.offset(), d * a_out.scale())
    }
}

#[derive(Clone, Debug)]
pub enum UnimodalFactor<T> {
    EvenPolynomial(EvenPolynomial<T>),
    IterateSegment(IterateSegment<T>),
}

impl<T: Real> UnimodalFactor<T> {
    /// `x ↦ b x² − b − 1`.
    pub fn quadratic(b: T) -> Self {
        UnimodalFactor::EvenPolynomial(EvenPolynomial {
            coeffs: alloc::vec![-b - T::one(), b],
        })
    }

    #[inline]
    pub fn value(&self, x: T) -> T {
        match self {
            UnimodalFactor::EvenPolynomial(p) => p.value(x),
            UnimodalFactor::IterateSegment(s) => s.value(x),
        }
    }

    pub fn jet(&self, x: T) -> Jet<T> {
        match self {
            UnimodalFactor::EvenPolynomial(p) => p.jet(x),
            UnimodalFactor::IterateSegment(s) => s.jet(x),
        }
    }

    pub fn value_complex_d(&self, z: Complex64) -> (Complex64, Complex64) {
        match self {
            UnimodalFactor::EvenPolynomial(p) => p.value_complex_d(z),
            UnimodalFactor::IterateSegment(s) => s.value_complex_d(z),
        }
    }

    pub fn value_complex(&self, z: Complex64) -> Complex64 {
        match self {
            UnimodalFactor::EvenPolynomial(p) => p.value_complex(z),
            UnimodalFactor::IterateSegment(s) => s.value_complex_d(z).0,
        }
    }

    /// The preimage of `y` in [0, 1] under the decreasing right branch,
    /// clamped to 0 above the critical value and to 1 below `f(1)`.
    pub fn right_branch_inverse(&self, y: T) -> T {
        let top = self.value(T::zero());
        if y >= top {
            return T::zero();
        }
        let bottom = self.value(T::one());
        if y <= bottom {
            return T::one();
        }
        if let UnimodalFactor::EvenPolynomial(p) = self {
            if p.coeffs.len() == 2 {
                let r = ((y - p.coeffs[0]) / p.coeffs[1]).sqrt();
                return r.min(T::one());
            }
        }
        // Safeguarded Newton on the decreasing branch.
        let (mut lo, mut hi) = (T::zero(), T::one());
        let mut x = (lo + hi).half();
        for _ in 0..400 {
            let j = self.jet(x);
            let g = j.v - y;
            if g == T::zero() {
                return x;
            }
            if g > T::zero() {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = if j.d1 != T::zero() { x - g / j.d1 } else { lo };
            if !(next > lo && next < hi) {
                next = (lo + hi).half();
            }
            if next == x || hi - lo <= T::epsilon() * T::from_f64(4.0) {
                return next;
            }
            x = next;
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// A member of the quadratic family with the given parameters.
    Family(Vec<f64>),
    /// Built directly from factor data.
    Custom,
    /// The `depth`-th renormalization of a base map, stored lazily.
    Tower { depth: usize },
}

/// `f = f_{N−1} ∘ … ∘ f_0` as an ordered factor list.
#[derive(Clone, Debug)]
pub struct MultimodalMap<T> {
    factors: Vec<UnimodalFactor<T>>,
    provenance: Provenance,
}

impl<T: Real> MultimodalMap<T> {
    pub fn new(factors: Vec<UnimodalFactor<T>>, provenance: Provenance) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("a map needs at least one factor"));
        }
        Ok(MultimodalMap {
            factors,
            provenance,
        })
    }

    pub fn n_type(&self) -> usize {
        self.factors.len()
    }

    pub fn precision_bits(&self) -> u32 {
        T::BITS
    }

    pub fn factors(&self) -> &[UnimodalFactor<T>] {
        &self.factors
    }

    pub fn factor(&self, j: usize) -> &UnimodalFactor<T> {
        &self.factors[j]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    #[inline]
    pub fn factor_value(&self, j: usize, x: T) -> T {
        self.factors[j].value(x)
    }

    #[inline]
    pub fn factor_jet(&self, j: usize, x: T) -> Jet<T> {
        self.factors[j].jet(x)
    }

    pub fn factor_complex_d(&self, j: usize, z: Complex64) -> (Complex64, Complex64) {
        self.factors[j].value_complex_d(z)
    }

    /// Composite value without input checks.
    pub fn value(&self, x: T) -> T {
        self.factors.iter().fold(x, |y, f| f.value(y))
    }

    pub fn jet(&self, x: T) -> Jet<T> {
        self.factors
            .iter()
            .fold(Jet::variable(x), |j, f| j.then(f.jet(j.v)))
    }

    /// The `order`-th derivative (0, 1 or 2) of the composite at `x`.
    pub fn eval(&self, x: T, order: usize) -> Result<T> {
        if !x.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        let j = self.jet(x);
        match order {
            0 => Ok(j.v),
            1 => Ok(j.d1),
            2 => Ok(j.d2),
            _ => Err(Error::InvalidArgument("derivative order must be at most 2")),
        }
    }

    /// Composite on complex inputs, with its derivative.
    pub fn eval_complex_d(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut w = z;
        let mut d = Complex64::new(1.0, 0.0);
        for f in &self.factors {
            let (v, dv) = f.value_complex_d(w);
            w = v;
            d *= dv;
        }
        (w, d)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.factors.iter().fold(z, |w, f| f.value_complex(w))
    }

    /// `count` steps of the extended map from `(x, fiber)`.
    pub fn iterate(&self, fiber: usize, x: T, count: usize) -> (T, usize) {
        let n = self.n_type();
        let mut y = x;
        let mut j = fiber;
        for _ in 0..count {
            y = self.factors[j].value(y);
            j = (j + 1) % n;
        }
        (y, j)
    }

    /// Jet of `count` extended steps from `(x, fiber)`.
    pub fn iterate_jet(&self, fiber: usize, x: T, count: usize) -> Jet<T> {
        let n = self.n_type();
        let mut jet = Jet::variable(x);
        let mut j = fiber;
        for _ in 0..count {
            jet = jet.then(self.factors[j].jet(jet.v));
            j = (j + 1) % n;
        }
        jet
    }

    /// Quadratic-family parameters when the map is a raw family member.
    pub fn family_parameters(&self) -> Option<&[f64]> {
        match &self.provenance {
            Provenance::Family(b) => Some(b),
            _ => None,
        }
    }
}

/// `P_b`: the type-N map whose j-th factor is `x ↦ b_j x² − b_j − 1`.
pub fn build_quadratic_family<T: Real>(b: &[T]) -> Result<MultimodalMap<T>> {
    if b.is_empty() {
        return Err(Error::InvalidArgument("parameter vector is empty"));
    }
    for (index, &bj) in b.iter().enumerate() {
        if !bj.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if bj > -T::one() {
            return Err(Error::ParameterOutOfRange {
                index,
                value: bj.to_f64(),
                condition: "f_j(0) = -b_j - 1 >= 0",
            });
        }
        if bj < T::from_f64(-2.0) {
            return Err(Error::ParameterOutOfRange {
                index,
                value: bj.to_f64(),
                condition: "f_j(0) = -b_j - 1 <= 1 (range in [-1, 1])",
            });
        }
    }
    let factors = b.iter().map(|&bj| UnimodalFactor::quadratic(bj)).collect();
    let map = MultimodalMap::new(
        factors,
        Provenance::Family(b.iter().map(|v| v.to_f64()).collect()),
    )?;
    let report = validate(&map, &Settings::default());
    if !report.passed() {
        return Err(Error::ValidationFailure(format!("{:?}", report.failures())));
    }
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    FixesMinusOne,
    Even,
    CriticalValueNonNegative,
    NegativeCurvature,
    RangeContained,
    Unimodal,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::FixesMinusOne => "fixes -1",
            Condition::Even => "even",
            Condition::CriticalValueNonNegative => "f_j(0) >= 0",
            Condition::NegativeCurvature => "f_j''(0) < 0",
            Condition::RangeContained => "maps [-1,1] into [-1,1]",
            Condition::Unimodal => "monotone on [0,1]",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub condition: Condition,
    /// `None` for checks on the composite.
    pub factor: Option<usize>,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn check(condition: Condition, factor: Option<usize>, witness: Option<(f64, f64)>) -> Check {
    Check {
        condition,
        factor,
        passed: witness.is_none(),
        witness: witness.map(|(x, value)| Witness { x, value }),
    }
}

/// Check the structural conditions on every factor and on the composite.
pub fn validate<T: Real>(map: &MultimodalMap<T>, settings: &Settings) -> ValidationReport {
    let tol = T::from_f64(settings.eval_tol);
    let n_samples = settings.samples.max(3);
    let grid: Vec<T> = (0..n_samples)
        .map(|i| T::from_f64(i as f64 / (n_samples - 1) as f64))
        .collect();
    let mut checks = Vec::new();
    let minus_one = -T::one();

    for (j, f) in map.factors().iter().enumerate() {
        let at = Some(j);
        let v = f.value(minus_one);
        let bad = ((v + T::one()).abs() > tol).then(|| (-1.0, v.to_f64()));
        checks.push(check(Condition::FixesMinusOne, at, bad));

        let mut bad = None;
        for &x in &grid {
            let (a, b) = (f.value(x), f.value(-x));
            if (a - b).abs() > tol {
                bad = Some((x.to_f64(), (a - b).to_f64()));
                break;
            }
        }
        checks.push(check(Condition::Even, at, bad));

        let c = f.value(T::zero());
        let bad = (c < -tol).then(|| (0.0, c.to_f64()));
        checks.push(check(Condition::CriticalValueNonNegative, at, bad));

        let d2 = f.jet(T::zero()).d2;
        let bad = (!(d2 < T::zero())).then(|| (0.0, d2.to_f64()));
        checks.push(check(Condition::NegativeCurvature, at, bad));

        let mut bad = None;
        let limit = T::one() + tol;
        for &x in grid.iter().chain(core::iter::once(&T::zero())) {
            let y = f.value(x);
            if !(y.abs() <= limit) {
                bad = Some((x.to_f64(), y.to_f64()));
                break;
            }
        }
        if bad.is_none() && !(c.abs() <= limit) {
            bad = Some((0.0, c.to_f64()));
        }
        checks.push(check(Condition::RangeContained, at, bad));

        let mut bad = None;
        let mut prev = f.value(grid[0]);
        for &x in &grid[1..] {
            let y = f.value(x);
            if y > prev + tol {
                bad = Some((x.to_f64(), y.to_f64()));
                break;
            }
            prev = y;
        }
        checks.push(check(Condition::Unimodal, at, bad));
    }

    let v = map.value(minus_one);
    let bad = ((v + T::one()).abs() > tol).then(|| (-1.0, v.to_f64()));
    checks.push(check(Condition::FixesMinusOne, None, bad));
    let mut bad = None;
    for &x in &grid {
        let (a, b) = (map.value(x), map.value(-x));
        if (a - b).abs() > tol {
            bad = Some((x.to_f64(), (a - b).to_f64()));
            break;
        }
    }
    checks.push(check(Condition::Even, None, bad));
    ValidationReport { checks }
}

/// `(f^k(0))_{k=0..=length}` for the composite.
pub fn critical_orbit<T: Real>(
    map: &MultimodalMap<T>,
    length: usize,
    settings: &Settings,
) -> Result<Vec<T>> {
    if length > settings.orbit_cap {
        return Err(Error::OrbitCapExceeded {
            requested: length,
            cap: settings.orbit_cap,
        });
    }
    let limit = T::one() + T::from_f64(settings.escape_tol);
    let mut orbit = Vec::with_capacity(length + 1);
    let mut x = T::zero();
    orbit.push(x);
    for step in 1..=length {
        x = map.value(x);
        if !(x.abs() <= limit) {
            return Err(Error::OrbitEscape {
                step,
                fiber: 0,
                x: x.to_f64(),
            });
        }
        orbit.push(x);
    }
    Ok(orbit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::DoubleDouble;

    #[test]
    fn quadratic_values() {
        let p = build_quadratic_family(&[-2.0]).unwrap();
        assert_eq!(p.eval(0.0, 0).unwrap(), 1.0);
        assert_eq!(p.eval(0.5, 0).unwrap(), 0.5);
        assert!((p.eval(0.3, 1).unwrap() + 1.2).abs() < 1e-15);
        assert_eq!(p.eval(0.3, 2).unwrap(), -4.0);
        assert_eq!(p.eval(-1.0, 0).unwrap(), -1.0);
        assert!(p.eval(0.3, 3).is_err());
        assert!(p.eval(f64::NAN, 0).is_err());
    }

    #[test]
    fn out_of_range_parameters() {
        match build_quadratic_family(&[-0.5]) {
            Err(Error::ParameterOutOfRange { index, condition, .. }) => {
                assert_eq!(index, 0);
                assert!(condition.contains(">= 0"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(build_quadratic_family(&[-1.5, -2.5]).is_err());
        assert!(build_quadratic_family::<f64>(&[]).is_err());
    }

    #[test]
    fn x_squared_does_not_fix_minus_one() {
        let f = UnimodalFactor::EvenPolynomial(EvenPolynomial::new(alloc::vec![0.0, 1.0]).unwrap());
        let map = MultimodalMap::new(alloc::vec![f], Provenance::Custom).unwrap();
        let report = validate(&map, &Settings::default());
        let fail = report
            .failures()
            .into_iter()
            .find(|c| c.condition == Condition::FixesMinusOne)
            .expect("fixes -1 must fail");
        assert_eq!(fail.witness.unwrap().value, 1.0);
    }

    #[test]
    fn type_two_composite_degree_four() {
        let p = build_quadratic_family(&[-2.0, -2.0]).unwrap();
        assert!(validate(&p, &Settings::default()).passed());
        // (-2(-2x²+1)²+1) = -8x⁴ + 8x² - 1
        for &x in &[0.0, 0.3, -0.7, 1.0] {
            let expect = -8.0 * x * x * x * x + 8.0 * x * x - 1.0;
            assert!((p.value(x) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn superstable_period_two_orbit() {
        let b = -(1.0 + 5f64.sqrt()) / 2.0;
        let p = build_quadratic_family(&[b]).unwrap();
        let orbit = critical_orbit(&p, 4, &Settings::default()).unwrap();
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for (k, x) in orbit.iter().enumerate() {
            let expect = if k % 2 == 0 { 0.0 } else { g };
            assert!((x - expect).abs() < 1e-9, "step {k}: {x}");
        }
    }

    #[test]
    fn chebyshev_orbit() {
        let p = build_quadratic_family(&[-2.0]).unwrap();
        let orbit = critical_orbit(&p, 3, &Settings::default()).unwrap();
        assert_eq!(orbit, alloc::vec![0.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn orbit_escape_and_cap() {
        let f = UnimodalFactor::EvenPolynomial(EvenPolynomial::new(alloc::vec![1.5, -2.5]).unwrap());
        let map = MultimodalMap::new(alloc::vec![f], Provenance::Custom).unwrap();
        assert!(matches!(
            critical_orbit(&map, 5, &Settings::default()),
            Err(Error::OrbitEscape { step: 1, .. })
        ));
        let p = build_quadratic_family(&[-2.0]).unwrap();
        let s = Settings {
            orbit_cap: 3,
            ..Settings::default()
        };
        assert!(critical_orbit(&p, 4, &s).is_err());
    }

    #[test]
    fn right_branch_inverse_roundtrip() {
        let p = build_quadratic_family(&[-1.7]).unwrap();
        let f = p.factor(0);
        for &y in &[-0.9, -0.2, 0.3, 0.69] {
            let r = f.right_branch_inverse(y);
            assert!((f.value(r) - y).abs() < 1e-14);
            assert!(r >= 0.0 && r <= 1.0);
        }
        assert_eq!(f.right_branch_inverse(0.8), 0.0);
        assert_eq!(f.right_branch_inverse(-1.5), 1.0);
    }

    #[test]
    fn double_double_family() {
        let b = -(DoubleDouble::one() + DoubleDouble::from_f64(5.0).sqrt()) / DoubleDouble::from_f64(2.0);
        let p = build_quadratic_family(&[b]).unwrap();
        let x = p.value(p.value(DoubleDouble::zero()));
        assert!(x.abs().to_f64() < 1e-30);
    }

    #[test]
    fn complex_matches_real_on_axis() {
        let p = build_quadratic_family(&[-1.8, -1.3]).unwrap();
        for &x in &[-0.9, 0.1, 0.55] {
            let (v, d) = p.eval_complex_d(Complex64::new(x, 0.0));
            assert!((v.re - p.value(x)).abs() < 1e-14);
            assert!((d.re - p.eval(x, 1).unwrap()).abs() < 1e-13);
        }
    }
}
