//! The fibered extension `F(x, j) = (f_j(x), j + 1 mod N)`: orbits,
//! first entry, landing components, pullbacks and niceness.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::map::{validate, MultimodalMap, UnimodalFactor};
use crate::real::Real;
use crate::roots::scan_roots;
use crate::settings::Settings;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberPoint<T> {
    pub x: T,
    pub fiber: usize,
}

impl<T: Real> FiberPoint<T> {
    pub fn new(x: T, fiber: usize) -> Self {
        FiberPoint { x, fiber }
    }

    /// The critical point `c_j = (0, j)`.
    pub fn critical(fiber: usize) -> Self {
        FiberPoint {
            x: T::zero(),
            fiber,
        }
    }
}

/// Open interval `(lo, hi)` on one fiber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberInterval<T> {
    lo: T,
    hi: T,
    fiber: usize,
}

impl<T: Real> FiberInterval<T> {
    pub fn new(lo: T, hi: T, fiber: usize) -> Result<Self> {
        let slack = T::one() + T::from_f64(1e-9);
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) || lo < -slack || hi > slack {
            return Err(Error::InvalidInterval {
                lo: lo.to_f64(),
                hi: hi.to_f64(),
                fiber,
            });
        }
        Ok(FiberInterval { lo, hi, fiber })
    }

    /// `(−h, h)` on the given fiber.
    pub fn symmetric(half_width: T, fiber: usize) -> Result<Self> {
        let h = half_width.abs();
        FiberInterval::new(-h, h, fiber)
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn center(&self) -> T {
        (self.lo + self.hi).half()
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        (self.lo + self.hi).abs() <= T::from_f64(rel_tol) * self.length()
    }

    pub fn contains(&self, p: FiberPoint<T>) -> bool {
        p.fiber == self.fiber && p.x > self.lo && p.x < self.hi
    }

    pub fn contains_x(&self, x: T) -> bool {
        x > self.lo && x < self.hi
    }

    /// Strict containment with a relative margin on both sides.
    pub fn contains_with_margin(&self, p: FiberPoint<T>, rel_margin: f64) -> bool {
        let m = T::from_f64(rel_margin) * self.length();
        p.fiber == self.fiber && p.x > self.lo + m && p.x < self.hi - m
    }

    pub fn contains_critical(&self) -> bool {
        self.lo < T::zero() && self.hi > T::zero()
    }

    /// `other ⊆ self` up to an absolute slack.
    pub fn contains_interval(&self, other: &FiberInterval<T>, slack: T) -> bool {
        self.fiber == other.fiber && other.lo >= self.lo - slack && other.hi <= self.hi + slack
    }

    pub fn overlap(&self, other: &FiberInterval<T>) -> T {
        if self.fiber != other.fiber {
            return T::zero();
        }
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(T::zero())
    }

    pub fn approx_eq(&self, other: &FiberInterval<T>, rel_tol: f64) -> bool {
        let tol = T::from_f64(rel_tol) * self.length().max(other.length());
        self.fiber == other.fiber
            && (self.lo - other.lo).abs() <= tol
            && (self.hi - other.hi).abs() <= tol
    }
}

/// Pullback chain `G_0, …, G_k` with `F(G_{s+1}) ⊆ G_s`: `G_0` is the
/// target and `G_k` the component that maps into it in k steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain<T> {
    intervals: Vec<FiberInterval<T>>,
}

impl<T: Real> Chain<T> {
    pub fn new(intervals: Vec<FiberInterval<T>>) -> Self {
        Chain { intervals }
    }

    pub fn intervals(&self) -> &[FiberInterval<T>] {
        &self.intervals
    }

    /// Number of steps k.
    pub fn len(&self) -> usize {
        self.intervals.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.len() <= 1
    }

    /// Number of `G_s`, `s` in `range`, containing a critical point.
    pub fn critical_count(&self, range: core::ops::Range<usize>) -> usize {
        self.intervals[range]
            .iter()
            .filter(|g| g.contains_critical())
            .count()
    }

    /// The order of the chain: how many of `G_1..G_k` meet the critical set.
    pub fn order(&self) -> usize {
        self.critical_count(1..self.intervals.len())
    }

    /// Largest number of chain members sharing a common point.
    pub fn intersection_multiplicity(&self) -> usize {
        let mut events: Vec<(T, i32, usize)> = Vec::new();
        for g in &self.intervals {
            events.push((g.lo, 1, g.fiber));
            events.push((g.hi, -1, g.fiber));
        }
        // Closing events sort before opening ones at equal coordinates:
        // the intervals are open.
        events.sort_by(|a, b| {
            a.2.cmp(&b.2)
                .then(a.0.total_cmp(&b.0))
                .then(a.1.cmp(&b.1))
        });
        let (mut best, mut cur, mut fiber) = (0i32, 0i32, usize::MAX);
        for (_, d, f) in events {
            if f != fiber {
                fiber = f;
                cur = 0;
            }
            cur += d;
            best = best.max(cur);
        }
        best as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry<T> {
    /// Entry time, at least 1.
    pub k: usize,
    pub image: FiberPoint<T>,
    /// Index of the entered component of B.
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Landing<T> {
    pub interval: FiberInterval<T>,
    pub k: usize,
    pub component: usize,
    pub chain: Chain<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Niceness<T> {
    Nice,
    NotNice {
        k: usize,
        boundary: FiberPoint<T>,
        image: FiberPoint<T>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NicenessReport<T> {
    pub verdict: Niceness<T>,
    pub horizon: usize,
}

impl<T> NicenessReport<T> {
    pub fn is_nice(&self) -> bool {
        matches!(self.verdict, Niceness::Nice)
    }
}

/// The extended map of a validated multimodal map together with α and β.
#[derive(Clone, Debug)]
pub struct ExtendedMap<T> {
    base: Arc<MultimodalMap<T>>,
    alpha: T,
    beta: T,
}

/// Orientation-reversing fixed point of the composite nearest 0, and the
/// preimage of ±α closest to −1.
pub fn extend<T: Real>(map: &MultimodalMap<T>, settings: &Settings) -> Result<ExtendedMap<T>> {
    extend_shared(Arc::new(map.clone()), settings)
}

pub fn extend_shared<T: Real>(
    map: Arc<MultimodalMap<T>>,
    settings: &Settings,
) -> Result<ExtendedMap<T>> {
    let report = validate(&map, settings);
    if !report.passed() {
        return Err(Error::ValidationFailure(format!("{:?}", report.failures())));
    }
    let cells = settings.scan_cells;
    let roots = scan_roots(|z| map.value(z) - z, T::zero(), T::one(), cells);
    let alpha = roots
        .iter()
        .copied()
        .filter(|&z| z > T::zero() && map.jet(z).d1 < T::zero())
        .min_by(|a, b| a.total_cmp(b))
        .ok_or(Error::NoOrientationReversingFixedPoint {
            cells,
            roots: roots.len(),
        })?;

    let a = alpha.abs();
    let near = T::from_f64(1e-9).max(a * T::from_f64(1e-9));
    let mut candidates = scan_roots(|z| map.value(z) + a, -T::one(), T::zero(), cells);
    candidates.extend(scan_roots(|z| map.value(z) - a, -T::one(), T::zero(), cells));
    let beta = candidates
        .into_iter()
        .filter(|&z| (z + a).abs() > near && z < T::zero())
        .min_by(|x, y| x.total_cmp(y))
        .ok_or(Error::NoOrientationReversingFixedPoint {
            cells,
            roots: roots.len(),
        })?;
    Ok(ExtendedMap {
        base: map,
        alpha,
        beta,
    })
}

/// Component of `f⁻¹((lo, hi))` containing `hint`, for a unimodal even factor.
fn factor_preimage<T: Real>(f: &UnimodalFactor<T>, lo: T, hi: T, hint: T) -> Option<(T, T)> {
    let top = f.value(T::zero());
    if lo >= top {
        return None;
    }
    // Near the critical value the fold loses the x² increment to rounding.
    if !(top - lo > T::from_f64(64.0) * T::epsilon() * (top.abs() + lo.abs())) {
        return None;
    }
    let r_lo = f.right_branch_inverse(lo);
    if hi > top {
        return Some((-r_lo, r_lo));
    }
    let r_hi = f.right_branch_inverse(hi);
    if !(r_hi < r_lo) {
        return None;
    }
    if hint > T::zero() {
        Some((r_hi, r_lo))
    } else if hint < T::zero() {
        Some((-r_lo, -r_hi))
    } else {
        None
    }
}

impl<T: Real> ExtendedMap<T> {
    pub fn base(&self) -> &MultimodalMap<T> {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<MultimodalMap<T>> {
        &self.base
    }

    pub fn n_type(&self) -> usize {
        self.base.n_type()
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// `I_0 = (−|α|, |α|)` on fiber 0.
    pub fn i0(&self) -> FiberInterval<T> {
        FiberInterval::symmetric(self.alpha, 0).expect("alpha is nonzero")
    }

    #[inline]
    pub fn step(&self, p: FiberPoint<T>) -> FiberPoint<T> {
        FiberPoint {
            x: self.base.factor_value(p.fiber, p.x),
            fiber: (p.fiber + 1) % self.n_type(),
        }
    }

    fn check_point(&self, p: &FiberPoint<T>) -> Result<()> {
        if p.fiber >= self.n_type() {
            return Err(Error::InvalidArgument("fiber index out of range"));
        }
        if !p.x.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        Ok(())
    }

    fn escaped(&self, x: T, settings: &Settings) -> bool {
        !(x.abs() <= T::one() + T::from_f64(settings.escape_tol))
    }

    /// `F^n(p)`, failing if the orbit leaves the box.
    pub fn eval_extended(
        &self,
        p: FiberPoint<T>,
        n: usize,
        settings: &Settings,
    ) -> Result<FiberPoint<T>> {
        self.check_point(&p)?;
        if n > settings.orbit_cap {
            return Err(Error::OrbitCapExceeded {
                requested: n,
                cap: settings.orbit_cap,
            });
        }
        let mut q = p;
        for step in 1..=n {
            q = self.step(q);
            if self.escaped(q.x, settings) {
                return Err(Error::OrbitEscape {
                    step,
                    fiber: q.fiber,
                    x: q.x.to_f64(),
                });
            }
        }
        Ok(q)
    }

    /// `p, F(p), …, F^n(p)`.
    pub fn orbit(&self, p: FiberPoint<T>, n: usize, settings: &Settings) -> Result<Vec<FiberPoint<T>>> {
        self.check_point(&p)?;
        if n > settings.orbit_cap {
            return Err(Error::OrbitCapExceeded {
                requested: n,
                cap: settings.orbit_cap,
            });
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push(p);
        let mut q = p;
        for step in 1..=n {
            q = self.step(q);
            if self.escaped(q.x, settings) {
                return Err(Error::OrbitEscape {
                    step,
                    fiber: q.fiber,
                    x: q.x.to_f64(),
                });
            }
            out.push(q);
        }
        Ok(out)
    }

    /// Exact image of an interval under one step (factors are unimodal).
    pub fn image_interval(&self, iv: &FiberInterval<T>) -> (T, T, usize) {
        let f = self.base.factor(iv.fiber);
        let (a, b) = (f.value(iv.lo), f.value(iv.hi));
        let fiber = (iv.fiber + 1) % self.n_type();
        if iv.contains_critical() {
            (a.min(b), f.value(T::zero()), fiber)
        } else {
            (a.min(b), a.max(b), fiber)
        }
    }

    /// Smallest `k ≥ 1` with `F^k(x) ∈ B`, searched up to `horizon`.
    pub fn first_entry(
        &self,
        b: &[FiberInterval<T>],
        x: FiberPoint<T>,
        horizon: usize,
        settings: &Settings,
    ) -> Result<Option<Entry<T>>> {
        if b.is_empty() {
            return Err(Error::InvalidArgument("target set is empty"));
        }
        self.check_point(&x)?;
        if horizon > settings.orbit_cap {
            return Err(Error::OrbitCapExceeded {
                requested: horizon,
                cap: settings.orbit_cap,
            });
        }
        let mut q = x;
        for k in 1..=horizon {
            q = self.step(q);
            if self.escaped(q.x, settings) {
                return Err(Error::OrbitEscape {
                    step: k,
                    fiber: q.fiber,
                    x: q.x.to_f64(),
                });
            }
            if let Some(component) = b.iter().position(|iv| iv.contains(q)) {
                return Ok(Some(Entry {
                    k,
                    image: q,
                    component,
                }));
            }
        }
        Ok(None)
    }

    /// Pull `target` back along the orbit `orbit[0..=k]` (which must end in
    /// `target`). Entry `s` of the result contains `orbit[s]` and maps into
    /// `target` under `F^{k−s}`; the last entry is `target` itself.
    pub fn pullback_along(
        &self,
        target: &FiberInterval<T>,
        orbit: &[FiberPoint<T>],
    ) -> Result<Vec<FiberInterval<T>>> {
        let k = orbit.len() - 1;
        let mut comps = alloc::vec![*target; k + 1];
        let mut cur = *target;
        for s in (0..k).rev() {
            let p = orbit[s];
            let f = self.base.factor(p.fiber);
            let (lo, hi) = factor_preimage(f, cur.lo, cur.hi, p.x)
                .ok_or(Error::PullbackDegenerate { step: s })?;
            let scale = lo.abs().max(hi.abs()).max(T::from_f64(1e-300));
            if !(hi - lo > scale * T::epsilon() * T::from_f64(8.0)) {
                return Err(Error::PullbackDegenerate { step: s });
            }
            cur = FiberInterval {
                lo,
                hi,
                fiber: p.fiber,
            };
            comps[s] = cur;
        }
        Ok(comps)
    }

    /// `L_x(B)`: the component of the first-entry domain around `x`.
    pub fn landing_component(
        &self,
        b: &[FiberInterval<T>],
        x: FiberPoint<T>,
        horizon: usize,
        settings: &Settings,
    ) -> Result<Landing<T>> {
        let entry = self
            .first_entry(b, x, horizon, settings)?
            .ok_or(Error::EntryNotFound { horizon })?;
        let orbit = self.orbit(x, entry.k, settings)?;
        let comps = self.pullback_along(&b[entry.component], &orbit)?;
        let interval = comps[0];
        let mut chain: Vec<FiberInterval<T>> = comps;
        chain.reverse();
        Ok(Landing {
            interval,
            k: entry.k,
            component: entry.component,
            chain: Chain::new(chain),
        })
    }

    /// Follow every boundary orbit of `B` for `horizon` steps looking for a
    /// return into `B`. Orbits that land on a boundary point of `B` (up to
    /// the snap tolerance) are not followed further: from there on they
    /// coincide with a boundary orbit that is checked on its own.
    pub fn is_nice(
        &self,
        b: &[FiberInterval<T>],
        horizon: usize,
        settings: &Settings,
    ) -> NicenessReport<T> {
        let boundary: Vec<FiberPoint<T>> = b
            .iter()
            .flat_map(|iv| [FiberPoint::new(iv.lo, iv.fiber), FiberPoint::new(iv.hi, iv.fiber)])
            .collect();
        let snap = |q: &FiberPoint<T>| {
            b.iter().any(|iv| {
                let tol = T::from_f64(settings.snap_tol) * iv.length();
                iv.fiber == q.fiber && ((q.x - iv.lo).abs() <= tol || (q.x - iv.hi).abs() <= tol)
            })
        };
        for &p in &boundary {
            let mut q = p;
            for k in 1..=horizon {
                q = self.step(q);
                if snap(&q) {
                    break;
                }
                if b.iter().any(|iv| iv.contains(q)) {
                    return NicenessReport {
                        verdict: Niceness::NotNice {
                            k,
                            boundary: p,
                            image: q,
                        },
                        horizon,
                    };
                }
            }
        }
        NicenessReport {
            verdict: Niceness::Nice,
            horizon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::build_quadratic_family;

    fn ext(b: &[f64]) -> ExtendedMap<f64> {
        extend(&build_quadratic_family(b).unwrap(), &Settings::default()).unwrap()
    }

    #[test]
    fn alpha_beta_chebyshev() {
        let f = ext(&[-2.0]);
        assert!((f.alpha() - 0.5).abs() < 1e-15);
        // β solves −2z² + 1 = −1/2.
        assert!((f.beta() + 0.75f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn alpha_golden_mean_parameter() {
        let b = -(1.0 + 5f64.sqrt()) / 2.0;
        let f = ext(&[b]);
        // b z² − z − b − 1 = 0, the positive root.
        let expect = (1.0 - (1.0 + 4.0 * b * (b + 1.0)).sqrt()) / (2.0 * b);
        assert!((f.alpha() - expect).abs() < 1e-14);
        assert!((f.alpha() - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn fibers_advance() {
        let f = ext(&[-2.0, -2.0]);
        let s = Settings::default();
        let p = f.eval_extended(FiberPoint::critical(0), 1, &s).unwrap();
        assert_eq!(p, FiberPoint::new(1.0, 1));
        let q = f.eval_extended(FiberPoint::critical(1), 3, &s).unwrap();
        assert_eq!(q.fiber, 0);
    }

    #[test]
    fn first_return_semantics() {
        let b = -(1.0 + 5f64.sqrt()) / 2.0;
        let f = ext(&[b]);
        let s = Settings::default();
        let target = [FiberInterval::symmetric(0.2, 0).unwrap()];
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let e = f.first_entry(&target, FiberPoint::new(g, 0), 10, &s).unwrap().unwrap();
        assert_eq!(e.k, 1);
        assert!(e.image.x.abs() < 1e-9);
        let e = f.first_entry(&target, FiberPoint::critical(0), 10, &s).unwrap().unwrap();
        assert_eq!(e.k, 2);
    }

    #[test]
    fn no_entry_for_fixed_point_orbit() {
        let f = ext(&[-2.0]);
        let target = [FiberInterval::symmetric(0.1, 0).unwrap()];
        let e = f
            .first_entry(&target, FiberPoint::new(1.0, 0), 5, &Settings::default())
            .unwrap();
        assert!(e.is_none());
    }

    #[test]
    fn niceness_examples() {
        let f = ext(&[-2.0]);
        let s = Settings::default();
        assert!(f.is_nice(&[f.i0()], 1000, &s).is_nice());
        let r = f.is_nice(&[FiberInterval::symmetric(0.9, 0).unwrap()], 10, &s);
        assert!(matches!(r.verdict, Niceness::NotNice { k: 1, .. }));
    }

    #[test]
    fn landing_component_superstable() {
        let b = -(1.0 + 5f64.sqrt()) / 2.0;
        let f = ext(&[b]);
        let s = Settings::default();
        let l = f
            .landing_component(&[f.i0()], FiberPoint::critical(0), 100, &s)
            .unwrap();
        assert_eq!(l.k, 2);
        assert!(l.interval.is_symmetric(1e-12));
        assert_eq!(l.chain.len(), 2);
    }

    #[test]
    fn chain_multiplicity() {
        let iv = |a: f64, b: f64| FiberInterval::new(a, b, 0).unwrap();
        let c = Chain::new(alloc::vec![iv(-0.5, 0.5), iv(0.1, 0.9), iv(0.2, 0.3), iv(0.5, 0.6)]);
        assert_eq!(c.intersection_multiplicity(), 3);
        assert_eq!(c.order(), 0);
        assert_eq!(c.critical_count(0..4), 1);
    }
}
