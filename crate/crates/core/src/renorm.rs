//! Restrictive (periodic) intervals and the renormalization operator.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::affine::AffineMap;
use crate::boxmap::{extend_shared, ExtendedMap, FiberInterval, FiberPoint};
use crate::combinatorics::{canonical_form, extract, Combinatorics};
use crate::error::{Error, Result};
use crate::map::{validate, IterateSegment, MultimodalMap, Provenance, UnimodalFactor};
use crate::real::Real;
use crate::roots::scan_roots;
use crate::settings::Settings;

/// A symmetric interval `J ∋ 0` on fiber 0 with `F^k(J) ⊆ J`, pairwise
/// disjoint iterates and exactly one visit to each critical fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicInterval<T> {
    j: FiberInterval<T>,
    /// The periodic endpoint `z_0` of `J` (`F^k(z_0) = z_0`).
    boundary: T,
    p: usize,
    k: usize,
    /// `visit_times[f]`: the `m_f` with `c_f ∈ F^{m_f}(J)`.
    visit_times: Vec<usize>,
    /// `F^i(J)` for `0 ≤ i < k`.
    orbit: Vec<FiberInterval<T>>,
}

impl<T: Real> PeriodicInterval<T> {
    pub fn j(&self) -> &FiberInterval<T> {
        &self.j
    }

    pub fn boundary_point(&self) -> T {
        self.boundary
    }

    /// Renormalization period of `f`.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Period `k = N·p` of the extended map.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn visit_times(&self) -> &[usize] {
        &self.visit_times
    }

    pub fn orbit(&self) -> &[FiberInterval<T>] {
        &self.orbit
    }

    /// Visit times in increasing order; fiber `r` of the renormalized map
    /// is the critical fiber visited `r`-th.
    pub fn visit_order(&self) -> Vec<usize> {
        let mut t = self.visit_times.clone();
        t.sort_unstable();
        t
    }
}

/// Why a candidate interval failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    NotInvariant,
    Overlap,
    CriticalVisits,
    AmbiguousVisit,
    Degenerate,
    /// A rescaled critical value lands on the wrong side of 0 (the return
    /// map would have `f_j(0) < 0`).
    CriticalValueSide,
}

/// Check the four defining conditions for `J = (−w, w)` and period `p`.
pub fn check_candidate<T: Real>(
    f: &ExtendedMap<T>,
    half_width: T,
    p: usize,
    settings: &Settings,
) -> core::result::Result<PeriodicInterval<T>, Rejection> {
    let n = f.n_type();
    let k = n * p;
    if p < 2 {
        return Err(Rejection::Degenerate);
    }
    let w = half_width.abs();
    let j = FiberInterval::symmetric(w, 0).map_err(|_| Rejection::Degenerate)?;
    if !(w > T::epsilon() * T::from_f64(1e3)) || w >= T::one() {
        return Err(Rejection::Degenerate);
    }
    let mut orbit = Vec::with_capacity(k);
    orbit.push(j);
    let mut cur = j;
    for i in 1..=k {
        let (lo, hi, fiber) = f.image_interval(&cur);
        if i == k {
            let tol = T::from_f64(settings.snap_tol) * j.length();
            if lo < -w - tol || hi > w + tol {
                return Err(Rejection::NotInvariant);
            }
            break;
        }
        cur = FiberInterval::new(lo, hi, fiber).map_err(|_| Rejection::Degenerate)?;
        orbit.push(cur);
    }
    for fiber in 0..n {
        let mut on: Vec<&FiberInterval<T>> = orbit.iter().filter(|iv| iv.fiber() == fiber).collect();
        on.sort_by(|a, b| a.lo().total_cmp(&b.lo()));
        for w2 in on.windows(2) {
            let tol = T::from_f64(settings.boundary_margin) * w2[0].length().max(w2[1].length());
            if w2[0].overlap(w2[1]) > tol {
                return Err(Rejection::Overlap);
            }
        }
    }
    let mut visit_times = vec![usize::MAX; n];
    visit_times[0] = 0;
    for (i, iv) in orbit.iter().enumerate().skip(1) {
        let margin = T::from_f64(settings.boundary_margin) * iv.length();
        let inside = iv.lo() < -margin && iv.hi() > margin;
        let near = !inside && iv.lo() <= margin && iv.hi() >= -margin;
        if near {
            return Err(Rejection::AmbiguousVisit);
        }
        if inside {
            let fiber = iv.fiber();
            if visit_times[fiber] != usize::MAX {
                return Err(Rejection::CriticalVisits);
            }
            visit_times[fiber] = i;
        }
    }
    if visit_times.contains(&usize::MAX) {
        return Err(Rejection::CriticalVisits);
    }
    // The periodic endpoint: the one whose orbit returns to itself.
    let (zp, _) = f.base().iterate(0, w, k);
    let (zm, _) = f.base().iterate(0, -w, k);
    let boundary = if (zp - w).abs() <= (zm + w).abs() { w } else { -w };
    let mut order = visit_times.clone();
    order.sort_unstable();
    for r in 0..n {
        let next = if r + 1 < n { order[r + 1] } else { k };
        let (v, _) = f.base().iterate(order[r] % n, T::zero(), next - order[r]);
        let (z, _) = f.base().iterate(0, boundary, next);
        if v / z > T::from_f64(settings.eval_tol) {
            return Err(Rejection::CriticalValueSide);
        }
    }
    Ok(PeriodicInterval {
        j,
        boundary,
        p,
        k,
        visit_times,
        orbit,
    })
}

/// Candidate half-widths for period `p`, largest first: moduli of the
/// roots of `F^{Np}(x) − x` on fiber 0.
fn candidates<T: Real>(f: &ExtendedMap<T>, p: usize, settings: &Settings) -> Vec<T> {
    let k = f.n_type() * p;
    let base = f.base();
    let mut w: Vec<T> = scan_roots(|x| base.iterate(0, x, k).0 - x, -T::one(), T::one(), settings.scan_cells)
        .into_iter()
        .map(|z| z.abs())
        .filter(|z| *z > T::zero() && *z < T::one())
        .collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w.dedup_by(|a, b| (*a - *b).abs() <= T::from_f64(settings.isolation_tol) * b.abs());
    w
}

/// Restrictive interval of the smallest period `2 ≤ p ≤ max_period`.
pub fn find_periodic_interval<T: Real>(
    f: &ExtendedMap<T>,
    max_period: usize,
    settings: &Settings,
) -> Result<Option<PeriodicInterval<T>>> {
    for p in 2..=max_period {
        if let Some(pi) = periodic_interval_with_period(f, p, settings) {
            return Ok(Some(pi));
        }
    }
    Ok(None)
}

/// The maximal restrictive interval of period exactly `p`, if any.
pub fn periodic_interval_with_period<T: Real>(
    f: &ExtendedMap<T>,
    p: usize,
    settings: &Settings,
) -> Option<PeriodicInterval<T>> {
    candidates(f, p, settings)
        .into_iter()
        .find_map(|w| check_candidate(f, w, p, settings).ok())
}

/// One application of the renormalization operator.
#[derive(Clone, Debug)]
pub struct RenormResult<T> {
    pub source: Arc<MultimodalMap<T>>,
    pub periodic: PeriodicInterval<T>,
    /// `A_r` for the critical fibers in visit order (`A_0` first).
    pub normalizers: Vec<AffineMap<T>>,
    pub renormalized: MultimodalMap<T>,
    pub combinatorics: Combinatorics,
}

fn tower_depth<T: Real>(map: &MultimodalMap<T>) -> usize {
    match map.provenance() {
        Provenance::Tower { depth } => *depth,
        _ => 0,
    }
}

/// Assemble the normalized first-return map from a verified interval.
pub fn renormalize_with<T: Real>(
    f: &ExtendedMap<T>,
    periodic: PeriodicInterval<T>,
    settings: &Settings,
) -> Result<RenormResult<T>> {
    let n = f.n_type();
    let base = f.base_arc().clone();
    let order = periodic.visit_order();
    let k = periodic.k();
    let z0 = periodic.boundary_point();
    let mut normalizers = Vec::with_capacity(n);
    for &t in &order {
        let (z, _) = base.iterate(0, z0, t);
        normalizers.push(AffineMap::sending(z, -T::one())?);
    }
    let mut factors = Vec::with_capacity(n);
    for r in 0..n {
        let start = order[r];
        let end = if r + 1 < n { order[r + 1] } else { k };
        let seg = IterateSegment::new(
            base.clone(),
            start % n,
            end - start,
            normalizers[r],
            normalizers[(r + 1) % n],
        )?;
        factors.push(UnimodalFactor::IterateSegment(seg));
    }
    let renormalized = MultimodalMap::new(
        factors,
        Provenance::Tower {
            depth: tower_depth(&base) + 1,
        },
    )?;
    let report = validate(&renormalized, settings);
    if !report.passed() {
        return Err(Error::ValidationFailure(format!("{:?}", report.failures())));
    }
    let combinatorics = canonical_form(&extract(f, &periodic)?)?;
    Ok(RenormResult {
        source: base,
        periodic,
        normalizers,
        renormalized,
        combinatorics,
    })
}

/// `Rf` for the smallest admissible period.
pub fn renormalize<T: Real>(map: &MultimodalMap<T>, settings: &Settings) -> Result<RenormResult<T>> {
    let f = extend_shared(Arc::new(map.clone()), settings)?;
    let pi = find_periodic_interval(&f, settings.max_period, settings)?.ok_or(
        Error::NotRenormalizable {
            max_period: settings.max_period,
        },
    )?;
    renormalize_with(&f, pi, settings)
}

#[derive(Clone, Debug)]
pub struct Tower<T> {
    pub levels: Vec<RenormResult<T>>,
    /// Why the tower stopped before the requested depth, if it did.
    pub stopped: Option<Error>,
}

impl<T: Real> Tower<T> {
    /// `R^d f` for `d ≤ levels.len()` (`d = 0` is the input).
    pub fn level_map(&self, d: usize) -> Option<&MultimodalMap<T>> {
        if d == 0 {
            self.levels.first().map(|l| &*l.source)
        } else {
            self.levels.get(d - 1).map(|l| &l.renormalized)
        }
    }

    pub fn word(&self) -> Vec<Combinatorics> {
        self.levels.iter().map(|l| l.combinatorics.clone()).collect()
    }
}

/// Renormalize repeatedly, up to `depth` times.
pub fn renorm_tower<T: Real>(map: &MultimodalMap<T>, depth: usize, settings: &Settings) -> Tower<T> {
    let mut levels: Vec<RenormResult<T>> = Vec::new();
    let mut current = map.clone();
    let mut stopped = None;
    while levels.len() < depth {
        match renormalize(&current, settings) {
            Ok(r) => {
                current = r.renormalized.clone();
                levels.push(r);
            }
            Err(e) => {
                stopped = Some(e);
                break;
            }
        }
    }
    Tower { levels, stopped }
}

/// Pull the symmetric interval `(−1, 1)` of level `d` back to level-0
/// coordinates: its half-width there.
pub fn level_half_width<T: Real>(tower: &Tower<T>, d: usize) -> T {
    let mut w = T::one();
    for level in tower.levels.iter().take(d).rev() {
        w = level.normalizers[0].apply_inverse(w).abs();
    }
    w
}

/// The point `(x, 0)` of level `d` seen in level-0 coordinates.
pub fn to_level_zero<T: Real>(tower: &Tower<T>, d: usize, x: T) -> FiberPoint<T> {
    let mut y = x;
    for level in tower.levels.iter().take(d).rev() {
        y = level.normalizers[0].apply_inverse(y);
    }
    FiberPoint::new(y, 0)
}
