//! The principal nest, central cascades, Yoccoz profiles, successors and
//! the enhanced nest.

use alloc::vec;
use alloc::vec::Vec;

use crate::boxmap::{ExtendedMap, FiberInterval, FiberPoint};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::roots::scan_roots;
use crate::settings::Settings;

/// Why the principal nest stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NestStatus {
    DepthReached,
    /// The critical orbit returned to 0 (up to precision) at the last level.
    Superstable,
    /// `L_{c_0}(I_k) = I_k` and the return map has no orientation-reversing
    /// fixed point to restart from.
    NoRestart,
    /// The critical orbit did not return to the last level within the horizon.
    EntryNotFound,
    /// Pullbacks became too small for the working precision.
    PrecisionExhausted,
}

impl NestStatus {
    pub fn name(self) -> &'static str {
        match self {
            NestStatus::DepthReached => "depth-reached",
            NestStatus::Superstable => "superstable",
            NestStatus::NoRestart => "no-restart",
            NestStatus::EntryNotFound => "entry-not-found",
            NestStatus::PrecisionExhausted => "precision-exhausted",
        }
    }
}

/// `I_0 ⊋ I_1 ⊋ …` around `c_0`.
///
/// `I_{k+1} = L_{c_0}(I_k)` unless the landing component is `I_k` itself
/// (then `I_k` is a periodic interval); in that case `I_{k+1}` is the
/// symmetric interval bounded by the orientation-reversing fixed point of
/// the return map nearest 0, and `k + 1` is listed in `restarts`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalNest<T> {
    pub levels: Vec<FiberInterval<T>>,
    /// First-return time of `c_0` to each level.
    pub return_times: Vec<usize>,
    /// `R_{I_k}(c_0)`, the position of that return.
    pub return_points: Vec<T>,
    /// `|I_k| / |I_{k+1}|`.
    pub scaling_factors: Vec<T>,
    pub restarts: Vec<usize>,
    pub status: NestStatus,
}

impl<T: Real> PrincipalNest<T> {
    /// Number of levels below `I_0`.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Whether `R_{I_k}(c_0) ∈ I_{k+1}`.
    pub fn is_central(&self, k: usize) -> Option<bool> {
        let next = self.levels.get(k + 1)?;
        Some(next.contains_x(*self.return_points.get(k)?))
    }
}

fn superstable_return<T: Real>(image: T, level: &FiberInterval<T>) -> bool {
    image.abs() <= T::from_f64(1e-9) * level.length()
}

/// Modulus of the orientation-reversing fixed point of `F^r` (fiber 0) in
/// `(−w, w)` nearest 0. It may lie on either side: the rescaling of the
/// periodic interval can reverse orientation.
fn restart_point<T: Real>(f: &ExtendedMap<T>, r: usize, w: T, settings: &Settings) -> Option<T> {
    let base = f.base();
    let top = w * (T::one() - T::from_f64(1e-7));
    scan_roots(|x| base.iterate(0, x, r).0 - x, -w, w, settings.scan_cells)
        .into_iter()
        .filter(|&z| z != T::zero() && z.abs() < top && base.iterate_jet(0, z, r).d1 < T::zero())
        .map(|z| z.abs())
        .min_by(|a, b| a.total_cmp(b))
}

pub fn principal_nest<T: Real>(f: &ExtendedMap<T>, depth: usize, settings: &Settings) -> Result<PrincipalNest<T>> {
    if depth == 0 || depth > settings.nest_cap {
        return Err(Error::InvalidArgument("nest depth must be in 1..=nest_cap"));
    }
    let c0 = FiberPoint::critical(0);
    let mut nest = PrincipalNest {
        levels: vec![f.i0()],
        return_times: Vec::new(),
        return_points: Vec::new(),
        scaling_factors: Vec::new(),
        restarts: Vec::new(),
        status: NestStatus::DepthReached,
    };
    loop {
        let level = *nest.levels.last().expect("nonempty");
        let first = nest.levels.len() == 1;
        let entry = match f.first_entry(&[level], c0, settings.horizon, settings) {
            Ok(Some(e)) => e,
            Ok(None) if first => return Err(Error::EntryNotFound { horizon: settings.horizon }),
            Err(e) if first => return Err(e),
            _ => {
                nest.status = NestStatus::EntryNotFound;
                break;
            }
        };
        nest.return_times.push(entry.k);
        nest.return_points.push(entry.image.x);
        if nest.levels.len() > depth {
            break;
        }
        if superstable_return(entry.image.x, &level) {
            nest.status = NestStatus::Superstable;
            break;
        }
        let next = match f.orbit(c0, entry.k, settings).and_then(|o| f.pullback_along(&level, &o)) {
            Ok(comps) => comps[0],
            Err(Error::PullbackDegenerate { .. }) => {
                nest.status = NestStatus::PrecisionExhausted;
                break;
            }
            Err(e) => return Err(e),
        };
        let next = if next.approx_eq(&level, 1e-9) {
            match restart_point(f, entry.k, level.hi(), settings) {
                Some(z) => {
                    nest.restarts.push(nest.levels.len());
                    FiberInterval::symmetric(z, 0)?
                }
                None => {
                    nest.status = NestStatus::NoRestart;
                    break;
                }
            }
        } else {
            next
        };
        let floor = T::epsilon() * T::from_f64(1e3);
        if !(next.length() < level.length()) || next.length() <= floor {
            nest.status = NestStatus::PrecisionExhausted;
            break;
        }
        nest.levels.push(next);
    }
    nest.scaling_factors = nest
        .levels
        .windows(2)
        .map(|w| w[0].length() / w[1].length())
        .collect();
    Ok(nest)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CascadeKind {
    /// The return map has no fixed point on the central component.
    SaddleNode,
    Other,
}

impl CascadeKind {
    pub fn name(self) -> &'static str {
        match self {
            CascadeKind::SaddleNode => "saddle-node",
            CascadeKind::Other => "other",
        }
    }
}

/// Levels `start..=end` of the principal nest forming a central cascade.
/// Consecutive cascades share their boundary level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cascade {
    pub start: usize,
    pub end: usize,
    pub kind: CascadeKind,
    /// Ends at a non-central return (false only for a trailing segment).
    pub maximal: bool,
}

impl Cascade {
    /// Number of intervals `L` in the cascade.
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadeDecomposition {
    pub cascades: Vec<Cascade>,
    /// `m(1) < … < m(κ)`: levels `m` with `R_{I_{m−1}}(c_0) ∉ I_m`.
    pub non_central_moments: Vec<usize>,
    pub height: usize,
}

/// Grid size for the saddle-node sign scan.
pub const SADDLE_NODE_GRID: usize = 1024;

fn has_fixed_point<T: Real>(f: &ExtendedMap<T>, r: usize, b: &FiberInterval<T>) -> bool {
    let n = SADDLE_NODE_GRID;
    let mut prev: Option<bool> = None;
    for i in 0..n {
        let x = b.lo() + b.length() * T::from_f64((i as f64 + 0.5) / n as f64);
        let d = f.base().iterate(b.fiber(), x, r).0 - x;
        if d == T::zero() {
            return true;
        }
        let s = d < T::zero();
        if prev.is_some_and(|p| p != s) {
            return true;
        }
        prev = Some(s);
    }
    false
}

pub fn cascade_decomposition<T: Real>(
    f: &ExtendedMap<T>,
    nest: &PrincipalNest<T>,
    settings: &Settings,
) -> Result<CascadeDecomposition> {
    let n = nest.levels.len();
    if n == 1 && nest.status == NestStatus::Superstable {
        // The critical orbit returned to 0 before any non-central return.
        return Ok(CascadeDecomposition {
            cascades: Vec::new(),
            non_central_moments: Vec::new(),
            height: 0,
        });
    }
    if n < 2 {
        return Err(Error::InsufficientLevels { have: n, need: 2 });
    }
    let c0 = FiberPoint::critical(0);
    let mut moments = Vec::new();
    for k in 0..n - 1 {
        // Recompute the return rather than trusting the stored one.
        let entry = f
            .first_entry(&nest.levels[k..=k], c0, settings.horizon, settings)?
            .ok_or(Error::EntryNotFound { horizon: settings.horizon })?;
        if !nest.levels[k + 1].contains_x(entry.image.x) {
            moments.push(k + 1);
        }
    }
    let mut bounds = vec![0];
    bounds.extend(&moments);
    let mut cascades = Vec::new();
    for w in bounds.windows(2) {
        cascades.push((w[0], w[1], true));
    }
    let last = *bounds.last().expect("nonempty");
    if last < n - 1 {
        cascades.push((last, n - 1, false));
    }
    let cascades = cascades
        .into_iter()
        .map(|(start, end, maximal)| {
            let r = nest.return_times[start];
            // The central branch of the return map lives on L_{c_0}(B_1):
            // B_2 itself, or B_1 when B_2 came from a restart.
            let central = if nest.restarts.contains(&(start + 1)) {
                &nest.levels[start]
            } else {
                &nest.levels[start + 1]
            };
            let kind = if has_fixed_point(f, r, central) {
                CascadeKind::Other
            } else {
                CascadeKind::SaddleNode
            };
            Cascade {
                start,
                end,
                kind,
                maximal,
            }
        })
        .collect();
    Ok(CascadeDecomposition {
        cascades,
        height: moments.len(),
        non_central_moments: moments,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YoccozRow {
    pub j: usize,
    /// `|B_j ∖ B_{j+1}| / |B_1|`.
    pub ratio: f64,
    /// `ratio · min(j, L − j)²`.
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct YoccozProfile {
    pub rows: Vec<YoccozRow>,
    pub eta: f64,
    pub within_band: bool,
    pub ratio_sum: f64,
}

impl YoccozProfile {
    pub fn min_normalized(&self) -> f64 {
        self.rows.iter().map(|r| r.normalized).fold(f64::INFINITY, f64::min)
    }

    pub fn max_normalized(&self) -> f64 {
        self.rows.iter().map(|r| r.normalized).fold(0.0, f64::max)
    }
}

/// Profile of a cascade `B_1 ⊋ … ⊋ B_L` (`L ≥ 4`) against the band `[1/η, η]`.
pub fn yoccoz_profile<T: Real>(cascade: &[FiberInterval<T>], eta: f64) -> Result<YoccozProfile> {
    let l = cascade.len();
    if l < 4 {
        return Err(Error::InsufficientLevels { have: l, need: 4 });
    }
    if !(eta >= 1.0) {
        return Err(Error::InvalidArgument("eta must be at least 1"));
    }
    let top = cascade[0].length();
    let rows: Vec<YoccozRow> = (1..l)
        .map(|j| {
            let ratio = ((cascade[j - 1].length() - cascade[j].length()) / top).to_f64();
            let w = j.min(l - j) as f64;
            YoccozRow {
                j,
                ratio,
                normalized: ratio * w * w,
            }
        })
        .collect();
    let within_band = rows
        .iter()
        .all(|r| r.normalized >= 1.0 / eta && r.normalized <= eta);
    let ratio_sum = ((top - cascade[l - 1].length()) / top).to_f64();
    Ok(YoccozProfile {
        rows,
        eta,
        within_band,
        ratio_sum,
    })
}

/// A pullback of some reference interval together with its transfer time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pullback<T> {
    pub interval: FiberInterval<T>,
    /// `F^time` maps `interval` into the reference interval, boundary to boundary.
    pub time: usize,
}

/// `L̂_x(B)`: `B` itself when `x ∈ B`, else the landing component.
fn hat_landing<T: Real>(
    f: &ExtendedMap<T>,
    b: &FiberInterval<T>,
    x: FiberPoint<T>,
    settings: &Settings,
) -> Result<Pullback<T>> {
    if b.contains(x) {
        return Ok(Pullback { interval: *b, time: 0 });
    }
    let l = f.landing_component(&[*b], x, settings.horizon, settings)?;
    Ok(Pullback {
        interval: l.interval,
        time: l.k,
    })
}

/// The smallest successor `Γ(T)` of a symmetric interval `T` around its
/// critical point: the smallest `L̂_c(T̂)` over kids `T̂` of `L̂_{c'}(T)`.
///
/// A kid of `S` is a pullback of `S` containing a critical point whose
/// chain meets no critical point strictly between its ends. Candidates
/// equal to `T` are discarded.
pub fn successor<T: Real>(f: &ExtendedMap<T>, t: &FiberInterval<T>, settings: &Settings) -> Result<Pullback<T>> {
    if !t.contains_critical() {
        return Err(Error::InvalidArgument("successor needs an interval around a critical point"));
    }
    let n = f.n_type();
    let c = FiberPoint::critical(t.fiber());
    let horizon = settings.horizon;
    let orbits: Vec<Vec<FiberPoint<T>>> = (0..n)
        .map(|j| {
            let mut out = vec![FiberPoint::critical(j)];
            let mut q = out[0];
            for _ in 0..horizon {
                q = f.step(q);
                if !q.x.is_finite() || q.x.abs() > T::one() + T::from_f64(settings.escape_tol) {
                    break;
                }
                out.push(q);
            }
            out
        })
        .collect();
    let shrink = T::one() - T::from_f64(1e-9);
    let slack = T::from_f64(settings.isolation_tol) * t.length();
    let mut best: Option<Pullback<T>> = None;
    for cp in 0..n {
        let Ok(s) = hat_landing(f, t, FiberPoint::critical(cp), settings) else { continue };
        for orbit in &orbits {
            for end in 1..orbit.len() {
                if !s.interval.contains(orbit[end]) {
                    continue;
                }
                let Ok(comps) = f.pullback_along(&s.interval, &orbit[..=end]) else { continue };
                if comps[1..end].iter().any(|g| g.contains_critical()) {
                    continue;
                }
                let kid = comps[0];
                let Ok(succ) = hat_landing(f, &kid, c, settings) else { continue };
                let cand = Pullback {
                    interval: succ.interval,
                    time: succ.time + end + s.time,
                };
                if !(cand.interval.length() < t.length() * shrink) || !t.contains_interval(&cand.interval, slack) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(b) => {
                        let tie = T::from_f64(1e-12) * b.interval.length();
                        cand.interval.length() < b.interval.length() - tie
                    }
                };
                if better {
                    best = Some(cand);
                }
            }
        }
    }
    best.ok_or(Error::NoSuccessor { horizon })
}

/// Result of the `ν` selection for an interval `T ∋ c_0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuChoice<T> {
    pub nu: usize,
    /// `H(T) = Comp_c F^{−ν}(T)`.
    pub h: Pullback<T>,
    /// `G(T) = Comp_c F^{−ν}(L_{F^ν(c)}(T))`.
    pub g: Pullback<T>,
}

/// Smallest `ν ≥ 1` with `F^ν(c_0) ∈ T` whose chain meets the critical
/// set at most `N²` times and for which the sampled postcritical points in
/// `H(T)` all lie in `G(T)`.
pub fn select_nu<T: Real>(
    f: &ExtendedMap<T>,
    t: &FiberInterval<T>,
    orbit: &[FiberPoint<T>],
    settings: &Settings,
) -> Result<NuChoice<T>> {
    let n = f.n_type();
    for nu in 1..orbit.len() {
        if !t.contains(orbit[nu]) {
            continue;
        }
        let Ok(comps) = f.pullback_along(t, &orbit[..=nu]) else { continue };
        if comps[..nu].iter().filter(|g| g.contains_critical()).count() > n * n {
            continue;
        }
        let Ok(l) = f.landing_component(&[*t], orbit[nu], settings.horizon, settings) else { continue };
        let Ok(gcomps) = f.pullback_along(&l.interval, &orbit[..=nu]) else { continue };
        let (h, g) = (comps[0], gcomps[0]);
        if orbit[1..].iter().any(|p| h.contains(*p) && !g.contains(*p)) {
            continue;
        }
        return Ok(NuChoice {
            nu,
            h: Pullback { interval: h, time: nu },
            g: Pullback {
                interval: g,
                time: nu + l.k,
            },
        });
    }
    Err(Error::NuNotFound {
        horizon: orbit.len().saturating_sub(1),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnhancedNestReport<T> {
    pub e_levels: Vec<FiberInterval<T>>,
    /// `L_k = G(E_k)`.
    pub l_levels: Vec<FiberInterval<T>>,
    /// First-return time of `c_0` to `E_j`.
    pub r: Vec<usize>,
    /// Transfer times: `F^{m_j}(E_{j+1}) ⊆ E_j`, boundary to boundary.
    pub m: Vec<usize>,
    /// The `Np` the nest is run against.
    pub np: usize,
    /// Smallest `j` with `r_j = Np`, when reached.
    pub chi: Option<usize>,
    /// Why construction stopped early, if it did.
    pub stopped: Option<Error>,
}

/// Outcome of one of the integer inequalities on an enhanced nest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub checked: usize,
    /// Indices `j` where the inequality fails.
    pub violations: Vec<usize>,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Real> EnhancedNestReport<T> {
    /// Last index covered by the inequalities: `χ − 2`, or every computed
    /// index when `χ` was not reached.
    fn last_index(&self) -> Option<usize> {
        let bound = match self.chi {
            Some(chi) => chi.checked_sub(2)?,
            None => self.m.len().checked_sub(2)?,
        };
        Some(bound.min(self.m.len().saturating_sub(2)))
    }

    /// `m_{j+1} ≥ 2 m_j`.
    pub fn check_transfer_doubling(&self) -> InequalityCheck {
        let mut out = InequalityCheck {
            name: "m[j+1] >= 2 m[j]",
            checked: 0,
            violations: Vec::new(),
        };
        if let Some(last) = self.last_index() {
            for j in 0..=last {
                out.checked += 1;
                if self.m[j + 1] < 2 * self.m[j] {
                    out.violations.push(j);
                }
            }
        }
        out
    }

    /// `3 r_{j+1} ≥ m_j`.
    pub fn check_return_bound(&self) -> InequalityCheck {
        let mut out = InequalityCheck {
            name: "3 r[j+1] >= m[j]",
            checked: 0,
            violations: Vec::new(),
        };
        if let Some(last) = self.last_index() {
            for j in 0..=last.min(self.r.len().saturating_sub(2)) {
                out.checked += 1;
                if 3 * self.r[j + 1] < self.m[j] {
                    out.violations.push(j);
                }
            }
        }
        out
    }

    /// `Np ≥ Σ_{j ≤ χ−5} m_j`; `None` unless `χ ≥ 5`.
    pub fn check_period_bound(&self) -> Option<bool> {
        let chi = self.chi?;
        if chi < 5 {
            return None;
        }
        let sum: usize = self.m[..=chi - 5].iter().sum();
        Some(self.np >= sum)
    }
}

/// Verify `F^m(E') ⊆ E` with boundary mapped to boundary.
fn transfer_ok<T: Real>(f: &ExtendedMap<T>, inner: &FiberInterval<T>, outer: &FiberInterval<T>, m: usize) -> bool {
    let tol = T::from_f64(1e-6) * outer.length();
    let on_boundary = |x: T| (x - outer.lo()).abs() <= tol || (x - outer.hi()).abs() <= tol;
    let (a, fa) = f.base().iterate(inner.fiber(), inner.lo(), m);
    let (b, fb) = f.base().iterate(inner.fiber(), inner.hi(), m);
    fa == outer.fiber() && fb == outer.fiber() && on_boundary(a) && on_boundary(b)
}

/// `E_0 = I_0`, `E_{k+1} = Γ^{5N}(H(G(E_k)))`, run until the return time
/// reaches `np` or `k_max` levels are built.
pub fn enhanced_nest<T: Real>(
    f: &ExtendedMap<T>,
    np: usize,
    k_max: usize,
    settings: &Settings,
) -> Result<EnhancedNestReport<T>> {
    let n = f.n_type();
    if np == 0 || np % n != 0 {
        return Err(Error::InvalidArgument("Np must be a positive multiple of N"));
    }
    let c0 = FiberPoint::critical(0);
    let orbit = f.orbit(c0, settings.horizon, settings)?;
    let mut report = EnhancedNestReport {
        e_levels: vec![f.i0()],
        l_levels: Vec::new(),
        r: Vec::new(),
        m: Vec::new(),
        np,
        chi: None,
        stopped: None,
    };
    for j in 0..=k_max {
        let e = *report.e_levels.last().expect("nonempty");
        let ret = f
            .first_entry(&[e], c0, settings.horizon, settings)?
            .ok_or(Error::EntryNotFound { horizon: settings.horizon })?;
        report.r.push(ret.k);
        if ret.k == np {
            report.chi = Some(j);
            break;
        }
        if ret.k > np || j == k_max {
            break;
        }
        let step = (|| -> Result<(FiberInterval<T>, Pullback<T>)> {
            let g = select_nu(f, &e, &orbit, settings)?.g;
            let h = select_nu(f, &g.interval, &orbit, settings)?.h;
            let mut cur = Pullback {
                interval: h.interval,
                time: h.time + g.time,
            };
            for _ in 0..5 * n {
                let s = successor(f, &cur.interval, settings)?;
                cur = Pullback {
                    interval: s.interval,
                    time: cur.time + s.time,
                };
            }
            Ok((g.interval, cur))
        })();
        match step {
            Ok((l, next)) => {
                if !transfer_ok(f, &next.interval, &e, next.time) {
                    report.stopped = Some(Error::PrecisionExhausted("transfer map does not send boundary to boundary"));
                    break;
                }
                report.l_levels.push(l);
                report.m.push(next.time);
                report.e_levels.push(next.interval);
            }
            Err(err) => {
                report.stopped = Some(err);
                break;
            }
        }
    }
    Ok(report)
}

/// Largest scaling factor over the computed nest: a lower bound for the
/// limit scaling factor, taken over enumerated intervals only.
pub fn limit_scaling_estimate<T: Real>(nest: &PrincipalNest<T>) -> Option<T> {
    nest.scaling_factors
        .iter()
        .copied()
        .fold(None, |m: Option<T>, x| Some(m.map_or(x, |m| m.max(x))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxmap::extend;
    use crate::map::build_quadratic_family;

    fn ext(b: f64) -> ExtendedMap<f64> {
        extend(&build_quadratic_family(&[b]).unwrap(), &Settings::default()).unwrap()
    }

    #[test]
    fn golden_parameter_is_superstable() {
        let f = ext(-(1.0 + 5f64.sqrt()) / 2.0);
        let nest = principal_nest(&f, 8, &Settings::default()).unwrap();
        assert_eq!(nest.return_times[0], 2);
        assert_eq!(nest.status, NestStatus::Superstable);
    }

    #[test]
    fn chebyshev_has_no_first_level() {
        let f = ext(-2.0);
        assert!(matches!(
            principal_nest(&f, 4, &Settings::default()),
            Err(Error::EntryNotFound { .. })
        ));
    }

    #[test]
    fn yoccoz_small_table() {
        let iv: Vec<FiberInterval<f64>> = [1.0, 0.5, 0.3, 0.2]
            .iter()
            .map(|&w| FiberInterval::symmetric(w, 0).unwrap())
            .collect();
        let p = yoccoz_profile(&iv, 20.0).unwrap();
        assert_eq!(p.rows.len(), 3);
        let mins: Vec<usize> = p.rows.iter().map(|r| r.j.min(4 - r.j)).collect();
        assert_eq!(mins, [1, 2, 1]);
        assert!((p.rows[1].normalized - 0.8).abs() < 1e-12);
        assert!(p.ratio_sum <= 1.0);
        assert!(yoccoz_profile(&iv[..3], 20.0).is_err());
    }
}
