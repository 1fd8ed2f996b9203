//! Tuning quadratic-family parameters to prescribed combinatorics words,
//! Feigenbaum constants, and the measured renormalization contraction.

use alloc::vec;
use alloc::vec::Vec;

use crate::boxmap::extend;
use crate::combinatorics::{product, Combinatorics};
use crate::error::{Error, Result};
use crate::map::{build_quadratic_family, MultimodalMap};
use crate::real::Real;
use crate::renorm::{find_periodic_interval, renorm_tower, Tower};
use crate::roots::{bisect, scan_roots};
use crate::settings::Settings;

/// A box of parameters `b ∈ ∏ [lower_j, upper_j] ⊆ [−2, −1]^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub n_type: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl FamilySpec {
    /// The full admissible box `[−2, −1]^N`.
    pub fn standard(n_type: usize) -> Self {
        FamilySpec {
            n_type,
            lower: vec![-2.0; n_type],
            upper: vec![-1.0; n_type],
        }
    }

    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let spec = FamilySpec {
            n_type: lower.len(),
            lower,
            upper,
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.n_type == 0 || self.lower.len() != self.n_type || self.upper.len() != self.n_type {
            return Err(Error::InvalidArgument("parameter box dimension mismatch"));
        }
        for (&lo, &hi) in self.lower.iter().zip(&self.upper) {
            if !(lo < hi) || lo < -2.0 || hi > -1.0 {
                return Err(Error::InvalidArgument("parameter box must be nonempty and inside [-2,-1]^N"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TuneMethod {
    Bisection,
    Newton,
}

impl TuneMethod {
    pub fn name(self) -> &'static str {
        match self {
            TuneMethod::Bisection => "bisection",
            TuneMethod::Newton => "newton",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneResult<T> {
    pub b: Vec<T>,
    /// The word read back from the renormalization tower at `b`.
    pub word: Vec<Combinatorics>,
    /// Distance of the deepest critical return from 0.
    pub residual: T,
    pub method: TuneMethod,
    /// Final bisection bracket (bisection only).
    pub bracket_width: Option<T>,
    /// Set for Newton results, which carry no bracketing certificate.
    pub best_effort: bool,
}

/// Product of the word's letters: the combinatorics of the deepest return.
pub fn word_product(word: &[Combinatorics]) -> Result<Combinatorics> {
    let (first, rest) = word
        .split_first()
        .ok_or(Error::InvalidArgument("word must have at least one letter"))?;
    rest.iter().try_fold(first.clone(), |acc, c| product(&acc, c))
}

/// Realized word and whether the tower was cut short by a failed validation
/// (numerical precision rather than combinatorics).
fn verify<T: Real>(b: &[T], word: &[Combinatorics], settings: &Settings) -> Result<(Vec<Combinatorics>, bool)> {
    let map = build_quadratic_family(b)?;
    let tower = renorm_tower(&map, word.len(), settings);
    let truncated = tower.levels.len() < word.len() && matches!(tower.stopped, Some(Error::ValidationFailure(_)));
    Ok((tower.word(), truncated))
}

fn check_word(family: &FamilySpec, word: &[Combinatorics], settings: &Settings) -> Result<usize> {
    family.check()?;
    let total = word_product(word)?;
    if let Some(c) = word.iter().find(|c| c.n_type() != family.n_type) {
        return Err(Error::NMismatch {
            left: family.n_type,
            right: c.n_type(),
        });
    }
    let budget = settings.orbit_cap.min(1 << 16);
    if total.cycle_len() > budget {
        return Err(Error::InvalidArgument("total period exceeds the tuning budget"));
    }
    Ok(total.m())
}

/// Parameter whose tower realizes `word` with a superstable deepest level.
pub fn superstable_parameter<T: Real>(
    family: &FamilySpec,
    word: &[Combinatorics],
    settings: &Settings,
) -> Result<TuneResult<T>> {
    check_word(family, word, settings)?;
    if family.n_type == 1 {
        let mut all = tune_prefixes(family, word, settings)?;
        Ok(all.pop().expect("nonempty word"))
    } else {
        tune_newton(family, word, settings)
    }
}

/// `P_b^P(0)` for N = 1.
fn return_value<T: Real>(b: T, period: usize) -> T {
    let c = -b - T::one();
    let mut x = T::zero();
    for _ in 0..period {
        x = b * x * x + c;
    }
    x
}

/// Tune every prefix of `word` in turn (N = 1); each prefix seeds the search
/// window of the next.
pub fn tune_prefixes<T: Real>(
    family: &FamilySpec,
    word: &[Combinatorics],
    settings: &Settings,
) -> Result<Vec<TuneResult<T>>> {
    check_word(family, word, settings)?;
    if family.n_type != 1 {
        return Err(Error::InvalidArgument("prefix tuning is for N = 1"));
    }
    let (lo_box, hi_box) = (T::from_f64(family.lower[0]), T::from_f64(family.upper[0]));
    let mut out: Vec<TuneResult<T>> = Vec::with_capacity(word.len());
    let mut anchors: Vec<T> = vec![-T::one()];
    for len in 1..=word.len() {
        let prefix = &word[..len];
        let period = word_product(prefix)?.m();
        let center = *anchors.last().expect("nonempty");
        let (lo, hi) = if len == 1 {
            (lo_box, hi_box)
        } else {
            let prev = anchors[anchors.len() - 2];
            let s = (center - prev).abs() * T::from_f64(2.0);
            ((center - s).max(lo_box), (center + s).min(hi_box))
        };
        let g = |b: T| return_value(b, period);
        let cells = settings.scan_cells.max(64 * period.min(64));
        let mut roots = scan_roots(g, lo, hi, cells);
        roots.sort_by(|a, b| (*a - center).abs().total_cmp(&(*b - center).abs()));
        let mut found = None;
        let mut truncated = false;
        for r in roots {
            let (got, cut) = verify(&[r], prefix, settings)?;
            truncated |= cut;
            if got == prefix {
                found = Some(r);
                break;
            }
        }
        let root = match found {
            Some(r) => r,
            None if truncated => return Err(Error::PrecisionExhausted("verification towers fail validation")),
            None => return Err(Error::NotFoundInBox),
        };
        // Re-bracket tightly around the verified root for the certificate.
        let h = (root.abs() * T::epsilon() * T::from_f64(64.0)).max(T::epsilon());
        let (mut a, mut b) = (root - h, root + h);
        let mut grow = 0;
        while (g(a) < T::zero()) == (g(b) < T::zero()) && g(a) != T::zero() && grow < 60 {
            a -= h * T::from_f64((1u64 << grow.min(50)) as f64);
            b += h * T::from_f64((1u64 << grow.min(50)) as f64);
            grow += 1;
        }
        let (bl, br) = if (g(a) < T::zero()) != (g(b) < T::zero()) {
            bisect(g, a, b)
        } else {
            (root, root)
        };
        let b_star = (bl + br).half();
        anchors.push(b_star);
        out.push(TuneResult {
            b: vec![b_star],
            word: prefix.to_vec(),
            residual: g(b_star).abs(),
            method: TuneMethod::Bisection,
            bracket_width: Some(br - bl),
            best_effort: false,
        });
    }
    Ok(out)
}

/// Residuals `F^k(c_j)` for every critical fiber `j`: zero when each
/// critical point is periodic of period `k`.
///
/// Asking instead for `c_0` to pass through every `c_j` puts `c_j` on the
/// boundary of its restrictive image (it is a critical value there), which
/// the renormalization checks treat as ambiguous.
fn critical_residuals<T: Real>(b: &[T], k: usize) -> Option<Vec<T>> {
    let map = build_quadratic_family(b).ok()?;
    let out: Vec<T> = (0..map.n_type()).map(|j| map.iterate(j, T::zero(), k).0).collect();
    out.iter().all(|v| v.is_finite()).then_some(out)
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn solve_linear<T: Real>(mut a: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == T::zero() {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[row][c] -= factor * v;
            }
            let v = rhs[col];
            rhs[row] -= factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for c in row + 1..n {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Damped Newton with a finite-difference Jacobian from a grid of seeds.
fn tune_newton<T: Real>(family: &FamilySpec, word: &[Combinatorics], settings: &Settings) -> Result<TuneResult<T>> {
    let n = family.n_type;
    let total = word_product(word)?;
    let k = total.cycle_len();
    let per_dim: usize = match n {
        2 => 16,
        3 => 7,
        _ => 4,
    };
    let seeds = per_dim.pow(n as u32);
    let lo: Vec<T> = family.lower.iter().map(|&v| T::from_f64(v)).collect();
    let hi: Vec<T> = family.upper.iter().map(|&v| T::from_f64(v)).collect();
    let clamp = |b: &mut Vec<T>| {
        for j in 0..n {
            b[j] = b[j].max(lo[j]).min(hi[j]);
        }
    };
    let tol = T::from_f64(1e3) * T::epsilon();
    let mut tried: Vec<Vec<T>> = Vec::new();
    for s in 0..seeds {
        let mut b: Vec<T> = (0..n)
            .map(|j| {
                let i = (s / per_dim.pow(j as u32)) % per_dim;
                let t = T::from_f64((i as f64 + 0.5) / per_dim as f64);
                lo[j] + (hi[j] - lo[j]) * t
            })
            .collect();
        let Some(mut r) = critical_residuals(&b, k) else { continue };
        for _ in 0..80 {
            let res = max_abs(&r);
            if res <= tol {
                break;
            }
            let mut jac = vec![vec![T::zero(); n]; n];
            for j in 0..n {
                let h = T::from_f64(1e-7).max(b[j].abs() * T::epsilon().sqrt());
                let mut bp = b.clone();
                bp[j] += h;
                let Some(rp) = critical_residuals(&bp, k) else { break };
                for i in 0..n {
                    jac[i][j] = (rp[i] - r[i]) / h;
                }
            }
            let Some(step) = solve_linear(jac, r.clone()) else { break };
            let mut lambda = T::one();
            let mut improved = false;
            for _ in 0..12 {
                let mut trial: Vec<T> = b.iter().zip(&step).map(|(&x, &d)| x - lambda * d).collect();
                clamp(&mut trial);
                if let Some(rt) = critical_residuals(&trial, k) {
                    if max_abs(&rt) < res {
                        b = trial;
                        r = rt;
                        improved = true;
                        break;
                    }
                }
                lambda *= T::from_f64(0.5);
            }
            if !improved {
                break;
            }
        }
        let res = max_abs(&r);
        if res > T::from_f64(1e-9) {
            continue;
        }
        if tried
            .iter()
            .any(|t| t.iter().zip(&b).all(|(x, y)| (*x - *y).abs() < T::from_f64(1e-9)))
        {
            continue;
        }
        tried.push(b.clone());
        if verify(&b, word, settings)?.0 == word {
            return Ok(TuneResult {
                b,
                word: word.to_vec(),
                residual: res,
                method: TuneMethod::Newton,
                bracket_width: None,
                best_effort: true,
            });
        }
    }
    Err(Error::NotFoundInBox)
}

/// Superstable parameters `b_0 = −1, b_1, …, b_{n_max}` of the doubling
/// cascade and the ratios `δ_n = (b_{n−1} − b_{n−2}) / (b_n − b_{n−1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaTable<T> {
    pub b: Vec<T>,
    pub bracket_widths: Vec<T>,
    /// `(n, δ_n)` for `n = 2..=n_max`.
    pub delta: Vec<(usize, T)>,
}

pub fn feigenbaum_delta<T: Real>(family: &FamilySpec, n_max: usize, settings: &Settings) -> Result<DeltaTable<T>> {
    if family.n_type != 1 {
        return Err(Error::InvalidArgument("the doubling cascade is tuned for N = 1"));
    }
    if n_max < 3 {
        return Err(Error::InvalidArgument("n_max must be at least 3"));
    }
    let word = vec![Combinatorics::doubling(); n_max];
    let tuned = tune_prefixes::<T>(family, &word, settings)?;
    // b_0: the superstable fixed point, P_b(0) = 0.
    let b0 = scan_roots(|b: T| return_value(b, 1), T::from_f64(family.lower[0]), T::from_f64(family.upper[0]), 64)
        .pop()
        .ok_or(Error::NotFoundInBox)?;
    let mut b = vec![b0];
    let mut widths = vec![T::zero()];
    for t in &tuned {
        b.push(t.b[0]);
        widths.push(t.bracket_width.unwrap_or(T::zero()));
    }
    let delta = (2..=n_max)
        .map(|n| (n, (b[n - 1] - b[n - 2]) / (b[n] - b[n - 1])))
        .collect();
    Ok(DeltaTable {
        b,
        bracket_widths: widths,
        delta,
    })
}

/// A saddle-node bifurcation of the N = 1 family: `P_b^p(x) = x` and
/// `(P_b^p)'(x) = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleNode<T> {
    pub b: T,
    pub x: T,
    pub residual: T,
}

/// Birth of period-`period` orbits nearest `b = −1`: located by counting
/// roots of `P_b^p(x) − x` along `b`, then polished by Newton on the pair
/// `g = 0, g' = 0` in `(x, b)`.
pub fn saddle_node_parameter<T: Real>(period: usize, settings: &Settings) -> Result<SaddleNode<T>> {
    if period < 2 {
        return Err(Error::InvalidArgument("saddle-node search needs period >= 2"));
    }
    let cells = settings.scan_cells.max(256 * period);
    let g = |b: T, x: T| return_map(b, x, period) - x;
    let roots = |b: T| scan_roots(|x| g(b, x), -T::one(), T::one(), cells);
    let steps = 512;
    let b_at = |i: usize| -T::one() - T::from_usize(i) / T::from_usize(steps);
    let mut prev = roots(b_at(0)).len();
    let mut bracket = None;
    for i in 1..=steps {
        let now = roots(b_at(i)).len();
        if now > prev {
            bracket = Some((b_at(i - 1), b_at(i), prev));
            break;
        }
        prev = now;
    }
    let (mut few, mut more, base) = bracket.ok_or(Error::NotFoundInBox)?;
    for _ in 0..40 {
        let mid = (few + more).half();
        if roots(mid).len() > base {
            more = mid;
        } else {
            few = mid;
        }
    }
    // The newborn pair: the closest adjacent roots.
    let r = roots(more);
    let (mut x, _) = r
        .windows(2)
        .map(|w| ((w[0] + w[1]).half(), w[1] - w[0]))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::NotFoundInBox)?;
    let mut b = more;
    let h = T::from_f64(1e-7);
    for _ in 0..60 {
        let j = jet_of(b, x, period);
        let (g1, g2) = (j.v - x, j.d1 - T::one());
        let jp = jet_of(b + h, x, period);
        let jm = jet_of(b - h, x, period);
        let two_h = h + h;
        let (g1b, g2b) = ((jp.v - jm.v) / two_h, (jp.d1 - jm.d1) / two_h);
        let sol = solve_linear(vec![vec![g2, g1b], vec![j.d2, g2b]], vec![-g1, -g2])
            .ok_or(Error::PrecisionExhausted("singular saddle-node Jacobian"))?;
        x += sol[0];
        b += sol[1];
        if sol[1].abs() <= T::epsilon() * T::from_f64(4.0) && sol[0].abs() <= T::epsilon() * T::from_f64(4.0) {
            break;
        }
    }
    let j = jet_of(b, x, period);
    Ok(SaddleNode {
        b,
        x,
        residual: (j.v - x).abs().max((j.d1 - T::one()).abs()),
    })
}

fn return_map<T: Real>(b: T, x: T, period: usize) -> T {
    let c = -b - T::one();
    (0..period).fold(x, |y, _| b * y * y + c)
}

fn jet_of<T: Real>(b: T, x: T, period: usize) -> crate::map::Jet<T> {
    let c = -b - T::one();
    let mut j = crate::map::Jet::variable(x);
    for _ in 0..period {
        let y = j.v;
        j = j.then(crate::map::Jet {
            v: b * y * y + c,
            d1: (b + b) * y,
            d2: b + b,
        });
    }
    j
}

/// Aitken extrapolation of the doubling cascade.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Accumulation<T> {
    pub b: T,
    /// Bisection bracket of the last superstable parameter used.
    pub bracket_width: T,
    /// Size of the Aitken correction applied to the last parameter.
    pub correction: T,
}

pub fn accumulation_parameter<T: Real>(n_max: usize, settings: &Settings) -> Result<Accumulation<T>> {
    let table = feigenbaum_delta::<T>(&FamilySpec::standard(1), n_max, settings)?;
    let b = &table.b;
    let (x0, x1, x2) = (b[n_max - 2], b[n_max - 1], b[n_max]);
    let d1 = x2 - x1;
    let d0 = x1 - x0;
    let correction = -(d1 * d1) / (d1 - d0);
    Ok(Accumulation {
        b: x2 + correction,
        bracket_width: table.bracket_widths[n_max],
        correction: correction.abs(),
    })
}

/// Ratios `|J_{n−1}| / |J_n|` of consecutive restrictive intervals in
/// level-0 coordinates, `n = 1..=depth`.
pub fn feigenbaum_alpha<T: Real>(map: &MultimodalMap<T>, depth: usize, settings: &Settings) -> Result<Vec<T>> {
    let tower = renorm_tower(map, depth, settings);
    if tower.levels.len() < depth {
        return Err(tower.stopped.unwrap_or(Error::NotRenormalizable {
            max_period: settings.max_period,
        }));
    }
    let mut ratios = Vec::with_capacity(depth);
    for d in 1..=depth {
        let level = tower.level_map(d).expect("level exists");
        let z = if d < tower.levels.len() {
            tower.levels[d].periodic.boundary_point()
        } else {
            let f = extend(level, settings)?;
            find_periodic_interval(&f, settings.max_period, settings)?
                .ok_or(Error::NotRenormalizable {
                    max_period: settings.max_period,
                })?
                .boundary_point()
        };
        // In level-d coordinates J_{d−1} is (−1, 1) and J_d is (−|z|, |z|).
        ratios.push(T::one() / z.abs());
    }
    Ok(ratios)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitStatus {
    Fitted,
    /// Every distance vanished: the maps coincide.
    ExactCoincidence,
    /// Fewer than two distances above the precision floor.
    Insufficient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionFit {
    /// `d_k = max |R^k f − R^k g|` over the sample grid, `k = 0..=depth`.
    pub distances: Vec<f64>,
    /// Number of leading distances used by the fit (those above the floor).
    pub used: usize,
    pub lambda: f64,
    pub c: f64,
    pub r_squared: f64,
    pub status: FitStatus,
}

/// Distances below this are treated as numerically zero.
pub const PRECISION_FLOOR: f64 = 1e-12;

/// Least-squares fit of `ln d_k ≈ ln C + k ln λ`.
pub fn fit_log_linear(distances: &[f64]) -> ContractionFit {
    let pts: Vec<(f64, f64)> = distances
        .iter()
        .enumerate()
        .take_while(|(_, &d)| d > PRECISION_FLOOR)
        .map(|(k, &d)| (k as f64, libm::log(d)))
        .collect();
    let used = pts.len();
    if distances.iter().all(|&d| d == 0.0) {
        return ContractionFit {
            distances: distances.to_vec(),
            used: 0,
            lambda: 0.0,
            c: 0.0,
            r_squared: 1.0,
            status: FitStatus::ExactCoincidence,
        };
    }
    if used < 2 {
        return ContractionFit {
            distances: distances.to_vec(),
            used,
            lambda: f64::NAN,
            c: f64::NAN,
            r_squared: f64::NAN,
            status: FitStatus::Insufficient,
        };
    }
    let nf = used as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    ContractionFit {
        distances: distances.to_vec(),
        used,
        lambda: libm::exp(slope),
        c: libm::exp(intercept),
        r_squared,
        status: FitStatus::Fitted,
    }
}

/// Sample count for the contraction sup-distance.
pub const CONTRACTION_SAMPLES: usize = 512;

fn sup_distance<T: Real>(a: &MultimodalMap<T>, b: &MultimodalMap<T>) -> f64 {
    (0..CONTRACTION_SAMPLES)
        .map(|i| {
            let x = T::from_f64(-1.0 + 2.0 * i as f64 / (CONTRACTION_SAMPLES - 1) as f64);
            (a.value(x) - b.value(x)).abs().to_f64()
        })
        .fold(0.0, f64::max)
}

/// Measured decay of `d(R^k f, R^k g)` for `k = 0..=depth`.
pub fn contraction_rate<T: Real>(
    f: &MultimodalMap<T>,
    g: &MultimodalMap<T>,
    depth: usize,
    settings: &Settings,
) -> Result<ContractionFit> {
    let tf = full_tower(f, depth, settings)?;
    let tg = full_tower(g, depth, settings)?;
    for (level, (a, b)) in tf.levels.iter().zip(&tg.levels).enumerate() {
        if a.combinatorics != b.combinatorics {
            return Err(Error::WordMismatch { level });
        }
    }
    let distances: Vec<f64> = (0..=depth)
        .map(|k| sup_distance(tf.level_map(k).unwrap_or(f), tg.level_map(k).unwrap_or(g)))
        .collect();
    Ok(fit_log_linear(&distances))
}

fn full_tower<T: Real>(f: &MultimodalMap<T>, depth: usize, settings: &Settings) -> Result<Tower<T>> {
    let t = renorm_tower(f, depth, settings);
    if t.levels.len() < depth {
        return Err(t.stopped.clone().unwrap_or(Error::NotRenormalizable {
            max_period: settings.max_period,
        }));
    }
    Ok(t)
}
