//! Complex-plane numerics: filled Julia rasters, Böttcher coordinates and
//! external maps, polynomial-like domains and round-annulus modulus bounds.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::map::{MultimodalMap, UnimodalFactor};
use crate::real::Real;
use crate::renorm::Tower;

/// A composite `P = P_{N−1} ∘ … ∘ P_0` of even polynomials, kept as exact
/// coefficient lists (coefficients of `z^0, z^2, z^4, …` per factor).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPolynomial {
    factors: Vec<Vec<f64>>,
}

impl ComplexPolynomial {
    pub fn new(factors: Vec<Vec<f64>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("a polynomial needs at least one factor"));
        }
        for c in &factors {
            if c.len() < 2 || *c.last().expect("nonempty") == 0.0 {
                return Err(Error::InvalidArgument("each factor needs a nonzero leading coefficient"));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteInput);
            }
        }
        Ok(ComplexPolynomial { factors })
    }

    /// `P_b`: the composite of `z ↦ b_j z² − b_j − 1`.
    pub fn quadratic_family(b: &[f64]) -> Result<Self> {
        Self::new(b.iter().map(|&bj| vec![-bj - 1.0, bj]).collect())
    }

    /// The polynomial behind a map whose factors are all even polynomials.
    pub fn from_map<T: Real>(map: &MultimodalMap<T>) -> Result<Self> {
        let factors = map
            .factors()
            .iter()
            .map(|f| match f {
                UnimodalFactor::EvenPolynomial(p) => Ok(p.coeffs().iter().map(|c| c.to_f64()).collect()),
                UnimodalFactor::IterateSegment(_) => Err(Error::InvalidArgument("map is not a raw polynomial")),
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::new(factors)
    }

    pub fn n_type(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.factors.iter().map(|c| 2 * (c.len() - 1)).product()
    }

    /// Leading coefficient of the composite.
    pub fn leading(&self) -> f64 {
        let mut lead = 1.0;
        let mut first = true;
        for c in &self.factors {
            let a = *c.last().expect("nonempty");
            let d = 2 * (c.len() - 1);
            lead = if first { a } else { a * libm::pow(lead, d as f64) };
            first = false;
        }
        lead
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.factors
            .iter()
            .flatten()
            .fold(0.0, |m: f64, c| m.max(c.abs()))
    }

    /// Smallest escape radius for which escape is monotone.
    pub fn escape_radius_bound(&self) -> f64 {
        2.0 * (1.0 + self.max_abs_coefficient())
    }

    fn factor_d(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
        let y = z * z;
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &a in c.iter().rev() {
            dp = dp * y + p;
            p = p * y + a;
        }
        (p, dp * z * 2.0)
    }

    pub fn factor_value(&self, j: usize, z: Complex64) -> Complex64 {
        Self::factor_d(&self.factors[j], z).0
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_d(z).0
    }

    pub fn eval_d(&self, z: Complex64) -> (Complex64, Complex64) {
        self.factors.iter().fold((z, Complex64::new(1.0, 0.0)), |(w, d), c| {
            let (v, dv) = Self::factor_d(c, w);
            (v, d * dv)
        })
    }
}

/// A rectangular window sampled at pixel centers; row 0 is the top.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterGrid {
    pub center: (f64, f64),
    pub width: f64,
    pub height: f64,
    pub cols: usize,
    pub rows: usize,
    pub escape_radius: f64,
    pub max_iter: u32,
}

impl RasterGrid {
    pub fn is_empty(&self) -> bool {
        self.cols == 0 || self.rows == 0 || self.width == 0.0 || self.height == 0.0
    }

    pub fn validate(&self, p: &ComplexPolynomial) -> Result<()> {
        let finite = [self.center.0, self.center.1, self.width, self.height, self.escape_radius];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite window"));
        }
        if self.width < 0.0 || self.height < 0.0 {
            return Err(Error::InvalidGrid("negative window size"));
        }
        if self.escape_radius < p.escape_radius_bound() {
            return Err(Error::InvalidGrid("escape radius below 2(1 + max |coefficient|)"));
        }
        Ok(())
    }

    pub fn pixel(&self, col: usize, row: usize) -> Complex64 {
        let fx = (col as f64 + 0.5) / self.cols as f64;
        let fy = (row as f64 + 0.5) / self.rows as f64;
        Complex64::new(
            self.center.0 + self.width * (fx - 0.5),
            self.center.1 + self.height * (0.5 - fy),
        )
    }
}

/// Escape times; `None` marks points that did not escape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub cols: usize,
    pub rows: usize,
    pub data: Vec<Option<u32>>,
}

impl Raster {
    pub fn get(&self, col: usize, row: usize) -> Option<u32> {
        self.data[row * self.cols + col]
    }
}

/// First `n` with `|P^n(z)| > R`, up to `max_iter`.
pub fn escape_time(p: &ComplexPolynomial, z: Complex64, radius: f64, max_iter: u32) -> Option<u32> {
    let mut w = z;
    for n in 0..=max_iter {
        if !(w.norm() <= radius) {
            return Some(n);
        }
        if n == max_iter {
            break;
        }
        w = p.eval(w);
    }
    None
}

pub fn julia_raster(p: &ComplexPolynomial, grid: &RasterGrid) -> Result<Raster> {
    grid.validate(p)?;
    if grid.is_empty() {
        return Ok(Raster {
            cols: 0,
            rows: 0,
            data: Vec::new(),
        });
    }
    let mut data = Vec::with_capacity(grid.cols * grid.rows);
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            data.push(escape_time(p, grid.pixel(col, row), grid.escape_radius, grid.max_iter));
        }
    }
    Ok(Raster {
        cols: grid.cols,
        rows: grid.rows,
        data,
    })
}

/// Factor steps used to decide that a critical orbit stays bounded.
pub const CONNECTIVITY_HORIZON: usize = 4096;

/// Index of a critical point `(0, j)` whose extended orbit escapes, if any.
pub fn escaping_critical_point(p: &ComplexPolynomial) -> Option<usize> {
    let n = p.n_type();
    let radius = p.escape_radius_bound();
    (0..n).find(|&j| {
        let mut z = Complex64::new(0.0, 0.0);
        let mut fiber = j;
        for _ in 0..CONNECTIVITY_HORIZON {
            z = p.factor_value(fiber, z);
            fiber = (fiber + 1) % n;
            if !(z.norm() <= radius) {
                return true;
            }
        }
        false
    })
}

fn wrap_im(z: Complex64) -> Complex64 {
    let mut im = z.im % (2.0 * PI);
    if im > PI {
        im -= 2.0 * PI;
    } else if im <= -PI {
        im += 2.0 * PI;
    }
    Complex64::new(z.re, im)
}

/// `log φ(z)` and its derivative for the Böttcher coordinate
/// `φ(z) = c z ∏ (z_{n+1} / (a z_n^d))^{1/d^{n+1}}`, `c^{d−1} = a`.
/// The imaginary part is only meaningful modulo 2π.
pub fn log_bottcher(p: &ComplexPolynomial, z: Complex64) -> Option<(Complex64, Complex64)> {
    let d = p.degree() as f64;
    let a = Complex64::new(p.leading(), 0.0);
    let ln_a = a.ln();
    let ln_c = ln_a / (d - 1.0);
    if z.norm() == 0.0 {
        return None;
    }
    let mut sum = ln_c + z.ln();
    let mut dsum = z.inv();
    let (mut zn, mut dzn) = (z, Complex64::new(1.0, 0.0));
    let mut scale = 1.0 / d;
    for _ in 0..200 {
        if zn.norm() > 1e30 {
            return Some((sum, dsum));
        }
        let (z1, d1) = p.eval_d(zn);
        if !z1.is_finite() || z1.norm() == 0.0 {
            return None;
        }
        let dz1 = d1 * dzn;
        let term = wrap_im(z1.ln() - ln_a - zn.ln() * d);
        sum += term * scale;
        dsum += (dz1 / z1 - dzn / zn * d) * scale;
        zn = z1;
        dzn = dz1;
        scale /= d;
    }
    None
}

/// Solve `log φ(z) = potential + 2πiθ` by continuation in the potential.
pub fn inverse_bottcher(p: &ComplexPolynomial, theta: f64, potential: f64) -> Option<Complex64> {
    let d = p.degree() as f64;
    let ln_c = Complex64::new(p.leading(), 0.0).ln() / (d - 1.0);
    let start = potential.max(8.0);
    let mut z = (Complex64::new(start, 2.0 * PI * theta) - ln_c).exp();
    let steps = 48;
    for s in 0..=steps {
        let g = start + (potential - start) * s as f64 / steps as f64;
        let target = Complex64::new(g, 2.0 * PI * theta);
        let mut converged = false;
        for _ in 0..60 {
            let (lp, dlp) = log_bottcher(p, z)?;
            let err = wrap_im(lp - target);
            if err.norm() < 1e-14 {
                converged = true;
                break;
            }
            let mut step = err / dlp;
            let cap = 0.25 * z.norm();
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            z -= step;
        }
        if !converged {
            return None;
        }
    }
    Some(z)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalSamples {
    /// `(θ_in, θ_out)` with `θ_out` the external angle of `P(z(θ_in))`.
    pub pairs: Vec<(f64, f64)>,
    /// Total turning of the lifted circle map: the degree.
    pub winding: i64,
    /// Largest circular distance between `θ_out` and `dθ_in mod 1`.
    pub max_deviation: f64,
    /// Green's-function level of the sampled equipotential.
    pub potential: f64,
}

/// Equipotential used by `external_map_samples`.
pub const DEFAULT_POTENTIAL: f64 = 1.0;

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Sample the external map `g = φ ∘ P ∘ φ⁻¹` at `count` equally spaced angles.
pub fn external_map_samples(p: &ComplexPolynomial, count: usize) -> Result<ExternalSamples> {
    external_map_samples_at(p, count, DEFAULT_POTENTIAL)
}

pub fn external_map_samples_at(p: &ComplexPolynomial, count: usize, potential: f64) -> Result<ExternalSamples> {
    let degree = p.degree();
    if count < 4 * degree {
        return Err(Error::InvalidArgument("need at least four samples per sheet"));
    }
    if !(potential > 0.0) || !potential.is_finite() {
        return Err(Error::InvalidArgument("potential must be positive"));
    }
    if let Some(critical) = escaping_critical_point(p) {
        return Err(Error::DisconnectedJulia { critical });
    }
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count {
        let theta = i as f64 / count as f64;
        let z = inverse_bottcher(p, theta, potential).ok_or(Error::PrecisionExhausted("Böttcher inverse did not converge"))?;
        let (lp, _) = log_bottcher(p, p.eval(z)).ok_or(Error::PrecisionExhausted("Böttcher series did not converge"))?;
        pairs.push((theta, (lp.im / (2.0 * PI)).rem_euclid(1.0)));
    }
    let mut turning = 0.0;
    for i in 0..count {
        let a = pairs[i].1;
        let b = pairs[(i + 1) % count].1;
        let mut step = b - a;
        step -= libm::round(step);
        turning += step;
    }
    let max_deviation = pairs
        .iter()
        .map(|&(t, o)| circular_distance(o, (degree as f64 * t).rem_euclid(1.0)))
        .fold(0.0, f64::max);
    Ok(ExternalSamples {
        pairs,
        winding: libm::round(turning) as i64,
        max_deviation,
        potential,
    })
}

/// Parameters of the ellipse search for polynomial-like domains.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSearch {
    /// Semi-axes run geometrically over `[min, max]` (units of the interval
    /// half-width), `steps` values per axis.
    pub semi_axis_min: f64,
    pub semi_axis_max: f64,
    pub steps: usize,
    /// Continuation steps per lap around ∂V before refinement.
    pub boundary_points: usize,
}

impl Default for DomainSearch {
    fn default() -> Self {
        DomainSearch {
            semi_axis_min: 1.05,
            semi_axis_max: 4.0,
            steps: 16,
            boundary_points: 512,
        }
    }
}

impl DomainSearch {
    fn axis(&self, i: usize) -> f64 {
        if self.steps <= 1 {
            return self.semi_axis_min;
        }
        let t = i as f64 / (self.steps - 1) as f64;
        self.semi_axis_min * libm::pow(self.semi_axis_max / self.semi_axis_min, t)
    }
}

/// `U → V` with `V` an ellipse about `[−1, 1]` and `U` the component of
/// its preimage containing 0, as a closed polygon.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyLikeDomains {
    /// Semi-axes of `V` along the real and imaginary directions.
    pub v_axes: (f64, f64),
    pub u_boundary: Vec<(f64, f64)>,
    /// Argument-principle count of preimages of 0 in `U`.
    pub degree: i64,
    /// Argument-principle count of critical points in `U`.
    pub critical_points: i64,
    /// Round-annulus bound for this pair.
    pub bound: f64,
    pub candidates_tried: usize,
    pub candidates_valid: usize,
}

/// Round annulus `{r₁ < |z| < r₂}`: modulus `ln(r₂/r₁)/2π`, or 0 (flagged
/// degenerate) when `r₂ ≤ r₁`.
pub fn round_annulus_bound(r_inner: f64, r_outer: f64) -> (f64, bool) {
    if r_outer > r_inner && r_inner > 0.0 {
        (libm::log(r_outer / r_inner) / (2.0 * PI), false)
    } else {
        (0.0, true)
    }
}

fn ellipse_point(sa: f64, sb: f64, t: f64) -> Complex64 {
    let a = 2.0 * PI * t;
    Complex64::new(-sa * libm::cos(a), -sb * libm::sin(a))
}

type ComplexFn<'a> = dyn Fn(Complex64) -> (Complex64, Complex64) + 'a;

fn newton_solve(g: &ComplexFn<'_>, w: Complex64, mut z: Complex64, tol: f64) -> Option<Complex64> {
    for _ in 0..40 {
        let (v, dv) = g(z);
        let err = v - w;
        if !err.is_finite() || dv.norm() == 0.0 {
            return None;
        }
        if err.norm() <= tol {
            return Some(z);
        }
        z -= err / dv;
    }
    None
}

/// Real `x > 1` with `g(x) = target < −1`, first crossing.
fn real_preimage(g: &ComplexFn<'_>, target: f64) -> Option<f64> {
    let val = |x: f64| g(Complex64::new(x, 0.0)).0.re - target;
    let mut lo = 1.0;
    if !(val(lo) > 0.0) {
        return None;
    }
    let mut hi = lo;
    for _ in 0..200 {
        hi = lo * 1.02;
        if !(val(hi) > 0.0) {
            break;
        }
        lo = hi;
    }
    if val(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if val(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn winding(points: &[Complex64], center: Complex64) -> f64 {
    let mut total = 0.0;
    for i in 0..points.len() {
        let a = points[i] - center;
        let b = points[(i + 1) % points.len()] - center;
        total += (b / a).arg();
    }
    total / (2.0 * PI)
}

/// Trace `∂U` as the lift of `∂V` (traversed `laps` times) through `g`.
fn continue_boundary(g: &ComplexFn<'_>, sa: f64, sb: f64, laps: usize, base_steps: usize) -> Result<Vec<Complex64>> {
    let x0 = real_preimage(g, -sa).ok_or(Error::BoundaryContinuation)?;
    let tol = 1e-9 * sa;
    let mut z = Complex64::new(x0, 0.0);
    let mut t = 0.0;
    let end = laps as f64;
    let mut dt = 1.0 / base_steps as f64;
    let mut out = vec![z];
    while t < end {
        let step = dt.min(end - t);
        let w1 = ellipse_point(sa, sb, t + step);
        let (_, dv) = g(z);
        let w0 = ellipse_point(sa, sb, t);
        let guess = z + (w1 - w0) / dv;
        match newton_solve(g, w1, guess, tol) {
            Some(z1) if (z1 - guess).norm() <= 0.1 * (guess - z).norm().max(1e-12) + 1e-12 => {
                z = z1;
                t += step;
                out.push(z);
                dt = (dt * 1.5).min(1.0 / base_steps as f64);
            }
            _ => {
                dt *= 0.5;
                if dt < 1e-10 {
                    return Err(Error::BoundaryContinuation);
                }
            }
        }
    }
    let first = out[0];
    let last = out.pop().expect("nonempty");
    if (last - first).norm() > 1e-8 * first.norm() {
        return Err(Error::BoundaryContinuation);
    }
    Ok(out)
}

/// Search the ellipse family for `V` and verify `U ⋐ V` with degree `2^N`.
/// Among valid pairs, the one with the largest round-annulus bound wins.
pub fn polylike_domains<T: Real>(map: &MultimodalMap<T>, search: &DomainSearch) -> Result<PolyLikeDomains> {
    if search.steps == 0 || !(search.semi_axis_min > 1.0) || !(search.semi_axis_max >= search.semi_axis_min) {
        return Err(Error::InvalidArgument("invalid ellipse search"));
    }
    let degree = 1usize << map.n_type();
    let g = |z: Complex64| map.eval_complex_d(z);
    let mut best: Option<PolyLikeDomains> = None;
    let mut tried = 0;
    let mut valid = 0;
    let mut last_failure = "no candidate traced";
    for i in 0..search.steps {
        for j in 0..search.steps {
            let (sa, sb) = (search.axis(i), search.axis(j));
            tried += 1;
            let boundary = match continue_boundary(&g, sa, sb, degree, search.boundary_points) {
                Ok(b) => b,
                Err(_) => {
                    last_failure = "boundary continuation failed";
                    continue;
                }
            };
            let inside = boundary.iter().all(|z| (z.re / sa).powi(2) + (z.im / sb).powi(2) < 1.0 - 1e-9);
            if !inside {
                last_failure = "U not compactly inside V";
                continue;
            }
            if libm::round(winding(&boundary, Complex64::new(0.0, 0.0))).abs() != 1.0 {
                last_failure = "U does not surround 0";
                continue;
            }
            let images: Vec<Complex64> = boundary.iter().map(|&z| g(z).0).collect();
            let derivs: Vec<Complex64> = boundary.iter().map(|&z| g(z).1).collect();
            let deg = libm::round(winding(&images, Complex64::new(0.0, 0.0))).abs() as i64;
            let crit = libm::round(winding(&derivs, Complex64::new(0.0, 0.0))).abs() as i64;
            if deg != degree as i64 || crit != degree as i64 - 1 {
                last_failure = "argument-principle degree mismatch";
                continue;
            }
            valid += 1;
            let r1 = boundary.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let (bound, _) = round_annulus_bound(r1, sa.min(sb));
            let cand = PolyLikeDomains {
                v_axes: (sa, sb),
                u_boundary: boundary.iter().map(|z| (z.re, z.im)).collect(),
                degree: deg,
                critical_points: crit,
                bound,
                candidates_tried: 0,
                candidates_valid: 0,
            };
            if best.as_ref().is_none_or(|b| cand.bound > b.bound) {
                best = Some(cand);
            }
        }
    }
    match best {
        Some(mut b) => {
            b.candidates_tried = tried;
            b.candidates_valid = valid;
            Ok(b)
        }
        None => Err(Error::DomainsNotFound(format!(
            "{tried} ellipses tried; last failure: {last_failure}"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnnulusBound {
    /// The map is exactly a polynomial.
    Unbounded,
    Finite {
        value: f64,
        r_inner: f64,
        r_outer: f64,
        degenerate: bool,
        v_axes: (f64, f64),
    },
}

impl AnnulusBound {
    pub fn value(&self) -> f64 {
        match self {
            AnnulusBound::Unbounded => f64::INFINITY,
            AnnulusBound::Finite { value, .. } => *value,
        }
    }
}

/// Lower bound for the modulus of a polynomial-like extension.
pub fn modulus_lower_bound<T: Real>(map: &MultimodalMap<T>, search: &DomainSearch) -> Result<AnnulusBound> {
    if map
        .factors()
        .iter()
        .all(|f| matches!(f, UnimodalFactor::EvenPolynomial(_)))
    {
        return Ok(AnnulusBound::Unbounded);
    }
    let d = polylike_domains(map, search)?;
    let r_inner = d.u_boundary.iter().map(|&(x, y)| libm::hypot(x, y)).fold(0.0, f64::max);
    let r_outer = d.v_axes.0.min(d.v_axes.1);
    let (value, degenerate) = round_annulus_bound(r_inner, r_outer);
    Ok(AnnulusBound::Finite {
        value,
        r_inner,
        r_outer,
        degenerate,
        v_axes: d.v_axes,
    })
}

impl ComplexPolynomial {
    /// Polynomials have infinite modulus.
    pub fn modulus(&self) -> AnnulusBound {
        AnnulusBound::Unbounded
    }
}

/// Domains for the depth-`depth` renormalization of a tower.
pub fn level_domains<T: Real>(tower: &Tower<T>, depth: usize, search: &DomainSearch) -> Result<PolyLikeDomains> {
    let map = tower.level_map(depth).ok_or_else(|| {
        Error::DomainsNotFound(format!(
            "tower has {} levels, no renormalization at depth {depth}",
            tower.levels.len()
        ))
    })?;
    polylike_domains(map, search)
}

/// Modulus bound for the depth-`depth` renormalization of a tower.
pub fn level_modulus_bound<T: Real>(tower: &Tower<T>, depth: usize, search: &DomainSearch) -> Result<AnnulusBound> {
    let map = tower.level_map(depth).ok_or_else(|| {
        Error::DomainsNotFound(format!(
            "tower has {} levels, no renormalization at depth {depth}",
            tower.levels.len()
        ))
    })?;
    modulus_lower_bound(map, search)
}
