//! JSON and CSV encodings of core results.
//!
//! Floats go through Rust's shortest round-trip formatting, so encodings are
//! byte-stable for identical inputs. Double-double values are written as
//! `[hi, lo]` pairs.

use renorm_core::complex::{ExternalSamples, PolyLikeDomains, Raster, RasterGrid};
use renorm_core::nest::{CascadeDecomposition, EnhancedNestReport, PrincipalNest, YoccozProfile};
use renorm_core::{
    AffineMap, Error, FiberInterval, MultimodalMap, Real, RenormResult, Settings, Tower, UnimodalFactor,
};
use serde_json::{json, Value};

use crate::error::{LabError, LabResult};

pub fn num<T: Real>(x: T) -> Value {
    let hi = x.to_f64();
    if T::BITS > 53 {
        json!([hi, (x - T::from_f64(hi)).to_f64()])
    } else {
        json!(hi)
    }
}

pub fn nums<T: Real>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn interval<T: Real>(iv: &FiberInterval<T>) -> Value {
    json!({"lo": num(iv.lo()), "hi": num(iv.hi()), "fiber": iv.fiber()})
}

pub fn affine<T: Real>(a: &AffineMap<T>) -> Value {
    json!({"scale": num(a.scale()), "offset": num(a.offset())})
}

pub fn settings(s: &Settings) -> Value {
    json!({
        "orbit_cap": s.orbit_cap,
        "horizon": s.horizon,
        "nest_cap": s.nest_cap,
        "eval_tol": s.eval_tol,
        "escape_tol": s.escape_tol,
        "scan_cells": s.scan_cells,
        "boundary_margin": s.boundary_margin,
        "isolation_tol": s.isolation_tol,
        "snap_tol": s.snap_tol,
        "max_period": s.max_period,
        "samples": s.samples,
    })
}

/// `{"n_type", "factors": [{"kind", …}], "precision_bits"}`. Iterate
/// segments refer to their base map by tower depth.
pub fn map<T: Real>(m: &MultimodalMap<T>) -> Value {
    let factors: Vec<Value> = m
        .factors()
        .iter()
        .map(|f| match f {
            UnimodalFactor::EvenPolynomial(p) => json!({"kind": "even_polynomial", "coeffs": nums(p.coeffs())}),
            UnimodalFactor::IterateSegment(s) => json!({
                "kind": "iterate_segment",
                "start_fiber": s.start_fiber(),
                "count": s.count(),
                "inbound": affine(s.inbound()),
                "outbound": affine(s.outbound()),
            }),
        })
        .collect();
    json!({"n_type": m.n_type(), "factors": factors, "precision_bits": T::BITS})
}

fn bad_map(msg: &str) -> LabError {
    LabError::Config(format!("map document: {msg}"))
}

/// Rebuild a map whose factors are all even polynomials.
pub fn map_from_json(v: &Value) -> LabResult<MultimodalMap<f64>> {
    let factors = v["factors"].as_array().ok_or_else(|| bad_map("missing factors"))?;
    let mut out = Vec::with_capacity(factors.len());
    for f in factors {
        if f["kind"] != "even_polynomial" {
            return Err(bad_map("only even_polynomial factors can be read back"));
        }
        let coeffs = f["coeffs"]
            .as_array()
            .ok_or_else(|| bad_map("missing coeffs"))?
            .iter()
            .map(|c| c.as_f64().ok_or_else(|| bad_map("non-numeric coefficient")))
            .collect::<LabResult<Vec<f64>>>()?;
        out.push(UnimodalFactor::EvenPolynomial(renorm_core::map::EvenPolynomial::new(coeffs)?));
    }
    if v["n_type"].as_u64() != Some(out.len() as u64) {
        return Err(bad_map("n_type does not match the factor count"));
    }
    Ok(MultimodalMap::new(out, renorm_core::map::Provenance::Custom)?)
}

pub fn renorm<T: Real>(r: &RenormResult<T>) -> Value {
    let j = r.periodic.j();
    json!({
        "p": r.periodic.p(),
        "J": {"lo": num(j.lo()), "hi": num(j.hi())},
        "visit_times": r.periodic.visit_times(),
        "normalizers": r.normalizers.iter().map(affine).collect::<Vec<_>>(),
        "combinatorics": r.combinatorics.canonical(),
    })
}

pub fn error_text(e: &Option<Error>) -> Value {
    e.as_ref().map_or(Value::Null, |e| json!(e.to_string()))
}

pub fn tower<T: Real>(t: &Tower<T>, base: &MultimodalMap<T>) -> Value {
    json!({
        "base": map(base),
        "levels": t.levels.iter().map(renorm).collect::<Vec<_>>(),
        "stopped": error_text(&t.stopped),
    })
}

pub fn nest<T: Real>(n: &PrincipalNest<T>, dec: Option<&CascadeDecomposition>) -> Value {
    json!({
        "levels": n.levels.iter().map(interval).collect::<Vec<_>>(),
        "return_times": n.return_times,
        "scaling": nums(&n.scaling_factors),
        "moments": dec.map(|d| json!(d.non_central_moments)),
        "height": dec.map(|d| json!(d.height)),
        "restarts": n.restarts,
        "status": n.status.name(),
    })
}

pub fn cascades(dec: &CascadeDecomposition) -> Value {
    Value::Array(
        dec.cascades
            .iter()
            .map(|c| json!({"start": c.start, "end": c.end, "len": c.len(), "kind": c.kind.name(), "maximal": c.maximal}))
            .collect(),
    )
}

pub fn yoccoz_summary(p: &YoccozProfile) -> Value {
    json!({
        "eta": p.eta,
        "min_normalized": p.min_normalized(),
        "max_normalized": p.max_normalized(),
        "ratio_sum": p.ratio_sum,
        "within_band": p.within_band,
    })
}

pub fn yoccoz_csv(p: &YoccozProfile) -> String {
    let mut s = String::from("j,ratio,normalized\n");
    for r in &p.rows {
        s.push_str(&format!("{},{},{}\n", r.j, r.ratio, r.normalized));
    }
    s
}

pub fn enhanced<T: Real>(r: &EnhancedNestReport<T>) -> Value {
    let check = |c: renorm_core::nest::InequalityCheck| {
        json!({"name": c.name, "checked": c.checked, "violations": c.violations, "holds": c.holds()})
    };
    json!({
        "np": r.np,
        "chi": r.chi,
        "levels": r.e_levels.iter().map(interval).collect::<Vec<_>>(),
        "r": r.r,
        "m": r.m,
        "stopped": error_text(&r.stopped),
        "transfer_doubling": check(r.check_transfer_doubling()),
        "return_bound": check(r.check_return_bound()),
        "period_bound": r.check_period_bound(),
    })
}

/// Two-column CSV.
pub fn series_csv<V: std::fmt::Display>(header: &str, rows: impl IntoIterator<Item = (usize, V)>) -> String {
    let mut s = format!("{header}\n");
    for (n, v) in rows {
        s.push_str(&format!("{n},{v}\n"));
    }
    s
}

/// Plain-text PGM: escaped pixels get `time + 1`, non-escaped pixels 0.
pub fn raster_pgm(r: &Raster, max_iter: u32) -> String {
    let maxval = max_iter.saturating_add(1).min(65535);
    let mut s = format!("P2\n{} {}\n{}\n", r.cols, r.rows, maxval);
    for row in 0..r.rows {
        let line: Vec<String> = (0..r.cols)
            .map(|col| r.get(col, row).map_or(0, |t| (t + 1).min(maxval)).to_string())
            .collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

/// `x,y,escape_time` with −1 for non-escaped pixels.
pub fn raster_csv(r: &Raster, grid: &RasterGrid) -> String {
    let mut s = String::from("x,y,escape_time\n");
    for row in 0..r.rows {
        for col in 0..r.cols {
            let z = grid.pixel(col, row);
            let t = r.get(col, row).map_or(-1, i64::from);
            s.push_str(&format!("{},{},{}\n", z.re, z.im, t));
        }
    }
    s
}

pub fn external_csv(e: &ExternalSamples) -> String {
    let mut s = String::from("theta_in,theta_out\n");
    for (a, b) in &e.pairs {
        s.push_str(&format!("{a},{b}\n"));
    }
    s
}

pub fn domains(depth: usize, d: &PolyLikeDomains) -> Value {
    json!({
        "depth": depth,
        "v_axes": [d.v_axes.0, d.v_axes.1],
        "u": d.u_boundary.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>(),
        "degree": d.degree,
        "critical_points": d.critical_points,
        "bound": d.bound,
    })
}
