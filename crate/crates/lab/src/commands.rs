//! Subcommand implementations.

use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use renorm_core::complex::{self, ComplexPolynomial, DomainSearch, RasterGrid};
use renorm_core::nest::{cascade_decomposition, enhanced_nest, limit_scaling_estimate, principal_nest, yoccoz_profile};
use renorm_core::tuner::{self, FamilySpec};
use renorm_core::{
    build_quadratic_family, combinatorics, extend, renorm_tower, renormalize, validate, Combinatorics, DoubleDouble,
    Real, Settings,
};
use serde_json::{json, Value};

use crate::cache::{key_material, Cache, TuneRecord};
use crate::config::RunConfig;
use crate::error::{LabError, LabResult};
use crate::formats as fmt;
use crate::report::{self, Artifact, Meta, Provenance, Report};
use crate::words::parse_word;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Nest,
    Cascade,
    Tune,
    Delta,
    Alpha,
    Tower,
    Contraction,
    Julia,
    External,
    Combinatorics,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Analyze,
        Command::Nest,
        Command::Cascade,
        Command::Tune,
        Command::Delta,
        Command::Alpha,
        Command::Tower,
        Command::Contraction,
        Command::Julia,
        Command::External,
        Command::Combinatorics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Nest => "nest",
            Command::Cascade => "cascade",
            Command::Tune => "tune",
            Command::Delta => "delta",
            Command::Alpha => "alpha",
            Command::Tower => "tower",
            Command::Contraction => "contraction",
            Command::Julia => "julia",
            Command::External => "external",
            Command::Combinatorics => "combinatorics",
        }
    }
}

impl FromStr for Command {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown command {s:?}")))
    }
}

/// What a command produced, before anything is written.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub payload: Value,
    pub artifacts: Vec<Artifact>,
    pub settings: Settings,
    pub cache: Option<&'static str>,
}

impl Outcome {
    fn new(payload: Value, settings: Settings) -> Self {
        Outcome {
            payload,
            artifacts: Vec::new(),
            settings,
            cache: None,
        }
    }

    fn with(mut self, name: &str, body: String) -> Self {
        self.artifacts.push(Artifact {
            name: name.to_string(),
            body,
        });
        self
    }
}

fn need_b(cfg: &RunConfig) -> LabResult<&[f64]> {
    if cfg.b.is_empty() {
        Err(LabError::Config("config: this command needs b".into()))
    } else {
        Ok(&cfg.b)
    }
}

fn to_t<T: Real>(b: &[f64]) -> Vec<T> {
    b.iter().map(|&x| T::from_f64(x)).collect()
}

/// `b` from the config, or the doubling accumulation point when omitted.
fn b_or_accumulation<T: Real>(cfg: &RunConfig, settings: &Settings) -> LabResult<(Vec<T>, Value)> {
    if cfg.b.is_empty() {
        let acc = tuner::accumulation_parameter::<T>(cfg.n_max, settings)?;
        let source = json!({
            "kind": "accumulation",
            "n_max": cfg.n_max,
            "correction": acc.correction.to_f64(),
            "bracket_width": acc.bracket_width.to_f64(),
        });
        Ok((vec![acc.b], source))
    } else {
        Ok((to_t(&cfg.b), json!({"kind": "config"})))
    }
}

fn family(cfg: &RunConfig, n_type: usize) -> LabResult<FamilySpec> {
    match (&cfg.family_lower, &cfg.family_upper) {
        (Some(lo), Some(hi)) => {
            let f = FamilySpec::new(lo.clone(), hi.clone()).map_err(|e| LabError::Config(format!("config: {e}")))?;
            if f.n_type != n_type {
                return Err(LabError::Config("config: family box dimension differs from N".into()));
            }
            Ok(f)
        }
        _ => Ok(FamilySpec::standard(n_type)),
    }
}

fn word(cfg: &RunConfig) -> LabResult<Vec<Combinatorics>> {
    let text = cfg
        .word
        .as_deref()
        .ok_or_else(|| LabError::Config("config: this command needs a word".into()))?;
    parse_word(text)
}

fn analyze<T: Real>(cfg: &RunConfig) -> LabResult<Outcome> {
    let b = need_b(cfg)?;
    let settings = cfg.settings(b.len());
    let map = build_quadratic_family(&to_t::<T>(b))?;
    let checks = validate(&map, &settings);
    let ext = extend(&map, &settings)?;
    let r = renormalize(&map, &settings)?;
    let payload = json!({
        "b": b,
        "n_type": map.n_type(),
        "map": fmt::map(&map),
        "valid": checks.passed(),
        "alpha": fmt::num(ext.alpha()),
        "beta": fmt::num(ext.beta()),
        "p": r.periodic.p(),
        "renormalization": fmt::renorm(&r),
        "primitive": r.combinatorics.is_primitive()?,
    });
    Ok(Outcome::new(payload, settings))
}

fn nest<T: Real>(cfg: &RunConfig) -> LabResult<Outcome> {
    let b = need_b(cfg)?;
    let settings = cfg.settings(b.len());
    let map = build_quadratic_family(&to_t::<T>(b))?;
    let ext = extend(&map, &settings)?;
    let nest = principal_nest(&ext, cfg.depth, &settings)?;
    let dec = cascade_decomposition(&ext, &nest, &settings).ok();
    let mut payload = fmt::nest(&nest, dec.as_ref());
    payload["limit_scaling_estimate"] = limit_scaling_estimate(&nest).map_or(Value::Null, fmt::num);
    let np = match cfg.np {
        Some(np) => Some(np),
        None => renormalize(&map, &settings).ok().map(|r| map.n_type() * r.periodic.p()),
    };
    payload["enhanced"] = match np {
        Some(np) => match enhanced_nest(&ext, np, cfg.k_max, &settings) {
            Ok(r) => fmt::enhanced(&r),
            Err(e) => json!({"np": np, "error": e.to_string()}),
        },
        None => json!({"error": "no np: map is not renormalizable and np is unset"}),
    };
    Ok(Outcome::new(payload, settings))
}

fn cascade<T: Real>(cfg: &RunConfig) -> LabResult<Outcome> {
    let b = need_b(cfg)?;
    let settings = cfg.settings(b.len());
    let map = build_quadratic_family(&to_t::<T>(b))?;
    let ext = extend(&map, &settings)?;
    let nest = principal_nest(&ext, cfg.depth, &settings)?;
    let dec = cascade_decomposition(&ext, &nest, &settings)?;
    let mut out = Outcome::new(Value::Null, settings);
    let mut profiles = Vec::new();
    for c in &dec.cascades {
        if c.len() < 4 {
            continue;
        }
        let p = yoccoz_profile(&nest.levels[c.start..=c.end], cfg.eta)?;
        let mut v = fmt::yoccoz_summary(&p);
        v["start"] = json!(c.start);
        profiles.push(v);
        out = out.with(&format!("yoccoz_{}.csv", c.start), fmt::yoccoz_csv(&p));
    }
    out.payload = json!({
        "depth": nest.depth(),
        "status": nest.status.name(),
        "return_times": nest.return_times,
        "moments": dec.non_central_moments,
        "height": dec.height,
        "cascades": fmt::cascades(&dec),
        "yoccoz": profiles,
    });
    Ok(out)
}

fn tune<T: Real>(cfg: &RunConfig) -> LabResult<Outcome> {
    let word = word(cfg)?;
    let n = word[0].n_type();
    let settings = cfg.settings(n);
    let fam = family(cfg, n)?;
    let cache = cfg.cache_dir.as_ref().map(Cache::new);
    let key = key_material(&word, T::BITS, &fam);
    let cached = cache
        .as_ref()
        .and_then(|c| c.lookup(&key))
        .and_then(|r| r.to_result::<T>(&word));
    let (result, status) = match cached {
        Some(r) => (r, "hit"),
        None => {
            let r = tuner::superstable_parameter::<T>(&fam, &word, &settings)?;
            if let Some(c) = &cache {
                c.store(&key, &TuneRecord::from_result(&r))?;
            }
            (r, "miss")
        }
    };
    let payload = json!({
        "word": word.iter().map(Combinatorics::canonical).collect::<Vec<_>>(),
        "b": fmt::nums(&result.b),
        "residual": fmt::num(result.residual),
        "method": result.method.name(),
        "bracket_width": result.bracket_width.map_or(Value::Null, fmt::num),
        "best_effort": result.best_effort,
        "family": {"lower": fam.lower, "upper": fam.upper},
    });
    let mut out = Outcome::new(payload, settings);
    out.cache = cache.map(|_| status);
    Ok(out)
}

fn delta<T: Real>(cfg: &RunConfig) -> LabResult<Outcome> {
    let settings = cfg.settings(1);
    let fam = family(cfg, 1)?;
    let table = tuner::feigenbaum_delta::<T>(&fam, cfg.n_max, &settings)?;
    let payload = json!({
        "n_max": cfg.n_max,
        "b": fmt::nums(&table.b),
        "bracket_widths": fmt::nums(&table.bracket_widths),
        "delta": table.delta.iter().map(|&(n, d)| json!([n, fmt::num(d)])).collect::<Vec<_>>(),
    });
    let csv = fmt::series_csv("n,value", table.delta.iter().map(|&(n, d)| (n, d.to_f64())));
    Ok(Outcome::new(payload, settings).with("delta.csv", csv))
}

fn alpha<T: Real>(cfg: &RunConfig) -> LabResult<Outcome> {
    let settings = cfg.settings(cfg.b.len().max(1));
    let (b, source) = b_or_accumulation::<T>(cfg, &settings)?;
    let map = build_quadratic_family(&b)?;
    let ratios = tuner::feigenbaum_alpha(&map, cfg.depth, &settings)?;
    let payload = json!({"b": fmt::nums(&b), "b_source": source, "depth": cfg.depth, "ratios": fmt::nums(&ratios)});
    let csv = fmt::series_csv("n,value", ratios.iter().enumerate().map(|(i, r)| (i + 1, r.to_f64())));
    Ok(Outcome::new(payload, settings).with("alpha.csv", csv))
}

fn tower<T: Real>(cfg: &RunConfig) -> LabResult<Outcome> {
    let settings = cfg.settings(cfg.b.len().max(1));
    let (b, source) = b_or_accumulation::<T>(cfg, &settings)?;
    let map = build_quadratic_family(&b)?;
    let t = renorm_tower(&map, cfg.depth, &settings);
    if t.levels.is_empty() {
        return Err(t.stopped.unwrap_or(renorm_core::Error::NotRenormalizable {
            max_period: settings.max_period,
        }))?;
    }
    let mut payload = fmt::tower(&t, &map);
    payload["b_source"] = source;
    let mut out = Outcome::new(Value::Null, settings);
    if cfg.domains {
        let search = DomainSearch {
            semi_axis_min: cfg.semi_axis_min,
            semi_axis_max: cfg.semi_axis_max,
            steps: cfg.ellipse_steps,
            ..DomainSearch::default()
        };
        let mut bounds = Vec::new();
        let mut docs = Vec::new();
        for d in 1..=t.levels.len() {
            match complex::level_domains(&t, d, &search) {
                Ok(dom) => {
                    bounds.push(json!({"depth": d, "bound": dom.bound, "v_axes": [dom.v_axes.0, dom.v_axes.1],
                        "valid_candidates": dom.candidates_valid, "candidates": dom.candidates_tried}));
                    docs.push(fmt::domains(d, &dom));
                }
                Err(e) => bounds.push(json!({"depth": d, "error": e.to_string()})),
            }
        }
        payload["modulus"] = json!({
            "search": {"semi_axis_min": search.semi_axis_min, "semi_axis_max": search.semi_axis_max,
                       "steps": search.steps, "boundary_points": search.boundary_points},
            "levels": bounds,
        });
        out = out.with("domains.json", serde_json::to_string_pretty(&docs).expect("json") + "\n");
    }
    out.payload = payload;
    Ok(out)
}

fn contraction<T: Real>(cfg: &RunConfig) -> LabResult<Outcome> {
    let settings = cfg.settings(cfg.b.len().max(1));
    let (b, source) = b_or_accumulation::<T>(cfg, &settings)?;
    let f = build_quadratic_family(&b)?;
    let g = renormalize(&f, &settings)?.renormalized;
    let fit = tuner::contraction_rate(&f, &g, cfg.depth, &settings)?;
    let status = format!("{:?}", fit.status).to_lowercase();
    let payload = json!({
        "b": fmt::nums(&b),
        "b_source": source,
        "depth": cfg.depth,
        "samples": tuner::CONTRACTION_SAMPLES,
        "precision_floor": tuner::PRECISION_FLOOR,
        "distances": fit.distances,
        "used": fit.used,
        "lambda": fit.lambda,
        "slope": fit.lambda.ln(),
        "c": fit.c,
        "r_squared": fit.r_squared,
        "status": status,
    });
    let csv = fmt::series_csv("k,distance", fit.distances.iter().copied().enumerate());
    Ok(Outcome::new(payload, settings).with("contraction.csv", csv))
}

fn polynomial(cfg: &RunConfig) -> LabResult<ComplexPolynomial> {
    Ok(ComplexPolynomial::quadratic_family(need_b(cfg)?)?)
}

fn julia(cfg: &RunConfig) -> LabResult<Outcome> {
    let p = polynomial(cfg)?;
    let settings = cfg.settings(p.n_type());
    let grid = RasterGrid {
        center: (cfg.center[0], cfg.center[1]),
        width: cfg.width,
        height: cfg.height,
        cols: cfg.cols,
        rows: cfg.rows,
        escape_radius: cfg.escape_radius.unwrap_or_else(|| p.escape_radius_bound()),
        max_iter: cfg.max_iter,
    };
    let raster = complex::julia_raster(&p, &grid).map_err(|e| LabError::Config(format!("config: {e}")))?;
    let escaped = raster.data.iter().filter(|t| t.is_some()).count();
    let csv = fmt::raster_csv(&raster, &grid);
    let payload = json!({
        "b": cfg.b,
        "cols": raster.cols,
        "rows": raster.rows,
        "escape_radius": grid.escape_radius,
        "max_iter": grid.max_iter,
        "escaped": escaped,
        "interior": raster.data.len() - escaped,
    });
    Ok(Outcome::new(payload, settings)
        .with("julia.pgm", fmt::raster_pgm(&raster, grid.max_iter))
        .with("julia.csv", csv))
}

fn external(cfg: &RunConfig) -> LabResult<Outcome> {
    let p = polynomial(cfg)?;
    let settings = cfg.settings(p.n_type());
    let e = complex::external_map_samples_at(&p, cfg.samples, cfg.potential)?;
    let payload = json!({
        "b": cfg.b,
        "degree": p.degree(),
        "count": e.pairs.len(),
        "potential": e.potential,
        "winding": e.winding,
        "max_deviation": e.max_deviation,
        "modulus": "unbounded",
    });
    Ok(Outcome::new(payload, settings).with("external.csv", fmt::external_csv(&e)))
}

fn combinatorics_cmd(cfg: &RunConfig) -> LabResult<Outcome> {
    let word = match &cfg.word {
        Some(_) => word(cfg)?,
        None => Vec::new(),
    };
    let n = cfg.n_type.or(word.first().map(Combinatorics::n_type)).unwrap_or(1);
    let settings = cfg.settings(n);
    let mut letters = Vec::new();
    for c in &word {
        let factors = combinatorics::factorize(c)?;
        letters.push(json!({
            "canonical": c.canonical(),
            "n_type": c.n_type(),
            "m": c.m(),
            "primitive": factors.len() == 1,
            "factors": factors.iter().map(Combinatorics::canonical).collect::<Vec<_>>(),
        }));
    }
    let product = if word.is_empty() {
        Value::Null
    } else {
        json!(tuner::word_product(&word)?.canonical())
    };
    let enumeration = match cfg.enumerate_m {
        Some(m) => {
            let all = combinatorics::enumerate_valid(n, m)?;
            let mut primitive = 0;
            for c in &all {
                if c.is_primitive()? {
                    primitive += 1;
                }
            }
            json!({"n_type": n, "m": m, "valid": all.len(), "primitive": primitive})
        }
        None => Value::Null,
    };
    Ok(Outcome::new(
        json!({"letters": letters, "product": product, "enumeration": enumeration}),
        settings,
    ))
}

macro_rules! at_precision {
    ($f:ident, $cfg:expr) => {
        if $cfg.precision_bits == 106 {
            $f::<DoubleDouble>($cfg)
        } else {
            $f::<f64>($cfg)
        }
    };
}

/// Run a command without writing anything except cache entries.
pub fn execute(command: Command, cfg: &RunConfig) -> LabResult<Outcome> {
    cfg.validate()?;
    match command {
        Command::Analyze => at_precision!(analyze, cfg),
        Command::Nest => at_precision!(nest, cfg),
        Command::Cascade => at_precision!(cascade, cfg),
        Command::Tune => at_precision!(tune, cfg),
        Command::Delta => at_precision!(delta, cfg),
        Command::Alpha => at_precision!(alpha, cfg),
        Command::Tower => at_precision!(tower, cfg),
        Command::Contraction => at_precision!(contraction, cfg),
        Command::Julia => julia(cfg),
        Command::External => external(cfg),
        Command::Combinatorics => combinatorics_cmd(cfg),
    }
}

/// Result of `run`: the exit status and the error, if any.
#[derive(Debug)]
pub struct RunStatus {
    pub exit_code: i32,
    pub error: Option<LabError>,
    pub report: Option<std::path::PathBuf>,
}

/// Execute and write the report files. Failures are written as reports
/// with an `error` field when the output directory is usable.
pub fn run(command: Command, cfg: &RunConfig) -> RunStatus {
    let start = Instant::now();
    let result = execute(command, cfg);
    let (exit_code, error_text) = match &result {
        Ok(_) => (0, None),
        Err(e) => (e.exit_code(), Some(e.to_string())),
    };
    let n_type = cfg.b.len().max(1);
    let (payload, artifacts, settings, cache) = match &result {
        Ok(o) => (o.payload.clone(), o.artifacts.clone(), o.settings.clone(), o.cache),
        Err(_) => (Value::Null, Vec::new(), cfg.settings(n_type), None),
    };
    let report = Report {
        schema: report::SCHEMA,
        command: command.name().to_string(),
        inputs: serde_json::to_value(cfg).expect("config serializes"),
        provenance: Provenance {
            precision_bits: cfg.precision_bits,
            settings: fmt::settings(&settings),
        },
        payload,
        error: error_text,
    };
    let meta = Meta {
        command: command.name().to_string(),
        unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        elapsed_ms: start.elapsed().as_millis(),
        cache,
        exit_code,
    };
    let written = report::write_all(&cfg.out, &report, &meta, &artifacts);
    match (result, written) {
        (Ok(_), Ok(path)) => RunStatus {
            exit_code: 0,
            error: None,
            report: Some(path),
        },
        (Ok(_), Err(e)) => RunStatus {
            exit_code: e.exit_code(),
            error: Some(e),
            report: None,
        },
        (Err(e), w) => RunStatus {
            exit_code,
            error: Some(e),
            report: w.ok(),
        },
    }
}
