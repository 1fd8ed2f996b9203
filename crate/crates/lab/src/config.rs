//! Run configuration: a flat TOML document, overridable from the command line.

use std::path::{Path, PathBuf};

use renorm_core::Settings;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// 53 (f64) or 106 (double-double).
    pub precision_bits: u32,
    /// Family parameters `b_0, …, b_{N−1}`.
    pub b: Vec<f64>,
    /// Word: canonical strings, `M2^n`-style shorthand, or `@file`.
    pub word: Option<String>,
    pub depth: usize,
    pub max_period: Option<usize>,
    pub horizon: Option<usize>,
    pub orbit_cap: Option<usize>,
    pub nest_cap: Option<usize>,
    pub scan_cells: Option<usize>,
    pub eval_tol: Option<f64>,
    pub escape_tol: Option<f64>,
    pub snap_tol: Option<f64>,
    pub isolation_tol: Option<f64>,
    pub boundary_margin: Option<f64>,
    /// Deepest superstable parameter for `delta`, and for the accumulation
    /// point when `b` is omitted.
    pub n_max: usize,
    /// Band `[1/η, η]` for Yoccoz profiles.
    pub eta: f64,
    /// `Np` for the enhanced nest; defaults to `N·p` of the first renormalization.
    pub np: Option<usize>,
    pub k_max: usize,
    pub family_lower: Option<Vec<f64>>,
    pub family_upper: Option<Vec<f64>>,
    /// Where reports go; not echoed into reports.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    #[serde(skip_serializing)]
    pub cache_dir: Option<PathBuf>,
    pub center: [f64; 2],
    pub width: f64,
    pub height: f64,
    pub cols: usize,
    pub rows: usize,
    pub max_iter: u32,
    pub escape_radius: Option<f64>,
    pub samples: usize,
    pub potential: f64,
    /// Search polynomial-like domains along the tower.
    pub domains: bool,
    pub semi_axis_min: f64,
    pub semi_axis_max: f64,
    pub ellipse_steps: usize,
    /// Enumerate valid combinatorics of this period in `combinatorics`.
    pub enumerate_m: Option<usize>,
    pub n_type: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_bits: 53,
            b: Vec::new(),
            word: None,
            depth: 8,
            max_period: None,
            horizon: None,
            orbit_cap: None,
            nest_cap: None,
            scan_cells: None,
            eval_tol: None,
            escape_tol: None,
            snap_tol: None,
            isolation_tol: None,
            boundary_margin: None,
            n_max: 8,
            eta: 20.0,
            np: None,
            k_max: 8,
            family_lower: None,
            family_upper: None,
            out: PathBuf::from("out"),
            cache_dir: None,
            center: [0.0, 0.0],
            width: 4.0,
            height: 4.0,
            cols: 160,
            rows: 160,
            max_iter: 200,
            escape_radius: None,
            samples: 256,
            potential: 1.0,
            domains: false,
            semi_axis_min: 1.05,
            semi_axis_max: 4.0,
            ellipse_steps: 16,
            enumerate_m: None,
            n_type: None,
        }
    }
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Config(format!("config: {}", msg.into()))
}

fn in_range<T: PartialOrd + std::fmt::Display + Copy>(name: &str, v: T, lo: T, hi: T) -> LabResult<()> {
    if v >= lo && v <= hi {
        Ok(())
    } else {
        Err(bad(format!("{name} = {v} outside [{lo}, {hi}]")))
    }
}

fn positive(name: &str, v: f64) -> LabResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> LabResult<Self> {
        toml::from_str(text).map_err(|e| bad(e.message().to_string()))
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> LabResult<()> {
        if self.precision_bits != 53 && self.precision_bits != 106 {
            return Err(bad("precision_bits must be 53 or 106"));
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(bad("b must be finite"));
        }
        in_range("depth", self.depth, 1, 4096)?;
        in_range("n_max", self.n_max, 3, 16)?;
        in_range("k_max", self.k_max, 1, 64)?;
        if let Some(v) = self.max_period {
            in_range("max_period", v, 2, 256)?;
        }
        if let Some(v) = self.horizon {
            in_range("horizon", v, 16, 1 << 22)?;
        }
        if let Some(v) = self.orbit_cap {
            in_range("orbit_cap", v, 1 << 10, 1 << 26)?;
        }
        if let Some(v) = self.nest_cap {
            in_range("nest_cap", v, 1, 4096)?;
        }
        if let Some(v) = self.scan_cells {
            in_range("scan_cells", v, 64, 1 << 20)?;
        }
        for (name, v) in [
            ("eval_tol", self.eval_tol),
            ("escape_tol", self.escape_tol),
            ("snap_tol", self.snap_tol),
            ("isolation_tol", self.isolation_tol),
            ("boundary_margin", self.boundary_margin),
        ] {
            if let Some(v) = v {
                positive(name, v)?;
                in_range(name, v, 0.0, 1e-2)?;
            }
        }
        if !(self.eta >= 1.0) || !self.eta.is_finite() {
            return Err(bad("eta must be at least 1"));
        }
        if self.np == Some(0) {
            return Err(bad("np must be positive"));
        }
        match (&self.family_lower, &self.family_upper) {
            (None, None) | (Some(_), Some(_)) => {}
            _ => return Err(bad("family_lower and family_upper go together")),
        }
        if !self.center.iter().all(|v| v.is_finite()) {
            return Err(bad("center must be finite"));
        }
        if !(self.width >= 0.0 && self.height >= 0.0) || !self.width.is_finite() || !self.height.is_finite() {
            return Err(bad("width and height must be non-negative"));
        }
        in_range("cols", self.cols, 0, 8192)?;
        in_range("rows", self.rows, 0, 8192)?;
        in_range("max_iter", self.max_iter, 1, 1_000_000)?;
        if let Some(r) = self.escape_radius {
            positive("escape_radius", r)?;
        }
        in_range("samples", self.samples, 8, 1 << 16)?;
        positive("potential", self.potential)?;
        if !(self.semi_axis_min > 1.0 && self.semi_axis_max >= self.semi_axis_min && self.semi_axis_max.is_finite()) {
            return Err(bad("need 1 < semi_axis_min <= semi_axis_max"));
        }
        in_range("ellipse_steps", self.ellipse_steps, 1, 256)?;
        if let Some(m) = self.enumerate_m {
            in_range("enumerate_m", m, 1, 16)?;
        }
        if let Some(n) = self.n_type {
            in_range("n_type", n, 1, 8)?;
        }
        Ok(())
    }

    /// Settings for type-`n_type` maps with the configured overrides.
    pub fn settings(&self, n_type: usize) -> Settings {
        let mut s = Settings::for_type(n_type);
        let set = |slot: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut s.max_period, self.max_period);
        set(&mut s.horizon, self.horizon);
        set(&mut s.orbit_cap, self.orbit_cap);
        set(&mut s.nest_cap, self.nest_cap);
        set(&mut s.scan_cells, self.scan_cells);
        let setf = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        setf(&mut s.eval_tol, self.eval_tol);
        setf(&mut s.escape_tol, self.escape_tol);
        setf(&mut s.snap_tol, self.snap_tol);
        setf(&mut s.isolation_tol, self.isolation_tol);
        setf(&mut s.boundary_margin, self.boundary_margin);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("depth = 3\nbogus = 1\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn overrides_reach_settings() {
        let cfg = RunConfig::from_toml("horizon = 100\neval_tol = 1e-8\n").unwrap();
        cfg.validate().unwrap();
        let s = cfg.settings(1);
        assert_eq!(s.horizon, 100);
        assert_eq!(s.eval_tol, 1e-8);
        assert_eq!(s.max_period, Settings::for_type(1).max_period);
    }

    #[test]
    fn ranges_are_checked() {
        let cfg = RunConfig {
            precision_bits: 64,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            depth: 0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        RunConfig::default().validate().unwrap();
    }
}
