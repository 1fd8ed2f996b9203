//! On-disk cache of tuning results keyed by word, precision and parameter box.

use std::path::{Path, PathBuf};

use renorm_core::tuner::{FamilySpec, TuneMethod, TuneResult};
use renorm_core::{Combinatorics, Real};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

/// A tuning result with each parameter stored as an unevaluated sum `hi + lo`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneRecord {
    pub b: Vec<[f64; 2]>,
    pub residual: f64,
    pub method: String,
    pub bracket_width: Option<f64>,
    pub best_effort: bool,
}

fn split<T: Real>(x: T) -> [f64; 2] {
    let hi = x.to_f64();
    [hi, (x - T::from_f64(hi)).to_f64()]
}

impl TuneRecord {
    pub fn from_result<T: Real>(r: &TuneResult<T>) -> Self {
        TuneRecord {
            b: r.b.iter().map(|&x| split(x)).collect(),
            residual: r.residual.to_f64(),
            method: r.method.name().to_string(),
            bracket_width: r.bracket_width.map(|w| w.to_f64()),
            best_effort: r.best_effort,
        }
    }

    pub fn to_result<T: Real>(&self, word: &[Combinatorics]) -> Option<TuneResult<T>> {
        let method = match self.method.as_str() {
            "bisection" => TuneMethod::Bisection,
            "newton" => TuneMethod::Newton,
            _ => return None,
        };
        Some(TuneResult {
            b: self.b.iter().map(|[h, l]| T::from_f64(*h) + T::from_f64(*l)).collect(),
            word: word.to_vec(),
            residual: T::from_f64(self.residual),
            method,
            bracket_width: self.bracket_width.map(T::from_f64),
            best_effort: self.best_effort,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    record: TuneRecord,
}

pub struct Cache {
    dir: PathBuf,
}

/// Full key text; its SHA-256 names the entry file.
pub fn key_material(word: &[Combinatorics], precision_bits: u32, family: &FamilySpec) -> String {
    let mut s = format!(
        "v1\nprecision_bits={precision_bits}\nlower={:?}\nupper={:?}\n",
        family.lower, family.upper
    );
    for c in word {
        s.push_str(&c.canonical());
        s.push('\n');
    }
    s
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.json", hex::encode(Sha256::digest(key.as_bytes()))))
    }

    /// The stored record for `key`, if any. Unreadable or mismatched entries
    /// are reported on stderr and treated as misses.
    pub fn lookup(&self, key: &str) -> Option<TuneRecord> {
        let path = self.path(key);
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<Entry>(&text) {
            Ok(e) if e.key == key => Some(e.record),
            Ok(_) => {
                eprintln!("warning: cache entry {} has a different key, ignored", path.display());
                None
            }
            Err(err) => {
                eprintln!("warning: corrupt cache entry {} skipped: {err}", path.display());
                None
            }
        }
    }

    /// Write-then-rename so readers never see a partial entry.
    pub fn store(&self, key: &str, record: &TuneRecord) -> LabResult<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| LabError::io(&self.dir, e))?;
        let path = self.path(key);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let entry = Entry {
            key: key.to_string(),
            record: record.clone(),
        };
        let body = serde_json::to_string_pretty(&entry).expect("cache entries serialize");
        std::fs::write(&tmp, body).map_err(|e| LabError::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| LabError::io(&path, e))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}
