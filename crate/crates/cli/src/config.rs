//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Every key must be consumed by the experiment that reads
//! the file; leftovers are reported as errors so typos do not pass silently.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{DatasetName, Grouping};
use crate::error::{HarnessError, Result};

#[derive(Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config { line: i + 1, message: format!("expected `key = value`, got `{line}`") })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(HarnessError::Config { line: i + 1, message: "empty key".into() });
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(HarnessError::Config { line: i + 1, message: format!("duplicate key `{k}`") });
            }
        }
        Ok(KeyValues { entries, used: RefCell::new(BTreeSet::new()) })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        KeyValues::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| HarnessError::value(key, format!("`{v}`: {e}"))))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|e| HarnessError::value(key, format!("`{s}`: {e}"))))
                    .collect()
            })
            .transpose()
    }

    /// Errors on keys nobody asked for.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self.entries.keys().filter(|k| !used.contains(*k)).map(String::as_str).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::value(&unknown.join(", "), "unknown key"))
        }
    }
}

fn checkpoints(kv: &KeyValues, default: Vec<usize>) -> Result<Vec<usize>> {
    let c = kv.list::<usize>("checkpoints")?.unwrap_or(default);
    if c.is_empty() || c[0] == 0 || c.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::value("checkpoints", "must be positive and strictly ascending"));
    }
    Ok(c)
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(HarnessError::value(key, format!("must be positive, got {v}")))
    }
}

fn fraction(kv: &KeyValues) -> Result<f64> {
    let f = kv.get_or("split", 0.8)?;
    if !(f > 0.0 && f < 1.0) {
        return Err(HarnessError::value("split", format!("must lie in (0, 1), got {f}")));
    }
    Ok(f)
}

/// Roughly 20 points per decade from 1 to `max`.
pub fn log_checkpoints(max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..)
        .map(|i| 10f64.powf(i as f64 / 20.0).round() as usize)
        .take_while(|&k| k < max)
        .collect();
    out.push(max);
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub d: usize,
    pub n: usize,
    /// Modulus for the adaptive run; the constant run always uses `nu = 0`.
    pub nu: f64,
    pub iterations: usize,
    pub checkpoints: Vec<usize>,
    pub tau0: Option<f64>,
    pub sigma0: Option<f64>,
    /// Initial `sigma` of the adaptive run; `1/nu` when absent.
    pub adaptive_sigma0: Option<f64>,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            d: 250,
            n: 350,
            nu: 0.3,
            iterations: 10_000,
            checkpoints: log_checkpoints(10_000),
            tau0: None,
            sigma0: None,
            adaptive_sigma0: None,
        }
    }
}

impl ToyConfig {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let d = ToyConfig::default();
        let iterations = kv.get_or("iterations", d.iterations)?;
        let c = ToyConfig {
            d: kv.get_or("d", d.d)?,
            n: kv.get_or("n", d.n)?,
            nu: positive("nu", kv.get_or("nu", d.nu)?)?,
            iterations,
            checkpoints: checkpoints(kv, log_checkpoints(iterations))?,
            tau0: kv.get("tau0")?,
            sigma0: kv.get("sigma0")?,
            adaptive_sigma0: kv.get("adaptive_sigma0")?,
        };
        kv.finish()?;
        Ok(c)
    }
}

/// The three schedules of the kernel-learning experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Constant steps, `mu = nu = 0`.
    C1,
    /// Adaptive steps, `mu = 0`, `nu = 1/2`.
    A,
    /// Linear schedule, `mu = 1`, `nu = 1/2`.
    C2,
}

impl Variant {
    pub fn moduli(self) -> (f64, f64) {
        match self {
            Variant::C1 => (0.0, 0.0),
            Variant::A => (0.0, 0.5),
            Variant::C2 => (1.0, 0.5),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(Variant::C1),
            "a" => Ok(Variant::A),
            "c2" => Ok(Variant::C2),
            _ => Err(format!("unknown variant `{s}` (c1, a, c2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MksvmConfig {
    pub dataset: DatasetName,
    pub path: PathBuf,
    pub variant: Variant,
    pub runs: u32,
    pub split: f64,
    pub c_box: f64,
    pub mu: f64,
    pub nu: f64,
    /// `tau_0 = tau_scale / max(L_yx, 1)` unless `tau0` is set.
    pub tau_scale: f64,
    pub tau0: Option<f64>,
    pub sigma0: Option<f64>,
    pub checkpoints: Vec<usize>,
}

impl MksvmConfig {
    pub fn new(dataset: DatasetName, path: PathBuf) -> Self {
        MksvmConfig {
            dataset,
            path,
            variant: Variant::C1,
            runs: 12,
            split: 0.8,
            c_box: 1.0,
            mu: 0.0,
            nu: 0.0,
            tau_scale: 0.01,
            tau0: None,
            sigma0: None,
            checkpoints: vec![250, 500, 1000, 1500, 2000],
        }
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let dataset: DatasetName = kv
            .get("dataset")?
            .ok_or_else(|| HarnessError::value("dataset", "required"))?;
        let path = kv.get::<PathBuf>("path")?.unwrap_or_else(|| dataset.default_path());
        let d = MksvmConfig::new(dataset, path);
        let variant = kv.get_or("variant", d.variant)?;
        let (mu, nu) = variant.moduli();
        let c = MksvmConfig {
            variant,
            runs: kv.get_or("runs", d.runs)?,
            split: fraction(kv)?,
            c_box: positive("c_box", kv.get_or("c_box", d.c_box)?)?,
            mu: kv.get_or("mu", mu)?,
            nu: kv.get_or("nu", nu)?,
            tau_scale: positive("tau_scale", kv.get_or("tau_scale", d.tau_scale)?)?,
            tau0: kv.get("tau0")?,
            sigma0: kv.get("sigma0")?,
            checkpoints: checkpoints(kv, d.checkpoints.clone())?,
            ..d
        };
        if c.runs == 0 {
            return Err(HarnessError::value("runs", "must be positive"));
        }
        kv.finish()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessConfig {
    pub path: PathBuf,
    pub grouping: Grouping,
    pub partitions: u32,
    pub split: f64,
    /// `tau_0 = tau_scale / max(L_yx, 1)` unless `tau0` is set.
    pub tau_scale: f64,
    pub tau0: Option<f64>,
    pub sigma0: Option<f64>,
    pub checkpoints: Vec<usize>,
}

impl FairnessConfig {
    pub fn new(path: PathBuf, grouping: Grouping) -> Self {
        FairnessConfig {
            path,
            grouping,
            partitions: 5,
            split: 0.8,
            tau_scale: 1.0,
            tau0: None,
            sigma0: None,
            checkpoints: vec![100, 500, 1000],
        }
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let path = kv.get::<PathBuf>("path")?.unwrap_or_else(|| DatasetName::HeartDisease.default_path());
        let d = FairnessConfig::new(path, kv.get_or("grouping", Grouping::Sex)?);
        let c = FairnessConfig {
            partitions: kv.get_or("partitions", d.partitions)?,
            split: fraction(kv)?,
            tau_scale: positive("tau_scale", kv.get_or("tau_scale", d.tau_scale)?)?,
            tau0: kv.get("tau0")?,
            sigma0: kv.get("sigma0")?,
            checkpoints: checkpoints(kv, d.checkpoints.clone())?,
            ..d
        };
        if c.grouping == Grouping::None {
            return Err(HarnessError::value("grouping", "the fairness experiment needs sex or age"));
        }
        if c.partitions == 0 {
            return Err(HarnessError::value("partitions", "must be positive"));
        }
        kv.finish()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub d: usize,
    pub n: usize,
    pub mu: f64,
    pub nu: f64,
    pub a_norm: f64,
    pub iterations: usize,
    pub theta: Option<f64>,
    pub checkpoints: Vec<usize>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            d: 40,
            n: 40,
            mu: 1.0,
            nu: 1.0,
            a_norm: 1.0,
            iterations: 500,
            theta: None,
            checkpoints: (1..=500).collect(),
        }
    }
}

impl SyntheticConfig {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let d = SyntheticConfig::default();
        let iterations = kv.get_or("iterations", d.iterations)?;
        let c = SyntheticConfig {
            d: kv.get_or("d", d.d)?,
            n: kv.get_or("n", d.n)?,
            mu: positive("mu", kv.get_or("mu", d.mu)?)?,
            nu: positive("nu", kv.get_or("nu", d.nu)?)?,
            a_norm: kv.get_or("a_norm", d.a_norm)?,
            iterations,
            theta: kv.get("theta")?,
            checkpoints: checkpoints(kv, (1..=iterations).collect())?,
        };
        kv.finish()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateConfig {
    pub trials: usize,
    /// Trials for the QP-backed fairness prox, which is far slower.
    pub fairness_trials: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { trials: 1000, fairness_trials: 200 }
    }
}

impl ValidateConfig {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let d = ValidateConfig::default();
        let c = ValidateConfig {
            trials: kv.get_or("trials", d.trials)?,
            fairness_trials: kv.get_or("fairness_trials", d.fairness_trials)?,
        };
        if c.trials == 0 || c.fairness_trials == 0 {
            return Err(HarnessError::value("trials", "must be positive"));
        }
        kv.finish()?;
        Ok(c)
    }
}
