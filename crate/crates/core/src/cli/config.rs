//! `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Problem with a configuration file or value; reported as a usage error.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub msg: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.msg),
            None => f.write_str(&self.msg),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, msg: impl Into<String>) -> ConfigError {
    ConfigError { line, msg: msg.into() }
}

/// Everything a `run` needs. Defaults are not tuned against any published
/// table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p: f64,
    /// Heat-kernel diffusion time applied to the label measures.
    pub t: f64,
    pub labels_per_class: usize,
    pub trials: usize,
    pub seed: u64,
    /// Cardinality slack of the transport assignment; `None` assigns by
    /// argmax.
    pub epsilon: Option<f64>,
    /// Fraction of the sampled labels flipped to a wrong class.
    pub corrupt: f64,
    /// Candidate-set size for partial labels; 0 disables them.
    pub partial_size: usize,
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// MBO refinement weight; `None` skips refinement.
    pub alpha_mbo: Option<f64>,
    /// Neighbors per node when the graph is built from features.
    pub knn: usize,
    /// Concurrent trials; 0 uses every core.
    pub workers: usize,
    pub graph: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub superclasses: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            t: 0.0,
            labels_per_class: 1,
            trials: 100,
            seed: 0,
            epsilon: None,
            corrupt: 0.0,
            partial_size: 0,
            tol: 1e-4,
            max_outer: 200,
            max_inner: 50,
            alpha_mbo: None,
            knn: 10,
            workers: 0,
            graph: None,
            features: None,
            labels: None,
            superclasses: None,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "p",
    "t",
    "labels_per_class",
    "trials",
    "seed",
    "epsilon",
    "corrupt",
    "partial_size",
    "tol",
    "max_outer",
    "max_inner",
    "alpha_mbo",
    "knn",
    "workers",
    "graph",
    "features",
    "labels",
    "superclasses",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad value for `{key}`: {value:?}"))
}

fn parse_optional(key: &str, value: &str) -> Result<Option<f64>, String> {
    if value.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

impl ExperimentConfig {
    /// Sets one key from its textual value. Keys may use `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = key.replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "p" => self.p = parse_num(&key, v)?,
            "t" => self.t = parse_num(&key, v)?,
            "labels_per_class" => self.labels_per_class = parse_num(&key, v)?,
            "trials" => self.trials = parse_num(&key, v)?,
            "seed" => self.seed = parse_num(&key, v)?,
            "epsilon" => self.epsilon = parse_optional(&key, v)?,
            "corrupt" => self.corrupt = parse_num(&key, v)?,
            "partial_size" => self.partial_size = parse_num(&key, v)?,
            "tol" => self.tol = parse_num(&key, v)?,
            "max_outer" => self.max_outer = parse_num(&key, v)?,
            "max_inner" => self.max_inner = parse_num(&key, v)?,
            "alpha_mbo" => self.alpha_mbo = parse_optional(&key, v)?,
            "knn" => self.knn = parse_num(&key, v)?,
            "workers" => self.workers = parse_num(&key, v)?,
            "graph" => self.graph = Some(PathBuf::from(v)),
            "features" => self.features = Some(PathBuf::from(v)),
            "labels" => self.labels = Some(PathBuf::from(v)),
            "superclasses" => self.superclasses = Some(PathBuf::from(v)),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment;
    /// unknown and repeated keys are rejected.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err(Some(idx + 1), format!("expected `key = value`, got {raw:?}")))?;
            let key = key.trim().replace('-', "_");
            if !seen.insert(key.clone()) {
                return Err(err(Some(idx + 1), format!("duplicate key `{key}`")));
            }
            cfg.set(&key, value).map_err(|m| err(Some(idx + 1), m))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(None, format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| err(e.line, format!("{}: {}", path.display(), e.msg)))
    }

    /// Writes every key; [`parse`](Self::parse) reads it back unchanged.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        let _ = writeln!(out, "p = {}", self.p);
        let _ = writeln!(out, "t = {}", self.t);
        let _ = writeln!(out, "labels_per_class = {}", self.labels_per_class);
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "epsilon = {}", opt(self.epsilon));
        let _ = writeln!(out, "corrupt = {}", self.corrupt);
        let _ = writeln!(out, "partial_size = {}", self.partial_size);
        let _ = writeln!(out, "tol = {}", self.tol);
        let _ = writeln!(out, "max_outer = {}", self.max_outer);
        let _ = writeln!(out, "max_inner = {}", self.max_inner);
        let _ = writeln!(out, "alpha_mbo = {}", opt(self.alpha_mbo));
        let _ = writeln!(out, "knn = {}", self.knn);
        let _ = writeln!(out, "workers = {}", self.workers);
        for (key, path) in [("graph", &self.graph), ("features", &self.features), ("labels", &self.labels), ("superclasses", &self.superclasses)] {
            if let Some(p) = path {
                let _ = writeln!(out, "{key} = {}", p.display());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(err(None, m));
        if !(self.p >= 1.0) {
            return bad(format!("p must be in [1, inf], got {}", self.p));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return bad(format!("t must be a finite nonnegative time, got {}", self.t));
        }
        if self.labels_per_class == 0 || self.trials == 0 {
            return bad("labels_per_class and trials must be at least 1".into());
        }
        if let Some(e) = self.epsilon {
            if !(e >= 0.0) {
                return bad(format!("epsilon must be nonnegative, got {e}"));
            }
        }
        if !(0.0..=1.0).contains(&self.corrupt) {
            return bad(format!("corrupt must be in [0, 1], got {}", self.corrupt));
        }
        if self.partial_size == 1 {
            return bad("partial_size must be 0 (off) or at least 2".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol must be in (0, 1), got {}", self.tol));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("max_outer and max_inner must be at least 1".into());
        }
        if let Some(a) = self.alpha_mbo {
            if !(a >= 0.0 && a.is_finite()) {
                return bad(format!("alpha_mbo must be finite and nonnegative, got {a}"));
            }
        }
        if self.knn == 0 {
            return bad("knn must be at least 1".into());
        }
        if self.partial_size > 0 && self.superclasses.is_none() {
            return bad("partial labels need a `superclasses` file".into());
        }
        Ok(())
    }
}
