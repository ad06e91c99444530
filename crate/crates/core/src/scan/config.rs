//! Scan configuration from layered `key = value` sources.
//!
//! Grammar of a config file: one `key = value` pair per line, `#` starts a
//! comment, blank lines are ignored. Keys:
//!
//! ```text
//! mode       = two-level-map | ising-map | derivative-map | ep-trace | adiabatic-bench
//! grid.NAME  = MIN:MAX:STEPS
//! fix.NAME   = VALUE
//! format     = csv | json
//! out        = PATH
//! strict     = true | false
//! fd_step    = VALUE
//! near_band  = VALUE
//! threads    = N
//! times      = T1,T2,...        (adiabatic-bench only)
//! ```
//!
//! Environment variables `CGPHASE_KEY` map to `key` with `__` standing for
//! `.` (`CGPHASE_GRID__H=0:2:50` sets `grid.h`). Later layers win:
//! defaults, then file, then environment, then command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ENV_PREFIX: &str = "CGPHASE_";
pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const DEFAULT_NEAR_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    TwoLevelMap,
    IsingMap,
    DerivativeMap,
    EpTrace,
    AdiabaticBench,
}

impl ScanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanMode::TwoLevelMap => "two-level-map",
            ScanMode::IsingMap => "ising-map",
            ScanMode::DerivativeMap => "derivative-map",
            ScanMode::EpTrace => "ep-trace",
            ScanMode::AdiabaticBench => "adiabatic-bench",
        }
    }

    /// Scan parameters and their values when not scanned or fixed.
    pub fn parameters(self) -> &'static [(&'static str, f64)] {
        match self {
            ScanMode::TwoLevelMap => &[("r", 1.0), ("z", 0.0), ("eps", 0.0)],
            ScanMode::IsingMap | ScanMode::DerivativeMap => &[("h", 0.0), ("delta", 0.0)],
            ScanMode::EpTrace => &[("delta", 0.0), ("a", 1.0)],
            ScanMode::AdiabaticBench => &[
                ("field", crate::adiabatic::BENCH_FIELD),
                ("eps", 0.2),
                ("theta", std::f64::consts::FRAC_PI_3),
                ("tol", crate::adiabatic::DEFAULT_TOL),
            ],
        }
    }

    fn default_axes(self) -> Vec<Axis> {
        let axis = |name: &str, min, max, steps| Axis {
            name: name.into(),
            min,
            max,
            steps,
        };
        match self {
            ScanMode::TwoLevelMap => vec![axis("r", 0.0, 2.0, 101), axis("z", -1.0, 1.0, 101)],
            ScanMode::IsingMap | ScanMode::DerivativeMap => {
                vec![axis("h", 0.0, 2.0, 201), axis("delta", 0.0, 1.0, 101)]
            }
            ScanMode::EpTrace => vec![axis("delta", 0.0, 1.0, 11)],
            ScanMode::AdiabaticBench => Vec::new(),
        }
    }
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ScanMode::TwoLevelMap,
            ScanMode::IsingMap,
            ScanMode::DerivativeMap,
            ScanMode::EpTrace,
            ScanMode::AdiabaticBench,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    /// Parse `NAME=MIN:MAX:STEPS`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, range) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected NAME=MIN:MAX:STEPS, got '{spec}'")))?;
        Self::from_range(name.trim(), range)
    }

    fn from_range(name: &str, range: &str) -> Result<Self> {
        let parts: Vec<&str> = range.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "axis '{name}': expected MIN:MAX:STEPS, got '{range}'"
            )));
        }
        let axis = Axis {
            name: name.to_string(),
            min: parse_f64(name, parts[0])?,
            max: parse_f64(name, parts[1])?,
            steps: parts[2]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("axis '{name}': bad step count '{}'", parts[2])))?,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Config(format!("axis '{}': need at least 2 steps", self.name)));
        }
        if !(self.min < self.max) {
            return Err(Error::Config(format!("axis '{}': min must be below max", self.name)));
        }
        Ok(())
    }

    /// Evenly spaced values including both ends.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key}: value must be finite")));
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub mode: ScanMode,
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub strict: bool,
    pub fd_step: f64,
    pub near_band: f64,
    pub threads: Option<usize>,
    /// Total times of the adiabatic ladder.
    pub times: Vec<f64>,
}

impl ScanConfig {
    pub fn new(mode: ScanMode) -> Self {
        Self {
            mode,
            axes: mode.default_axes(),
            fixed: BTreeMap::new(),
            output_path: None,
            format: OutputFormat::Csv,
            strict: false,
            fd_step: DEFAULT_FD_STEP,
            near_band: DEFAULT_NEAR_BAND,
            threads: None,
            times: vec![250.0, 500.0, 1000.0],
        }
    }

    /// Value of a scan parameter that is not an axis.
    pub fn parameter(&self, name: &str) -> f64 {
        self.fixed.get(name).copied().unwrap_or_else(|| {
            self.mode
                .parameters()
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .unwrap_or(0.0)
        })
    }

    fn known_parameter(&self, name: &str) -> Result<()> {
        if self.mode.parameters().iter().any(|(n, _)| *n == name) {
            Ok(())
        } else {
            Err(Error::Config(format!("mode {} has no parameter '{name}'", self.mode)))
        }
    }

    /// Set one key; axes given for the first time replace the mode defaults.
    fn apply(&mut self, key: &str, value: &str, fresh_axes: &mut bool) -> Result<()> {
        let value = value.trim();
        if let Some(name) = key.strip_prefix("grid.") {
            self.known_parameter(name)?;
            let axis = Axis::from_range(name, value)?;
            if *fresh_axes {
                self.axes.clear();
                *fresh_axes = false;
            }
            match self.axes.iter_mut().find(|a| a.name == name) {
                Some(a) => *a = axis,
                None => self.axes.push(axis),
            }
            return Ok(());
        }
        if let Some(name) = key.strip_prefix("fix.") {
            self.known_parameter(name)?;
            self.fixed.insert(name.to_string(), parse_f64(key, value)?);
            return Ok(());
        }
        match key {
            "mode" => {}
            "format" => self.format = value.parse()?,
            "out" => self.output_path = Some(PathBuf::from(value)),
            "strict" => {
                self.strict = value
                    .parse()
                    .map_err(|_| Error::Config(format!("strict: expected true or false, got '{value}'")))?
            }
            "fd_step" => {
                let s = parse_f64(key, value)?;
                if !(s > 0.0) {
                    return Err(Error::Config("fd_step must be positive".into()));
                }
                self.fd_step = s;
            }
            "near_band" => {
                let b = parse_f64(key, value)?;
                if b < 0.0 {
                    return Err(Error::Config("near_band must be non-negative".into()));
                }
                self.near_band = b;
            }
            "threads" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| Error::Config(format!("threads: bad value '{value}'")))?;
                if n == 0 {
                    return Err(Error::Config("threads must be at least 1".into()));
                }
                self.threads = Some(n);
            }
            "times" => {
                let times = value
                    .split(',')
                    .map(|t| parse_f64(key, t))
                    .collect::<Result<Vec<_>>>()?;
                if times.is_empty() || times.iter().any(|&t| t <= 0.0) {
                    return Err(Error::Config("times must be positive".into()));
                }
                self.times = times;
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Merge layers in increasing precedence and build the configuration.
    pub fn from_layers(layers: &[Vec<(String, String)>]) -> Result<Self> {
        let mut merged: Vec<(String, String)> = Vec::new();
        for layer in layers {
            for (k, v) in layer {
                merged.retain(|(mk, _)| mk != k);
                merged.push((k.clone(), v.clone()));
            }
        }
        let mode = merged
            .iter()
            .find(|(k, _)| k == "mode")
            .map(|(_, v)| v.trim().parse())
            .transpose()?
            .unwrap_or(ScanMode::IsingMap);
        let mut config = ScanConfig::new(mode);
        let mut fresh_axes = true;
        for (k, v) in &merged {
            config.apply(k, v, &mut fresh_axes)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.axes.iter().enumerate() {
            a.validate()?;
            self.known_parameter(&a.name)?;
            if self.axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("axis '{}' given twice", a.name)));
            }
            if self.fixed.contains_key(&a.name) {
                return Err(Error::Config(format!("'{}' is both scanned and fixed", a.name)));
            }
        }
        for name in self.fixed.keys() {
            self.known_parameter(name)?;
        }
        match self.mode {
            ScanMode::AdiabaticBench => {
                if !self.axes.is_empty() {
                    return Err(Error::Config("adiabatic-bench takes no grid".into()));
                }
            }
            ScanMode::EpTrace => {
                if self.axes.len() != 1 || self.axes[0].name != "delta" {
                    return Err(Error::Config("ep-trace scans exactly one axis, delta".into()));
                }
            }
            _ => {
                if self.axes.is_empty() {
                    return Err(Error::Config(format!("mode {} needs at least one axis", self.mode)));
                }
            }
        }
        Ok(())
    }
}

/// Parse the flat `key = value` text format.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Keys from `CGPHASE_*` variables.
pub fn env_layer<I: IntoIterator<Item = (String, String)>>(vars: I) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            k.strip_prefix(ENV_PREFIX)
                .map(|rest| (rest.to_lowercase().replace("__", "."), v))
        })
        .collect();
    out.sort();
    out
}
