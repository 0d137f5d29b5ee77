//! Flat `key = value` run configuration.
//!
//! ```text
//! # benchmark economy, tau sweep
//! tau = 0.5
//! density.kind = tabulated
//! density.table = -1:0, 0:1, 1:0
//! sweep.tau = 0.1, 0.9, 5
//! simulate.n = 1000000
//! output.format = csv
//! ```
//!
//! Parameters not set take their benchmark values. Later `--set` overrides
//! replace file values.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use covenant_core::{ErrorDensity, ModelParams, ParamName};

/// A problem in a configuration line, anchored to its source.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{source_name}:{line}: {message}")]
pub struct ConfigError {
    pub source_name: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!(
                "unknown output format `{s}` (expected json or csv)"
            )),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// One swept parameter: `steps` evenly spaced values from `start` to `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: ParamName,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == self.steps - 1 {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulateConfig {
    pub n: u64,
    pub seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            n: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub density: ErrorDensity,
    /// Axes in the order they were given; the first varies slowest.
    pub sweep: Vec<SweepAxis>,
    pub simulate: SimulateConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::benchmark(),
            density: ErrorDensity::Uniform,
            sweep: Vec::new(),
            simulate: SimulateConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Builder state while lines are applied.
#[derive(Debug, Default)]
pub struct ConfigBuilder {
    config: RunConfig,
    kind: Option<(String, Anchor)>,
    table: Option<(Vec<(f64, f64)>, Anchor)>,
}

#[derive(Debug, Clone)]
struct Anchor {
    source_name: String,
    line: usize,
}

impl Anchor {
    fn error(&self, message: impl Into<String>) -> ConfigError {
        ConfigError {
            source_name: self.source_name.clone(),
            line: self.line,
            message: message.into(),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("`{key}` expects a number, got `{value}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{key}` must be finite, got `{value}`"))
    }
}

fn parse_u64(key: &str, value: &str) -> Result<u64, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}` expects a non-negative integer, got `{value}`"))
}

fn parse_table(value: &str) -> Result<Vec<(f64, f64)>, String> {
    value
        .split(',')
        .map(|pair| {
            let (x, f) = pair
                .split_once(':')
                .ok_or_else(|| format!("density knot `{}` is not of the form x:f", pair.trim()))?;
            Ok((
                parse_f64("density.table", x.trim())?,
                parse_f64("density.table", f.trim())?,
            ))
        })
        .collect()
}

fn parse_sweep(param: ParamName, value: &str) -> Result<SweepAxis, String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    let [start, stop, steps] = parts[..] else {
        return Err(format!(
            "`sweep.{param}` expects `start, stop, steps`, got `{value}`"
        ));
    };
    let key = format!("sweep.{param}");
    let steps: usize = steps
        .parse()
        .map_err(|_| format!("`{key}` steps must be an integer, got `{steps}`"))?;
    if steps < 2 {
        return Err(format!("`{key}` needs at least 2 steps, got {steps}"));
    }
    Ok(SweepAxis {
        param,
        start: parse_f64(&key, start)?,
        stop: parse_f64(&key, stop)?,
        steps,
    })
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Applies every line of a configuration file. Blank lines and lines
    /// starting with `#` are skipped. Keys may appear once per file.
    pub fn apply_file(&mut self, text: &str, source_name: &str) -> Result<(), ConfigError> {
        let mut keys: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let anchor = Anchor {
                source_name: source_name.to_string(),
                line: i + 1,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anchor.error(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if keys.iter().any(|k| k == key) {
                return Err(anchor.error(format!("duplicate key `{key}`")));
            }
            keys.push(key.to_string());
            self.apply(key, value.trim(), anchor)?;
        }
        Ok(())
    }

    /// Applies a single `key=value` override.
    pub fn apply_override(&mut self, assignment: &str, index: usize) -> Result<(), ConfigError> {
        let anchor = Anchor {
            source_name: "--set".to_string(),
            line: index + 1,
        };
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| anchor.error(format!("expected `key=value`, got `{assignment}`")))?;
        self.apply(key.trim(), value.trim(), anchor)
    }

    fn apply(&mut self, key: &str, value: &str, anchor: Anchor) -> Result<(), ConfigError> {
        let c = &mut self.config;
        let result: Result<(), String> = if let Ok(name) = key.parse::<ParamName>() {
            parse_f64(key, value).map(|v| c.params.set(name, v))
        } else if let Some(rest) = key.strip_prefix("sweep.") {
            rest.parse::<ParamName>()
                .map_err(|e| format!("sweep over {e}"))
                .and_then(|param| parse_sweep(param, value))
                .map(
                    |axis| match c.sweep.iter_mut().find(|a| a.param == axis.param) {
                        Some(existing) => *existing = axis,
                        None => c.sweep.push(axis),
                    },
                )
        } else {
            match key {
                "density.kind" => match value {
                    "uniform" | "triangular" | "tabulated" => {
                        self.kind = Some((value.to_string(), anchor.clone()));
                        Ok(())
                    }
                    _ => Err(format!("unknown density kind `{value}` (expected uniform, triangular or tabulated)")),
                },
                "density.table" => parse_table(value).map(|t| self.table = Some((t, anchor.clone()))),
                "simulate.n" => parse_u64(key, value).and_then(|n| {
                    if n == 0 {
                        Err("`simulate.n` must be at least 1".to_string())
                    } else {
                        c.simulate.n = n;
                        Ok(())
                    }
                }),
                "simulate.seed" => parse_u64(key, value).map(|s| c.simulate.seed = s),
                "output.path" => {
                    if value.is_empty() {
                        Err("`output.path` is empty".to_string())
                    } else {
                        c.output.path = Some(PathBuf::from(value));
                        Ok(())
                    }
                }
                "output.format" => value.parse().map(|f| c.output.format = Some(f)),
                _ => Err(format!("unknown key `{key}`")),
            }
        };
        result.map_err(|m| anchor.error(m))
    }

    /// Resolves the density section and returns the finished configuration.
    pub fn finish(mut self) -> Result<RunConfig, ConfigError> {
        let kind = self.kind.clone();
        let table = self.table.take();
        self.config.density = match (kind, table) {
            (None, None) => ErrorDensity::Uniform,
            (Some((k, a)), table) if k == "tabulated" => {
                let (knots, ta) = table
                    .ok_or_else(|| a.error("`density.kind = tabulated` needs `density.table`"))?;
                ErrorDensity::tabulated(knots).map_err(|e| ta.error(e.to_string()))?
            }
            (Some((k, _)), None) => match k.as_str() {
                "triangular" => ErrorDensity::Triangular,
                _ => ErrorDensity::Uniform,
            },
            (kind, Some((_, ta))) => {
                let k = kind
                    .map(|(k, _)| k)
                    .unwrap_or_else(|| "uniform".to_string());
                return Err(ta.error(format!("`density.table` given but `density.kind` is {k}")));
            }
        };
        Ok(self.config)
    }
}

impl RunConfig {
    /// Parses a file and then applies overrides in order.
    pub fn load(
        text: Option<(&str, &str)>,
        overrides: &[String],
    ) -> Result<RunConfig, ConfigError> {
        let mut b = ConfigBuilder::new();
        if let Some((text, name)) = text {
            b.apply_file(text, name)?;
        }
        for (i, o) in overrides.iter().enumerate() {
            b.apply_override(o, i)?;
        }
        b.finish()
    }

    /// Every sweep point in grid order (first axis slowest).
    pub fn sweep_points(&self) -> Vec<ModelParams> {
        let mut points = vec![self.params];
        for axis in &self.sweep {
            let values = axis.values();
            points = points
                .into_iter()
                .flat_map(|p| values.iter().map(move |&v| p.with(axis.param, v)))
                .collect();
        }
        points
    }
}
