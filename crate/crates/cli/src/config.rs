//! Run configuration: defaults per preset, a flat `key = value` file, and
//! command-line overrides (which win).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use convdiff_core::assembly::{ProblemSpec, ScalarField};
use convdiff_core::elements::MAX_DEGREE;
use convdiff_core::stabilization::{StabilizationConfig, StabilizationMode, DEFAULT_BETA};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Paper1d,
    Paper2d,
    Custom,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper1d" => Ok(Preset::Paper1d),
            "paper2d" => Ok(Preset::Paper2d),
            "custom" => Ok(Preset::Custom),
            _ => Err(format!("unknown preset '{s}' (expected paper1d, paper2d or custom)")),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Paper1d => "paper1d",
            Preset::Paper2d => "paper2d",
            Preset::Custom => "custom",
        })
    }
}

/// Raw settings before defaults are filled in. Every field is optional so a
/// config file and the command line can be layered.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub values: BTreeMap<String, String>,
}

pub const KEYS: &[&str] = &[
    "preset", "dim", "b", "by", "eps", "a", "c", "source", "degree", "n", "stab", "beta", "layers", "tol", "out", "meshes",
    "degrees", "points", "grid",
];

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(CliError::config(format!("unknown setting '{key}'")));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn parse_file(text: &str) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("config line {}: expected key = value", lineno + 1)))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Settings::parse_file(&text)
    }

    /// `other` takes precedence.
    pub fn overlay(mut self, other: Settings) -> Settings {
        self.values.extend(other.values);
        self
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| CliError::config(format!("invalid {key} '{v}': {e}"))),
        }
    }

    fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some).map_err(|e| CliError::config(format!("invalid {key} '{v}': {e}"))),
        }
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| format!("{t}: {e}")))
        .collect()
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: Preset,
    pub dim: usize,
    pub b: f64,
    /// Second convection component (2D); the presets use `b` for both.
    pub by: f64,
    pub eps: f64,
    pub a: f64,
    pub c: f64,
    pub source: f64,
    pub degree: usize,
    pub n: usize,
    pub stab: StabilizationConfig,
    pub layers: Vec<f64>,
    pub tol: f64,
    pub out: PathBuf,
    pub meshes: Vec<usize>,
    pub degrees: Vec<usize>,
    /// Oracle sample points; `None` means a uniform grid.
    pub points: Option<Vec<[f64; 2]>>,
    pub grid: usize,
}

fn parse_point(s: &str, dim: usize) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    match (dim, parts.as_slice()) {
        (1, [x]) => Ok([num(x)?, 0.0]),
        (2, [x, y]) => Ok([num(x)?, num(y)?]),
        _ => Err(format!("point '{s}' does not match dimension {dim} (use x or x:y)")),
    }
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<RunConfig, CliError> {
        let preset: Preset = s.get("preset")?.unwrap_or(Preset::Paper1d);
        let dim = match preset {
            Preset::Paper1d => 1,
            Preset::Paper2d => 2,
            Preset::Custom => s.get("dim")?.unwrap_or(1),
        };
        if preset != Preset::Custom {
            if let Some(d) = s.get::<usize>("dim")? {
                if d != dim {
                    return Err(CliError::config(format!("preset {preset} is {dim}D but dim = {d}")));
                }
            }
            for key in ["by", "a", "c", "source"] {
                if s.values.contains_key(key) {
                    return Err(CliError::config(format!("'{key}' is only accepted with preset custom")));
                }
            }
        }
        let (default_degree, default_n) = if dim == 2 { (2, 32) } else { (3, 30) };
        let b = s.get("b")?.unwrap_or(50.0);
        let mode: StabilizationMode = s.get("stab")?.unwrap_or(StabilizationMode::Galerkin);
        let beta = s.get("beta")?.unwrap_or(DEFAULT_BETA);
        let degree = s.get("degree")?.unwrap_or(default_degree);
        let points = match s.values.get("points") {
            None => None,
            Some(v) => Some(
                v.split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| parse_point(t, dim))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::config(format!("invalid points: {e}")))?,
            ),
        };
        let cfg = RunConfig {
            preset,
            dim,
            b,
            by: s.get("by")?.unwrap_or(b),
            eps: s.get("eps")?.unwrap_or(1.0),
            a: s.get("a")?.unwrap_or(1.0),
            c: s.get("c")?.unwrap_or(0.0),
            source: s.get("source")?.unwrap_or(0.0),
            degree,
            n: s.get("n")?.unwrap_or(default_n),
            stab: StabilizationConfig { mode, beta },
            layers: s.get_list("layers")?.unwrap_or_else(|| vec![0.5, 0.7]),
            tol: s.get("tol")?.unwrap_or(convdiff_core::analytic::DEFAULT_SERIES_TOL),
            out: s.get::<String>("out")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
            meshes: s.get_list("meshes")?.unwrap_or_else(|| if dim == 2 { vec![8, 16, 32] } else { vec![32, 64, 128] }),
            degrees: s.get_list("degrees")?.unwrap_or_else(|| vec![degree]),
            points,
            grid: s.get("grid")?.unwrap_or(11),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::config(m));
        if self.dim != 1 && self.dim != 2 {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        for (name, v) in [("b", self.b), ("by", self.by), ("eps", self.eps), ("a", self.a), ("c", self.c), ("source", self.source), ("beta", self.stab.beta), ("tol", self.tol)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.n == 0 {
            return bad("n must be >= 1".into());
        }
        for &p in std::iter::once(&self.degree).chain(&self.degrees) {
            if !(1..=MAX_DEGREE).contains(&p) {
                return bad(format!("degree must be in 1..={MAX_DEGREE}, got {p}"));
            }
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be > 0, got {}", self.eps));
        }
        if !(self.a >= 1.0) {
            return bad(format!("a must be >= 1, got {}", self.a));
        }
        if !(self.c >= 0.0) {
            return bad(format!("c must be >= 0, got {}", self.c));
        }
        if self.stab.beta < 0.0 {
            return bad(format!("beta must be >= 0, got {}", self.stab.beta));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.layers.iter().any(|y| !(0.0..=1.0).contains(y)) {
            return bad("layers must lie in [0, 1]".into());
        }
        if self.meshes.contains(&0) {
            return bad("mesh sizes must be >= 1".into());
        }
        if self.grid < 2 {
            return bad("grid must be >= 2".into());
        }
        Ok(())
    }

    pub fn problem(&self) -> ProblemSpec {
        let mut p = if self.dim == 1 { ProblemSpec::paper_1d(self.b) } else { ProblemSpec::paper_2d(self.b) };
        p.eps = self.eps;
        p.a = self.a;
        p.c = self.c;
        p.b = if self.dim == 1 { [self.b, 0.0] } else { [self.b, self.by] };
        p.source = ScalarField::Constant(self.source);
        p
    }

    /// Convection constant of the closed-form reference, when the configured
    /// problem is one (after dividing through by `eps a`).
    pub fn oracle_b(&self) -> Option<f64> {
        let matches = self.c == 0.0 && self.source == 0.0 && (self.dim == 1 || self.b == self.by);
        matches.then(|| self.b / (self.eps * self.a))
    }
}
