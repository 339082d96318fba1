//! Element Péclet numbers and the per-element stabilization parameters.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilizationMode {
    Galerkin,
    Supg,
    ArtificialDiffusion,
}

impl FromStr for StabilizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "galerkin" => Ok(StabilizationMode::Galerkin),
            "supg" => Ok(StabilizationMode::Supg),
            "artdiff" => Ok(StabilizationMode::ArtificialDiffusion),
            other => Err(Error::InvalidArgument(format!("unknown stabilization '{other}'"))),
        }
    }
}

impl fmt::Display for StabilizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilizationMode::Galerkin => "galerkin",
            StabilizationMode::Supg => "supg",
            StabilizationMode::ArtificialDiffusion => "artdiff",
        })
    }
}

pub const DEFAULT_BETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationConfig {
    pub mode: StabilizationMode,
    /// Artificial-diffusion multiplier; 0.5 is half upwinding.
    pub beta: f64,
}

impl Default for StabilizationConfig {
    fn default() -> Self {
        StabilizationConfig { mode: StabilizationMode::Galerkin, beta: DEFAULT_BETA }
    }
}

impl StabilizationConfig {
    pub fn galerkin() -> Self {
        Self::default()
    }

    pub fn supg() -> Self {
        StabilizationConfig { mode: StabilizationMode::Supg, ..Self::default() }
    }

    pub fn artificial_diffusion(beta: f64) -> Self {
        StabilizationConfig { mode: StabilizationMode::ArtificialDiffusion, beta }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        Ok(())
    }

    /// `(tau, extra_diffusion)` for an element of size `h`.
    pub fn element_parameters(&self, b_norm: f64, eps: f64, a: f64, h: f64) -> (f64, f64) {
        match self.mode {
            StabilizationMode::Galerkin => (0.0, 0.0),
            StabilizationMode::Supg => (tau_supg(b_norm, eps, a, h), 0.0),
            StabilizationMode::ArtificialDiffusion => (0.0, artificial_diffusion_increment(b_norm, h, self.beta)),
        }
    }
}

/// `Pe = |b| h / (2 eps a)`.
pub fn element_peclet(b_norm: f64, eps: f64, a: f64, h: f64) -> f64 {
    b_norm * h / (2.0 * eps * a)
}

/// `coth(Pe) - 1/Pe`, the amount of streamline diffusion that makes linear
/// elements nodally exact in 1D.
pub fn xi_optimal(pe: f64) -> f64 {
    if pe < 1e-4 {
        let pe3 = pe * pe * pe;
        return pe / 3.0 - pe3 / 45.0;
    }
    if pe > 20.0 {
        // coth(Pe) = 1 to double precision
        return 1.0 - 1.0 / pe;
    }
    1.0 / pe.tanh() - 1.0 / pe
}

/// `tau = h / (2|b|) * xi(Pe)`, zero without convection.
pub fn tau_supg(b_norm: f64, eps: f64, a: f64, h: f64) -> f64 {
    if b_norm == 0.0 {
        return 0.0;
    }
    h / (2.0 * b_norm) * xi_optimal(element_peclet(b_norm, eps, a, h))
}

/// `beta |b| h / 2`, added to `eps a` in the diffusion term.
pub fn artificial_diffusion_increment(b_norm: f64, h: f64, beta: f64) -> f64 {
    beta * b_norm * h / 2.0
}
