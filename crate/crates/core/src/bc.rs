//! Boundary-condition strategies.
//!
//! Soft enforcement adds weighted squared boundary residuals to the loss.
//! Hard enforcement wraps the raw network output `F` as `K(x) = B(x) F(x)`
//! where the multiplier `B` vanishes wherever a Dirichlet condition holds.
//! The hybrid strategy does both: `B` takes care of the conditions it can
//! embed and penalties cover the rest.

use std::f64::consts::PI;
use std::fmt;

use crate::{Error, Result};

/// Default penalty coefficient for every boundary term.
pub const DEFAULT_PENALTY: f64 = 100.0;

/// A non-negative penalty coefficient.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PenaltyCoefficient(f64);

impl PenaltyCoefficient {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("penalty coefficient must be finite and non-negative, got {value}"),
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for PenaltyCoefficient {
    fn default() -> Self {
        Self(DEFAULT_PENALTY)
    }
}

/// `lambda * residual^2`.
pub fn penalty_term(residual: f64, lambda: PenaltyCoefficient) -> f64 {
    lambda.0 * residual * residual
}

/// The two penalty weights a case uses: `lambda1` for the first group of
/// boundary terms, `lambda2` for the second.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PenaltyWeights {
    pub lambda1: PenaltyCoefficient,
    pub lambda2: PenaltyCoefficient,
}

impl PenaltyWeights {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        Ok(Self {
            lambda1: PenaltyCoefficient::new(lambda1)?,
            lambda2: PenaltyCoefficient::new(lambda2)?,
        })
    }
}

/// Output multiplier `B(x)` for hard enforcement. Both are defined on all of
/// the real line, so ghost nodes can be sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multiplier {
    /// `x e^{-x}`: zero at `x = 0`.
    BarDecay,
    /// `sin(pi x / L)`: zero at `x = 0` and `x = L`.
    BeamSine { length: f64 },
}

impl Multiplier {
    pub fn beam_sine(length: f64) -> Result<Self> {
        if length.is_finite() && length > 0.0 {
            Ok(Multiplier::BeamSine { length })
        } else {
            Err(Error::InvalidParameter {
                name: "length",
                reason: format!("must be positive and finite, got {length}"),
            })
        }
    }

    pub fn value(self, x: f64) -> f64 {
        match self {
            Multiplier::BarDecay => x * (-x).exp(),
            Multiplier::BeamSine { length } => sin_pi(x / length),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Multiplier::BarDecay => "x*exp(-x)",
            Multiplier::BeamSine { .. } => "sin(pi*x/L)",
        }
    }
}

/// `sin(pi t)` with the argument reduced first, so integer `t` gives exactly 0.
fn sin_pi(t: f64) -> f64 {
    let r = t - 2.0 * (t / 2.0).round();
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

pub fn multiplier_value(tag: Multiplier, x: f64) -> f64 {
    tag.value(x)
}

/// `K(x_i) = B(x_i) F(x_i)` elementwise.
pub fn reparameterize(tag: Multiplier, xs: &[f64], raw: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != raw.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            actual: raw.len(),
        });
    }
    Ok(xs.iter().zip(raw).map(|(&x, &f)| tag.value(x) * f).collect())
}

/// Factor converting `dLoss/dK(x)` into `dLoss/dF(x)`. Since `K = B F` with
/// `B` independent of the network, this is just `B(x)`.
pub fn reparam_chain_factor(tag: Multiplier, x: f64) -> f64 {
    tag.value(x)
}

/// Strategy names as they appear in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Penalty,
    Reparam,
    Hybrid,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Penalty => "penalty",
            StrategyKind::Reparam => "reparam",
            StrategyKind::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "penalty" => Ok(StrategyKind::Penalty),
            "reparam" => Ok(StrategyKind::Reparam),
            "hybrid" => Ok(StrategyKind::Hybrid),
            other => Err(Error::InvalidParameter {
                name: "strategy",
                reason: format!("expected one of penalty, reparam, hybrid; got `{other}`"),
            }),
        }
    }
}

/// How boundary conditions enter a loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcStrategy {
    Penalty(PenaltyWeights),
    Reparameterization(Multiplier),
    Hybrid(Multiplier, PenaltyWeights),
}

impl BcStrategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            BcStrategy::Penalty(_) => StrategyKind::Penalty,
            BcStrategy::Reparameterization(_) => StrategyKind::Reparam,
            BcStrategy::Hybrid(..) => StrategyKind::Hybrid,
        }
    }

    pub fn multiplier(&self) -> Option<Multiplier> {
        match *self {
            BcStrategy::Penalty(_) => None,
            BcStrategy::Reparameterization(m) | BcStrategy::Hybrid(m, _) => Some(m),
        }
    }

    pub fn penalties(&self) -> Option<PenaltyWeights> {
        match *self {
            BcStrategy::Reparameterization(_) => None,
            BcStrategy::Penalty(w) | BcStrategy::Hybrid(_, w) => Some(w),
        }
    }

    /// The network-facing output for raw samples: `B(x) F(x)` when a
    /// multiplier is present, `F(x)` otherwise.
    pub fn output(&self, xs: &[f64], raw: &[f64]) -> Result<Vec<f64>> {
        match self.multiplier() {
            Some(m) => reparameterize(m, xs, raw),
            None => Ok(raw.to_vec()),
        }
    }
}
