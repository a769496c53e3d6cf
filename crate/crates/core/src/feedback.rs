//! Control laws mapping measured [`FeedbackScalars`] to the next layer's `beta`.
//!
//! The second-order law minimizes the quadratic model
//! `q(beta) = dt beta A + dt^2 beta^2 B + dt^2 beta C` of the next layer's
//! energy change. Every branch of the second-order and hybrid laws returns a
//! `beta` with `q(beta) <= 0`; the first-order law only makes the linear term
//! non-positive.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::FeedbackScalars;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LawKind {
    /// `beta = -A`.
    #[serde(rename = "fo")]
    FirstOrder,
    /// Second-order law alone, with sign flip for `B < 0` and a fallback at `B ~ 0`.
    #[serde(rename = "so")]
    SecondOrderPure,
    /// Second-order law capped by the first-order one: smaller `|beta|` wins.
    #[serde(rename = "so-hybrid")]
    SecondOrderHybrid,
}

impl LawKind {
    pub const ALL: [LawKind; 3] = [Self::FirstOrder, Self::SecondOrderPure, Self::SecondOrderHybrid];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::FirstOrder => "fo",
            Self::SecondOrderPure => "so",
            Self::SecondOrderHybrid => "so-hybrid",
        }
    }

    pub fn decide(self, sc: &FeedbackScalars, dt: f64, eps_b: f64) -> BetaDecision {
        match self {
            Self::FirstOrder => beta_fo(sc),
            Self::SecondOrderPure => beta_so(sc, dt, eps_b),
            Self::SecondOrderHybrid => beta_hybrid(sc, dt, eps_b),
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "fo" => Ok(Self::FirstOrder),
            "so" | "so-pure" => Ok(Self::SecondOrderPure),
            "so-hybrid" | "hybrid" => Ok(Self::SecondOrderHybrid),
            other => Err(Error::InvalidParameter(format!(
                "unknown law `{other}` (expected fo, so or so-hybrid)"
            ))),
        }
    }
}

/// Which rule produced a `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `beta_1 = 0`, set before any measurement.
    Initial,
    FoLaw,
    SoMin,
    SoSignFlipped,
    SoBZeroFallback,
    HybridCappedToFo,
    /// Supplied externally by an open-loop replay.
    Replay,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Initial => "INITIAL",
            Self::FoLaw => "FO_LAW",
            Self::SoMin => "SO_MIN",
            Self::SoSignFlipped => "SO_SIGN_FLIPPED",
            Self::SoBZeroFallback => "SO_B_ZERO_FALLBACK",
            Self::HybridCappedToFo => "HYBRID_CAPPED_TO_FO",
            Self::Replay => "REPLAY",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [
            Self::Initial,
            Self::FoLaw,
            Self::SoMin,
            Self::SoSignFlipped,
            Self::SoBZeroFallback,
            Self::HybridCappedToFo,
            Self::Replay,
        ]
        .into_iter()
        .find(|b| b.as_str() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown branch `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaDecision {
    pub beta: f64,
    pub branch: Branch,
}

pub fn beta_fo(sc: &FeedbackScalars) -> BetaDecision {
    BetaDecision {
        beta: -sc.a,
        branch: Branch::FoLaw,
    }
}

pub fn beta_so(sc: &FeedbackScalars, dt: f64, eps_b: f64) -> BetaDecision {
    let numerator = sc.a + dt * sc.c;
    if sc.b > eps_b {
        BetaDecision {
            beta: -numerator / (2.0 * dt * sc.b),
            branch: Branch::SoMin,
        }
    } else if sc.b < -eps_b {
        // Downward parabola: flipping the sign keeps q(beta) negative.
        BetaDecision {
            beta: numerator / (2.0 * dt * sc.b),
            branch: Branch::SoSignFlipped,
        }
    } else {
        BetaDecision {
            beta: -numerator,
            branch: Branch::SoBZeroFallback,
        }
    }
}

/// Second-order value with its magnitude capped at `|A|`.
///
/// When `|beta_fo| < |beta_so|` the result is `|beta_fo|` taken in the
/// direction of `beta_so`, which equals `beta_fo` whenever both laws agree on
/// the sign. Keeping the second-order direction keeps `q(beta) <= 0` on the
/// capped branch too. Ties keep the second-order value.
pub fn beta_hybrid(sc: &FeedbackScalars, dt: f64, eps_b: f64) -> BetaDecision {
    let so = beta_so(sc, dt, eps_b);
    let fo = beta_fo(sc);
    if fo.beta.abs() < so.beta.abs() {
        BetaDecision {
            beta: fo.beta.abs().copysign(so.beta),
            branch: Branch::HybridCappedToFo,
        }
    } else {
        so
    }
}

/// Default degenerate-`B` tolerance, `1e-12 n |E|`.
pub fn default_eps_b(n: usize, edges: usize) -> f64 {
    let scale = (n * edges).max(1) as f64;
    1e-12 * scale
}
