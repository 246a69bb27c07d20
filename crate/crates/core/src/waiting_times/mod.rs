//! Waiting-time distributions between emission and absorption events of the
//! damped effective oscillator.
//!
//! `w_{mu nu}(tau)` is the density for a jump of type `mu` a time `tau` after a
//! jump of type `nu` with no jump in between, starting from the thermal state.
//! Three independent routes are provided: the closed forms ([`analytic`]), a
//! direct sum over Fock states ([`numeric`]) and stochastic sampling of the
//! jump process ([`trajectory`], [`histogram`]).
//!
//! All routes take the bare relaxation rate `Gamma = F_e - F_a` (the dressed
//! spectral density at the oscillator frequency) and the thermal occupation
//! `n_B`, so that `F_e = Gamma (1 + n_B)` and `F_a = Gamma n_B`.

pub mod analytic;
pub mod histogram;
pub mod numeric;
pub mod scan;
pub mod trajectory;

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

pub use analytic::wtd_analytic;
pub use histogram::{wtd_histogram, wtd_histogram_merged, WtdHistogram, MIN_CONDITIONING_EVENTS};
pub use numeric::{wtd_numeric, wtd_numeric_adaptive};
pub use scan::{wtd_peak_scan, ScanPoint};
pub use trajectory::{sample_trajectories, sample_trajectory, JumpEvent, JumpRecord};

/// Reservoir exchange process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JumpType {
    Emission,
    Absorption,
}

impl JumpType {
    pub fn code(&self) -> char {
        match self {
            JumpType::Emission => 'e',
            JumpType::Absorption => 'a',
        }
    }
}

impl fmt::Display for JumpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JumpType::Emission => "emission",
            JumpType::Absorption => "absorption",
        })
    }
}

impl FromStr for JumpType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "e" | "emission" => Ok(JumpType::Emission),
            "a" | "absorption" => Ok(JumpType::Absorption),
            other => Err(Error::invalid("jump type", format!("unknown jump type `{other}`"))),
        }
    }
}

/// Ordered pair of jump types; the second letter is the earlier
/// (conditioning) jump, the first the later one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WtdKind {
    EE,
    AE,
    EA,
    AA,
}

impl WtdKind {
    pub const ALL: [WtdKind; 4] = [WtdKind::EE, WtdKind::AE, WtdKind::EA, WtdKind::AA];

    pub fn later(&self) -> JumpType {
        match self {
            WtdKind::EE | WtdKind::EA => JumpType::Emission,
            WtdKind::AE | WtdKind::AA => JumpType::Absorption,
        }
    }

    pub fn earlier(&self) -> JumpType {
        match self {
            WtdKind::EE | WtdKind::AE => JumpType::Emission,
            WtdKind::EA | WtdKind::AA => JumpType::Absorption,
        }
    }

    pub fn from_jumps(later: JumpType, earlier: JumpType) -> Self {
        use JumpType::*;
        match (later, earlier) {
            (Emission, Emission) => WtdKind::EE,
            (Absorption, Emission) => WtdKind::AE,
            (Emission, Absorption) => WtdKind::EA,
            (Absorption, Absorption) => WtdKind::AA,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            WtdKind::EE => "ee",
            WtdKind::AE => "ae",
            WtdKind::EA => "ea",
            WtdKind::AA => "aa",
        }
    }
}

impl fmt::Display for WtdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WtdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "ee" => Ok(WtdKind::EE),
            "ae" => Ok(WtdKind::AE),
            "ea" => Ok(WtdKind::EA),
            "aa" => Ok(WtdKind::AA),
            other => Err(Error::invalid("kind", format!("unknown waiting-time kind `{other}`"))),
        }
    }
}
