//! Rate form of the two master equations.
//!
//! In the eigenbasis of the effective oscillator both the conventional
//! Born-Markov-secular (BMS) and the polaron-frame master equation reduce to a
//! damped oscillator with emission rate `F_e` and absorption rate `F_a`. They
//! differ in the coupling the oscillator is evaluated at (renormalized versus
//! bare) and in the dressing factor of the rates.
//!
//! The polaron frame uses the bare spectral density for the transformed
//! reservoir, and the quadratic reservoir term of the polaron Hamiltonian is
//! dropped.

use crate::bosonic::{coupling_factors, solve_oscillator};
use crate::error::{Error, Result};
use crate::model::{self, bose_occupation, classify_phase_with_tolerance, BathParams};

/// Relative guard radius around the critical coupling for rate evaluation.
pub const RATE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Bms,
    Polaron,
}

impl Frame {
    pub fn as_str(&self) -> &'static str {
        match self {
            Frame::Bms => "bms",
            Frame::Polaron => "polaron",
        }
    }

    /// Coupling the system Hamiltonian is evaluated at in this frame.
    pub fn effective_coupling(&self, gamma_x: f64, bath: &BathParams) -> f64 {
        match self {
            Frame::Bms => model::renormalized_coupling(gamma_x, bath),
            Frame::Polaron => gamma_x,
        }
    }
}

impl std::str::FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bms" => Ok(Frame::Bms),
            "polaron" => Ok(Frame::Polaron),
            other => Err(Error::invalid("frame", format!("unknown frame `{other}`"))),
        }
    }
}

/// Emission and absorption rates of the effective oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub f_emit: f64,
    pub f_absorb: f64,
    pub frame: Frame,
    /// Oscillator frequency the rates were evaluated at.
    pub omega_used: f64,
}

impl RatePair {
    pub fn new(f_emit: f64, f_absorb: f64, frame: Frame, omega_used: f64) -> Result<Self> {
        if !(f_emit >= 0.0 && f_absorb >= 0.0) || !f_emit.is_finite() || !f_absorb.is_finite() {
            return Err(Error::invalid(
                "rates",
                format!("rates must be finite and non-negative, got ({f_emit}, {f_absorb})"),
            ));
        }
        if f_emit < f_absorb {
            return Err(Error::invalid(
                "rates",
                format!("emission {f_emit} below absorption {f_absorb} has no steady state"),
            ));
        }
        if !(omega_used > 0.0) {
            return Err(Error::invalid("omega_used", format!("must be positive, got {omega_used}")));
        }
        Ok(Self {
            f_emit,
            f_absorb,
            frame,
            omega_used,
        })
    }

    /// Rates `Gamma (1 + n_B)` and `Gamma n_B` for a bare relaxation rate.
    pub fn from_relaxation(gamma_rate: f64, n_b: f64, frame: Frame, omega_used: f64) -> Result<Self> {
        Self::new(gamma_rate * (1.0 + n_b), gamma_rate * n_b, frame, omega_used)
    }

    /// `F_e - F_a`, the relaxation rate of the occupation (the dressed
    /// spectral density at the transition).
    pub fn relaxation_rate(&self) -> f64 {
        self.f_emit - self.f_absorb
    }

    /// Steady-state occupation `F_a / (F_e - F_a)`.
    pub fn occupation_ratio(&self) -> Option<f64> {
        let r = self.relaxation_rate();
        (r > 0.0).then(|| self.f_absorb / r)
    }
}

fn rates_at(
    h: f64,
    coupling: f64,
    bath: &BathParams,
    frame: Frame,
) -> Result<RatePair> {
    classify_phase_with_tolerance(h, coupling, RATE_GUARD)?;
    let sol = solve_oscillator(h, coupling)?;
    let factors = coupling_factors(h, coupling)?;
    let dressing = match frame {
        Frame::Bms => factors.a_bms,
        Frame::Polaron => factors.a_polaron,
    };
    let n_b = bose_occupation(sol.omega, bath.beta())?;
    let gamma_rate = dressing * dressing * model::spectral_density(sol.omega, bath)?;
    RatePair::from_relaxation(gamma_rate, n_b, frame, sol.omega)
}

/// Conventional-frame rates, `F_e = A^2 Gamma(omega) (1 + n_B(omega))` with
/// every quantity at the renormalized coupling.
pub fn rates_bms(h: f64, gamma_x: f64, bath: &BathParams) -> Result<RatePair> {
    rates(Frame::Bms, h, gamma_x, bath)
}

/// Polaron-frame rates, `F_e = A_bar^2 Gamma(omega) (1 + n_B(omega))` at the
/// bare coupling.
pub fn rates_polaron(h: f64, gamma_x: f64, bath: &BathParams) -> Result<RatePair> {
    rates(Frame::Polaron, h, gamma_x, bath)
}

pub fn rates(frame: Frame, h: f64, gamma_x: f64, bath: &BathParams) -> Result<RatePair> {
    let coupling = frame.effective_coupling(gamma_x, bath);
    if coupling < 0.0 {
        return Err(Error::Domain {
            quantity: "effective coupling",
            value: coupling,
            expected: "gamma_x >= eta wc / pi in the conventional frame",
        });
    }
    rates_at(h, coupling, bath, frame)
}

/// Thermal occupation of the oscillator in its own eigenbasis, `n_B` at the
/// frequency the rates were evaluated at.
pub fn steady_occupation_diagonal(rates: &RatePair, bath: &BathParams) -> Result<f64> {
    bose_occupation(rates.omega_used, bath.beta())
}

/// `<a^dag a> = sinh^2(phi) + (cosh^2(phi) + sinh^2(phi)) n_B(omega)` for the
/// thermal state of `d`, evaluated at `coupling` (the bare coupling for the
/// polaron frame, the renormalized one for the conventional frame).
pub fn steady_occupation_mode(h: f64, coupling: f64, beta: f64) -> Result<f64> {
    classify_phase_with_tolerance(h, coupling, RATE_GUARD)?;
    let sol = solve_oscillator(h, coupling)?;
    let n_b = if beta.is_infinite() {
        0.0
    } else {
        bose_occupation(sol.omega, beta)?
    };
    let (s, c) = (sol.phi.sinh(), sol.phi.cosh());
    Ok(s * s + (c * c + s * s) * n_b)
}

/// `n(t)` solving `dn/dt = -(F_e - F_a) n + F_a` from `n(0) = n0`.
pub fn evolve_occupation(n0: f64, t: f64, rates: &RatePair) -> Result<f64> {
    if !(n0 >= 0.0) {
        return Err(Error::Domain {
            quantity: "n0",
            value: n0,
            expected: "n0 >= 0",
        });
    }
    if !(t >= 0.0) {
        return Err(Error::Domain {
            quantity: "t",
            value: t,
            expected: "t >= 0",
        });
    }
    let k = rates.relaxation_rate();
    if k == 0.0 {
        return Ok(n0 + rates.f_absorb * t);
    }
    let n_ss = rates.f_absorb / k;
    Ok(n_ss + (n0 - n_ss) * (-k * t).exp())
}

/// Everything the occupation sweeps need at one coupling in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameObservables {
    pub frame: Frame,
    pub coupling: f64,
    pub omega: f64,
    pub occupation_diagonal: f64,
    pub occupation_mode: f64,
    pub rates: RatePair,
}

pub fn frame_observables(frame: Frame, h: f64, gamma_x: f64, bath: &BathParams) -> Result<FrameObservables> {
    let rates = rates(frame, h, gamma_x, bath)?;
    let coupling = frame.effective_coupling(gamma_x, bath);
    Ok(FrameObservables {
        frame,
        coupling,
        omega: rates.omega_used,
        occupation_diagonal: steady_occupation_diagonal(&rates, bath)?,
        occupation_mode: steady_occupation_mode(h, coupling, bath.beta())?,
        rates,
    })
}

/// Tail mass above which a truncated thermal distribution is flagged.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Largest truncation chosen by [`adaptive_truncation`].
pub const MAX_TRUNCATION: usize = 10_000;

/// Thermal Fock populations `P_n = r^n / (1 + n_B)`, `r = n_B / (1 + n_B)`,
/// truncated at `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    pub probabilities: Vec<f64>,
    pub n_max: usize,
    pub n_b: f64,
}

impl FockDistribution {
    pub fn from_occupation(n_b: f64, n_max: usize) -> Result<Self> {
        if !(n_b >= 0.0) || !n_b.is_finite() {
            return Err(Error::Domain {
                quantity: "n_b",
                value: n_b,
                expected: "finite n_b >= 0",
            });
        }
        let ratio = n_b / (1.0 + n_b);
        let mut p = 1.0 / (1.0 + n_b);
        let mut probabilities = Vec::with_capacity(n_max + 1);
        for _ in 0..=n_max {
            probabilities.push(p);
            p *= ratio;
        }
        Ok(Self {
            probabilities,
            n_max,
            n_b,
        })
    }

    pub fn ratio(&self) -> f64 {
        self.n_b / (1.0 + self.n_b)
    }

    /// Probability mass above `n_max`, `r^(n_max + 1)`.
    pub fn tail_mass(&self) -> f64 {
        self.ratio().powi(self.n_max as i32 + 1)
    }

    pub fn is_truncated(&self) -> bool {
        self.tail_mass() > TAIL_TOLERANCE
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

/// Thermal Fock distribution of an oscillator of frequency `omega`.
pub fn thermal_fock_distribution(omega: f64, beta: f64, n_max: usize) -> Result<FockDistribution> {
    FockDistribution::from_occupation(bose_occupation(omega, beta)?, n_max)
}

/// Smallest `n_max` whose geometric tail mass is below `tolerance`, capped at
/// [`MAX_TRUNCATION`].
pub fn adaptive_truncation(n_b: f64, tolerance: f64) -> usize {
    let ratio = n_b / (1.0 + n_b);
    if ratio <= 0.0 {
        return 0;
    }
    // r^(n+1) < tol  <=>  n + 1 > ln(tol) / ln(r)
    let n = (tolerance.ln() / ratio.ln()).floor();
    if !n.is_finite() || n >= MAX_TRUNCATION as f64 {
        return MAX_TRUNCATION;
    }
    let mut n = n.max(0.0) as usize;
    while n > 0 && ratio.powi(n as i32) < tolerance {
        n -= 1;
    }
    while ratio.powi(n as i32 + 1) >= tolerance && n < MAX_TRUNCATION {
        n += 1;
    }
    n
}
