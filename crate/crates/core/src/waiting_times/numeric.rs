//! Waiting-time distributions by direct summation over Fock states.
//!
//! The thermal state and all intermediate states are diagonal in the Fock
//! basis, so the superoperator expression
//! `Tr(J_mu exp(L0 tau) J_nu rho) / Tr(J_nu rho)` reduces to a sum: the jump
//! `J_nu` moves the populations by one quantum, the no-jump evolution damps
//! `|n><n|` by `exp(-[(1+n_B) n + n_B (1+n)] G tau)` and `J_mu` contributes its
//! rate out of `|n>`.

use super::analytic::check_inputs;
use super::{JumpType, WtdKind};
use crate::dissipation::{adaptive_truncation, FockDistribution, TAIL_TOLERANCE};
use crate::error::{Error, Result};

/// Truncated-Fock evaluation of `w_kind(tau)`.
pub fn wtd_numeric(kind: WtdKind, tau: f64, gamma_rate: f64, n_b: f64, n_max: usize) -> Result<f64> {
    check_inputs(kind, tau, gamma_rate, n_b)?;
    let thermal = FockDistribution::from_occupation(n_b, n_max + 1)?;
    let tail = FockDistribution::from_occupation(n_b, n_max)?.tail_mass();
    if tail > TAIL_TOLERANCE {
        return Err(Error::Truncation {
            n_max,
            tail_mass: tail,
        });
    }
    let p = &thermal.probabilities;
    let f_emit = gamma_rate * (1.0 + n_b);
    let f_absorb = gamma_rate * n_b;

    // Populations after the conditioning jump, normalized by the exact trace
    // (n_B after an emission, 1 + n_B after an absorption, without the rate).
    let post_jump = |n: usize| -> f64 {
        match kind.earlier() {
            JumpType::Emission => p[n + 1] * (n + 1) as f64 / n_b,
            JumpType::Absorption if n == 0 => 0.0,
            JumpType::Absorption => p[n - 1] * n as f64 / (1.0 + n_b),
        }
    };
    let rate_out = |n: usize| -> f64 {
        match kind.later() {
            JumpType::Emission => f_emit * n as f64,
            JumpType::Absorption => f_absorb * (n + 1) as f64,
        }
    };
    let mut total = 0.0;
    for n in 0..=n_max {
        let escape = ((1.0 + n_b) * n as f64 + n_b * (1.0 + n as f64)) * gamma_rate;
        total += post_jump(n) * (-escape * tau).exp() * rate_out(n);
    }
    Ok(total)
}

/// Tail-mass bound used by [`wtd_numeric_adaptive`]. The summands carry up to
/// two powers of `n`, so the plain population bound is tightened.
pub const WEIGHTED_TAIL_TOLERANCE: f64 = 1e-18;

/// [`wtd_numeric`] with the truncation chosen from `n_b`.
pub fn wtd_numeric_adaptive(kind: WtdKind, tau: f64, gamma_rate: f64, n_b: f64) -> Result<f64> {
    let n_max = adaptive_truncation(n_b, WEIGHTED_TAIL_TOLERANCE).max(1);
    wtd_numeric(kind, tau, gamma_rate, n_b, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waiting_times::wtd_analytic;

    #[test]
    fn agrees_with_closed_form() {
        let (g, n) = (0.0382, 0.3928);
        for kind in WtdKind::ALL {
            for i in 0..50 {
                let tau = 0.7 * i as f64;
                let a = wtd_analytic(kind, tau, g, n).unwrap();
                let b = wtd_numeric(kind, tau, g, n, 500).unwrap();
                assert!(((a - b) / a).abs() < 1e-10, "{kind} tau={tau}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn adaptive_truncation_is_accurate() {
        for n in [1e-3, 0.4, 3.0] {
            for kind in WtdKind::ALL {
                let a = wtd_analytic(kind, 1.3, 0.5, n).unwrap();
                let b = wtd_numeric_adaptive(kind, 1.3, 0.5, n).unwrap();
                assert!(((a - b) / a).abs() < 1e-10, "{kind} n={n}");
            }
        }
    }

    #[test]
    fn short_truncation_is_rejected() {
        assert!(matches!(
            wtd_numeric(WtdKind::EE, 1.0, 1.0, 5.0, 20),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn zero_temperature_emission_after_absorption() {
        for tau in [0.0, 1.0, 4.0] {
            let w = wtd_numeric(WtdKind::EA, tau, 0.6, 0.0, 4).unwrap();
            assert!((w - 0.6 * (-0.6 * tau).exp()).abs() < 1e-15);
        }
    }
}
