//! Closed-form waiting-time distributions.
//!
//! With `x = exp(-(1 + 2n) G tau)` and `n = n_B` the four distributions are
//!
//! ```text
//! w_ee = w_aa = 2 G n (1+n) exp(-(1+3n) G tau) / [(1+n) - n x]^3
//! w_ae = G n exp(-n G tau) [(1+n) + n x] / [(1+n) - n x]^3
//! w_ea = G (1+n) exp(-(1+3n) G tau) [(1+n) + n x] / [(1+n) - n x]^3
//! ```
//!
//! which is the usual form divided through by the growing exponentials so
//! that nothing overflows at large `tau`.

use super::WtdKind;
use crate::error::{Error, Result};

pub(crate) fn check_inputs(kind: WtdKind, tau: f64, gamma_rate: f64, n_b: f64) -> Result<()> {
    if !(tau >= 0.0) {
        return Err(Error::Domain {
            quantity: "tau",
            value: tau,
            expected: "tau >= 0",
        });
    }
    if !(gamma_rate > 0.0) || !gamma_rate.is_finite() {
        return Err(Error::Domain {
            quantity: "gamma_rate",
            value: gamma_rate,
            expected: "finite gamma_rate > 0",
        });
    }
    let n_ok = if kind == WtdKind::EA { n_b >= 0.0 } else { n_b > 0.0 };
    if !n_ok || !n_b.is_finite() {
        return Err(Error::Domain {
            quantity: "n_b",
            value: n_b,
            expected: "finite n_b > 0 (n_b = 0 only for kind ea)",
        });
    }
    Ok(())
}

/// Closed-form `w_kind(tau)` for relaxation rate `gamma_rate` and thermal
/// occupation `n_b`.
pub fn wtd_analytic(kind: WtdKind, tau: f64, gamma_rate: f64, n_b: f64) -> Result<f64> {
    check_inputs(kind, tau, gamma_rate, n_b)?;
    let g = gamma_rate;
    let n = n_b;
    let gt = g * tau;
    let x = (-(1.0 + 2.0 * n) * gt).exp();
    let denom = (1.0 + n) - n * x;
    let denom3 = denom * denom * denom;
    let sum = (1.0 + n) + n * x;
    Ok(match kind {
        WtdKind::EE | WtdKind::AA => {
            2.0 * g * n * (1.0 + n) * (-(1.0 + 3.0 * n) * gt).exp() / denom3
        }
        WtdKind::AE => g * n * (-n * gt).exp() * sum / denom3,
        WtdKind::EA => g * (1.0 + n) * (-(1.0 + 3.0 * n) * gt).exp() * sum / denom3,
    })
}
