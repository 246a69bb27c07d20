//! Waiting-time values along a coupling sweep.

use super::{wtd_analytic, WtdKind};
use crate::dissipation::{rates, Frame};
use crate::error::{Error, Result};
use crate::model::BathParams;
use crate::parallel::Execution;

/// `w_ee(tau)` at one coupling; `value` is `None` where the frame has no
/// valid rates (the critical neighbourhood, or a negative renormalized
/// coupling in the conventional frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub gamma_x: f64,
    pub value: Option<f64>,
}

/// `w_ee(tau)` over `gammas`, computed from the frame's rates.
pub fn wtd_peak_scan(
    frame: Frame,
    gammas: &[f64],
    tau: f64,
    h: f64,
    bath: &BathParams,
) -> Result<Vec<ScanPoint>> {
    wtd_scan_with(frame, WtdKind::EE, gammas, tau, h, bath, Execution::default())
}

/// Scan of any kind with explicit execution policy.
pub fn wtd_scan_with(
    frame: Frame,
    kind: WtdKind,
    gammas: &[f64],
    tau: f64,
    h: f64,
    bath: &BathParams,
    execution: Execution,
) -> Result<Vec<ScanPoint>> {
    execution
        .map(gammas, |&gamma_x| {
            let value = match rates(frame, h, gamma_x, bath) {
                Ok(r) => {
                    let n_b = r.occupation_ratio().ok_or_else(|| {
                        Error::Convergence(format!("no relaxation at gamma_x = {gamma_x}"))
                    })?;
                    Some(wtd_analytic(kind, tau, r.relaxation_rate(), n_b)?)
                }
                Err(Error::CriticalPoint { .. }) | Err(Error::Domain { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(ScanPoint { gamma_x, value })
        })
        .into_iter()
        .collect()
}
