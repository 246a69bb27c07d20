//! Thermodynamic-limit description of the LMG model: Holstein-Primakoff
//! bosonization around the mean field, Bogoliubov diagonalization into a
//! single oscillator, the dressing factors of the system-reservoir coupling in
//! both frames, the polaron field renormalization and the magnetization.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{self, classify_phase, BathParams, Phase, SpectralDensity};
use crate::quadrature::{self, Integral, Scheme, Tolerance};

/// Effective oscillator `omega d^dag d + C2 - N C1` describing fluctuations
/// around the mean-field displacement `sqrt(N) alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSolution {
    pub phase: Phase,
    /// Mean-field displacement; the positive root is taken.
    pub alpha: f64,
    /// Squeezing angle of `a = cosh(phi) d + sinh(phi) d^dag`.
    pub phi: f64,
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Diagonalizes the bosonized LMG Hamiltonian at coupling `gamma`.
pub fn solve_oscillator(h: f64, gamma: f64) -> Result<OscillatorSolution> {
    let phase = classify_phase(h, gamma)?;
    Ok(match phase {
        Phase::Normal => {
            let omega = (h * (h - gamma)).sqrt();
            OscillatorSolution {
                phase,
                alpha: 0.0,
                phi: 0.25 * (h / (h - gamma)).ln(),
                omega,
                c1: 0.5 * h,
                c2: 0.5 * (omega - h),
            }
        }
        Phase::SymmetryBroken => {
            let omega = ((gamma - h) * (gamma + h)).sqrt();
            OscillatorSolution {
                phase,
                alpha: (0.5 * (1.0 - h / gamma)).sqrt(),
                phi: 0.25 * ((gamma + h) / (4.0 * (gamma - h))).ln(),
                omega,
                c1: (h * h + gamma * gamma) / (4.0 * gamma),
                c2: 0.5 * (omega - gamma),
            }
        }
    })
}

impl OscillatorSolution {
    /// `E0 = C2 - N C1`.
    pub fn ground_energy(&self, n_spins: usize) -> f64 {
        self.c2 - n_spins as f64 * self.c1
    }
}

/// `E_n = -N C1 + C2 + n omega` for `n = 0 .. n_levels`.
pub fn oscillator_energies(sol: &OscillatorSolution, n_levels: usize, n_spins: usize) -> Vec<f64> {
    let e0 = sol.ground_energy(n_spins);
    (0..n_levels).map(|n| e0 + n as f64 * sol.omega).collect()
}

/// Ground-state energy per spin in the thermodynamic limit, `-C1(h, gamma)`.
/// Continuous through `gamma = h`, where it equals `-h/2`.
pub fn ground_energy_density(h: f64, gamma: f64) -> f64 {
    if gamma <= h {
        -0.5 * h
    } else {
        -(h * h + gamma * gamma) / (4.0 * gamma)
    }
}

/// Mean-field displacement `alpha(h, gamma)`, zero on and below the critical
/// coupling.
pub fn mean_field_displacement(h: f64, gamma: f64) -> f64 {
    if gamma <= h {
        0.0
    } else {
        (0.5 * (1.0 - h / gamma)).sqrt()
    }
}

/// Dressing factors of the system-reservoir coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingFactors {
    /// `A = (C3 / 2) exp(phi)`, the conventional-frame factor.
    pub a_bms: f64,
    /// `Q = alpha sqrt(1 - alpha^2)`, the mean-field shift.
    pub q_shift: f64,
    /// `A_bar = (C3_bar / 2) exp(-phi)`, the polaron-frame factor.
    pub a_polaron: f64,
}

/// Coupling factors with every quantity evaluated at `gamma`. For the
/// conventional frame the caller passes the renormalized coupling.
pub fn coupling_factors(h: f64, gamma: f64) -> Result<CouplingFactors> {
    let sol = solve_oscillator(h, gamma)?;
    let (c3, c3_bar) = match sol.phase {
        Phase::Normal => (1.0, h),
        Phase::SymmetryBroken => (
            2.0f64.sqrt() * h / (gamma * (gamma + h)).sqrt(),
            h * (0.5 * (1.0 + h / gamma)).sqrt(),
        ),
    };
    Ok(CouplingFactors {
        a_bms: 0.5 * c3 * sol.phi.exp(),
        q_shift: sol.alpha * (1.0 - sol.alpha * sol.alpha).sqrt(),
        a_polaron: 0.5 * c3_bar * (-sol.phi).exp(),
    })
}

/// Field derivatives of the oscillator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDerivatives {
    pub d_omega: f64,
    pub d_c1: f64,
    pub d_c2: f64,
}

impl FieldDerivatives {
    /// `dE0/dh = dC2/dh - N dC1/dh`.
    pub fn d_ground_energy(&self, n_spins: usize) -> f64 {
        self.d_c2 - n_spins as f64 * self.d_c1
    }
}

/// Closed-form `d/dh` of `omega`, `C1` and `C2` at fixed `gamma`.
pub fn field_derivatives(h: f64, gamma: f64) -> Result<FieldDerivatives> {
    let sol = solve_oscillator(h, gamma)?;
    Ok(match sol.phase {
        Phase::Normal => {
            let d_omega = (2.0 * h - gamma) / (2.0 * sol.omega);
            FieldDerivatives {
                d_omega,
                d_c1: 0.5,
                d_c2: 0.5 * (d_omega - 1.0),
            }
        }
        Phase::SymmetryBroken => {
            let d_omega = -h / sol.omega;
            FieldDerivatives {
                d_omega,
                d_c1: h / (2.0 * gamma),
                d_c2: 0.5 * d_omega,
            }
        }
    })
}

/// `ln Z` of the effective oscillator, `-beta E0 - ln(1 - exp(-beta omega))`.
pub fn oscillator_log_partition(h: f64, gamma: f64, beta: f64, n_spins: usize) -> Result<f64> {
    let sol = solve_oscillator(h, gamma)?;
    Ok(-beta * sol.ground_energy(n_spins) - (-(-beta * sol.omega).exp_m1()).ln())
}

/// Thermal `<Jz> = -dE0/dh - n_B(omega) d omega/dh` of the oscillator.
pub fn magnetization_polaron(h: f64, gamma: f64, beta: f64, n_spins: usize) -> Result<f64> {
    let sol = solve_oscillator(h, gamma)?;
    let d = field_derivatives(h, gamma)?;
    let occupation = if beta.is_infinite() {
        0.0
    } else {
        model::bose_occupation(sol.omega, beta)?
    };
    Ok(-d.d_ground_energy(n_spins) - occupation * d.d_omega)
}

/// `lim <Jz>/N`: `1/2` in the normal phase, `h / (2 gamma)` in the broken one.
pub fn magnetization_density_limit(h: f64, gamma: f64) -> Result<f64> {
    Ok(match classify_phase(h, gamma)? {
        Phase::Normal => 0.5,
        Phase::SymmetryBroken => h / (2.0 * gamma),
    })
}

/// `delta = (1/2pi) int_0^inf Gamma(w)/w^2 (n_B(w) + 1/2) dw`, so that the
/// field renormalization is `D = exp(-delta / N)`.
pub fn field_renormalization_exponent(bath: &BathParams, scheme: Scheme) -> Result<Integral> {
    let beta = bath.beta();
    let scale = bath.eta() / (bath.omega_c() * bath.omega_c());
    let integrand = |w: f64| scale * model::thermal_weight(w, beta) * (-w / bath.omega_c()).exp();
    let mut r = quadrature::integrate_with_tail(
        integrand,
        bath.integration_limit(),
        bath.tail_scale(),
        scheme,
        Tolerance::default(),
    )?;
    r.value /= 2.0 * PI;
    r.error /= 2.0 * PI;
    Ok(r)
}

/// Polaron-frame field renormalization `D = exp(-delta / N)`.
pub fn field_renormalization(bath: &BathParams, n_spins: usize) -> Result<f64> {
    field_renormalization_with(bath, n_spins, Scheme::GaussKronrod)
}

pub fn field_renormalization_with(bath: &BathParams, n_spins: usize, scheme: Scheme) -> Result<f64> {
    if n_spins == 0 {
        return Err(Error::invalid("n_spins", "must be at least 1"));
    }
    if bath.eta() == 0.0 {
        return Ok(1.0);
    }
    let delta = field_renormalization_exponent(bath, scheme)?.value;
    Ok((-delta / n_spins as f64).exp())
}

/// Critical coupling in the polaron frame, `h D`.
pub fn critical_point_polaron(h: f64, bath: &BathParams, n_spins: usize) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain {
            quantity: "h",
            value: h,
            expected: "h > 0",
        });
    }
    Ok(h * field_renormalization(bath, n_spins)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_phase_example() {
        let s = solve_oscillator(1.0, 0.5).unwrap();
        assert_eq!(s.phase, Phase::Normal);
        assert!((s.omega - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((s.phi - 0.25 * 2.0f64.ln()).abs() < 1e-15);
        assert!((s.phi - 0.17329).abs() < 1e-5);
        assert_eq!(s.alpha, 0.0);
        assert_eq!(s.c1, 0.5);
    }

    #[test]
    fn broken_phase_example() {
        let s = solve_oscillator(1.0, 2.0).unwrap();
        assert_eq!(s.phase, Phase::SymmetryBroken);
        assert!((s.omega - 3.0f64.sqrt()).abs() < 1e-15);
        assert!((s.alpha - 0.5).abs() < 1e-15);
        assert!((s.c1 - 0.625).abs() < 1e-15);
        assert!((s.c2 - 0.5 * (3.0f64.sqrt() - 2.0)).abs() < 1e-15);
        assert!((s.c2 + 0.13397).abs() < 1e-5);
    }

    #[test]
    fn decoupled_limit_recovers_free_gap() {
        let s = solve_oscillator(1.0, 1e-12).unwrap();
        assert!((s.omega - 1.0).abs() < 1e-11);
        let s = solve_oscillator(1.0, 0.0).unwrap();
        assert_eq!(s.omega, 1.0);
        assert_eq!(s.c2, 0.0);
        assert!(solve_oscillator(1.0, 1.0).is_err());
    }

    #[test]
    fn oscillator_ladder() {
        let s = solve_oscillator(1.0, 0.0).unwrap();
        assert_eq!(oscillator_energies(&s, 1, 1000), vec![-500.0]);
        let s = solve_oscillator(1.0, 2.0).unwrap();
        let e = oscillator_energies(&s, 4, 1000);
        assert!((e[0] + 625.13397).abs() < 1e-5);
        for w in e.windows(2) {
            assert!((w[1] - w[0] - s.omega).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_closes_from_both_sides() {
        let mut prev_left = f64::INFINITY;
        let mut prev_right = f64::INFINITY;
        for k in 1..9 {
            let d = 10f64.powi(-k);
            let left = solve_oscillator(1.0, 1.0 - d).unwrap().omega;
            let right = solve_oscillator(1.0, 1.0 + d).unwrap().omega;
            assert!(left < prev_left && right < prev_right);
            prev_left = left;
            prev_right = right;
        }
        assert!(prev_left < 2e-4 && prev_right < 2e-4);
    }

    #[test]
    fn energies_continuous_at_critical_point() {
        let n = 1000;
        let eps = 1e-8;
        let below = oscillator_energies(&solve_oscillator(1.0, 1.0 - eps).unwrap(), 3, n);
        let above = oscillator_energies(&solve_oscillator(1.0, 1.0 + eps).unwrap(), 3, n);
        for (a, b) in below.iter().zip(&above) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn mean_field_bifurcation() {
        assert_eq!(mean_field_displacement(1.0, 0.3), 0.0);
        assert_eq!(mean_field_displacement(1.0, 1.0), 0.0);
        let mut prev = 0.0;
        for i in 1..200 {
            let a = mean_field_displacement(1.0, 1.0 + 0.05 * i as f64);
            assert!(a > prev);
            prev = a;
        }
        assert!((mean_field_displacement(1.0, 1e9) - 0.5f64.sqrt()).abs() < 1e-9);
        let s = solve_oscillator(1.0, 3.0).unwrap();
        assert_eq!(s.alpha, mean_field_displacement(1.0, 3.0));
    }

    #[test]
    fn q_shift_vanishes_in_normal_phase() {
        let f = coupling_factors(1.0, 0.4).unwrap();
        assert_eq!(f.q_shift, 0.0);
        let f = coupling_factors(1.0, 2.0).unwrap();
        assert!((f.q_shift - 0.5 * 0.75f64.sqrt()).abs() < 1e-15);
        assert!(f.a_polaron > 0.0);
    }

    #[test]
    fn magnetization_limits() {
        assert_eq!(magnetization_density_limit(1.0, 0.3).unwrap(), 0.5);
        assert_eq!(magnetization_density_limit(1.0, 2.0).unwrap(), 0.25);
        assert!((magnetization_density_limit(1.0, 1.0 + 1e-8).unwrap() - 0.5).abs() < 1e-8);
        assert!(magnetization_density_limit(1.0, 1.0).is_err());
        let n = 1000;
        let jz = magnetization_polaron(1.0, 0.5, f64::INFINITY, n).unwrap();
        assert!((jz / n as f64 - 0.5).abs() < 1e-3);
        let big = 1_000_000;
        let jz = magnetization_polaron(1.0, 2.0, 50.0, big).unwrap();
        assert!((jz / big as f64 - 0.25).abs() < 1e-6);
    }

    #[test]
    fn field_renormalization_examples() {
        let bath = BathParams::reference(1.0).unwrap();
        assert_eq!(field_renormalization(&bath.with_eta(0.0).unwrap(), 10).unwrap(), 1.0);
        let d = field_renormalization(&bath, 1000).unwrap();
        assert!(d > 0.99 && d < 1.0, "{d}");
        assert!((field_renormalization(&bath, 1 << 40).unwrap() - 1.0).abs() < 1e-12);
        let hc = critical_point_polaron(1.0, &bath, 1000).unwrap();
        assert!(hc < 1.0 && hc > 0.99);
        assert_eq!(critical_point_polaron(1.0, &bath.with_eta(0.0).unwrap(), 5).unwrap(), 1.0);
    }
}
