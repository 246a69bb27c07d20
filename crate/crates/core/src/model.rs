//! Parameter types, phase classification and the reservoir functions shared by
//! every other module.
//!
//! Energies are carried with explicit units; nothing here assumes `h = 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{self, Scheme};

/// Relative half-width of the band around `gamma = h` in which the phase is
/// not classified.
pub const CRITICAL_TOLERANCE: f64 = 1e-9;

/// Upper integration limit for reservoir integrals, in units of the cutoff.
pub const CUTOFF_MULTIPLE: f64 = 40.0;

/// Isolated LMG model `H = -h Jz - (gamma_x / N) Jx^2` in the `j = N/2` sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmgParams {
    h: f64,
    gamma_x: f64,
    n_spins: usize,
}

impl LmgParams {
    pub fn new(h: f64, gamma_x: f64, n_spins: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("h", format!("must be positive and finite, got {h}")));
        }
        if !(gamma_x >= 0.0 && gamma_x.is_finite()) {
            return Err(Error::invalid(
                "gamma_x",
                format!("must be non-negative and finite, got {gamma_x}"),
            ));
        }
        if n_spins == 0 {
            return Err(Error::invalid("n_spins", "must be at least 1"));
        }
        Ok(Self { h, gamma_x, n_spins })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn gamma_x(&self) -> f64 {
        self.gamma_x
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Total angular momentum `j = N/2` of the maximal sector.
    pub fn j(&self) -> f64 {
        self.n_spins as f64 / 2.0
    }

    pub fn with_gamma_x(&self, gamma_x: f64) -> Result<Self> {
        Self::new(self.h, gamma_x, self.n_spins)
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(h, self.gamma_x, self.n_spins)
    }
}

/// Bosonic reservoir with the cubic spectral density
/// `Gamma(w) = eta w^3 / wc^2 exp(-w / wc)` at inverse temperature `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    eta: f64,
    omega_c: f64,
    beta: f64,
}

impl BathParams {
    pub fn new(eta: f64, omega_c: f64, beta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid("eta", format!("must be non-negative and finite, got {eta}")));
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(Error::invalid(
                "omega_c",
                format!("must be positive and finite, got {omega_c}"),
            ));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta", format!("must be positive and finite, got {beta}")));
        }
        Ok(Self { eta, omega_c, beta })
    }

    /// `eta = 2 pi 0.1`, `wc = 0.5 h`, `beta = 1.79 / h`.
    pub fn reference(h: f64) -> Result<Self> {
        Self::new(2.0 * PI * 0.1, 0.5 * h, 1.79 / h)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.eta, self.omega_c, beta)
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(eta, self.omega_c, self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Normal,
    SymmetryBroken,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::SymmetryBroken => "symmetry-broken",
        }
    }
}

/// Classifies `gamma` against `h` with the default relative tolerance.
pub fn classify_phase(h: f64, gamma: f64) -> Result<Phase> {
    classify_phase_with_tolerance(h, gamma, CRITICAL_TOLERANCE)
}

/// Classifies `gamma` against `h`; `|gamma - h| < tolerance * h` is an error.
pub fn classify_phase_with_tolerance(h: f64, gamma: f64, tolerance: f64) -> Result<Phase> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain {
            quantity: "h",
            value: h,
            expected: "h > 0",
        });
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Domain {
            quantity: "gamma",
            value: gamma,
            expected: "gamma >= 0",
        });
    }
    let radius = tolerance * h;
    if (gamma - h).abs() < radius {
        return Err(Error::CriticalPoint { h, gamma, radius });
    }
    Ok(if gamma < h {
        Phase::Normal
    } else {
        Phase::SymmetryBroken
    })
}

/// A reservoir spectral density `Gamma(w)` on `w >= 0`.
pub trait SpectralDensity: Sync {
    fn eval(&self, omega: f64) -> f64;

    /// Upper limit of the numerical integration range.
    fn integration_limit(&self) -> f64;

    /// Scale of the exponential tail beyond [`Self::integration_limit`], or
    /// zero when the density has compact support.
    fn tail_scale(&self) -> f64;

    /// Abscissae where the density is not smooth; quadratures split there.
    fn breakpoints(&self) -> &[f64] {
        &[]
    }
}

impl SpectralDensity for BathParams {
    fn eval(&self, omega: f64) -> f64 {
        let x = omega / self.omega_c;
        self.eta * omega * x * x * (-x).exp()
    }

    fn integration_limit(&self) -> f64 {
        CUTOFF_MULTIPLE * self.omega_c
    }

    fn tail_scale(&self) -> f64 {
        self.omega_c
    }
}

/// Piecewise-linear spectral density through tabulated points, zero past the
/// last abscissa. Used to exercise the quadrature paths with a non-analytic
/// density.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    omegas: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(omegas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omegas.len() != values.len() || omegas.len() < 2 {
            return Err(Error::invalid(
                "table",
                "needs at least two points and equal-length columns",
            ));
        }
        if omegas[0] != 0.0 || omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "table",
                "abscissae must start at 0 and increase strictly",
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("table", "values must be non-negative"));
        }
        Ok(Self { omegas, values })
    }

    /// Samples `density` on a uniform grid of `points` abscissae in `[0, limit]`.
    pub fn sample(density: &dyn SpectralDensity, limit: f64, points: usize) -> Result<Self> {
        let points = points.max(2);
        let omegas: Vec<f64> = (0..points)
            .map(|i| limit * i as f64 / (points - 1) as f64)
            .collect();
        let values = omegas.iter().map(|&w| density.eval(w)).collect();
        Self::new(omegas, values)
    }

    /// Interior knots, where the interpolant has kinks.
    pub fn knots(&self) -> &[f64] {
        &self.omegas
    }
}

impl SpectralDensity for TabulatedDensity {
    fn eval(&self, omega: f64) -> f64 {
        let last = self.omegas.len() - 1;
        if omega < 0.0 || omega > self.omegas[last] {
            return 0.0;
        }
        let i = match self.omegas.partition_point(|&w| w <= omega) {
            0 => 0,
            p => (p - 1).min(last - 1),
        };
        let (w0, w1) = (self.omegas[i], self.omegas[i + 1]);
        let t = (omega - w0) / (w1 - w0);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    fn integration_limit(&self) -> f64 {
        *self.omegas.last().unwrap()
    }

    fn tail_scale(&self) -> f64 {
        0.0
    }

    fn breakpoints(&self) -> &[f64] {
        &self.omegas
    }
}

/// Cubic spectral density `eta w^3 / wc^2 exp(-w/wc)`.
pub fn spectral_density(omega: f64, bath: &BathParams) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain {
            quantity: "omega",
            value: omega,
            expected: "omega >= 0",
        });
    }
    Ok(bath.eval(omega))
}

/// Shift of the spin-spin coupling, `sum_k g_k^2 / nu_k = eta wc / pi` for the
/// cubic density.
pub fn coupling_shift(bath: &BathParams) -> f64 {
    bath.eta * bath.omega_c / PI
}

/// Coupling seen by the LMG Hamiltonian in the conventional frame,
/// `gamma_x - eta wc / pi`.
pub fn renormalized_coupling(gamma_x: f64, bath: &BathParams) -> f64 {
    gamma_x - coupling_shift(bath)
}

/// Position of the critical point predicted by the conventional treatment,
/// `h + eta wc / pi`.
pub fn shifted_critical_point(h: f64, bath: &BathParams) -> f64 {
    h + coupling_shift(bath)
}

/// `(1/2pi) int_0^inf Gamma(w)/w dw` evaluated numerically for any density.
pub fn coupling_shift_quadrature(density: &dyn SpectralDensity, scheme: Scheme) -> Result<f64> {
    let integrand = |w: f64| {
        if w == 0.0 {
            0.0
        } else {
            density.eval(w) / w
        }
    };
    let knots = density.breakpoints();
    if knots.len() >= 2 && density.tail_scale() == 0.0 {
        let mut total = 0.0;
        for w in knots.windows(2) {
            total += quadrature::integrate(integrand, w[0], w[1], scheme, quadrature::Tolerance::default())?.value;
        }
        return Ok(total / (2.0 * PI));
    }
    let result = quadrature::integrate_with_tail(
        integrand,
        density.integration_limit(),
        density.tail_scale(),
        scheme,
        quadrature::Tolerance::default(),
    )?;
    Ok(result.value / (2.0 * PI))
}

/// Bose-Einstein occupation `1/(exp(beta w) - 1)`.
pub fn bose_occupation(omega: f64, beta: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain {
            quantity: "omega",
            value: omega,
            expected: "omega > 0",
        });
    }
    if !(beta > 0.0) {
        return Err(Error::Domain {
            quantity: "beta",
            value: beta,
            expected: "beta > 0",
        });
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

/// `w (n_B(w) + 1/2) = (w/2) coth(beta w / 2)`, continuous at `w = 0` where it
/// equals `1/beta`.
pub(crate) fn thermal_weight(omega: f64, beta: f64) -> f64 {
    let x = 0.5 * beta * omega;
    if x < 1e-4 {
        // coth x = 1/x + x/3 - x^3/45
        (1.0 + x * x / 3.0 - x.powi(4) / 45.0) / beta
    } else {
        0.5 * omega / x.tanh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_bath() -> BathParams {
        BathParams::reference(1.0).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_phase(1.0, 0.5).unwrap(), Phase::Normal);
        assert_eq!(classify_phase(1.0, 2.0).unwrap(), Phase::SymmetryBroken);
        assert!(matches!(
            classify_phase(1.0, 1.0),
            Err(Error::CriticalPoint { .. })
        ));
        assert!(classify_phase(1.0, 1.0 + 1e-10).is_err());
        assert!(classify_phase(1.0, 1.0 + 1e-8).is_ok());
    }

    #[test]
    fn classify_rejects_bad_domain() {
        assert!(matches!(classify_phase(0.0, 0.5), Err(Error::Domain { .. })));
        assert!(matches!(classify_phase(1.0, -0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn params_validate() {
        assert!(LmgParams::new(1.0, 0.5, 10).is_ok());
        assert!(LmgParams::new(0.0, 0.5, 10).is_err());
        assert!(LmgParams::new(1.0, -0.1, 10).is_err());
        assert!(LmgParams::new(1.0, 0.5, 0).is_err());
        assert!(BathParams::new(0.0, 0.5, 1.0).is_ok());
        assert!(BathParams::new(-1.0, 0.5, 1.0).is_err());
        assert!(BathParams::new(0.1, 0.0, 1.0).is_err());
        assert!(BathParams::new(0.1, 0.5, 0.0).is_err());
    }

    #[test]
    fn spectral_density_examples() {
        let bath = fig_bath();
        assert_eq!(spectral_density(0.0, &bath).unwrap(), 0.0);
        // w = wc: eta wc / e
        let v = spectral_density(0.5, &bath).unwrap();
        assert!((v - 2.0 * PI * 0.1 * 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.11557).abs() < 5e-6);
        let v2 = spectral_density(1.0, &bath).unwrap();
        assert!((v2 - 8.0 * bath.eta() * 0.5 * (-2.0f64).exp()).abs() < 1e-15);
        assert!(spectral_density(-0.1, &bath).is_err());
    }

    #[test]
    fn spectral_density_is_superquadratic_at_origin() {
        let bath = fig_bath();
        let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&w| bath.eval(w) / (w * w))
            .collect();
        assert!(ratios.windows(2).all(|r| r[1] < r[0]));
        assert!(ratios[3] < 1e-3);
    }

    #[test]
    fn renormalized_coupling_examples() {
        let bath = fig_bath();
        assert!((renormalized_coupling(1.0, &bath) - 0.9).abs() < 1e-15);
        let closed = bath.with_eta(0.0).unwrap();
        assert_eq!(renormalized_coupling(0.5, &closed), 0.5);
        assert!((shifted_critical_point(1.0, &bath) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn coupling_shift_matches_quadrature() {
        for bath in [
            fig_bath(),
            BathParams::new(0.3, 2.0, 0.4).unwrap(),
            BathParams::new(1.7, 0.05, 10.0).unwrap(),
        ] {
            let analytic = coupling_shift(&bath);
            for scheme in [Scheme::GaussKronrod, Scheme::Simpson] {
                let numeric = coupling_shift_quadrature(&bath, scheme).unwrap();
                assert!(
                    ((numeric - analytic) / analytic).abs() < 1e-10,
                    "{scheme:?}: {numeric} vs {analytic}"
                );
            }
        }
    }

    #[test]
    fn tabulated_density_interpolates() {
        let t = TabulatedDensity::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(1.0), 2.0);
        assert_eq!(t.eval(2.0), 1.0);
        assert_eq!(t.eval(3.0), 0.0);
        assert_eq!(t.eval(4.0), 0.0);
        assert!(TabulatedDensity::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(TabulatedDensity::new(vec![0.1, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn tabulated_cubic_shift_converges() {
        let bath = fig_bath();
        let table = TabulatedDensity::sample(&bath, bath.integration_limit(), 20_001).unwrap();
        let shift = coupling_shift_quadrature(&table, Scheme::GaussKronrod).unwrap();
        assert!((shift - coupling_shift(&bath)).abs() < 1e-6);
    }

    #[test]
    fn bose_occupation_examples() {
        let n = bose_occupation(0.5f64.sqrt(), 1.79).unwrap();
        assert!((n - 0.3928).abs() < 5e-5, "{n}");
        assert!(bose_occupation(1e3, 1.79).unwrap() < 1e-300);
        assert!(bose_occupation(0.0, 1.0).is_err());
        assert!(bose_occupation(1.0, 0.0).is_err());
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let n = bose_occupation(0.05 * i as f64, 1.79).unwrap();
            assert!(n < prev);
            prev = n;
        }
    }

    #[test]
    fn thermal_weight_is_smooth_at_origin() {
        let beta = 1.79;
        assert!((thermal_weight(0.0, beta) - 1.0 / beta).abs() < 1e-15);
        for w in [1e-6, 1e-5, 1.1e-4, 1e-3, 0.3, 5.0] {
            let direct = w * (1.0 / (beta * w).exp_m1() + 0.5);
            assert!(((thermal_weight(w, beta) - direct) / direct).abs() < 1e-9, "{w}");
        }
    }
}
