//! Adaptive quadrature on finite intervals and on `[0, inf)` for integrands
//! with an exponential tail.
//!
//! Two unrelated schemes are provided so reservoir integrals can be cross
//! checked: globally adaptive Gauss-Kronrod (7/15 points) and locally adaptive
//! Simpson with Richardson correction.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    GaussKronrod,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
    pub max_evaluations: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            absolute: 1e-15,
            relative: 1e-12,
            max_evaluations: 500_000,
        }
    }
}

impl Tolerance {
    fn target(&self, value: f64) -> f64 {
        self.absolute.max(self.relative * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimated absolute error, including any tail bound.
    pub error: f64,
    pub evaluations: usize,
}

// Published to 30 digits; kept as printed.
#[allow(clippy::excessive_precision)]
const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
#[allow(clippy::excessive_precision)]
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Gauss-Kronrod panel on `[a, b]`; returns the Kronrod estimate
/// and `|K15 - G7|`.
pub fn gauss_kronrod_15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn adaptive_gauss_kronrod(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Integral> {
    let (value, error) = gauss_kronrod_15(f, a, b);
    let mut panels = vec![Panel { a, b, value, error }];
    let mut evaluations = 15;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= tol.target(total) {
            return Ok(Integral {
                value: total,
                error: err,
                evaluations,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if evaluations + 30 > tol.max_evaluations || mid <= a || mid >= b {
            return Err(Error::Quadrature {
                value: total,
                error: err,
                evaluations,
            });
        }
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (value, error) = gauss_kronrod_15(f, lo, hi);
            panels.push(Panel {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
        evaluations += 30;
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    // Coarse pass on 8 panels to set the local tolerance scale.
    const START: usize = 8;
    let h = (b - a) / START as f64;
    let mut stack = Vec::with_capacity(64);
    let mut evaluations = 0;
    let mut coarse = 0.0;
    for i in 0..START {
        let (lo, hi) = (a + h * i as f64, a + h * (i + 1) as f64);
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        evaluations += 3;
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        coarse += whole;
        stack.push((lo, hi, flo, fmid, fhi, whole, 0u32));
    }
    let budget = tol.target(coarse);
    let width = b - a;
    let mut value = 0.0;
    let mut error = 0.0;
    while let Some((lo, hi, flo, fmid, fhi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let lm = 0.5 * (lo + mid);
        let rm = 0.5 * (mid + hi);
        let (flm, frm) = (f(lm), f(rm));
        evaluations += 2;
        let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        let delta = left + right - whole;
        let local = budget * (hi - lo) / width;
        if delta.abs() <= 15.0 * local || depth >= 50 {
            value += left + right + delta / 15.0;
            error += delta.abs() / 15.0;
        } else {
            if evaluations > tol.max_evaluations {
                return Err(Error::Quadrature {
                    value: value + coarse,
                    error: f64::INFINITY,
                    evaluations,
                });
            }
            stack.push((lo, mid, flo, flm, fmid, left, depth + 1));
            stack.push((mid, hi, fmid, frm, fhi, right, depth + 1));
        }
    }
    if error > 10.0 * tol.target(value) {
        return Err(Error::Quadrature {
            value,
            error,
            evaluations,
        });
    }
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    scheme: Scheme,
    tol: Tolerance,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::invalid("interval", format!("[{a}, {b}] is not a finite interval")));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    match scheme {
        Scheme::GaussKronrod => adaptive_gauss_kronrod(&f, a, b, tol),
        Scheme::Simpson => adaptive_simpson(&f, a, b, tol),
    }
}

/// Integrates `f` over `[0, inf)` as `[0, upper]` plus a bound on the tail.
///
/// The tail beyond `upper` is assumed to decay at least as fast as
/// `exp(-w / tail_scale)`, so it is bounded by `2 |f(upper)| tail_scale`.
/// A zero `tail_scale` means `f` vanishes beyond `upper`.
pub fn integrate_with_tail(
    f: impl Fn(f64) -> f64,
    upper: f64,
    tail_scale: f64,
    scheme: Scheme,
    tol: Tolerance,
) -> Result<Integral> {
    let mut body = integrate(&f, 0.0, upper, scheme, tol)?;
    let tail = 2.0 * f(upper).abs() * tail_scale;
    body.error += tail;
    body.evaluations += 1;
    if body.error > 10.0 * tol.target(body.value) {
        return Err(Error::Quadrature {
            value: body.value,
            error: body.error,
            evaluations: body.evaluations,
        });
    }
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = 2.0 * KRONROD_WEIGHTS[..7].iter().sum::<f64>() + KRONROD_WEIGHTS[7];
        let g: f64 = 2.0 * GAUSS_WEIGHTS[..3].iter().sum::<f64>() + GAUSS_WEIGHTS[3];
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_exact_for_polynomials() {
        // K15 integrates degree 22 exactly, G7 degree 13.
        for p in 0..=22 {
            let (k, _) = gauss_kronrod_15(&|x: f64| x.powi(p), 0.0, 1.0);
            let exact = 1.0 / (p as f64 + 1.0);
            assert!((k - exact).abs() < 1e-14, "degree {p}: {k} vs {exact}");
        }
        let (_, err) = gauss_kronrod_15(&|x: f64| x.powi(13), -1.0, 2.0);
        assert!(err < 1e-11);
    }

    #[test]
    fn both_schemes_agree_on_known_integrals() {
        type Case = (Box<dyn Fn(f64) -> f64>, f64, f64, f64);
        let cases: Vec<Case> = vec![
            (Box::new(|x: f64| x.sin()), 0.0, std::f64::consts::PI, 2.0),
            (Box::new(|x: f64| (-x).exp()), 0.0, 1.0, 1.0 - (-1.0f64).exp()),
            (Box::new(|x: f64| x.sqrt()), 0.0, 4.0, 16.0 / 3.0),
            (Box::new(|x: f64| 1.0 / (1.0 + x * x)), -10.0, 10.0, 2.0 * 10.0f64.atan()),
        ];
        for (f, a, b, exact) in &cases {
            for scheme in [Scheme::GaussKronrod, Scheme::Simpson] {
                let r = integrate(f, *a, *b, scheme, Tolerance::default()).unwrap();
                assert!(
                    ((r.value - exact) / exact).abs() < 1e-10,
                    "{scheme:?}: {} vs {exact}",
                    r.value
                );
            }
        }
    }

    #[test]
    fn semi_infinite_with_exponential_tail() {
        // int_0^inf w^2 exp(-w/s) dw = 2 s^3
        let s = 0.7;
        for scheme in [Scheme::GaussKronrod, Scheme::Simpson] {
            let r = integrate_with_tail(
                |w: f64| w * w * (-w / s).exp(),
                40.0 * s,
                s,
                scheme,
                Tolerance::default(),
            )
            .unwrap();
            assert!(((r.value - 2.0 * s.powi(3)) / (2.0 * s.powi(3))).abs() < 1e-11);
        }
    }

    #[test]
    fn short_range_reports_tail() {
        let r = integrate_with_tail(
            |w: f64| (-w).exp(),
            2.0,
            1.0,
            Scheme::GaussKronrod,
            Tolerance::default(),
        );
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let tol = Tolerance {
            max_evaluations: 100,
            ..Tolerance::default()
        };
        let wild = |x: f64| (1.0 / (x + 1e-9)).sin();
        assert!(integrate(wild, 0.0, 1.0, Scheme::GaussKronrod, tol).is_err());
        assert!(integrate(wild, 0.0, 1.0, Scheme::Simpson, tol).is_err());
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(integrate(|x| x, 1.0, 0.0, Scheme::Simpson, Tolerance::default()).is_err());
        assert_eq!(
            integrate(|x| x, 1.0, 1.0, Scheme::Simpson, Tolerance::default())
                .unwrap()
                .value,
            0.0
        );
    }
}
