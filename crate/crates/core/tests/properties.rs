use lmg_core::bosonic::{
    coupling_factors, field_renormalization, mean_field_displacement, solve_oscillator,
};
use lmg_core::dissipation::{evolve_occupation, frame_observables, rates, Frame};
use lmg_core::model::{
    classify_phase, coupling_shift, coupling_shift_quadrature, spectral_density, BathParams,
    LmgParams, Phase,
};
use lmg_core::quadrature::Scheme;
use lmg_core::spin::{all_eigenvalues, build_lmg_hamiltonian, GibbsSpectrum};
use lmg_core::waiting_times::{wtd_analytic, wtd_numeric_adaptive, WtdKind};
use proptest::prelude::*;

fn off_critical(h: f64, g: f64) -> bool {
    (g - h).abs() > 0.02 * h
}

fn bath_strategy() -> impl Strategy<Value = BathParams> {
    (0.01f64..2.0, 0.1f64..2.0, 0.2f64..10.0)
        .prop_map(|(eta, wc, beta)| BathParams::new(eta, wc, beta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phase_is_scale_invariant(h in 0.01f64..10.0, ratio in 0.0f64..3.0, s in 0.01f64..100.0) {
        prop_assume!((ratio - 1.0).abs() > 1e-6);
        let g = ratio * h;
        prop_assert_eq!(classify_phase(h, g).unwrap(), classify_phase(s * h, s * g).unwrap());
    }

    #[test]
    fn coupling_shift_matches_quadrature(bath in bath_strategy()) {
        let quad = coupling_shift_quadrature(&bath, Scheme::GaussKronrod).unwrap();
        let exact = coupling_shift(&bath);
        prop_assert!(((quad - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn density_superquadratic_at_origin(bath in bath_strategy(), k in 3i32..12) {
        let w = bath.omega_c() * 10f64.powi(-k);
        let ratio = spectral_density(w, &bath).unwrap() / (w * w);
        prop_assert!(ratio < bath.eta() * 10f64.powi(-k + 1) / bath.omega_c());
    }

    #[test]
    fn dressing_identities(h in 0.1f64..5.0, ratio in 0.0f64..3.0) {
        let g = ratio * h;
        prop_assume!(off_critical(h, g));
        let sol = solve_oscillator(h, g).unwrap();
        let f = coupling_factors(h, g).unwrap();
        let pol = f.a_polaron.powi(2) / sol.omega;
        match sol.phase {
            Phase::Normal => {
                prop_assert!((pol / (h / 4.0) - 1.0).abs() < 1e-10);
                prop_assert!((f.a_bms.powi(2) * sol.omega / (h / 4.0) - 1.0).abs() < 1e-10);
                prop_assert_eq!(f.q_shift, 0.0);
            }
            Phase::SymmetryBroken => {
                prop_assert!((pol / (h * h / (4.0 * g)) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn displacement_grows_in_broken_phase(h in 0.1f64..5.0, a in 1.001f64..4.0, b in 1.001f64..4.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert_eq!(mean_field_displacement(h, 0.9 * h), 0.0);
        let (x, y) = (mean_field_displacement(h, lo * h), mean_field_displacement(h, hi * h));
        prop_assert!(y > x && x > 0.0);
        prop_assert!(y < 0.5f64.sqrt());
    }

    #[test]
    fn detailed_balance(ratio in 0.15f64..2.5, bath in bath_strategy()) {
        for frame in [Frame::Bms, Frame::Polaron] {
            let g = ratio;
            let Ok(r) = rates(frame, 1.0, g, &bath) else { continue };
            if r.f_absorb == 0.0 {
                continue;
            }
            let expected = (bath.beta() * r.omega_used).exp();
            prop_assert!(((r.f_emit / r.f_absorb) / expected - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mode_occupation_dominates_diagonal(ratio in 0.0f64..2.5) {
        let bath = BathParams::reference(1.0).unwrap();
        prop_assume!(off_critical(1.0, ratio));
        let o = frame_observables(Frame::Polaron, 1.0, ratio, &bath).unwrap();
        let sol = solve_oscillator(1.0, ratio).unwrap();
        let weight = (2.0 * sol.phi).cosh();
        prop_assert!(o.occupation_mode >= o.occupation_diagonal * weight.min(1.0));
    }

    #[test]
    fn relaxation_approaches_steady_state(n0 in 0.0f64..20.0, ratio in 0.1f64..0.9) {
        let bath = BathParams::reference(1.0).unwrap();
        let r = rates(Frame::Polaron, 1.0, ratio, &bath).unwrap();
        let target = r.occupation_ratio().unwrap();
        let early = evolve_occupation(n0, 1.0 / r.relaxation_rate(), &r).unwrap();
        let late = evolve_occupation(n0, 40.0 / r.relaxation_rate(), &r).unwrap();
        prop_assert!((late - target).abs() <= (early - target).abs() + 1e-15);
        prop_assert!((late - target).abs() < 1e-12 * (1.0 + n0));
    }

    #[test]
    fn field_renormalization_bounds(bath in bath_strategy(), n in 1usize..100_000) {
        let d = field_renormalization(&bath, n).unwrap();
        let d2 = field_renormalization(&bath, 2 * n).unwrap();
        prop_assert!(d > 0.0 && d < 1.0 && d2 > d);
    }

    #[test]
    fn wtd_symmetry_and_rescaling(gt in 0.0f64..30.0, g in 0.01f64..3.0, n in 0.001f64..5.0, alpha in 0.05f64..20.0) {
        let tau = gt / (alpha * g);
        prop_assert_eq!(
            wtd_analytic(WtdKind::EE, tau, g, n).unwrap(),
            wtd_analytic(WtdKind::AA, tau, g, n).unwrap()
        );
        for kind in WtdKind::ALL {
            let lhs = wtd_analytic(kind, tau, alpha * g, n).unwrap();
            let rhs = alpha * wtd_analytic(kind, alpha * tau, g, n).unwrap();
            prop_assert!(lhs >= 0.0);
            prop_assert!(lhs == rhs || ((lhs - rhs) / rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn wtd_numeric_matches_closed_form(tau in 0.0f64..20.0, g in 0.05f64..2.0, n in 0.001f64..3.0) {
        for kind in WtdKind::ALL {
            let a = wtd_analytic(kind, tau, g, n).unwrap();
            let b = wtd_numeric_adaptive(kind, tau, g, n).unwrap();
            prop_assert!(a == b || ((a - b) / a).abs() < 1e-8, "{kind}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gibbs_magnetization_bounded(n in 1usize..60, ratio in 0.0f64..3.0, beta in 0.01f64..50.0) {
        let p = LmgParams::new(1.0, ratio, n).unwrap();
        let jz = GibbsSpectrum::new(&p).unwrap().thermal_jz(beta);
        prop_assert!(jz.abs() <= p.j() + 1e-12);
        prop_assert!(jz >= -1e-12);
    }

    #[test]
    fn spectrum_sorted_and_complete(n in 1usize..80, ratio in 0.0f64..3.0) {
        let m = build_lmg_hamiltonian(&LmgParams::new(1.0, ratio, n).unwrap()).unwrap();
        let e = all_eigenvalues(&m).unwrap();
        prop_assert_eq!(e.len(), n + 1);
        prop_assert!(e.windows(2).all(|w| w[0] <= w[1]));
        // Trace is preserved.
        let trace: f64 = (0..m.dimension()).map(|i| m.get(i, i)).sum();
        prop_assert!((e.iter().sum::<f64>() - trace).abs() < 1e-9 * (1.0 + trace.abs()));
    }
}
