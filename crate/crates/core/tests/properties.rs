use proptest::prelude::*;
use semistab_core::certificate::{bound_delta1, TransferChain};
use semistab_core::expm::{matrix_exp, EigenPropagator};
use semistab_core::fractional::apply_fractional_resolvent_power;
use semistab_core::model::resolvent_norm_exact;
use semistab_core::quadrature::{integrate_real_line, QuadOptions};
use semistab_core::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

prop_compose! {
    fn arb_model(max_n: usize)(n in 2..max_n)(
        re in prop::collection::vec(0.01f64..4.0, n),
        im in prop::collection::vec(-6.0f64..6.0, n),
        w in prop::collection::vec(0.2f64..3.0, n),
    ) -> SpectralModel {
        let eig = re.iter().zip(&im).map(|(a, b)| c(-a, *b)).collect();
        SpectralModel::custom(eig, w, vec![]).unwrap()
    }
}

fn arb_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b)), n)
}

fn arb_case(max_n: usize, max_p: usize) -> impl Strategy<Value = (SpectralModel, PerturbationFactors, Complex64, Vec<Complex64>, Vec<Complex64>)> {
    (arb_model(max_n), 1..=max_p).prop_flat_map(|(m, p)| {
        let n = m.len();
        (
            Just(m),
            prop::collection::vec(arb_vec(n), p),
            prop::collection::vec(arb_vec(n), p),
            (0.05f64..3.0, -6.0f64..6.0),
            arb_vec(n),
            arb_vec(n),
        )
            .prop_map(|(m, b, cc, (lr, li), x, y)| {
                let s = 0.3;
                let f = PerturbationFactors::new(b, cc).unwrap().scaled(s, s);
                (m, f, c(lr, li), x, y)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn smw_agrees_with_dense_inverse((m, f, lam, x, _) in arb_case(24, 3)) {
        if let Ok(y) = perturbed_resolvent_apply(&m, &f, lam, &x) {
            let o = dense_resolvent_oracle(&m, &f, lam);
            prop_assume!(o.is_ok());
            let o = o.unwrap();
            let z: Vec<Complex64> = (&o * nalgebra::DVector::from_column_slice(&x)).iter().cloned().collect();
            prop_assert!(relative_deviation(&y, &z) < 1e-9);
        }
    }

    #[test]
    fn adjoint_identity((m, f, lam, x, y) in arb_case(24, 3)) {
        let (Ok(rx), Ok(ry)) = (perturbed_resolvent_apply(&m, &f, lam, &x), perturbed_resolvent_adjoint_apply(&m, &f, lam, &y)) else {
            return Ok(());
        };
        let lhs = m.inner(&rx, &y);
        let rhs = m.inner(&x, &ry);
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn transfer_norm_invariant_under_balanced_scaling((m, f, lam, _, _) in arb_case(16, 1), s in 0.1f64..10.0) {
        let a = transfer_norm(&m, &f, lam).unwrap();
        let b = transfer_norm(&m, &f.scaled(s, 1.0 / s), lam).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn zero_factors_reduce_to_unperturbed((m, _, lam, x, _) in arb_case(16, 1)) {
        let z = PerturbationFactors::zero(m.len(), 2);
        let y = perturbed_resolvent_apply(&m, &z, lam, &x).unwrap();
        let r = semistab_core::model::apply_resolvent(&m, lam, &x).unwrap();
        prop_assert_eq!(y, r);
        prop_assert_eq!(transfer_norm(&m, &z, lam).unwrap(), 0.0);
        let est = perturbed_resolvent_norm(&m, &z, lam, 1e-12, 100).unwrap();
        prop_assert!((est.value - resolvent_norm_exact(&m, lam).unwrap()).abs() <= 1e-12 * est.value);
    }

    #[test]
    fn power_estimate_is_a_lower_bound_of_dense_norm((m, f, lam, _, _) in arb_case(12, 2)) {
        let Ok(est) = perturbed_resolvent_norm(&m, &f, lam, 1e-12, 5000) else { return Ok(()); };
        let o = dense_resolvent_oracle(&m, &f, lam).unwrap();
        let sw: Vec<f64> = m.weights.iter().map(|w| w.sqrt()).collect();
        let s = nalgebra::DMatrix::from_fn(m.len(), m.len(), |i, j| o[(i, j)] * (sw[i] / sw[j]));
        let exact = s.singular_values().max();
        prop_assert!(est.truncated <= exact * (1.0 + 1e-9));
        prop_assert!(est.truncated >= exact * (1.0 - 1e-3));
    }

    #[test]
    fn moment_inequality_normal_path(m in arb_model(20), omega in -5.0f64..5.0, a in 0.2f64..4.0, t in 0.05f64..0.95, seed in 0u64..1000) {
        let x = semistab_core::verification::random_unit_vector(&m, seed);
        for dir in [MomentDirection::PositivePower, MomentDirection::InversePowerB, MomentDirection::InversePowerC] {
            let r = check_moment_inequality(&m, omega, t * a, a, &x, dir).unwrap();
            prop_assert!(r.holds, "{:?} {} > {}", dir, r.lhs, r.rhs);
        }
    }

    #[test]
    fn fractional_powers_compose(m in arb_model(16), omega in -5.0f64..5.0, a in 0.0f64..2.0, b in 0.0f64..2.0, seed in 0u64..100) {
        let x = semistab_core::verification::random_unit_vector(&m, seed);
        for side in [Side::B, Side::C] {
            let ab = apply_fractional_resolvent_power(&m, omega, a + b, &x, side).unwrap();
            let two = apply_fractional_resolvent_power(&m, omega, a, &apply_fractional_resolvent_power(&m, omega, b, &x, side).unwrap(), side).unwrap();
            prop_assert!(relative_deviation(&two, &ab) < 1e-10);
            let back = apply_generator_power(&m, omega, a, &apply_fractional_resolvent_power(&m, omega, a, &x, side).unwrap(), side).unwrap();
            prop_assert!(relative_deviation(&back, &x) < 1e-10);
        }
    }

    #[test]
    fn delta1_is_the_largest_admissible_budget(m1 in 1.0f64..100.0, tails in 0usize..4, split in any::<bool>(), k in 1.0f64..3.0, c in 0.05f64..0.95) {
        let chain = TransferChain { m1, moment_constant: k, split_leading: split, tails };
        let (d, diag) = bound_delta1(c, &chain);
        prop_assert!(diag.is_none());
        prop_assert!(chain.eval(d) <= c);
        prop_assert!(chain.eval(d * (1.0 + 1e-12)) > c * (1.0 - 1e-9));
        prop_assert!((d - (c / chain.coefficient()).sqrt()).abs() <= 1e-12 * d);
    }

    #[test]
    fn certificate_delta_is_the_minimum(alpha in 1usize..5, m_a in 1.0f64..5.0, c in 0.1f64..0.9, split in 0.0f64..1.0) {
        let model = semistab_core::presets::reciprocal_model(30).unwrap();
        let mut profile = estimate_resolvent_profile(&model, &ProfileScan::default()).unwrap();
        profile.alpha = alpha as f64;
        profile.m_a = m_a;
        let beta = split * profile.alpha;
        let cert = compose_certificate(&profile, beta, profile.alpha - beta, c, &CertifyOptions::default()).unwrap();
        let mut cands = vec![cert.off_resonance];
        cands.extend(cert.delta1);
        cands.extend(cert.delta2);
        prop_assert_eq!(cert.delta, cands.iter().cloned().fold(f64::INFINITY, f64::min));
        prop_assert!(cert.chain.eval(cert.delta) <= c);
        prop_assert!(cert.m2 * cert.delta * cert.delta <= c * (1.0 + 1e-12));
    }

    #[test]
    fn poisson_kernel_integrates(a in 1e-3f64..50.0, shift in -20.0f64..20.0) {
        let r = integrate_real_line(&mut |e: f64| 1.0 / (a * a + (e - shift) * (e - shift)), 0.0, a, &[shift], &QuadOptions::default());
        prop_assert!(r.converged);
        let exact = std::f64::consts::PI / a;
        prop_assert!((r.value - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn pade_and_eigen_paths_agree((m, f, _, x, _) in arb_case(12, 2), t in 0.0f64..5.0) {
        let g = semistab_core::dense::dense_generator(&m, Some(&f));
        let Ok(ep) = EigenPropagator::new(&g) else { return Ok(()); };
        prop_assume!(ep.condition < 1e6);
        let e = matrix_exp(&(&g * c(t, 0.0)));
        let a: Vec<Complex64> = (&e * nalgebra::DVector::from_column_slice(&x)).iter().cloned().collect();
        let b = ep.propagate(t, &x);
        prop_assert!((m.norm(&a) - m.norm(&b)).abs() <= 1e-9 * (1.0 + m.norm(&a)));
    }

    #[test]
    fn budget_scaling_hits_the_requested_fraction(n in 10usize..60, p in 1.2f64..3.0, frac in 0.1f64..0.9) {
        let m = semistab_core::presets::reciprocal_model(n).unwrap();
        let cert = semistab_core::presets::reciprocal_certificate(&m, 0.8).unwrap();
        let f = semistab_core::presets::power_law_factors(n, p).unwrap();
        let s = semistab_core::certificate::scale_to_budget(&m, &f, &cert, frac).unwrap();
        let b = check_budget(&m, &s, &cert).unwrap();
        prop_assert!(b.pass);
        prop_assert!((b.largest() - frac * cert.delta).abs() < 1e-12);
    }
}
