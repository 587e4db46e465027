use std::f64::consts::PI;

use proptest::prelude::*;

use liouville_lab::bol::{bol_deficit, bubble_bol_deficit};
use liouville_lab::kernel::onsager_laplacian_log_kernel;
use liouville_lab::meanfield::{jalpha_eval, shoot, JalphaInput, JalphaOptions, ShootOptions};
use liouville_lab::radial_core::{bubble_mass, RadialFn};
use liouville_lab::rearrange::{rearrange_radial, RearrangeOptions};
use liouville_lab::sci::{cap_heights, make_pair, pair_total_mass, quadratic_mass_roots};
use liouville_lab::transforms::{
    inverse_stereo, kelvin, stereo_project, PlanePoint, SphereFn,
};
use liouville_lab::{
    KernelSpec, LiouvilleBubble, Quadrature, RadialField, RadialGrid, RadialProfile, EIGHT_PI,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bubble_mass_is_increasing_and_bounded(lambda in 0.05f64..20.0, r in 0.0f64..10.0, dr in 1e-3f64..1.0) {
        let b = LiouvilleBubble::new(lambda).unwrap();
        let (m0, m1) = (bubble_mass(&b, r), bubble_mass(&b, r + dr));
        prop_assert!(m0 >= 0.0 && m1 < EIGHT_PI);
        prop_assert!(m1 > m0);
    }

    #[test]
    fn radius_for_mass_inverts_mass(lambda in 0.1f64..10.0, frac in 0.01f64..0.99) {
        let b = LiouvilleBubble::new(lambda).unwrap();
        let m = frac * EIGHT_PI;
        let r = b.radius_for_mass(m).unwrap();
        prop_assert!((bubble_mass(&b, r) - m).abs() <= 1e-12 * EIGHT_PI);
    }

    #[test]
    fn bubbles_attain_bol_equality(lambda in 0.2f64..8.0, r in 0.05f64..5.0) {
        let b = LiouvilleBubble::new(lambda).unwrap();
        prop_assert!(bubble_bol_deficit(&b, r).abs() <= 1e-9);
        let q = bol_deficit(&b, r, &Quadrature::default()).unwrap();
        prop_assert!(q.abs() <= 1e-6);
    }

    #[test]
    fn pairs_split_the_sphere(lr in 0.2f64..6.0, radius in 0.2f64..3.0) {
        prop_assume!((lr - 8f64.sqrt()).abs() > 1e-3);
        let p = make_pair(lr / radius, radius).unwrap();
        prop_assert!(p.lambda1 < p.lambda2);
        prop_assert!((p.lambda1 * p.lambda2 * radius * radius - 8.0).abs() < 1e-12 * 8.0);
        prop_assert!((pair_total_mass(&p) - EIGHT_PI).abs() < 1e-12);
        let (z1, z2) = cap_heights(&p);
        prop_assert!((z1.abs() - z2).abs() < 1e-12);
        prop_assert!(p.kappa <= 2f64.sqrt() / radius * (1.0 + 1e-12));
        let (u1, u2) = p.bubbles();
        prop_assert!((u1.value(radius) - u2.value(radius)).abs() < 1e-12 * u1.value(radius).abs().max(1.0));
    }

    #[test]
    fn mass_roots_are_vieta_pairs(beta in 0.0f64..(8.0 * PI * PI)) {
        let (a, b) = quadratic_mass_roots(beta).unwrap();
        prop_assert!(a <= b);
        prop_assert!((a + b - EIGHT_PI).abs() < 1e-12);
        prop_assert!((a * b - 2.0 * beta).abs() < 1e-9 * beta.max(1.0));
    }

    #[test]
    fn kelvin_is_an_involution(y1 in -50.0f64..50.0, y2 in -50.0f64..50.0) {
        prop_assume!(y1.hypot(y2) > 1e-3);
        let y = PlanePoint { y1, y2 };
        let back = kelvin(&kelvin(&y).unwrap()).unwrap();
        prop_assert!((back.y1 - y1).abs() <= 1e-12 * y.norm().max(1.0));
        prop_assert!((back.y2 - y2).abs() <= 1e-12 * y.norm().max(1.0));
    }

    #[test]
    fn stereo_round_trip(y1 in -100.0f64..100.0, y2 in -100.0f64..100.0) {
        let y = PlanePoint { y1, y2 };
        let x = inverse_stereo(&y);
        prop_assert!((x.x1 * x.x1 + x.x2 * x.x2 + x.x3 * x.x3 - 1.0).abs() < 1e-12);
        let back = stereo_project(&x).unwrap();
        let tol = 1e-12 * (1.0 + y.norm() * y.norm());
        prop_assert!((back.y1 - y1).abs() <= tol && (back.y2 - y2).abs() <= tol);
    }

    #[test]
    fn onsager_sign_matches_factored_condition(ratio in 1.0f64..3.0, gamma in 0.0f64..3.0) {
        let alpha = 8.0 * PI * ratio;
        prop_assume!((gamma - (ratio - 1.0)).abs() > 1e-6);
        let compliant = gamma <= alpha / (8.0 * PI) - 1.0;
        let sampled: Vec<f64> = (0..400).map(|i| 0.025 * i as f64).collect();
        let nonneg = sampled
            .iter()
            .all(|&r| onsager_laplacian_log_kernel(alpha, gamma, r) >= -1e-15);
        prop_assert_eq!(compliant, nonneg);
    }

    #[test]
    fn compliant_kernels_have_nondecreasing_log_slope(l in 0.05f64..3.0) {
        for k in [KernelSpec::PolyOnePlusR2 { l }, KernelSpec::RingPower { l }] {
            let mut prev = k.log_slope(0.0);
            for i in 1..200 {
                let r = 0.05 * i as f64;
                let s = k.log_slope(r);
                prop_assert!(s >= prev - 1e-14);
                prop_assert!(k.laplacian_log_k(r) >= 0.0);
                prev = s;
            }
        }
    }

    #[test]
    fn jalpha_is_translation_invariant(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -5.0f64..5.0) {
        let opts = JalphaOptions::default();
        let g = SphereFn::new(move |x| a * x + b * x * x)
            .with_derivatives(move |x| a + 2.0 * b * x, move |_| 2.0 * b);
        let h = SphereFn::new(move |x| a * x + b * x * x + c)
            .with_derivatives(move |x| a + 2.0 * b * x, move |_| 2.0 * b);
        let j1 = jalpha_eval(&JalphaInput { alpha: 0.5, g: &g }, &opts).unwrap().value;
        let j2 = jalpha_eval(&JalphaInput { alpha: 0.5, g: &h }, &opts).unwrap().value;
        prop_assert!((j1 - j2).abs() < 1e-12);
    }

    #[test]
    fn rearrangement_preserves_distribution(
        a in 0.1f64..2.0, s in 0.2f64..3.0, c in 0.0f64..0.5, lambda in 0.5f64..3.0
    ) {
        let u = LiouvilleBubble::new(1.0).unwrap();
        let w = RadialFn::new(move |r| u.value(r) + c).with_derivative(move |r| u.derivative(r));
        let phi = RadialFn::new(move |r| a * (-s * r * r).exp())
            .with_derivative(move |r| -2.0 * a * s * r * (-s * r * r).exp());
        let grid = RadialGrid::uniform(1.0, 65).unwrap();
        let out = rearrange_radial(&phi, &w, &grid, lambda, &RearrangeOptions::default()).unwrap();
        prop_assert!(out.equimeasurability_residual <= 1e-8);
        prop_assert!(out.profile.is_strictly_decreasing() || out.profile.values().windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn profile_csv_round_trip(vals in proptest::collection::vec(-1e3f64..1e3, 16..40)) {
        let grid = RadialGrid::uniform(2.0, vals.len()).unwrap();
        let p = RadialProfile::new(grid, vals, None).unwrap();
        let back = RadialProfile::read_csv(p.to_csv_string().as_bytes()).unwrap();
        prop_assert_eq!(p, back);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shooting_is_scale_covariant(a0 in -3.0f64..3.0, s in -1.0f64..1.0) {
        let opts = ShootOptions::default();
        let base = shoot(&KernelSpec::UNIT, a0, &opts).unwrap();
        let scaled = shoot(&KernelSpec::UNIT, a0 + 2.0 * s, &opts).unwrap();
        prop_assert!((base.beta - scaled.beta).abs() < 1e-8);
        for r in [0.01, 0.1, 0.5, 2.0, 10.0] {
            let expect = base.profile().value(r * s.exp()) + 2.0 * s;
            prop_assert!((scaled.profile().value(r) - expect).abs() < 1e-7);
        }
    }

    #[test]
    fn pohozaev_holds_for_converged_solves(a0 in -6.0f64..6.0, l in 0.2f64..1.0) {
        for k in [KernelSpec::PolyOnePlusR2 { l }, KernelSpec::RingPower { l }] {
            let res = shoot(&k, a0, &ShootOptions::default()).unwrap();
            prop_assert!(res.beta > 0.0);
            if res.converged && res.pohozaev_applicable {
                prop_assert!(res.pohozaev_residual <= 1e-4 * PI * res.beta * res.beta);
                prop_assert!((res.tail_slope - res.beta).abs() <= 0.01 * res.beta,
                    "{:?} a0 {}: slope {} beta {}", k, a0, res.tail_slope, res.beta);
            }
        }
    }
}
