use nonsmooth_core::analysis::drilling_equilibrium;
use nonsmooth_core::models::*;
use nonsmooth_core::*;
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-5.0..5.0f64)
}

fn normal() -> impl Strategy<Value = [f64; 3]> {
    vec3().prop_filter("nonzero normal", |n| {
        n.iter().map(|v| v * v).sum::<f64>() > 0.1
    })
}

fn planar(n: [f64; 3], k: f64) -> SwitchingSurface {
    SwitchingSurface::new(
        move |_, x| k * (n[0] * x[0] + n[1] * x[1] + n[2] * x[2]),
        move |_, _, g| {
            for i in 0..3 {
                g[i] = k * n[i];
            }
        },
    )
}

fn constant(n: [f64; 3], k: f64, fp: [f64; 3], fm: [f64; 3]) -> PiecewiseSystem {
    PiecewiseSystem::new(
        3,
        planar(n, k),
        move |_, _, o| o.copy_from_slice(&fp),
        move |_, _, o| o.copy_from_slice(&fm),
    )
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sliding_field_is_tangent_with_alpha_in_unit_interval(
        n in normal(), fp in vec3(), fm in vec3()
    ) {
        let sys = constant(n, 1.0, fp, fm);
        let x = [0.0; 3];
        let cls = classify_surface_point(&sys, 0.0, &x).unwrap();
        if cls.kind == ClassificationKind::AttractingSliding && !cls.boundary {
            let sf = filippov_sliding_field(&sys, 0.0, &x).unwrap();
            prop_assert!((0.0..=1.0).contains(&sf.alpha));
            let scale = 1.0 + fp.iter().chain(&fm).map(|v| v.abs()).fold(0.0, f64::max);
            prop_assert!(dot(&n, &sf.f0).abs() <= 1e-12 * scale * 5.0);
        }
    }

    #[test]
    fn mirroring_swaps_crossing_direction(n in normal(), fp in vec3(), fm in vec3()) {
        let sys = constant(n, 1.0, fp, fm);
        let mir = sys.mirrored();
        let x = [0.0; 3];
        let a = classify_surface_point(&sys, 0.0, &x).unwrap();
        let b = classify_surface_point(&mir, 0.0, &x).unwrap();
        let expect = match a.kind {
            ClassificationKind::CrossToPlus => ClassificationKind::CrossToMinus,
            ClassificationKind::CrossToMinus => ClassificationKind::CrossToPlus,
            k => k,
        };
        prop_assert_eq!(b.kind, expect);
        if a.kind == ClassificationKind::AttractingSliding {
            let sa = filippov_sliding_field(&sys, 0.0, &x).unwrap();
            let sb = filippov_sliding_field(&mir, 0.0, &x).unwrap();
            for (u, v) in sa.f0.iter().zip(&sb.f0) {
                prop_assert!((u - v).abs() <= 1e-9 * (1.0 + u.abs()));
            }
        }
    }

    #[test]
    fn positive_rescaling_of_sigma_changes_nothing(
        n in normal(), fp in vec3(), fm in vec3(), k in 0.01..100.0f64
    ) {
        let a = constant(n, 1.0, fp, fm);
        let b = constant(n, k, fp, fm);
        let x = [0.0; 3];
        let ca = classify_surface_point(&a, 0.0, &x).unwrap();
        let cb = classify_surface_point(&b, 0.0, &x).unwrap();
        // only compare away from the tie band, whose width scales with |n|
        prop_assume!(!ca.boundary && !cb.boundary);
        prop_assert_eq!(ca.kind, cb.kind);
        if ca.kind == ClassificationKind::AttractingSliding {
            let sa = filippov_sliding_field(&a, 0.0, &x).unwrap();
            let sb = filippov_sliding_field(&b, 0.0, &x).unwrap();
            prop_assert!((sa.alpha - sb.alpha).abs() <= 1e-12);
        }
    }

    #[test]
    fn motor_coordinates_round_trip(
        s in -10.0..10.0f64, y in -3.0..3.0f64, z in -3.0..3.0f64, theta in -20.0..20.0f64
    ) {
        let p = DrillingMotorParams {
            l: 0.5, r: 2.5, s: 0.5, b: 2.0, i_inertia: 1.0, beta: 5.0, t0: 1.0, m_lock: 10.0,
        };
        let m = reduced_to_motor(&[s, y, z], theta, &p);
        prop_assert!((m[2] - theta).abs() <= 1e-12 * (1.0 + theta.abs()));
        let r = motor_to_reduced(&m, &p);
        prop_assert!((r[0] - s).abs() <= 1e-12 * (1.0 + s.abs()));
        prop_assert!((r[1] - y).abs() <= 1e-12);
        prop_assert!((r[2] - z).abs() <= 1e-12);
    }

    #[test]
    fn stable_root_satisfies_load_identity(
        a in 0.1..50.0f64, c in 0.1..20.0f64, frac in 0.0..0.999f64
    ) {
        let gamma = frac * a / 2.0;
        let eq = drilling_equilibrium(a, c, gamma).unwrap();
        prop_assert!(eq.s0 >= 0.0 && eq.s0 < c);
        let lhs = a * c * eq.s0 / (c * c + eq.s0 * eq.s0);
        prop_assert!((lhs - gamma).abs() <= 1e-10 * (1.0 + gamma));
    }

    #[test]
    fn sat_is_bounded_odd_and_linear_inside(x in -1e3..1e3f64, eps in 1e-6..10.0f64) {
        let v = sat(x, eps);
        prop_assert!((-1.0..=1.0).contains(&v));
        prop_assert_eq!(sat(-x, eps), -v);
        if x.abs() <= eps {
            prop_assert!((v - x / eps).abs() <= 1e-12);
        } else {
            prop_assert_eq!(v, x.signum());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn watt_events_lie_on_the_surface(x0 in vec3()) {
        let sys = watt(&WattParams { a: 1.5, b: 1.1 }).unwrap();
        let tol = sys.surface().on_tol();
        let tr = integrate_filippov(&sys, &x0, 0.0, 10.0, &SolverConfig::default()).unwrap();
        for e in &tr.events {
            prop_assert!(sys.sigma(e.t, &e.x).abs() <= tol, "{:?}", e);
        }
        for w in tr.samples.windows(2) {
            prop_assert!(w[1].t > w[0].t);
        }
    }
}
