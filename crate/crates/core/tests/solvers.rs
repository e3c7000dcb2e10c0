use nonsmooth_core::inclusion::SurfaceLaw;
use nonsmooth_core::integrator::{
    integrate_naive_sign, integrate_with_law, locate_event, DenseOutput, EventLocation,
};
use nonsmooth_core::models::{self, ChuaParams, DrillingParams, WattParams};
use nonsmooth_core::*;

const WATT_X0: [f64; 3] = [-0.5, 1.0, 1.2];

fn watt() -> PiecewiseSystem {
    models::watt(&WattParams { a: 1.5, b: 1.1 }).unwrap()
}

fn chua() -> PiecewiseSystem {
    models::chua(&ChuaParams::hidden_attractor()).unwrap()
}

fn max_state_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    let mut x = vec![0.0; a.dim];
    a.samples
        .iter()
        .map(|s| {
            b.state_at(s.t, &mut x).unwrap();
            s.x.iter()
                .zip(&x)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Classical RK4 with a fixed step, used as an independent reference.
fn rk4<F: Fn(&[f64], &mut [f64])>(f: F, x0: &[f64], t1: f64, steps: usize) -> Vec<f64> {
    let n = x0.len();
    let h = t1 / steps as f64;
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    for _ in 0..steps {
        f(&x, &mut k1);
        (0..n).for_each(|i| tmp[i] = x[i] + 0.5 * h * k1[i]);
        f(&tmp, &mut k2);
        (0..n).for_each(|i| tmp[i] = x[i] + 0.5 * h * k2[i]);
        f(&tmp, &mut k3);
        (0..n).for_each(|i| tmp[i] = x[i] + h * k3[i]);
        f(&tmp, &mut k4);
        (0..n).for_each(|i| x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    x
}

#[test]
fn chua_positive_branch_matches_fixed_step_reference() {
    let sys = chua();
    let x0 = [1.0, 0.0, 0.0];
    let t1 = 0.1;
    let f = |x: &[f64], o: &mut [f64]| sys.f_plus(0.0, x, o);
    let coarse = rk4(f, &x0, t1, 2000);
    let fine = rk4(f, &x0, t1, 4000);
    let ref_gap: f64 = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(ref_gap < 1e-10, "reference not converged: {ref_gap}");
    let sol = integrate_smooth(
        &|t: f64, x: &[f64], o: &mut [f64]| sys.f_plus(t, x, o),
        &x0,
        0.0,
        t1,
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(sol.trajectory.samples.iter().all(|s| s.x[0] > 0.0));
    let gap: f64 = sol
        .trajectory
        .final_state()
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn watt_first_crossing_matches_dense_scan() {
    let sys = watt();
    let cfg = SolverConfig::default().with_tolerances(1e-11, 1e-13);
    let sol = integrate_smooth(
        &|t: f64, x: &[f64], o: &mut [f64]| sys.f_minus(t, x, o),
        &WATT_X0,
        0.0,
        1.0,
        &cfg,
    )
    .unwrap();
    let n = 1_000_000;
    let mut x = [0.0; 3];
    let mut prev = WATT_X0[0];
    let mut scan_t = None;
    for k in 1..=n {
        let t = k as f64 / n as f64;
        sol.eval(t, &mut x).unwrap();
        if prev < 0.0 && x[0] >= 0.0 {
            scan_t = Some(t);
            break;
        }
        prev = x[0];
    }
    let scan_t = scan_t.expect("no crossing in [0, 1]");
    let tr = integrate_filippov(&sys, &WATT_X0, 0.0, 1.0, &SolverConfig::default()).unwrap();
    let ev = &tr.events[0];
    assert_eq!(ev.kind, EventKind::Crossing);
    assert!((ev.t - scan_t).abs() <= 1e-6, "{} vs {scan_t}", ev.t);
}

#[test]
fn locate_event_on_a_real_segment() {
    let sys = watt();
    let sol = integrate_smooth(
        &|t: f64, x: &[f64], o: &mut [f64]| sys.f_minus(t, x, o),
        &WATT_X0,
        0.0,
        1.0,
        &SolverConfig::default(),
    )
    .unwrap();
    let seg = sol
        .segments
        .iter()
        .find(|s| {
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            s.eval(s.t_start(), &mut a);
            s.eval(s.t_end(), &mut b);
            a[0] < 0.0 && b[0] >= 0.0
        })
        .unwrap();
    let loc = locate_event(seg, sys.surface(), 1e-12).unwrap();
    let mut x = [0.0; 3];
    seg.eval(loc.time(), &mut x);
    assert!(matches!(loc, EventLocation::Crossing { .. }));
    assert!(x[0].abs() <= sys.surface().on_tol());
}

#[test]
fn watt_filippov_reaches_sliding() {
    let tr = integrate_filippov(&watt(), &WATT_X0, 0.0, 50.0, &SolverConfig::default()).unwrap();
    assert!(tr.count_events(EventKind::SlidingEntry) >= 1);
    assert!(tr.final_state()[0].abs() <= 1e-6);
    assert_eq!(tr.samples.last().unwrap().mode, Mode::Sliding);
}

#[test]
fn trajectory_invariants_hold_on_watt_and_chua() {
    let cfg = SolverConfig::default();
    for (sys, x0, t1) in [
        (watt(), WATT_X0.to_vec(), 50.0),
        (chua(), vec![5.8723, 0.372, -8.4853], 30.0),
    ] {
        let tr = integrate_filippov(&sys, &x0, 0.0, t1, &cfg).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert!(tr.samples.iter().all(|s| s.x.iter().all(|v| v.is_finite())));
        for e in &tr.events {
            assert!(
                sys.sigma(e.t, &e.x).abs() <= sys.surface().on_tol(),
                "{e:?}"
            );
        }
        for s in tr.samples.iter().filter(|s| s.mode == Mode::Sliding) {
            assert!(sys.sigma(s.t, &s.x).abs() <= cfg.sliding_proj_tol);
            let sl = filippov_sliding_field(&sys, s.t, &s.x).unwrap();
            assert!((0.0..=1.0).contains(&sl.alpha));
        }
        // modes only change at events
        for w in tr.samples.windows(2) {
            if w[0].mode != w[1].mode {
                assert!(
                    tr.events.iter().any(|e| e.t == w[1].t),
                    "mode change at {}",
                    w[1].t
                );
            }
        }
        // side after a crossing
        for e in tr.events.iter().filter(|e| e.kind == EventKind::Crossing) {
            let after = tr
                .samples
                .iter()
                .find(|s| s.t > e.t + cfg.min_event_gap)
                .unwrap();
            let expect = if sys.sigma(after.t, &after.x) > 0.0 {
                Mode::FlightPlus
            } else {
                Mode::FlightMinus
            };
            let mode = tr.samples.iter().rev().find(|s| s.t <= e.t).unwrap().mode;
            assert_eq!(mode, expect);
        }
    }
}

#[test]
fn double_integrator_start_on_surface_stays_put() {
    let sys = models::double_integrator_control();
    let x0 = [0.5 * 1.7 * 1.7, 1.7];
    let tr = integrate_filippov(&sys, &x0, 0.0, 5.0, &SolverConfig::default()).unwrap();
    assert_eq!(tr.samples[0].mode, Mode::Sliding);
    for s in &tr.samples {
        assert_eq!(s.x, x0.to_vec());
    }
}

#[test]
fn surface_free_run_matches_smooth_integration() {
    // drilling after a load jump stays in s < c
    let p = DrillingParams {
        a: 10.0,
        c: 5.0,
        gamma: 2.0,
        m_lock: 10.0,
    };
    let sys = models::drilling_reduced(&p).unwrap();
    let x0 = analysis::drilling_equilibrium(10.0, 5.0, 1.0)
        .unwrap()
        .state();
    let cfg = SolverConfig::default();
    let fil = integrate_filippov(&sys, &x0, 0.0, 20.0, &cfg).unwrap();
    assert!(fil.events.is_empty());
    let smooth = integrate_smooth(
        &|t: f64, x: &[f64], o: &mut [f64]| sys.f_plus(t, x, o),
        &x0,
        0.0,
        20.0,
        &cfg,
    )
    .unwrap();
    let tol = 10.0 * (cfg.abs_tol + cfg.rel_tol * 2.0);
    assert!(max_state_gap(&fil, &smooth.trajectory) <= tol);
}

#[test]
fn ap_run_equals_direct_regularized_integration() {
    let sys = chua();
    let x0 = [5.8723, 0.372, -8.4853];
    let cfg = SolverConfig::default();
    let sched = EpsilonSchedule::new(vec![1e-2, 1e-3]).unwrap();
    let rep = integrate_ap(&sys, &x0, 0.0, 5.0, &sched, &cfg, &ApOptions::default()).unwrap();
    for run in &rep.runs {
        let f = regularized_system(&sys, run.eps).unwrap();
        let direct = integrate_smooth(&*f, &x0, 0.0, 5.0, &cfg).unwrap();
        let scale = direct
            .trajectory
            .samples
            .iter()
            .map(|s| s.x.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max);
        let tol = 10.0 * (cfg.abs_tol + cfg.rel_tol * scale);
        assert!(max_state_gap(&run.trajectory, &direct.trajectory) <= tol);
    }
}

#[test]
fn ap_without_contact_matches_filippov() {
    let p = DrillingParams {
        a: 10.0,
        c: 5.0,
        gamma: 2.0,
        m_lock: 10.0,
    };
    let sys = models::drilling_reduced(&p).unwrap();
    let x0 = analysis::drilling_equilibrium(10.0, 5.0, 1.0)
        .unwrap()
        .state();
    let cfg = SolverConfig::default();
    let fil = integrate_filippov(&sys, &x0, 0.0, 10.0, &cfg).unwrap();
    let sched = EpsilonSchedule::new(vec![1e-1, 1e-2, 1e-3]).unwrap();
    let rep = integrate_ap(&sys, &x0, 0.0, 10.0, &sched, &cfg, &ApOptions::default()).unwrap();
    for run in &rep.runs {
        assert!(max_state_gap(&run.trajectory, &fil) <= 1e-8);
    }
    assert!(rep.distances.iter().all(|d| *d <= 1e-8));
}

#[test]
fn watt_ap_approaches_filippov_linearly_in_eps() {
    // The regularized run trails the Filippov run by an O(eps) offset.
    let sys = watt();
    let cfg = SolverConfig::default();
    let fil = integrate_filippov(&sys, &WATT_X0, 0.0, 50.0, &cfg).unwrap();
    let gap = |eps: f64| {
        let f = regularized_system(&sys, eps).unwrap();
        let ap = integrate_smooth(&*f, &WATT_X0, 0.0, 50.0, &cfg)
            .unwrap()
            .trajectory;
        fil.final_state()
            .iter()
            .zip(ap.final_state())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let (g3, g4) = (gap(1e-3), gap(1e-4));
    assert!(g4 < 1e-2, "{g4}");
    let ratio = g3 / g4;
    assert!((8.0..12.5).contains(&ratio), "{g3} {g4}");
}

#[test]
fn distance_grid_refinement() {
    let sys = watt();
    let cfg = SolverConfig::default();
    let fil = integrate_filippov(&sys, &WATT_X0, 0.0, 50.0, &cfg).unwrap();
    let f = regularized_system(&sys, 1e-3).unwrap();
    let ap = integrate_smooth(&*f, &WATT_X0, 0.0, 50.0, &cfg)
        .unwrap()
        .trajectory;
    let coarse = trajectory_distance(&fil, &ap, 1e-2).unwrap();
    let dense = trajectory_distance(&fil, &ap, 1e-4).unwrap();
    assert!((coarse - dense).abs() <= 0.05 * dense, "{coarse} {dense}");
}

#[test]
fn halving_tolerances_moves_terminal_state_little() {
    let sys = chua();
    let x0 = [5.8723, 0.372, -8.4853];
    let coarse = SolverConfig::default().with_tolerances(1e-8, 1e-10);
    let fine = SolverConfig::default().with_tolerances(0.5e-8, 0.5e-10);
    let a = integrate_filippov(&sys, &x0, 0.0, 2.0, &coarse).unwrap();
    let b = integrate_filippov(&sys, &x0, 0.0, 2.0, &fine).unwrap();
    let scale = a.final_state().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let gap = a
        .final_state()
        .iter()
        .zip(b.final_state())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    assert!(
        gap < 10.0 * (coarse.rel_tol * scale + coarse.abs_tol),
        "{gap}"
    );
}

#[test]
fn deterministic_runs() {
    let a = integrate_filippov(&watt(), &WATT_X0, 0.0, 20.0, &SolverConfig::default()).unwrap();
    let b = integrate_filippov(&watt(), &WATT_X0, 0.0, 20.0, &SolverConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn drilling_sliding_leaves_through_lower_boundary() {
    let p = DrillingParams {
        a: 10.0,
        c: 5.0,
        gamma: 2.0,
        m_lock: 10.0,
    };
    let sys = models::drilling_reduced(&p).unwrap();
    let (lo, hi) = p.sliding_region();
    let tr = integrate_filippov(&sys, &[5.0, hi, 0.0], 0.0, 5.0, &SolverConfig::default()).unwrap();
    assert_eq!(tr.samples[0].mode, Mode::Sliding);
    let exit = tr
        .events
        .iter()
        .find(|e| e.kind == EventKind::SlidingExit)
        .unwrap();
    assert!((exit.x[1] - lo).abs() < 1e-6, "{:?}", exit.x);
    let after = tr.samples.iter().find(|s| s.t > exit.t).unwrap();
    assert_eq!(after.mode, Mode::FlightPlus);
    let mut v = [0.0; 3];
    sys.f_plus(after.t, &after.x, &mut v);
    assert!(v[0] < 0.0);
}

#[test]
fn gly_and_filippov_agree_when_sets_coincide() {
    let cfg = SolverConfig::default();
    let a = integrate_filippov(&watt(), &WATT_X0, 0.0, 20.0, &cfg).unwrap();
    let b = integrate_with_law(&watt(), SurfaceLaw::Gly, &WATT_X0, 0.0, 20.0, &cfg).unwrap();
    assert!(trajectory_distance(&a, &b, 1e-2).unwrap() < 1e-9);
}

#[test]
fn naive_sign_solver_chatters() {
    let tr = integrate_naive_sign(&watt(), &WATT_X0, 0.0, 50.0, 0.05).unwrap();
    let amp = tr
        .samples
        .iter()
        .filter(|s| s.t >= 45.0)
        .map(|s| s.x[0].abs())
        .fold(0.0, f64::max);
    assert!(amp >= 1e-2, "{amp}");
}

#[test]
fn step_underflow_carries_partial_trajectory() {
    // x' = x^2 blows up at t = 1
    let err = integrate_smooth(
        &|_, x: &[f64], o: &mut [f64]| o[0] = x[0] * x[0],
        &[1.0],
        0.0,
        2.0,
        &SolverConfig::default(),
    )
    .unwrap_err();
    let partial = err.partial_trajectory().expect("partial trajectory");
    assert!(partial.t_end() > 0.9 && partial.t_end() < 1.0 + 1e-6);
    assert!(matches!(err, Error::StepUnderflow { .. }));
}
