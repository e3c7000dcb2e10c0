use nonsmooth_core::analysis::*;
use nonsmooth_core::models::*;
use nonsmooth_core::*;

fn motor() -> DrillingMotorParams {
    // a = 10, c = 5, gamma = 1
    DrillingMotorParams {
        l: 0.5,
        r: 2.5,
        s: 0.5,
        b: 2.0,
        i_inertia: 1.0,
        beta: 5.0,
        t0: 1.0,
        m_lock: 10.0,
    }
}

#[test]
fn motor_and_reduced_runs_are_conjugate() {
    let p = motor();
    let rp = p.reduced();
    assert!((rp.a - 10.0).abs() < 1e-12 && (rp.c - 5.0).abs() < 1e-12 && rp.gamma == 1.0);
    let red = drilling_reduced(&rp).unwrap();
    let mot = drilling_motor(&p).unwrap();
    let cfg = SolverConfig::default().with_max_step(1e-3);
    for r0 in [[0.0, 0.0, 0.0], [6.0, 0.2, -0.3], [5.0, 0.3, 0.0]] {
        let m0 = reduced_to_motor(&r0, 0.3, &p);
        let tm = integrate_filippov(&mot, &m0, 0.0, 10.0, &cfg).unwrap();
        let tr = integrate_filippov(&red, &r0, 0.0, 10.0, &cfg).unwrap();
        assert_eq!(tm.events.len(), tr.events.len());
        let mut x = [0.0; 3];
        for s in &tm.samples {
            let img = motor_to_reduced(&[s.x[0], s.x[1], s.x[2], s.x[3]], &p);
            tr.state_at(s.t, &mut x).unwrap();
            let gap = img
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(gap <= 1e-5, "{r0:?} at {}: {gap}", s.t);
        }
    }
}

#[test]
fn zero_load_drilling_is_smooth() {
    let p = DrillingParams {
        a: 10.0,
        c: 5.0,
        gamma: 0.0,
        m_lock: 10.0,
    };
    let sys = drilling_reduced(&p).unwrap();
    let cfg = SolverConfig::default();
    let x0 = [6.5, 0.4, -0.2];
    let fil = integrate_filippov(&sys, &x0, 0.0, 10.0, &cfg).unwrap();
    let smooth = integrate_smooth(
        &|t: f64, x: &[f64], o: &mut [f64]| sys.f_plus(t, x, o),
        &x0,
        0.0,
        10.0,
        &cfg,
    )
    .unwrap();
    let d: f64 = fil
        .final_state()
        .iter()
        .zip(smooth.trajectory.final_state())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(d < 1e-7, "{d}");
}

#[test]
fn watt_trajectories_are_odd_symmetric() {
    let sys = watt(&WattParams { a: 1.5, b: 1.1 }).unwrap();
    let cfg = SolverConfig::default();
    let a = integrate_filippov(&sys, &[-0.5, 1.0, 1.2], 0.0, 20.0, &cfg).unwrap();
    let b = integrate_filippov(&sys, &[0.5, -1.0, -1.2], 0.0, 20.0, &cfg).unwrap();
    assert_eq!(a.events.len(), b.events.len());
    let (mut xa, mut xb) = ([0.0; 3], [0.0; 3]);
    for i in 0..=200 {
        let t = 0.1 * i as f64;
        a.state_at(t, &mut xa).unwrap();
        b.state_at(t, &mut xb).unwrap();
        assert!(
            xa.iter().zip(&xb).all(|(p, q)| (p + q).abs() < 1e-6),
            "t={t}"
        );
    }
}

#[test]
fn chua_off_surface_equilibria() {
    let p = ChuaParams::hidden_attractor();
    let sys = chua(&p).unwrap();
    // rows two and three fix x2 = k x1, x3 = -beta x1 / (gamma_c + beta)
    let k = p.gamma_c / (p.gamma_c + p.beta);
    let x1 = (p.m0 - p.m1) / (k - p.m1 - 1.0);
    assert!(x1 > 0.0);
    let eq = [x1, k * x1, -p.beta * x1 / (p.gamma_c + p.beta)];
    assert!(equilibrium_residual(&sys, 0.0, &eq).unwrap() < 1e-12);
    let neg: Vec<f64> = eq.iter().map(|v| -v).collect();
    assert!(equilibrium_residual(&sys, 0.0, &neg).unwrap() < 1e-12);
    assert_eq!(equilibrium_residual(&sys, 0.0, &[0.0; 3]).unwrap(), 0.0);
}

#[test]
fn static_friction_holds_where_symmetric_law_releases() {
    let a = [0.0, 1.0, -1.0, 0.0];
    let b = [0.0, -1.0];
    let c = [0.0, 1.0];
    let cfg = SolverConfig::default();
    let x0 = [1.5, 0.0];
    let stat = friction_linear(&a, &b, &c, FrictionLaw::StaticExceeds { alpha_s: 2.0 }).unwrap();
    let sym = friction_linear(&a, &b, &c, FrictionLaw::Symmetric).unwrap();
    let stuck = integrate_gly(&stat, &x0, 0.0, 20.0, &cfg).unwrap();
    assert!(stuck
        .samples
        .iter()
        .all(|s| s.mode == Mode::Sliding && s.x == x0.to_vec()));
    let free = integrate_gly(&sym, &x0, 0.0, 20.0, &cfg).unwrap();
    assert_ne!(free.samples[0].mode, Mode::Sliding);
    assert!((free.final_state()[0] - 0.5).abs() < 1e-6);
    // Filippov cannot see the static interval
    let fil = integrate_filippov(&stat, &x0, 0.0, 20.0, &cfg).unwrap();
    assert_eq!(fil, free);
    // inside the static band of both laws nothing moves
    let rest = integrate_gly(&sym, &[0.7, 0.0], 0.0, 5.0, &cfg).unwrap();
    assert!(rest.samples.iter().all(|s| s.x == vec![0.7, 0.0]));
}

fn theorem_run() -> (LyapunovFrame, Trajectory) {
    let (a, c) = (10.0, 5.0);
    let sc = LoadChangeScenario::new(1.0, 2.0, 0.0).unwrap();
    let sys = drilling_reduced(&DrillingParams {
        a,
        c,
        gamma: 2.0,
        m_lock: 10.0,
    })
    .unwrap();
    let x0 = post_jump_state(a, c, &sc).unwrap();
    let tr = integrate_filippov(&sys, &x0, 0.0, 40.0, &SolverConfig::default()).unwrap();
    (LyapunovFrame::new(a, c, 2.0).unwrap(), tr)
}

#[test]
fn v_is_nonincreasing_and_vdot_matches_finite_differences() {
    let (frame, tr) = theorem_run();
    for w in tr.samples.windows(2) {
        assert!(w[0].x[0] < 5.0 && w[1].x[0] < 5.0);
        assert!(frame.v_state(&w[1].x) - frame.v_state(&w[0].x) <= 1e-6);
    }
    // central differences of V through the dense reference at a few times
    let sys = drilling_reduced(&DrillingParams {
        a: 10.0,
        c: 5.0,
        gamma: 2.0,
        m_lock: 10.0,
    })
    .unwrap();
    let x0 = tr.samples[0].x.clone();
    let cfg = SolverConfig::default().with_tolerances(1e-12, 1e-14);
    let sol = integrate_smooth(
        &|t: f64, x: &[f64], o: &mut [f64]| sys.f_plus(t, x, o),
        &x0,
        0.0,
        2.0,
        &cfg,
    )
    .unwrap();
    let h = 1e-4;
    let mut xa = [0.0; 3];
    let mut xb = [0.0; 3];
    let mut xm = [0.0; 3];
    for t in [0.05, 0.2, 0.5, 1.0] {
        sol.eval(t - h, &mut xa).unwrap();
        sol.eval(t + h, &mut xb).unwrap();
        sol.eval(t, &mut xm).unwrap();
        let fd = (frame.v_state(&xb) - frame.v_state(&xa)) / (2.0 * h);
        let (_, eta, z) = frame.coordinates(&xm);
        let exact = frame.vdot(eta, z);
        assert!(
            (fd - exact).abs() <= 1e-4 * exact.abs(),
            "t={t}: {fd} vs {exact}"
        );
    }
}

#[test]
fn post_jump_point_is_in_omega() {
    let (a, c, m) = (10.0, 5.0, 10.0);
    let sc = LoadChangeScenario::new(1.0, 2.0, 0.0).unwrap();
    assert!(theorem_conditions(a, c, m, &sc).all());
    let frame = LyapunovFrame::new(a, c, 2.0).unwrap();
    let s0 = drilling_equilibrium(a, c, 1.0).unwrap().s0;
    let (eta, z) = (2.0 - 1.0, (1.0 - 2.0) * s0 / (a * c));
    let (s, e2, z2) = frame.coordinates(&post_jump_state(a, c, &sc).unwrap());
    assert!((s - s0).abs() < 1e-15 && (e2 - eta).abs() < 1e-15 && (z2 - z).abs() < 1e-15);
    assert!(omega_membership(s0, eta, z, &frame, m).unwrap());
}

#[test]
fn corollary_conditions_match_gamma0_zero() {
    let sc = LoadChangeScenario::new(0.0, 2.0, 0.0).unwrap();
    let r = theorem_conditions(10.0, 5.0, 10.0, &sc);
    assert!(r.cond_gamma0);
    assert_eq!(r.cond_gamma1, 2.0 < (5.0_f64).min(50.0));
}

#[test]
fn sweep_labels_and_certified_subset() {
    let cfg = SolverConfig::default();
    let (a, c, m) = (10.0, 0.5, 10.0);
    let grid = [0.2, 0.4, 1.0, 2.0, 4.9];
    let map = safe_load_sweep(a, c, m, 0.0, &grid, default_sweep_horizon(c), &cfg).unwrap();
    assert_eq!(map.cells.len(), grid.len());
    for cell in &map.cells {
        if cell.label == RegionLabel::TheoremSafe {
            assert!(cell.simulated_converged, "{cell:?}");
        }
        assert!(cell.terminal_distance.is_finite());
    }
    assert_eq!(map.cells[0].label, RegionLabel::TheoremSafe);
    // beyond 2 c^2 the theorem is silent and the run decides
    assert!(map.cells[2..]
        .iter()
        .all(|c| c.label == RegionLabel::NumericSafe));
    // residual check near a/2
    let eq = drilling_equilibrium(a, c, 4.9).unwrap();
    let sys = drilling_reduced(&DrillingParams {
        a,
        c,
        gamma: 4.9,
        m_lock: m,
    })
    .unwrap();
    assert!(equilibrium_residual(&sys, 0.0, &eq.state()).unwrap() <= 1e-10);
}
