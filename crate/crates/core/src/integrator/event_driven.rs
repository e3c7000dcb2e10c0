//! Event-driven integration of a piecewise-smooth system.
//!
//! Free flight integrates the active branch until the trajectory reaches the
//! surface. At a contact the surface set decides between crossing, sliding
//! and grazing. Sliding integrates the tangent selection of the surface set
//! in the ambient space and projects back onto the surface after every step;
//! it ends when the selection leaves the set, and flight resumes on the side
//! the set then points to.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use super::dopri::{DenseOutput, DenseSegment, Stepper};
use super::events::{refine_root, scan, Scan};
use super::{EventKind, Mode, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::inclusion::{
    decide, sliding_velocity, PiecewiseSystem, Side, SurfaceDecision, SurfaceLaw,
};
use crate::linalg::dot;

/// Filippov solution: sliding in the convex hull of the limit fields.
pub fn integrate_filippov(
    sys: &PiecewiseSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    integrate_with_law(sys, SurfaceLaw::Filippov, x0, t0, t1, cfg)
}

/// GLY solution: sliding in the system's own surface set.
pub fn integrate_gly(
    sys: &PiecewiseSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    integrate_with_law(sys, SurfaceLaw::Gly, x0, t0, t1, cfg)
}

pub fn integrate_with_law(
    sys: &PiecewiseSystem,
    law: SurfaceLaw,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    sys.check_state(x0)?;
    if !sys.in_domain(x0) {
        return Err(Error::OutOfDomain);
    }
    if !(t1 >= t0) {
        return Err(Error::Domain("t1 must not precede t0"));
    }
    let mut engine = Engine::new(sys, law, cfg, t0, x0)?;
    engine.run(t1)?;
    Ok(engine.traj)
}

fn reached(t: f64, t1: f64) -> bool {
    t1 - t <= 4.0 * f64::EPSILON * t.abs().max(1.0)
}

fn flight(side: Side) -> Mode {
    if side == Side::Minus {
        Mode::FlightMinus
    } else {
        Mode::FlightPlus
    }
}

struct Engine<'a> {
    sys: &'a PiecewiseSystem,
    law: SurfaceLaw,
    cfg: &'a SolverConfig,
    traj: Trajectory,
    t: f64,
    x: Vec<f64>,
    mode: Mode,
    quiet_until: f64,
    stepper: Stepper,
    scratch: RefCell<Vec<f64>>,
}

impl<'a> Engine<'a> {
    fn new(
        sys: &'a PiecewiseSystem,
        law: SurfaceLaw,
        cfg: &'a SolverConfig,
        t0: f64,
        x0: &[f64],
    ) -> Result<Self> {
        let n = sys.dim();
        let mut engine = Engine {
            sys,
            law,
            cfg,
            traj: Trajectory::new(n),
            t: t0,
            x: x0.to_vec(),
            mode: Mode::FlightPlus,
            quiet_until: f64::NEG_INFINITY,
            stepper: Stepper::new(n, cfg),
            scratch: RefCell::new(vec![0.0; n]),
        };
        let sigma = sys.sigma(t0, x0);
        if !sigma.is_finite() {
            return Err(Error::NonFinite {
                what: "sigma",
                t: t0,
            });
        }
        engine.mode = if sigma.abs() <= sys.surface().on_tol() {
            sys.surface()
                .project(t0, &mut engine.x, 1e-3 * sys.surface().on_tol())?;
            match decide(sys, law, t0, &engine.x)? {
                SurfaceDecision::Slide => Mode::Sliding,
                SurfaceDecision::Leave(side) => flight(side),
                SurfaceDecision::Repelling => Mode::FlightPlus,
            }
        } else if sigma > 0.0 {
            Mode::FlightPlus
        } else {
            Mode::FlightMinus
        };
        let x = engine.x.clone();
        engine.traj.push(t0, &x, engine.mode);
        Ok(engine)
    }

    fn fail(&mut self, err: Error) -> Error {
        match err {
            Error::StepUnderflow { t, x, .. } => Error::StepUnderflow {
                t,
                x,
                partial: Box::new(core::mem::take(&mut self.traj)),
            },
            other => other,
        }
    }

    fn run(&mut self, t1: f64) -> Result<()> {
        while !reached(self.t, t1) {
            let res = match self.mode {
                Mode::Sliding => self.sliding_step(t1),
                m => self.flight_step(m, t1),
            };
            if let Err(e) = res {
                return Err(self.fail(e));
            }
        }
        if self.t != t1 {
            if let Some(last) = self.traj.samples.last_mut() {
                last.t = t1;
            }
        }
        Ok(())
    }

    fn record_event(&mut self, kind: EventKind) -> Result<()> {
        self.traj.push_event(self.t, kind, &self.x);
        self.traj.push(self.t, &self.x, self.mode);
        self.quiet_until = self.t + self.cfg.min_event_gap;
        if self.traj.events.len() > self.cfg.max_events {
            return Err(Error::Chattering {
                limit: self.cfg.max_events,
                t: self.t,
                partial: Box::new(core::mem::take(&mut self.traj)),
            });
        }
        Ok(())
    }

    fn sigma_on(&self, seg: &DenseSegment, t: f64) -> f64 {
        let mut x = self.scratch.borrow_mut();
        seg.eval(t, &mut x);
        self.sys.sigma(t, &x)
    }

    fn flight_step(&mut self, mode: Mode, t1: f64) -> Result<()> {
        let side = if mode == Mode::FlightMinus {
            Side::Minus
        } else {
            Side::Plus
        };
        let sys = self.sys;
        let field = |t: f64, x: &[f64], out: &mut [f64]| sys.branch(side, t, x, out);
        let t_prev = self.t;
        let acc = self.stepper.advance(&field, t_prev, &mut self.x, t1)?;
        let seg = acc.segment;
        let on_tol = sys.surface().on_tol();
        let s = side.sign();
        let f = |t: f64| s * self.sigma_on(&seg, t);
        let t_from = t_prev.max(self.quiet_until);
        let hit = match scan(&f, t_from, acc.t, on_tol) {
            Scan::None => None,
            Scan::Hit { t } => Some(t),
            Scan::Crossing { a, b } => {
                let (a, b) = refine_root(&f, a, b, self.cfg.event_tol, on_tol);
                Some(if f(a).abs() <= f(b).abs() { a } else { b })
            }
        };
        match hit {
            None => {
                self.t = acc.t;
                let x = core::mem::take(&mut self.x);
                self.traj.push(self.t, &x, self.mode);
                self.x = x;
                Ok(())
            }
            Some(t_e) => {
                seg.eval(t_e, &mut self.x);
                self.t = t_e;
                self.surface_contact(side)
            }
        }
    }

    /// Handles a contact at `(self.t, self.x)` reached from `from`.
    fn surface_contact(&mut self, from: Side) -> Result<()> {
        let sys = self.sys;
        sys.surface()
            .project(self.t, &mut self.x, 1e-3 * sys.surface().on_tol())?;
        self.stepper.restart();
        match decide(sys, self.law, self.t, &self.x)? {
            SurfaceDecision::Slide => {
                self.mode = Mode::Sliding;
                self.record_event(EventKind::SlidingEntry)
            }
            SurfaceDecision::Leave(side) if side != from => {
                self.mode = flight(side);
                self.record_event(EventKind::Crossing)
            }
            SurfaceDecision::Leave(_) | SurfaceDecision::Repelling => {
                self.mode = flight(from);
                self.record_event(EventKind::Grazing)
            }
        }
    }

    /// Normalized position of the tangent selection in the surface set.
    fn position(&self, t: f64, x: &[f64]) -> f64 {
        let mut v = self.scratch.borrow_mut();
        sliding_velocity(self.sys, self.law, t, x, &mut v)
    }

    fn sliding_step(&mut self, t1: f64) -> Result<()> {
        let sys = self.sys;
        let law = self.law;
        let field = |t: f64, x: &[f64], out: &mut [f64]| {
            sliding_velocity(sys, law, t, x, out);
        };
        let t_prev = self.t;
        let acc = self.stepper.advance(&field, t_prev, &mut self.x, t1)?;
        let seg = acc.segment;
        let n = sys.dim();
        let xbuf = RefCell::new(vec![0.0; n]);
        // inside the set <=> g >= 0
        let g = |t: f64| {
            let mut x = xbuf.borrow_mut();
            seg.eval(t, &mut x);
            let pos = self.position(t, &x);
            pos.min(1.0 - pos)
        };
        let t_from = t_prev.max(self.quiet_until);
        let exit = first_negative(&g, t_from, acc.t).map(|(a, b)| match a {
            Some(a) => refine_root(&g, a, b, self.cfg.event_tol, f64::INFINITY).1,
            None => b,
        });
        match exit {
            None => {
                self.t = acc.t;
                sys.surface()
                    .project(self.t, &mut self.x, 0.1 * self.cfg.sliding_proj_tol)?;
                self.stepper.invalidate();
                let x = core::mem::take(&mut self.x);
                self.traj.push(self.t, &x, Mode::Sliding);
                self.x = x;
                Ok(())
            }
            Some(t_e) => {
                seg.eval(t_e, &mut self.x);
                self.t = t_e;
                sys.surface()
                    .project(t_e, &mut self.x, 0.1 * self.cfg.sliding_proj_tol)?;
                self.stepper.restart();
                let side = self.exit_side(t_e)?;
                self.mode = flight(side);
                self.record_event(EventKind::SlidingExit)
            }
        }
    }

    /// Side the surface set points to once the selection has left it.
    fn exit_side(&self, t: f64) -> Result<Side> {
        match decide(self.sys, self.law, t, &self.x)? {
            SurfaceDecision::Leave(side) => Ok(side),
            SurfaceDecision::Repelling => Ok(Side::Plus),
            SurfaceDecision::Slide => {
                // Still inside the tie band: use which end was passed.
                let set = self.sys.velocity_set(self.law, t, &self.x);
                let mut nrm = vec![0.0; self.sys.dim()];
                self.sys.surface().grad(t, &self.x, &mut nrm);
                let nd = dot(&nrm, &set.dir);
                let pos = self.position(t, &self.x);
                let sign = if pos < 0.5 { nd } else { -nd };
                Ok(if sign >= 0.0 { Side::Plus } else { Side::Minus })
            }
        }
    }
}

/// First sub-sample in `[t_from, t_end]` where `g < 0`. Returns the bracket
/// `(Some(a), b)` with `g(a) >= 0 > g(b)`, or `(None, b)` when `g` is
/// already negative at the first sample.
fn first_negative<G>(g: &G, t_from: f64, t_end: f64) -> Option<(Option<f64>, f64)>
where
    G: Fn(f64) -> f64,
{
    const N: usize = 8;
    if !(t_from < t_end) {
        return None;
    }
    let dt = (t_end - t_from) / N as f64;
    let mut prev: Option<f64> = None;
    for k in 0..=N {
        let t = if k == N {
            t_end
        } else {
            t_from + k as f64 * dt
        };
        if g(t) < 0.0 {
            return Some((prev, t));
        }
        prev = Some(t);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusion::SwitchingSurface;
    use crate::models;

    #[test]
    fn empty_horizon() {
        let sys = models::watt(&models::WattParams { a: 1.5, b: 1.1 }).unwrap();
        let tr = integrate_filippov(&sys, &[-0.5, 1.0, 1.2], 3.0, 3.0, &SolverConfig::default())
            .unwrap();
        assert_eq!(tr.len(), 1);
        assert!(tr.events.is_empty());
    }

    #[test]
    fn crossing_switches_branch() {
        // x' = 1 on both sides, sigma = x - 0.5
        let sys = PiecewiseSystem::new(
            1,
            SwitchingSurface::new(|_, x| x[0] - 0.5, |_, _, g| g[0] = 1.0),
            |_, _, o| o[0] = 2.0,
            |_, _, o| o[0] = 1.0,
        );
        let tr = integrate_filippov(&sys, &[0.0], 0.0, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(tr.events.len(), 1);
        assert_eq!(tr.events[0].kind, EventKind::Crossing);
        assert!((tr.events[0].t - 0.5).abs() < 1e-9);
        // 0.5 s at speed 1, then 0.5 s at speed 2
        assert!((tr.final_state()[0] - 1.5).abs() < 1e-9);
        assert_eq!(tr.samples.last().unwrap().mode, Mode::FlightPlus);
    }

    #[test]
    fn chattering_limit_is_reported() {
        let sys = models::watt(&models::WattParams { a: 1.5, b: 1.1 }).unwrap();
        let cfg = SolverConfig {
            max_events: 1,
            ..SolverConfig::default()
        };
        let err = integrate_filippov(&sys, &[-0.5, 1.0, 1.2], 0.0, 50.0, &cfg).unwrap_err();
        match err {
            Error::Chattering { partial, .. } => assert!(!partial.is_empty()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_domain_start_is_rejected() {
        let sys = models::double_integrator_control();
        assert!(matches!(
            integrate_filippov(&sys, &[-1.0, 1.0], 0.0, 1.0, &SolverConfig::default()),
            Err(Error::OutOfDomain)
        ));
    }
}
