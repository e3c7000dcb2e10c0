//! Dormand-Prince 5(4) with Hairer's fourth-order continuous extension.

use alloc::vec;
use alloc::vec::Vec;

use super::{Mode, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::all_finite;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Anything that can be evaluated continuously over `[t_start, t_end]`.
pub trait DenseOutput {
    fn t_start(&self) -> f64;
    fn t_end(&self) -> f64;
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, out: &mut [f64]);
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    t0: f64,
    h: f64,
    n: usize,
    // five coefficient vectors, concatenated
    rc: Vec<f64>,
}

impl DenseOutput for DenseSegment {
    fn t_start(&self) -> f64 {
        self.t0
    }

    fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, t: f64, out: &mut [f64]) {
        let n = self.n;
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let (r1, rest) = self.rc.split_at(n);
        let (r2, rest) = rest.split_at(n);
        let (r3, rest) = rest.split_at(n);
        let (r4, r5) = rest.split_at(n);
        for i in 0..n {
            out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
    }
}

pub(crate) struct Accepted {
    pub t: f64,
    pub segment: DenseSegment,
}

/// Adaptive step driver. Owns the stage workspace; the caller owns the state.
pub(crate) struct Stepper {
    n: usize,
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    h: Option<f64>,
    fsal_valid: bool,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
}

impl Stepper {
    pub fn new(n: usize, cfg: &SolverConfig) -> Self {
        Stepper {
            n,
            k: core::array::from_fn(|_| vec![0.0; n]),
            ytmp: vec![0.0; n],
            ynew: vec![0.0; n],
            h: None,
            fsal_valid: false,
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            max_step: cfg.max_step,
        }
    }

    /// Forget cached derivatives and the step size (new field or moved state).
    pub fn restart(&mut self) {
        self.fsal_valid = false;
        self.h = None;
    }

    /// Forget the cached derivative only (state was projected).
    pub fn invalidate(&mut self) {
        self.fsal_valid = false;
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.abs_tol + self.rel_tol * a.abs().max(b.abs())
    }

    fn initial_step<F>(&mut self, f: &F, t: f64, y: &[f64], span: f64) -> f64
    where
        F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
    {
        let n = self.n as f64;
        let rms = |v: &[f64], y: &[f64], s: &Self| {
            libm::sqrt(
                v.iter()
                    .zip(y)
                    .map(|(vi, yi)| {
                        let r = vi / s.scale(*yi, *yi);
                        r * r
                    })
                    .sum::<f64>()
                    / n,
            )
        };
        let d0 = rms(y, y, self);
        let d1 = rms(&self.k[0], y, self);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span);
        for ((t, yi), ki) in self.ytmp.iter_mut().zip(y).zip(&self.k[0]) {
            *t = yi + h0 * ki;
        }
        let (k0, rest) = self.k.split_at_mut(1);
        f(t + h0, &self.ytmp, &mut rest[0]);
        let diff: Vec<f64> = rest[0]
            .iter()
            .zip(&k0[0])
            .map(|(a, b)| (a - b) / h0)
            .collect();
        let d2 = rms(&diff, y, self);
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            libm::pow(0.01 / d1.max(d2), 0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step).min(span)
    }

    /// Advances `y` from `t` by one accepted step, never beyond `t_max`.
    pub fn advance<F>(&mut self, f: &F, t: f64, y: &mut [f64], t_max: f64) -> Result<Accepted>
    where
        F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
    {
        let n = self.n;
        if !self.fsal_valid {
            f(t, y, &mut self.k[0]);
            if !all_finite(&self.k[0]) {
                return Err(Error::NonFinite {
                    what: "vector field",
                    t,
                });
            }
        } else {
            let (k0, rest) = self.k.split_at_mut(1);
            k0[0].copy_from_slice(&rest[5]);
        }
        let span = t_max - t;
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(f, t, y, span),
        };
        let mut rejected = false;
        loop {
            h = h.min(self.max_step);
            let last = h >= span * (1.0 - 1e-12);
            if last {
                h = span;
            }
            if !last && h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::StepUnderflow {
                    t,
                    x: y.to_vec(),
                    partial: Default::default(),
                });
            }
            let err = self.attempt(f, t, y, h);
            if err <= 1.0 {
                let fac = if err == 0.0 {
                    10.0
                } else {
                    (0.9 * libm::pow(err, -0.2)).clamp(0.2, 10.0)
                };
                let fac = if rejected { fac.min(1.0) } else { fac };
                let t_new = if last { t_max } else { t + h };
                let segment = self.dense(t, y, h);
                y.copy_from_slice(&self.ynew);
                self.h = Some((h * fac).min(self.max_step));
                self.fsal_valid = true;
                debug_assert_eq!(y.len(), n);
                return Ok(Accepted { t: t_new, segment });
            }
            rejected = true;
            let fac = if err.is_finite() {
                (0.9 * libm::pow(err, -0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= fac;
        }
    }

    /// One trial step; returns the scaled RMS error.
    fn attempt<F>(&mut self, f: &F, t: f64, y: &[f64], h: f64) -> f64
    where
        F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
    {
        let n = self.n;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let yt = &mut self.ytmp;
        for i in 0..n {
            yt[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, yt, k2);
        for i in 0..n {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, yt, k3);
        for i in 0..n {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, yt, k4);
        for i in 0..n {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, yt, k5);
        for i in 0..n {
            yt[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, yt, k6);
        let yn = &mut self.ynew;
        for i in 0..n {
            yn[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + h, yn, k7);
        let mut sum = 0.0;
        for i in 0..n {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = self.abs_tol + self.rel_tol * y[i].abs().max(yn[i].abs());
            let r = e / sk;
            sum += r * r;
        }
        let err = libm::sqrt(sum / n as f64);
        if err.is_nan() {
            f64::INFINITY
        } else {
            err
        }
    }

    fn dense(&self, t: f64, y: &[f64], h: f64) -> DenseSegment {
        let n = self.n;
        let [k1, _, k3, k4, k5, k6, k7] = &self.k;
        let mut rc = vec![0.0; 5 * n];
        for i in 0..n {
            let dy = self.ynew[i] - y[i];
            let bspl = h * k1[i] - dy;
            rc[i] = y[i];
            rc[n + i] = dy;
            rc[2 * n + i] = bspl;
            rc[3 * n + i] = dy - h * k7[i] - bspl;
            rc[4 * n + i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        DenseSegment { t0: t, h, n, rc }
    }
}

/// Result of a smooth integration: step samples plus the dense output of
/// every step.
#[derive(Debug, Clone)]
pub struct SmoothSolution {
    pub trajectory: Trajectory,
    pub segments: Vec<DenseSegment>,
}

impl SmoothSolution {
    /// Dense-output state at `t`.
    pub fn eval(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if self.segments.is_empty() {
            if t == self.trajectory.t_start() {
                out.copy_from_slice(self.trajectory.final_state());
                return Ok(());
            }
            return Err(Error::Domain("time outside solution range"));
        }
        let first = self.segments[0].t_start();
        let last = self.segments[self.segments.len() - 1].t_end();
        if t < first || t > last {
            return Err(Error::Domain("time outside solution range"));
        }
        let i = self
            .segments
            .partition_point(|s| s.t_end() < t)
            .min(self.segments.len() - 1);
        self.segments[i].eval(t, out);
        Ok(())
    }
}

/// Adaptive Dormand-Prince integration of a smooth field over `[t0, t1]`.
pub fn integrate_smooth<F>(
    f: &F,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<SmoothSolution>
where
    F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
{
    cfg.validate()?;
    if !all_finite(x0) {
        return Err(Error::NonFinite {
            what: "initial state",
            t: t0,
        });
    }
    if !(t1 >= t0) {
        return Err(Error::Domain("t1 must not precede t0"));
    }
    let n = x0.len();
    let mut trajectory = Trajectory::new(n);
    let mut segments = Vec::new();
    let mut y = x0.to_vec();
    let mut t = t0;
    trajectory.push(t, &y, Mode::FlightPlus);
    let mut stepper = Stepper::new(n, cfg);
    while t < t1 {
        match stepper.advance(f, t, &mut y, t1) {
            Ok(acc) => {
                t = acc.t;
                segments.push(acc.segment);
                trajectory.push(t, &y, Mode::FlightPlus);
            }
            Err(Error::StepUnderflow { t, x, .. }) => {
                return Err(Error::StepUnderflow {
                    t,
                    x,
                    partial: alloc::boxed::Box::new(trajectory),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SmoothSolution {
        trajectory,
        segments,
    })
}
