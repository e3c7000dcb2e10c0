//! Fixed-step RK4 with the ordinary `sign`, no event handling. Kept as a
//! reference for what a general-purpose solver does with a discontinuous
//! right-hand side.

use alloc::vec;

use super::{Mode, Trajectory};
use crate::error::{Error, Result};
use crate::inclusion::PiecewiseSystem;

/// Integrates with `f_plus` where `sigma > 0`, `f_minus` where `sigma < 0`
/// and their average where `sigma == 0` exactly, using classical RK4 with
/// step `h`.
pub fn integrate_naive_sign(
    sys: &PiecewiseSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<Trajectory> {
    sys.check_state(x0)?;
    if !(h > 0.0) || !(t1 >= t0) {
        return Err(Error::Domain("need h > 0 and t1 >= t0"));
    }
    let n = sys.dim();
    let mut tmp = vec![0.0; n];
    let field = |t: f64, x: &[f64], out: &mut [f64], tmp: &mut [f64]| {
        let s = sys.sigma(t, x);
        if s > 0.0 {
            sys.f_plus(t, x, out);
        } else if s < 0.0 {
            sys.f_minus(t, x, out);
        } else {
            sys.f_plus(t, x, out);
            sys.f_minus(t, x, tmp);
            out.iter_mut()
                .zip(tmp.iter())
                .for_each(|(o, m)| *o = 0.5 * (*o + m));
        }
    };
    let mode_of = |t: f64, x: &[f64]| {
        if sys.sigma(t, x) < 0.0 {
            Mode::FlightMinus
        } else {
            Mode::FlightPlus
        }
    };
    let mut tr = Trajectory::new(n);
    let mut x = x0.to_vec();
    let mut t = t0;
    tr.push(t, &x, mode_of(t, &x));
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut xs = vec![0.0; n];
    let steps = libm::ceil((t1 - t0) / h - 1e-9) as usize;
    for i in 0..steps {
        let t_next = if i + 1 == steps {
            t1
        } else {
            t0 + (i + 1) as f64 * h
        };
        let dt = t_next - t;
        field(t, &x, &mut k1, &mut tmp);
        for j in 0..n {
            xs[j] = x[j] + 0.5 * dt * k1[j];
        }
        field(t + 0.5 * dt, &xs, &mut k2, &mut tmp);
        for j in 0..n {
            xs[j] = x[j] + 0.5 * dt * k2[j];
        }
        field(t + 0.5 * dt, &xs, &mut k3, &mut tmp);
        for j in 0..n {
            xs[j] = x[j] + dt * k3[j];
        }
        field(t + dt, &xs, &mut k4, &mut tmp);
        for j in 0..n {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t = t_next;
        tr.push(t, &x, mode_of(t, &x));
    }
    Ok(tr)
}
