//! Benchmark systems and the drilling coordinate change.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::inclusion::{Channel, PiecewiseSystem, SegmentSet, SwitchingSurface, VectorField};

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be positive and finite"))
    }
}

fn nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be non-negative and finite"))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be finite"))
    }
}

/// Channel system whose surface set is `g + h * [lo, hi]`.
fn channel_system(
    dim: usize,
    surface: SwitchingSurface,
    channel: Channel,
    lo: f64,
    hi: f64,
) -> PiecewiseSystem {
    let (g, h) = (channel.g.clone(), channel.h.clone());
    PiecewiseSystem::from_channel(dim, surface, channel).with_surface_set(move |t, x| {
        let mut base = vec![0.0; x.len()];
        let mut dir = vec![0.0; x.len()];
        g(t, x, &mut base);
        h(t, x, &mut dir);
        SegmentSet { base, dir, lo, hi }
    })
}

fn interval(a: f64, b: f64) -> (f64, f64) {
    (a.min(b), a.max(b))
}

// ---------------------------------------------------------------- drilling

/// Reduced drilling system in the state `(s, y, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrillingParams {
    pub a: f64,
    pub c: f64,
    pub gamma: f64,
    pub m_lock: f64,
}

impl DrillingParams {
    pub fn validate(&self) -> Result<()> {
        positive("a", self.a)?;
        positive("c", self.c)?;
        nonnegative("gamma", self.gamma)?;
        positive("M_lock", self.m_lock)
    }

    /// Sliding region on `s = c`: `y` in `[-gamma/a, M gamma/a]`.
    pub fn sliding_region(&self) -> (f64, f64) {
        (-self.gamma / self.a, self.m_lock * self.gamma / self.a)
    }
}

/// Induction motor driving the drill, state `(i1, i2, theta, theta_dot)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrillingMotorParams {
    pub l: f64,
    pub r: f64,
    pub s: f64,
    pub b: f64,
    pub i_inertia: f64,
    pub beta: f64,
    pub t0: f64,
    pub m_lock: f64,
}

impl DrillingMotorParams {
    pub fn validate(&self) -> Result<()> {
        positive("L", self.l)?;
        positive("R", self.r)?;
        positive("S", self.s)?;
        positive("B", self.b)?;
        positive("I_inertia", self.i_inertia)?;
        positive("beta", self.beta)?;
        nonnegative("T0", self.t0)?;
        positive("M_lock", self.m_lock)
    }

    /// Parameters of the reduced system this motor is conjugate to.
    pub fn reduced(&self) -> DrillingParams {
        let sb = self.s * self.b;
        DrillingParams {
            a: self.beta * sb * sb / (self.i_inertia * self.l),
            c: self.r / self.l,
            gamma: self.t0 / self.i_inertia,
            m_lock: self.m_lock,
        }
    }

    fn k(&self) -> f64 {
        self.l / (self.s * self.b)
    }
}

/// Load jump from `gamma0` to `gamma1` at time `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadChangeScenario {
    pub gamma0: f64,
    pub gamma1: f64,
    pub tau: f64,
}

impl LoadChangeScenario {
    pub fn new(gamma0: f64, gamma1: f64, tau: f64) -> Result<Self> {
        let sc = LoadChangeScenario {
            gamma0,
            gamma1,
            tau,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        nonnegative("gamma0", self.gamma0)?;
        finite("gamma1", self.gamma1)?;
        finite("tau", self.tau)?;
        if !(self.gamma0 < self.gamma1) {
            return Err(Error::invalid("gamma1", "must exceed gamma0"));
        }
        Ok(())
    }
}

/// `s' in a y + M(s)`, `y' = -c y - s - x s`, `x' = -c x + y s` with
/// `M = gamma` for `s < c`, `-gamma M` for `s > c` and the segment between
/// them on `s = c`. The surface is `sigma = c - s`, so drilling (`s < c`)
/// is the plus side.
pub fn drilling_reduced(p: &DrillingParams) -> Result<PiecewiseSystem> {
    p.validate()?;
    let DrillingParams {
        a,
        c,
        gamma,
        m_lock,
    } = *p;
    let surface = SwitchingSurface::new(
        move |_, x| c - x[0],
        |_, _, g| {
            g.fill(0.0);
            g[0] = -1.0;
        },
    );
    let g: VectorField = Arc::new(move |_, x, o| {
        let (s, y, xx) = (x[0], x[1], x[2]);
        o[0] = a * y;
        o[1] = -c * y - s - xx * s;
        o[2] = -c * xx + y * s;
    });
    let h: VectorField = Arc::new(|_, _, o| {
        o.fill(0.0);
        o[0] = 1.0;
    });
    let (plus, minus) = (gamma, -gamma * m_lock);
    let (lo, hi) = interval(plus, minus);
    let channel = Channel {
        g,
        h,
        phi_plus: plus,
        phi_minus: minus,
    };
    Ok(channel_system(3, surface, channel, lo, hi))
}

/// Motor equations with friction torque `-T0` for `omega > 0`, `M T0` for
/// `omega < 0` and `[-T0, M T0]` at `omega = theta_dot + R/L = 0`.
pub fn drilling_motor(p: &DrillingMotorParams) -> Result<PiecewiseSystem> {
    p.validate()?;
    let DrillingMotorParams {
        l,
        r,
        s,
        b,
        i_inertia,
        beta,
        t0,
        m_lock,
    } = *p;
    let sb = s * b;
    let w0 = r / l;
    let surface = SwitchingSurface::new(
        move |_, x| x[3] + w0,
        |_, _, g| {
            g.fill(0.0);
            g[3] = 1.0;
        },
    );
    let g: VectorField = Arc::new(move |_, x, o| {
        let (i1, i2, th, om) = (x[0], x[1], x[2], x[3]);
        let (sn, cs) = (libm::sin(th), libm::cos(th));
        o[0] = (-r * i1 + sb * sn * om) / l;
        o[1] = (-r * i2 + sb * cs * om) / l;
        o[2] = om;
        o[3] = -beta * sb * (i1 * sn + i2 * cs) / i_inertia;
    });
    let h: VectorField = Arc::new(move |_, _, o| {
        o.fill(0.0);
        o[3] = 1.0 / i_inertia;
    });
    let (plus, minus) = (-t0, m_lock * t0);
    let (lo, hi) = interval(plus, minus);
    let channel = Channel {
        g,
        h,
        phi_plus: plus,
        phi_minus: minus,
    };
    Ok(channel_system(4, surface, channel, lo, hi))
}

/// `(i1, i2, theta, theta_dot) -> (s, y, x)`.
pub fn motor_to_reduced(state: &[f64; 4], p: &DrillingMotorParams) -> [f64; 3] {
    let k = p.k();
    let [i1, i2, th, om] = *state;
    let (sn, cs) = (libm::sin(th), libm::cos(th));
    [-om, k * (i1 * sn + i2 * cs), k * (i1 * cs - i2 * sn)]
}

/// Inverse of [`motor_to_reduced`] for a given angle `theta`.
pub fn reduced_to_motor(state: &[f64; 3], theta: f64, p: &DrillingMotorParams) -> [f64; 4] {
    let k = p.k();
    let [s, y, x] = *state;
    let (sn, cs) = (libm::sin(theta), libm::cos(theta));
    [(x * cs + y * sn) / k, (y * cs - x * sn) / k, theta, -s]
}

// ---------------------------------------------------------------- watt

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WattParams {
    pub a: f64,
    pub b: f64,
}

/// Watt governor with dry friction, `sigma = y1`.
pub fn watt(p: &WattParams) -> Result<PiecewiseSystem> {
    finite("A", p.a)?;
    finite("B", p.b)?;
    let WattParams { a, b } = *p;
    let g: VectorField = Arc::new(move |_, y, o| {
        o[0] = -a * y[0] + y[1];
        o[1] = -b * y[0] + y[2];
        o[2] = -y[0];
    });
    let h: VectorField = Arc::new(|_, _, o| {
        o.fill(0.0);
        o[0] = -1.0;
    });
    let channel = Channel {
        g,
        h,
        phi_plus: 1.0,
        phi_minus: -1.0,
    };
    Ok(channel_system(
        3,
        SwitchingSurface::coordinate(0),
        channel,
        -1.0,
        1.0,
    ))
}

// ---------------------------------------------------------------- chua

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuaParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_c: f64,
    pub m0: f64,
    pub m1: f64,
}

impl ChuaParams {
    /// Parameter set with a hidden chaotic attractor.
    pub fn hidden_attractor() -> Self {
        ChuaParams {
            alpha: 8.4562,
            beta: 12.0732,
            gamma_c: 0.0052,
            m0: -0.1768,
            m1: -1.1468,
        }
    }
}

/// Chua circuit with the discontinuous characteristic, `sigma = x1`.
pub fn chua(p: &ChuaParams) -> Result<PiecewiseSystem> {
    finite("alpha", p.alpha)?;
    finite("beta", p.beta)?;
    finite("gamma_c", p.gamma_c)?;
    finite("m0", p.m0)?;
    finite("m1", p.m1)?;
    let ChuaParams {
        alpha,
        beta,
        gamma_c,
        m0,
        m1,
    } = *p;
    let g: VectorField = Arc::new(move |_, x, o| {
        o[0] = -alpha * (m1 + 1.0) * x[0] + alpha * x[1];
        o[1] = x[0] - x[1] + x[2];
        o[2] = -beta * x[1] - gamma_c * x[2];
    });
    let jump = -alpha * (m0 - m1);
    let h: VectorField = Arc::new(move |_, _, o| {
        o.fill(0.0);
        o[0] = jump;
    });
    let channel = Channel {
        g,
        h,
        phi_plus: 1.0,
        phi_minus: -1.0,
    };
    Ok(channel_system(
        3,
        SwitchingSurface::coordinate(0),
        channel,
        -1.0,
        1.0,
    ))
}

// ---------------------------------------------------------------- double integrator

/// `x1' = x2 u1`, `x2' = u2` under the time-optimal first-quadrant
/// switching law, with `sigma = x1 - x2^2 / 2`. Both limit fields are
/// opposite on the surface, so the Filippov sliding field vanishes there.
pub fn double_integrator_control() -> PiecewiseSystem {
    let surface = SwitchingSurface::new(
        |_, x| x[0] - 0.5 * x[1] * x[1],
        |_, x, g| {
            g[0] = 1.0;
            g[1] = -x[1];
        },
    );
    let g: VectorField = Arc::new(|_, _, o| o.fill(0.0));
    // u1 = -1, u2 = 1 above the curve
    let h: VectorField = Arc::new(|_, x, o| {
        o[0] = -x[1];
        o[1] = 1.0;
    });
    let channel = Channel {
        g,
        h,
        phi_plus: 1.0,
        phi_minus: -1.0,
    };
    PiecewiseSystem::from_channel(2, surface, channel).with_domain(|x| x[0] >= 0.0 && x[1] >= 0.0)
}

// ---------------------------------------------------------------- dry friction

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrictionLaw {
    /// `phi = [-1, 1]` on the surface.
    Symmetric,
    /// `phi = [-alpha_s, alpha_s]` on the surface, `alpha_s > 1`.
    StaticExceeds { alpha_s: f64 },
}

/// `x' = A x + b phi(sigma)`, `sigma = c . x`, `phi = sign` off the surface.
/// `a_matrix` is row-major `n x n` with `n = b.len()`.
pub fn friction_linear(
    a_matrix: &[f64],
    b: &[f64],
    c: &[f64],
    law: FrictionLaw,
) -> Result<PiecewiseSystem> {
    let n = b.len();
    if n == 0 {
        return Err(Error::invalid("b", "must not be empty"));
    }
    if a_matrix.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: a_matrix.len(),
        });
    }
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.len(),
        });
    }
    if a_matrix.iter().chain(b).chain(c).any(|v| !v.is_finite()) {
        return Err(Error::invalid("A/b/c", "entries must be finite"));
    }
    let alpha = match law {
        FrictionLaw::Symmetric => 1.0,
        FrictionLaw::StaticExceeds { alpha_s } => {
            if !(alpha_s > 1.0 && alpha_s.is_finite()) {
                return Err(Error::invalid(
                    "alpha_s",
                    "must be finite and greater than 1",
                ));
            }
            alpha_s
        }
    };
    let am: Vec<f64> = a_matrix.to_vec();
    let bv: Vec<f64> = b.to_vec();
    let cv: Vec<f64> = c.to_vec();
    let cg = cv.clone();
    let surface = SwitchingSurface::new(
        move |_, x| cv.iter().zip(x).map(|(ci, xi)| ci * xi).sum(),
        move |_, _, g| g.copy_from_slice(&cg),
    );
    let g: VectorField = Arc::new(move |_, x, o| {
        for (i, oi) in o.iter_mut().enumerate() {
            *oi = am[i * n..(i + 1) * n]
                .iter()
                .zip(x)
                .map(|(a, xj)| a * xj)
                .sum();
        }
    });
    let h: VectorField = Arc::new(move |_, _, o| o.copy_from_slice(&bv));
    let channel = Channel {
        g,
        h,
        phi_plus: 1.0,
        phi_minus: -1.0,
    };
    Ok(channel_system(n, surface, channel, -alpha, alpha))
}
