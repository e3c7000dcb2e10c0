//! Regularization of the discontinuity channel and the
//! Aizerman-Pyatnitskiy limit procedure.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{integrate_smooth, trajectory_distance, Mode, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::inclusion::PiecewiseSystem;

pub type SmoothField = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// Saturation `clamp(x / eps, -1, 1)`.
#[inline]
pub fn sat(x: f64, eps: f64) -> f64 {
    (x / eps).clamp(-1.0, 1.0)
}

/// `g + h * phi_eps(sigma)`, where `phi_eps` interpolates linearly between
/// the two channel values across `|sigma| <= eps` and equals them outside.
pub fn regularized_system(sys: &PiecewiseSystem, eps: f64) -> Result<SmoothField> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps", "must be positive and finite"));
    }
    let ch = sys
        .channel()
        .ok_or(Error::UnsupportedModel(
            "system declares no discontinuity channel",
        ))?
        .clone();
    let sys = sys.clone();
    let mid = 0.5 * (ch.phi_plus + ch.phi_minus);
    let half = 0.5 * (ch.phi_plus - ch.phi_minus);
    Ok(Arc::new(move |t, x, out| {
        let phi = mid + half * sat(sys.sigma(t, x), eps);
        sys.channel_eval(&ch, phi, t, x, out);
    }))
}

/// Strictly decreasing positive regularization parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSchedule(Vec<f64>);

impl EpsilonSchedule {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::invalid("eps", "schedule is empty"));
        }
        if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::invalid("eps", "values must be positive and finite"));
        }
        if eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::invalid("eps", "values must be strictly decreasing"));
        }
        Ok(EpsilonSchedule(eps))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApOptions {
    /// Start each run from the final state of the previous one.
    pub continuation: bool,
    /// Grid step for the distances between consecutive runs.
    pub grid: f64,
}

impl Default for ApOptions {
    fn default() -> Self {
        ApOptions {
            continuation: false,
            grid: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApRun {
    pub eps: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApReport {
    pub runs: Vec<ApRun>,
    /// `distances[k]` compares runs `k` and `k + 1`.
    pub distances: Vec<f64>,
}

impl ApReport {
    /// True when every consecutive distance is smaller than the previous one.
    pub fn is_converging(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

/// One smooth integration of the regularized field per `eps`. Samples are
/// labelled `FlightPlus`/`FlightMinus` by the sign of `sigma`.
pub fn integrate_ap(
    sys: &PiecewiseSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    sched: &EpsilonSchedule,
    cfg: &SolverConfig,
    opts: &ApOptions,
) -> Result<ApReport> {
    sys.check_state(x0)?;
    let mut runs: Vec<ApRun> = Vec::with_capacity(sched.values().len());
    for &eps in sched.values() {
        let tag = |e: Error| Error::AtEpsilon {
            eps,
            source: Box::new(e),
        };
        let field = regularized_system(sys, eps).map_err(tag)?;
        let start = match runs.last() {
            Some(prev) if opts.continuation => prev.trajectory.final_state().to_vec(),
            _ => x0.to_vec(),
        };
        let mut trajectory = integrate_smooth(&*field, &start, t0, t1, cfg)
            .map_err(tag)?
            .trajectory;
        for s in &mut trajectory.samples {
            s.mode = if sys.sigma(s.t, &s.x) < 0.0 {
                Mode::FlightMinus
            } else {
                Mode::FlightPlus
            };
        }
        runs.push(ApRun { eps, trajectory });
    }
    let distances = runs
        .windows(2)
        .map(|w| trajectory_distance(&w[0].trajectory, &w[1].trajectory, opts.grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(ApReport { runs, distances })
}
