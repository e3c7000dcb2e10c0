//! Integration of smooth fields, event location, the event-driven
//! Filippov/GLY integrator and the regularized (Aizerman-Pyatnitskiy)
//! integrator.

mod distance;
mod dopri;
mod event_driven;
mod events;
mod naive;
mod regularize;
mod trajectory;

pub use distance::trajectory_distance;
pub use dopri::{integrate_smooth, DenseOutput, DenseSegment, SmoothSolution};
pub use event_driven::{integrate_filippov, integrate_gly, integrate_with_law};
pub use events::{locate_event, EventLocation};
pub use naive::integrate_naive_sign;
pub use regularize::{
    integrate_ap, regularized_system, sat, ApOptions, ApReport, ApRun, EpsilonSchedule, SmoothField,
};
pub use trajectory::{Event, EventKind, Mode, Sample, Trajectory};

use crate::error::{Error, Result};

/// Tolerances for integration, event location and sliding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Event times are located to this accuracy.
    pub event_tol: f64,
    /// Sliding states are projected back to `|sigma| <= sliding_proj_tol`.
    pub sliding_proj_tol: f64,
    /// No new event is detected within this time after a handled one.
    pub min_event_gap: f64,
    pub max_events: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 0.05,
            event_tol: 1e-10,
            sliding_proj_tol: 1e-9,
            min_event_gap: 1e-9,
            max_events: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.rel_tol,
            self.abs_tol,
            self.max_step,
            self.event_tol,
            self.sliding_proj_tol,
            self.min_event_gap,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidConfig(
                "all tolerances and max_step must be positive",
            ));
        }
        if !(self.event_tol < self.max_step) {
            return Err(Error::InvalidConfig(
                "event_tol must be smaller than max_step",
            ));
        }
        if self.max_events == 0 {
            return Err(Error::InvalidConfig("max_events must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_config() {
        let d = SolverConfig::default();
        assert!(SolverConfig { rel_tol: 0.0, ..d }.validate().is_err());
        assert!(SolverConfig {
            event_tol: 1.0,
            max_step: 0.5,
            ..d
        }
        .validate()
        .is_err());
        assert!(SolverConfig { max_events: 0, ..d }.validate().is_err());
    }
}
