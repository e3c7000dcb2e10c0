//! Simulation and analysis of differential inclusions arising from ODEs with
//! a discontinuous right-hand side on a single switching surface.
//!
//! Three solution concepts are supported:
//!
//! * Filippov: on the surface the velocity is taken from the convex hull of
//!   the two one-sided limit fields; attracting points slide along the
//!   tangent element of that hull.
//! * GLY: the surface carries its own bounded closed convex velocity set,
//!   which may be larger than the Filippov hull (static friction exceeding
//!   dynamic friction).
//! * Aizerman-Pyatnitskiy: limits of solutions of smoothed systems in which
//!   the discontinuity is replaced by a saturation of width `eps`.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parameter
//! parsing and the command line front end live in the `nonsmooth` crate.
//!
//! Layout:
//!
//! * [`inclusion`] piecewise-smooth systems, surface classification, sliding
//!   and GLY selections.
//! * [`integrator`] adaptive Dormand-Prince stepping with dense output, event
//!   location, the event-driven Filippov/GLY integrator and the regularized
//!   (AP) integrator.
//! * [`models`] the benchmark systems: drilling (reduced and motor form),
//!   Watt governor, Chua circuit with discontinuous characteristic, the
//!   double-integrator control counterexample and linear systems with dry
//!   friction.
//! * [`analysis`] equilibria, load-jump conditions, Lyapunov quantities,
//!   safe-load sweeps and attractor diagnostics.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
mod error;
pub mod inclusion;
pub mod integrator;
mod linalg;
pub mod models;

pub use error::{Error, Result};
pub use inclusion::{
    classify_surface_point, filippov_sliding_field, gly_surface_field, surface_side,
    ClassificationKind, GlySelection, PiecewiseSystem, SegmentSet, Side, SlidingField,
    SurfaceClassification, SwitchingSurface,
};
pub use integrator::{
    integrate_ap, integrate_filippov, integrate_gly, integrate_smooth, regularized_system, sat,
    trajectory_distance, ApOptions, ApReport, EpsilonSchedule, Event, EventKind, Mode, Sample,
    SolverConfig, Trajectory,
};
