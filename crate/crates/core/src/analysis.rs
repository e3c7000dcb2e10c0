//! Equilibria, load-jump conditions and Lyapunov quantities of the reduced
//! drilling system, safe-load sweeps, the Andronov-Mayer test for the Watt
//! governor and attractor diagnostics.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::inclusion::{gly_surface_field, PiecewiseSystem};
use crate::integrator::{integrate_filippov, SolverConfig, Trajectory};
use crate::linalg::{dist, dot, norm};
use crate::models::{drilling_reduced, DrillingParams, LoadChangeScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Idle,
    Loaded,
}

/// Equilibrium `(s0, y0, x0)` of the reduced drilling system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub s0: f64,
    pub y0: f64,
    pub x0: f64,
    pub kind: EquilibriumKind,
}

impl Equilibrium {
    pub fn state(&self) -> [f64; 3] {
        [self.s0, self.y0, self.x0]
    }
}

fn check_ac(a: f64, c: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("a", "must be positive and finite"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", "must be positive and finite"));
    }
    Ok(())
}

/// Smaller root of `gamma s^2 - a c s + gamma c^2 = 0`, i.e. of
/// `a c s / (c^2 + s^2) = gamma`.
fn small_root(a: f64, c: f64, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::invalid("gamma", "must be non-negative"));
    }
    let disc = a * a - 4.0 * gamma * gamma;
    if !(disc > 0.0) {
        return Err(Error::NoEquilibrium {
            gamma,
            half_a: 0.5 * a,
        });
    }
    // c (a - sqrt(disc)) / (2 gamma) without the cancellation
    Ok(2.0 * gamma * c / (a + libm::sqrt(disc)))
}

/// Unique equilibrium for `0 <= gamma < a/2`: the rest point for
/// `gamma = 0`, otherwise `s0 = c (a - sqrt(a^2 - 4 gamma^2)) / (2 gamma)`,
/// `y0 = -gamma/a`, `x0 = -gamma s0 / (a c)`.
pub fn drilling_equilibrium(a: f64, c: f64, gamma: f64) -> Result<Equilibrium> {
    check_ac(a, c)?;
    let s0 = small_root(a, c, gamma)?;
    if gamma == 0.0 {
        return Ok(Equilibrium {
            s0: 0.0,
            y0: 0.0,
            x0: 0.0,
            kind: EquilibriumKind::Idle,
        });
    }
    Ok(Equilibrium {
        s0,
        y0: -gamma / a,
        x0: -gamma * s0 / (a * c),
        kind: EquilibriumKind::Loaded,
    })
}

/// State right after the load jump: the equilibrium for `gamma0`.
pub fn post_jump_state(a: f64, c: f64, scenario: &LoadChangeScenario) -> Result<[f64; 3]> {
    Ok(drilling_equilibrium(a, c, scenario.gamma0)?.state())
}

/// Flags of the sufficient conditions for convergence after a load jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionReport {
    /// `gamma0 < a/2`
    pub cond_gamma0: bool,
    /// `gamma1 < min(a/2, 2 c^2)`
    pub cond_gamma1: bool,
    /// `3 (M^2 + 2M) gamma1^2 - 8 c^2 gamma1 + 3 a c^2 >= 0`
    pub cond_m: bool,
}

impl ConditionReport {
    pub fn all(&self) -> bool {
        self.cond_gamma0 && self.cond_gamma1 && self.cond_m
    }
}

pub fn theorem_conditions(
    a: f64,
    c: f64,
    m_lock: f64,
    scenario: &LoadChangeScenario,
) -> ConditionReport {
    let (g0, g1) = (scenario.gamma0, scenario.gamma1);
    let c2 = c * c;
    ConditionReport {
        cond_gamma0: g0 < 0.5 * a,
        cond_gamma1: g1 < (0.5 * a).min(2.0 * c2),
        cond_m: 3.0 * (m_lock * m_lock + 2.0 * m_lock) * g1 * g1 - 8.0 * c2 * g1 + 3.0 * a * c2
            >= 0.0,
    }
}

/// Coordinates and Lyapunov function for the load `gamma1`:
/// `eta = a y + gamma1`, `z = -x - gamma1 s / (a c)`,
/// `psi(s) = -(gamma1/c) s^2 + a s - c gamma1` and
/// `V = a^2 z^2 / 2 + eta^2 / 2 + int_{s1}^{s} psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovFrame {
    pub a: f64,
    pub c: f64,
    pub gamma1: f64,
    /// Equilibrium value of `s` for `gamma1` (smaller root of `psi`).
    pub s1: f64,
}

/// Level and `s` range of the set `Omega` that traps the post-jump motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaRegion {
    /// `int_{s1}^{c} psi + (1 + M)^2 gamma1^2 / 2`
    pub threshold: f64,
    /// Root below `s1` of `int_{s2}^{c} psi + (1 + M)^2 gamma1^2 / 2 = 0`.
    pub s2: f64,
    pub c: f64,
}

impl OmegaRegion {
    pub fn contains(&self, s: f64, v: f64) -> bool {
        v <= self.threshold && s >= self.s2 && s <= self.c
    }
}

impl LyapunovFrame {
    pub fn new(a: f64, c: f64, gamma1: f64) -> Result<Self> {
        check_ac(a, c)?;
        let s1 = small_root(a, c, gamma1)?;
        Ok(LyapunovFrame { a, c, gamma1, s1 })
    }

    pub fn psi(&self, s: f64) -> f64 {
        -(self.gamma1 / self.c) * s * s + self.a * s - self.c * self.gamma1
    }

    /// Antiderivative of `psi` vanishing at 0.
    fn psi_anti(&self, s: f64) -> f64 {
        -(self.gamma1 / (3.0 * self.c)) * s * s * s + 0.5 * self.a * s * s
            - self.c * self.gamma1 * s
    }

    /// `int_{s1}^{s} psi`
    pub fn psi_integral(&self, s: f64) -> f64 {
        self.psi_anti(s) - self.psi_anti(self.s1)
    }

    pub fn eta(&self, y: f64) -> f64 {
        self.a * y + self.gamma1
    }

    pub fn z(&self, s: f64, x: f64) -> f64 {
        -x - self.gamma1 * s / (self.a * self.c)
    }

    /// `(s, y, x) -> (s, eta, z)`
    pub fn coordinates(&self, state: &[f64]) -> (f64, f64, f64) {
        (state[0], self.eta(state[1]), self.z(state[0], state[2]))
    }

    pub fn v(&self, s: f64, eta: f64, z: f64) -> f64 {
        0.5 * self.a * self.a * z * z + 0.5 * eta * eta + self.psi_integral(s)
    }

    pub fn v_state(&self, state: &[f64]) -> f64 {
        let (s, eta, z) = self.coordinates(state);
        self.v(s, eta, z)
    }

    /// Derivative of `V` along the `s < c` branch. Negative definite in
    /// `(eta, z)` exactly when `gamma1 < 2 c^2`.
    pub fn vdot(&self, eta: f64, z: f64) -> f64 {
        let (a, c) = (self.a, self.c);
        -a * a * c * z * z - (a * self.gamma1 / c) * eta * z - c * eta * eta
    }

    pub fn vdot_negative_definite(&self) -> bool {
        // discriminant of the quadratic form in (eta, z)
        let (a, c, g) = (self.a, self.c, self.gamma1);
        (a * g / c) * (a * g / c) < 4.0 * a * a * c * c
    }

    pub fn omega(&self, m_lock: f64) -> Result<OmegaRegion> {
        let k = 0.5 * (1.0 + m_lock) * (1.0 + m_lock) * self.gamma1 * self.gamma1;
        let threshold = self.psi_integral(self.c) + k;
        // psi < 0 below s1, so the antiderivative decreases there
        let target = self.psi_anti(self.c) + k;
        let f = |s: f64| self.psi_anti(s) - target;
        let hi = self.s1;
        if !(f(hi) < 0.0) {
            return Err(self.geometry("no s2 below s1", m_lock));
        }
        let mut step = self.c.max(1.0);
        let mut lo = hi - step;
        let mut tries = 0;
        while f(lo) < 0.0 {
            step *= 2.0;
            lo = hi - step;
            tries += 1;
            if tries > 200 || !lo.is_finite() {
                return Err(self.geometry("could not bracket s2", m_lock));
            }
        }
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(OmegaRegion {
            threshold,
            s2: 0.5 * (lo + hi),
            c: self.c,
        })
    }

    fn geometry(&self, what: &str, m_lock: f64) -> Error {
        Error::Geometry(format!(
            "{what} (a = {}, c = {}, gamma1 = {}, M = {m_lock})",
            self.a, self.c, self.gamma1
        ))
    }
}

pub fn lyapunov_v(s: f64, eta: f64, z: f64, frame: &LyapunovFrame) -> f64 {
    frame.v(s, eta, z)
}

pub fn lyapunov_vdot(eta: f64, z: f64, frame: &LyapunovFrame) -> f64 {
    frame.vdot(eta, z)
}

pub fn omega_membership(
    s: f64,
    eta: f64,
    z: f64,
    frame: &LyapunovFrame,
    m_lock: f64,
) -> Result<bool> {
    let omega = frame.omega(m_lock)?;
    Ok(omega.contains(s, frame.v(s, eta, z)))
}

/// `W(x, y) = (x + gamma1/a)^2 + (y + gamma1/a)^2`
pub fn sliding_w(x: f64, y: f64, gamma1: f64, a: f64) -> f64 {
    let g = gamma1 / a;
    (x + g) * (x + g) + (y + g) * (y + g)
}

/// `W'/2` along the time-rescaled sliding dynamics `y' = -y - x - 1`,
/// `x' = -x + y`.
pub fn sliding_w_rate(x: f64, y: f64, gamma1: f64, a: f64) -> f64 {
    let g = gamma1 / a;
    (x + g) * (y - x) + (y + g) * (-y - x - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncontactReport {
    /// Largest sampled `W'/2`.
    pub max_rate: f64,
    pub noncontact: bool,
}

/// Samples the open semicircle `W = R^2`, `y > -gamma1/a` at `samples`
/// interior angles.
pub fn semicircle_noncontact(gamma1: f64, a: f64, radius: f64, samples: usize) -> NoncontactReport {
    let g = gamma1 / a;
    let mut max_rate = f64::NEG_INFINITY;
    for k in 1..=samples {
        let th = core::f64::consts::PI * k as f64 / (samples + 1) as f64;
        let x = radius * libm::cos(th) - g;
        let y = radius * libm::sin(th) - g;
        max_rate = max_rate.max(sliding_w_rate(x, y, gamma1, a));
    }
    NoncontactReport {
        max_rate,
        noncontact: max_rate < 0.0,
    }
}

/// `A > 0`, `B > 0`, `AB > 1`: the sliding segment of the Watt governor is
/// globally stable.
pub fn andronov_mayer(a: f64, b: f64) -> bool {
    a > 0.0 && b > 0.0 && a * b > 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    TheoremSafe,
    NumericSafe,
    Unsafe,
}

impl RegionLabel {
    pub fn name(self) -> &'static str {
        match self {
            RegionLabel::TheoremSafe => "THEOREM_SAFE",
            RegionLabel::NumericSafe => "NUMERIC_SAFE",
            RegionLabel::Unsafe => "UNSAFE",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "THEOREM_SAFE" => Some(RegionLabel::TheoremSafe),
            "NUMERIC_SAFE" => Some(RegionLabel::NumericSafe),
            "UNSAFE" => Some(RegionLabel::Unsafe),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCell {
    pub gamma1: f64,
    pub label: RegionLabel,
    /// Distance from the final state to the `gamma1` equilibrium; NaN when
    /// the simulation failed.
    pub terminal_distance: f64,
    /// Whether the simulation converged, independent of the theorem.
    pub simulated_converged: bool,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub a: f64,
    pub c: f64,
    pub m_lock: f64,
    pub gamma0: f64,
    pub cells: Vec<RegionCell>,
}

/// Sustained-ball radius used to call a run converged.
pub const CONVERGENCE_RADIUS: f64 = 1e-3;

/// Horizon tied to the slowest linear rate `c`.
pub fn default_sweep_horizon(c: f64) -> f64 {
    200.0 / c
}

/// Largest distance to `target` over the final `fraction` of the run.
pub fn tail_distance(tr: &Trajectory, target: &[f64], fraction: f64) -> f64 {
    tr.tail(fraction)
        .iter()
        .map(|s| dist(&s.x, target))
        .fold(0.0, f64::max)
}

/// Simulates the post-jump motion for one `gamma1` and labels it.
pub fn sweep_cell(
    a: f64,
    c: f64,
    m_lock: f64,
    gamma0: f64,
    gamma1: f64,
    horizon: f64,
    cfg: &SolverConfig,
) -> Result<RegionCell> {
    check_ac(a, c)?;
    if !(gamma1 > 0.0 && gamma1 < 0.5 * a) {
        return Err(Error::invalid("gamma1", "grid values must lie in (0, a/2)"));
    }
    let scenario = LoadChangeScenario::new(gamma0, gamma1, 0.0)?;
    let theorem = theorem_conditions(a, c, m_lock, &scenario).all();
    let eq = drilling_equilibrium(a, c, gamma1)?;
    let x0 = post_jump_state(a, c, &scenario)?;
    let sys = drilling_reduced(&DrillingParams {
        a,
        c,
        gamma: gamma1,
        m_lock,
    })?;
    let (terminal_distance, converged, diagnostic) =
        match integrate_filippov(&sys, &x0, 0.0, horizon, cfg) {
            Ok(tr) => {
                let target = eq.state();
                let d = dist(tr.final_state(), &target);
                (
                    d,
                    tail_distance(&tr, &target, 0.1) < CONVERGENCE_RADIUS,
                    None,
                )
            }
            Err(e) => (f64::NAN, false, Some(format!("{e}"))),
        };
    let label = if theorem {
        RegionLabel::TheoremSafe
    } else if converged {
        RegionLabel::NumericSafe
    } else {
        RegionLabel::Unsafe
    };
    Ok(RegionCell {
        gamma1,
        label,
        terminal_distance,
        simulated_converged: converged,
        diagnostic,
    })
}

/// Labels each `gamma1` in the grid. Every cell is simulated so that the
/// terminal distance is available for theorem-certified cells too.
pub fn safe_load_sweep(
    a: f64,
    c: f64,
    m_lock: f64,
    gamma0: f64,
    gamma1_grid: &[f64],
    horizon: f64,
    cfg: &SolverConfig,
) -> Result<RegionMap> {
    let cells = gamma1_grid
        .iter()
        .map(|&g1| sweep_cell(a, c, m_lock, gamma0, g1, horizon, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionMap {
        a,
        c,
        m_lock,
        gamma0,
        cells,
    })
}

/// Norm of the velocity the inclusion selects at `x`: the branch field off
/// the surface, the tangent element of the surface set on it (or the
/// distance of the set from the origin when it has none).
pub fn equilibrium_residual(sys: &PiecewiseSystem, t: f64, x: &[f64]) -> Result<f64> {
    let s = sys.sigma(t, x);
    if !s.is_finite() {
        return Err(Error::NonFinite { what: "sigma", t });
    }
    if s.abs() > sys.surface().on_tol() {
        let mut v = vec![0.0; sys.dim()];
        if s > 0.0 {
            sys.f_plus(t, x, &mut v);
        } else {
            sys.f_minus(t, x, &mut v);
        }
        return Ok(norm(&v));
    }
    let sel = gly_surface_field(sys, t, x)?;
    if let Some(v) = sel.selection {
        return Ok(norm(&v));
    }
    let set = sel.set;
    let dd = dot(&set.dir, &set.dir);
    let lam = if dd == 0.0 {
        set.lo
    } else {
        (-dot(&set.base, &set.dir) / dd).clamp(set.lo, set.hi)
    };
    Ok(norm(&set.point(lam)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsOptions {
    /// Fraction of the run (by time) treated as the tail.
    pub tail_fraction: f64,
    /// Max state norm above which the run counts as unbounded.
    pub bound: f64,
    /// Tail diameter below which the run counts as converged.
    pub converged_tol: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            tail_fraction: 0.1,
            bound: 1e6,
            converged_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorReport {
    pub max_norm: f64,
    pub bounded: bool,
    /// Minimum distance from the tail to each supplied equilibrium.
    pub tail_min_distance: Vec<f64>,
    /// Diagonal of the bounding box of the tail.
    pub tail_diameter: f64,
    pub converged: bool,
}

pub fn attractor_diagnostics(
    tr: &Trajectory,
    equilibria: &[Vec<f64>],
    opts: &DiagnosticsOptions,
) -> AttractorReport {
    let max_norm = tr
        .samples
        .iter()
        .map(|s| {
            if s.x.iter().all(|v| v.is_finite()) {
                norm(&s.x)
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    let tail = tr.tail(opts.tail_fraction);
    let tail_min_distance = equilibria
        .iter()
        .map(|e| {
            tail.iter()
                .map(|s| dist(&s.x, e))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut lo = vec![f64::INFINITY; tr.dim];
    let mut hi = vec![f64::NEG_INFINITY; tr.dim];
    for s in tail {
        for i in 0..tr.dim {
            lo[i] = lo[i].min(s.x[i]);
            hi[i] = hi[i].max(s.x[i]);
        }
    }
    let tail_diameter = if tail.is_empty() { 0.0 } else { dist(&lo, &hi) };
    let bounded = max_norm <= opts.bound;
    AttractorReport {
        max_norm,
        bounded,
        tail_min_distance,
        tail_diameter,
        converged: bounded && tail_diameter < opts.converged_tol,
    }
}
