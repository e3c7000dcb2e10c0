//! Piecewise-smooth systems with one switching surface and their set-valued
//! right-hand sides.
//!
//! A [`PiecewiseSystem`] carries two smooth fields: `f_plus`, valid where
//! `sigma > 0`, and `f_minus`, valid where `sigma < 0`. On the surface
//! `sigma = 0` the admissible velocities form a segment ([`SegmentSet`]):
//! either the Filippov hull `conv{f_plus, f_minus}` or a model supplied GLY
//! set that contains it.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, norm};

/// `out = f(t, x)`.
pub type VectorField = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// Scalar function of `(t, x)`.
pub type ScalarField = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// Surface velocity set as a function of `(t, x)`.
pub type SetLaw = Arc<dyn Fn(f64, &[f64]) -> SegmentSet + Send + Sync>;
/// Domain predicate on states.
pub type DomainGuard = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Default thickness of the "on surface" band, in state units.
pub const DEFAULT_ON_TOL: f64 = 1e-9;

/// Normal projections within this (scaled) band of zero count as ties.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// Position of a state relative to the switching surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
    On,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
            Side::On => 0.0,
        }
    }
}

/// Scalar switching function `sigma(t, x)` with its gradient.
#[derive(Clone)]
pub struct SwitchingSurface {
    sigma: ScalarField,
    grad: VectorField,
    on_tol: f64,
}

impl core::fmt::Debug for SwitchingSurface {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SwitchingSurface")
            .field("on_tol", &self.on_tol)
            .finish_non_exhaustive()
    }
}

impl SwitchingSurface {
    pub fn new<S, G>(sigma: S, grad: G) -> Self
    where
        S: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        SwitchingSurface {
            sigma: Arc::new(sigma),
            grad: Arc::new(grad),
            on_tol: DEFAULT_ON_TOL,
        }
    }

    /// Surface `sigma(x) = x[index]`.
    pub fn coordinate(index: usize) -> Self {
        Self::new(
            move |_, x| x[index],
            move |_, _, g| {
                g.fill(0.0);
                g[index] = 1.0;
            },
        )
    }

    pub fn with_on_tol(mut self, on_tol: f64) -> Self {
        self.on_tol = on_tol;
        self
    }

    pub fn on_tol(&self) -> f64 {
        self.on_tol
    }

    #[inline]
    pub fn sigma(&self, t: f64, x: &[f64]) -> f64 {
        (self.sigma)(t, x)
    }

    #[inline]
    pub fn grad(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.grad)(t, x, out)
    }

    pub(crate) fn negated(&self) -> Self {
        let sigma = self.sigma.clone();
        let grad = self.grad.clone();
        SwitchingSurface {
            sigma: Arc::new(move |t, x| -sigma(t, x)),
            grad: Arc::new(move |t, x, g| {
                grad(t, x, g);
                g.iter_mut().for_each(|v| *v = -*v);
            }),
            on_tol: self.on_tol,
        }
    }

    /// Moves `x` onto the surface along the gradient (Newton steps) until
    /// `|sigma| <= tol`.
    pub fn project(&self, t: f64, x: &mut [f64], tol: f64) -> Result<()> {
        let mut n = vec![0.0; x.len()];
        for _ in 0..20 {
            let s = self.sigma(t, x);
            if !s.is_finite() {
                return Err(Error::NonFinite { what: "sigma", t });
            }
            if s.abs() <= tol {
                return Ok(());
            }
            self.grad(t, x, &mut n);
            let nn = dot(&n, &n);
            if nn == 0.0 || !nn.is_finite() {
                return Err(Error::DegenerateSurface { t });
            }
            let k = s / nn;
            x.iter_mut().zip(&n).for_each(|(xi, ni)| *xi -= k * ni);
        }
        Ok(())
    }
}

/// Closed segment `{ base + lambda * dir : lambda in [lo, hi] }`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    pub base: Vec<f64>,
    pub dir: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl SegmentSet {
    pub fn new(base: Vec<f64>, dir: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        if base.len() != dir.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                got: dir.len(),
            });
        }
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(
                "lo/hi",
                "segment bounds must be finite with lo <= hi",
            ));
        }
        Ok(SegmentSet { base, dir, lo, hi })
    }

    /// `conv{f_plus, f_minus}` parametrized so that `lambda = 1` is `f_plus`.
    pub fn filippov_hull(f_plus: &[f64], f_minus: &[f64]) -> Self {
        let dir = f_plus.iter().zip(f_minus).map(|(p, m)| p - m).collect();
        SegmentSet {
            base: f_minus.to_vec(),
            dir,
            lo: 0.0,
            hi: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn point(&self, lambda: f64) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.dir)
            .map(|(b, d)| b + lambda * d)
            .collect()
    }

    /// True when `v` lies on the segment up to `tol` (Euclidean).
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        let dd = dot(&self.dir, &self.dir);
        let lambda = if dd == 0.0 {
            self.lo
        } else {
            let diff: Vec<f64> = v.iter().zip(&self.base).map(|(a, b)| a - b).collect();
            (dot(&diff, &self.dir) / dd).clamp(self.lo, self.hi)
        };
        crate::linalg::dist(&self.point(lambda), v) <= tol
    }

    /// Parameter of the unique element with zero projection on `n`, if the
    /// line through the segment crosses the tangent plane at one point.
    pub(crate) fn tangent_parameter(&self, n: &[f64]) -> Option<f64> {
        let nd = dot(n, &self.dir);
        let scale = norm(n) * norm(&self.dir);
        if nd.abs() <= TIE_TOL * scale || nd == 0.0 {
            return None;
        }
        Some(-dot(n, &self.base) / nd)
    }
}

/// Discontinuity channel `f = g(t, x) + h(t, x) * phi` with `phi = phi_plus`
/// where `sigma > 0` and `phi = phi_minus` where `sigma < 0`.
#[derive(Clone)]
pub struct Channel {
    pub g: VectorField,
    pub h: VectorField,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

/// Which surface set the event-driven integrator slides in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurfaceLaw {
    /// Convex hull of the two limit fields.
    #[default]
    Filippov,
    /// The system's own surface set (defaults to the Filippov hull).
    Gly,
}

#[derive(Clone)]
enum Branches {
    Direct {
        plus: VectorField,
        minus: VectorField,
    },
    Channel(Channel),
}

/// Two smooth fields glued along a switching surface, plus the surface set
/// that defines the differential inclusion on it.
#[derive(Clone)]
pub struct PiecewiseSystem {
    dim: usize,
    surface: SwitchingSurface,
    branches: Branches,
    surface_set: Option<SetLaw>,
    domain: Option<DomainGuard>,
}

impl core::fmt::Debug for PiecewiseSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PiecewiseSystem")
            .field("dim", &self.dim)
            .field("surface", &self.surface)
            .field("has_channel", &self.channel().is_some())
            .field("has_surface_set", &self.surface_set.is_some())
            .finish_non_exhaustive()
    }
}

// Branch evaluation needs a scratch vector for h; all models are tiny.
const STACK_DIM: usize = 8;

impl PiecewiseSystem {
    pub fn new<P, M>(dim: usize, surface: SwitchingSurface, f_plus: P, f_minus: M) -> Self
    where
        P: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        M: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        PiecewiseSystem {
            dim,
            surface,
            branches: Branches::Direct {
                plus: Arc::new(f_plus),
                minus: Arc::new(f_minus),
            },
            surface_set: None,
            domain: None,
        }
    }

    /// Builds both branches from a declared discontinuity channel. Such
    /// systems can also be regularized.
    pub fn from_channel(dim: usize, surface: SwitchingSurface, channel: Channel) -> Self {
        PiecewiseSystem {
            dim,
            surface,
            branches: Branches::Channel(channel),
            surface_set: None,
            domain: None,
        }
    }

    pub fn with_surface_set<L>(mut self, law: L) -> Self
    where
        L: Fn(f64, &[f64]) -> SegmentSet + Send + Sync + 'static,
    {
        self.surface_set = Some(Arc::new(law));
        self
    }

    pub fn with_domain<D>(mut self, guard: D) -> Self
    where
        D: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        self.domain = Some(Arc::new(guard));
        self
    }

    pub fn with_on_tol(mut self, on_tol: f64) -> Self {
        self.surface.on_tol = on_tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn surface(&self) -> &SwitchingSurface {
        &self.surface
    }

    pub fn channel(&self) -> Option<&Channel> {
        match &self.branches {
            Branches::Channel(c) => Some(c),
            Branches::Direct { .. } => None,
        }
    }

    pub fn has_gly_law(&self) -> bool {
        self.surface_set.is_some()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.domain.as_ref().is_none_or(|d| d(x))
    }

    #[inline]
    pub fn sigma(&self, t: f64, x: &[f64]) -> f64 {
        self.surface.sigma(t, x)
    }

    pub fn f_plus(&self, t: f64, x: &[f64], out: &mut [f64]) {
        self.branch_into(true, t, x, out)
    }

    pub fn f_minus(&self, t: f64, x: &[f64], out: &mut [f64]) {
        self.branch_into(false, t, x, out)
    }

    /// Field of the given side; `Side::On` evaluates `f_plus`.
    pub fn branch(&self, side: Side, t: f64, x: &[f64], out: &mut [f64]) {
        self.branch_into(side != Side::Minus, t, x, out)
    }

    fn branch_into(&self, plus: bool, t: f64, x: &[f64], out: &mut [f64]) {
        match &self.branches {
            Branches::Direct {
                plus: fp,
                minus: fm,
            } => {
                if plus {
                    fp(t, x, out)
                } else {
                    fm(t, x, out)
                }
            }
            Branches::Channel(ch) => {
                let phi = if plus { ch.phi_plus } else { ch.phi_minus };
                self.channel_eval(ch, phi, t, x, out);
            }
        }
    }

    /// `out = g + phi * h` for a channel system.
    pub(crate) fn channel_eval(&self, ch: &Channel, phi: f64, t: f64, x: &[f64], out: &mut [f64]) {
        (ch.g)(t, x, out);
        let mut stack = [0.0; STACK_DIM];
        let mut heap;
        let h: &mut [f64] = if self.dim <= STACK_DIM {
            &mut stack[..self.dim]
        } else {
            heap = vec![0.0; self.dim];
            &mut heap
        };
        (ch.h)(t, x, h);
        out.iter_mut()
            .zip(h.iter())
            .for_each(|(o, hi)| *o += phi * hi);
    }

    /// Convex hull of the two limit values at `x`.
    pub fn filippov_hull(&self, t: f64, x: &[f64]) -> SegmentSet {
        let mut fp = vec![0.0; self.dim];
        let mut fm = vec![0.0; self.dim];
        self.f_plus(t, x, &mut fp);
        self.f_minus(t, x, &mut fm);
        SegmentSet::filippov_hull(&fp, &fm)
    }

    /// GLY surface set; the Filippov hull when the model supplies no law.
    pub fn surface_set(&self, t: f64, x: &[f64]) -> SegmentSet {
        match &self.surface_set {
            Some(law) => law(t, x),
            None => self.filippov_hull(t, x),
        }
    }

    pub fn velocity_set(&self, law: SurfaceLaw, t: f64, x: &[f64]) -> SegmentSet {
        match law {
            SurfaceLaw::Filippov => self.filippov_hull(t, x),
            SurfaceLaw::Gly => self.surface_set(t, x),
        }
    }

    /// Same inclusion described with `sigma -> -sigma` and the branches
    /// swapped.
    pub fn mirrored(&self) -> Self {
        let branches = match &self.branches {
            Branches::Direct { plus, minus } => Branches::Direct {
                plus: minus.clone(),
                minus: plus.clone(),
            },
            Branches::Channel(ch) => Branches::Channel(Channel {
                phi_plus: ch.phi_minus,
                phi_minus: ch.phi_plus,
                ..ch.clone()
            }),
        };
        PiecewiseSystem {
            dim: self.dim,
            surface: self.surface.negated(),
            branches,
            surface_set: self.surface_set.clone(),
            domain: self.domain.clone(),
        }
    }

    pub(crate) fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if !all_finite(x) {
            return Err(Error::NonFinite {
                what: "state",
                t: f64::NAN,
            });
        }
        Ok(())
    }

    fn normal(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let mut n = vec![0.0; self.dim];
        self.surface.grad(t, x, &mut n);
        if !all_finite(&n) {
            return Err(Error::NonFinite {
                what: "grad sigma",
                t,
            });
        }
        if n.iter().all(|v| *v == 0.0) {
            return Err(Error::DegenerateSurface { t });
        }
        Ok(n)
    }
}

/// Which side of the surface `x` lies on, with the `on_tol` band as `On`.
pub fn surface_side(surface: &SwitchingSurface, t: f64, x: &[f64]) -> Result<Side> {
    let s = surface.sigma(t, x);
    if !s.is_finite() {
        return Err(Error::NonFinite { what: "sigma", t });
    }
    Ok(if s.abs() <= surface.on_tol {
        Side::On
    } else if s > 0.0 {
        Side::Plus
    } else {
        Side::Minus
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassificationKind {
    CrossToPlus,
    CrossToMinus,
    AttractingSliding,
    Repelling,
}

/// Sign pattern of the normal projections `p = n . f_plus` and
/// `m = n . f_minus` at a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceClassification {
    pub kind: ClassificationKind,
    pub p: f64,
    pub m: f64,
    /// `p` or `m` was within the tie band and the point was resolved toward
    /// sliding.
    pub boundary: bool,
}

fn tie_band(n: &[f64], fp: &[f64], fm: &[f64]) -> f64 {
    TIE_TOL * norm(n) * norm(fp).max(norm(fm)).max(1.0)
}

/// Classifies a surface point by the signs of the normal projections of the
/// two limit fields. Ties are resolved toward sliding and flagged.
pub fn classify_surface_point(
    sys: &PiecewiseSystem,
    t: f64,
    x: &[f64],
) -> Result<SurfaceClassification> {
    sys.check_state(x)?;
    let n = sys.normal(t, x)?;
    let mut fp = vec![0.0; sys.dim];
    let mut fm = vec![0.0; sys.dim];
    sys.f_plus(t, x, &mut fp);
    sys.f_minus(t, x, &mut fm);
    if !all_finite(&fp) || !all_finite(&fm) {
        return Err(Error::NonFinite {
            what: "limit field",
            t,
        });
    }
    let p = dot(&n, &fp);
    let m = dot(&n, &fm);
    let tie = tie_band(&n, &fp, &fm);
    let p_tie = p.abs() <= tie;
    let m_tie = m.abs() <= tie;
    let (kind, boundary) = if p_tie || m_tie {
        (ClassificationKind::AttractingSliding, true)
    } else if p < 0.0 && m > 0.0 {
        (ClassificationKind::AttractingSliding, false)
    } else if p > 0.0 && m < 0.0 {
        (ClassificationKind::Repelling, false)
    } else if p > 0.0 {
        (ClassificationKind::CrossToPlus, false)
    } else {
        (ClassificationKind::CrossToMinus, false)
    };
    Ok(SurfaceClassification {
        kind,
        p,
        m,
        boundary,
    })
}

/// Filippov sliding velocity `f0 = alpha f_plus + (1 - alpha) f_minus`, the
/// intersection of the segment joining the limit values with the tangent
/// plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingField {
    pub f0: Vec<f64>,
    pub alpha: f64,
}

pub fn filippov_sliding_field(sys: &PiecewiseSystem, t: f64, x: &[f64]) -> Result<SlidingField> {
    let cls = classify_surface_point(sys, t, x)?;
    let (p, m) = (cls.p, cls.m);
    let denom = m - p;
    if denom == 0.0 {
        return Err(Error::DegenerateSliding { t });
    }
    let alpha = m / denom;
    let slack = TIE_TOL * (1.0 + p.abs().max(m.abs()) / denom.abs());
    if !(-slack..=1.0 + slack).contains(&alpha) {
        return Err(Error::NotSliding { t, p, m });
    }
    let alpha = alpha.clamp(0.0, 1.0);
    let mut fp = vec![0.0; sys.dim];
    let mut fm = vec![0.0; sys.dim];
    sys.f_plus(t, x, &mut fp);
    sys.f_minus(t, x, &mut fm);
    let f0 = fp
        .iter()
        .zip(&fm)
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect();
    Ok(SlidingField { f0, alpha })
}

/// Surface set at a point together with its tangent selection.
#[derive(Debug, Clone, PartialEq)]
pub struct GlySelection {
    pub set: SegmentSet,
    /// Parameter of the selected element within `[set.lo, set.hi]`.
    pub lambda: Option<f64>,
    /// The unique element with zero normal projection, when it exists.
    pub selection: Option<Vec<f64>>,
}

/// Evaluates the GLY surface set and selects the unique tangent velocity in
/// it (the extended nonlinearity on the sliding region).
pub fn gly_surface_field(sys: &PiecewiseSystem, t: f64, x: &[f64]) -> Result<GlySelection> {
    let cls = classify_surface_point(sys, t, x)?;
    let n = sys.normal(t, x)?;
    let set = sys.surface_set(t, x);
    if set.dim() != sys.dim {
        return Err(Error::DimensionMismatch {
            expected: sys.dim,
            got: set.dim(),
        });
    }
    let width = (set.hi - set.lo).abs().max(1.0);
    let lambda = set
        .tangent_parameter(&n)
        .filter(|l| *l >= set.lo - TIE_TOL * width && *l <= set.hi + TIE_TOL * width)
        .map(|l| l.clamp(set.lo, set.hi));
    if lambda.is_none() && cls.kind == ClassificationKind::AttractingSliding && !cls.boundary {
        return Err(Error::ModelingInconsistency { t });
    }
    let selection = lambda.map(|l| set.point(l));
    Ok(GlySelection {
        set,
        lambda,
        selection,
    })
}

/// What the event-driven integrator does at a surface point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SurfaceDecision {
    Slide,
    Leave(Side),
    /// Both limit fields point away; flight resumes on the plus side.
    Repelling,
}

pub(crate) fn decide(
    sys: &PiecewiseSystem,
    law: SurfaceLaw,
    t: f64,
    x: &[f64],
) -> Result<SurfaceDecision> {
    let cls = classify_surface_point(sys, t, x)?;
    if cls.kind == ClassificationKind::Repelling {
        return Ok(SurfaceDecision::Repelling);
    }
    let n = sys.normal(t, x)?;
    let set = sys.velocity_set(law, t, x);
    let nb = dot(&n, &set.base);
    let nd = dot(&n, &set.dir);
    let e_lo = nb + set.lo * nd;
    let e_hi = nb + set.hi * nd;
    let lam_max = set.lo.abs().max(set.hi.abs());
    let tie = TIE_TOL * norm(&n) * (norm(&set.base) + lam_max * norm(&set.dir)).max(1.0);
    if e_lo.min(e_hi) <= tie && e_lo.max(e_hi) >= -tie {
        Ok(SurfaceDecision::Slide)
    } else if e_lo > 0.0 {
        Ok(SurfaceDecision::Leave(Side::Plus))
    } else {
        Ok(SurfaceDecision::Leave(Side::Minus))
    }
}

/// Tangent velocity of the chosen surface set, evaluated as a smooth field
/// near the surface. Returns the normalized position of the selected element
/// in the set (inside `[0, 1]` while sliding is admissible).
pub(crate) fn sliding_velocity(
    sys: &PiecewiseSystem,
    law: SurfaceLaw,
    t: f64,
    x: &[f64],
    out: &mut [f64],
) -> f64 {
    let mut n = [0.0; STACK_DIM];
    let mut heap;
    let n: &mut [f64] = if sys.dim <= STACK_DIM {
        &mut n[..sys.dim]
    } else {
        heap = vec![0.0; sys.dim];
        &mut heap
    };
    sys.surface.grad(t, x, n);
    let set = sys.velocity_set(law, t, x);
    let width = set.hi - set.lo;
    let lambda = set.tangent_parameter(n).unwrap_or(0.5 * (set.lo + set.hi));
    out.iter_mut()
        .zip(set.base.iter().zip(&set.dir))
        .for_each(|(o, (b, d))| *o = b + lambda * d);
    if width > 0.0 {
        (lambda - set.lo) / width
    } else {
        0.5
    }
}
