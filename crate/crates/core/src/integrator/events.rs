//! Locating surface contacts on a dense-output segment.

use alloc::vec;

use super::dopri::DenseOutput;
use crate::inclusion::SwitchingSurface;

/// Sub-samples per dense segment when scanning for contacts.
const SCAN_POINTS: usize = 16;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Outcome of the raw scan, expressed on `f = side * sigma` (positive on
/// the current side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Scan {
    None,
    /// `f(a) > on_tol`, `f(b) < -on_tol`.
    Crossing {
        a: f64,
        b: f64,
    },
    /// `|f(t)| <= on_tol` at `t` (touch, or a crossing exactly at a sample).
    Hit {
        t: f64,
    },
}

/// Scans `f` on `[t_from, seg.t_end()]` for the first point where it
/// enters the band `|f| <= on_tol` or goes below it.
pub(crate) fn scan<F>(f: &F, t_from: f64, t_end: f64, on_tol: f64) -> Scan
where
    F: Fn(f64) -> f64,
{
    if !(t_from < t_end) {
        return Scan::None;
    }
    let dt = (t_end - t_from) / SCAN_POINTS as f64;
    let ts: [f64; SCAN_POINTS + 1] = core::array::from_fn(|k| {
        if k == SCAN_POINTS {
            t_end
        } else {
            t_from + k as f64 * dt
        }
    });
    let fs: [f64; SCAN_POINTS + 1] = core::array::from_fn(|k| f(ts[k]));

    if fs[0] < -on_tol {
        return Scan::Hit { t: ts[0] };
    }
    for k in 1..=SCAN_POINTS {
        if fs[k] < -on_tol {
            return if fs[k - 1] > on_tol {
                Scan::Crossing {
                    a: ts[k - 1],
                    b: ts[k],
                }
            } else {
                Scan::Hit { t: ts[k - 1] }
            };
        }
        if fs[k] <= on_tol && k < SCAN_POINTS && fs[k + 1] >= fs[k] && fs[k - 1] >= fs[k] {
            return Scan::Hit { t: ts[k] };
        }
    }
    // Dips between samples: refine every sampled local minimum.
    for k in 1..=SCAN_POINTS {
        let right_ok = k == SCAN_POINTS || fs[k] <= fs[k + 1];
        if fs[k] < fs[k - 1] && right_ok {
            let hi = if k == SCAN_POINTS { ts[k] } else { ts[k + 1] };
            let (tm, fm) = golden_min(f, ts[k - 1], hi, on_tol);
            if fm < -on_tol {
                return Scan::Crossing {
                    a: ts[k - 1],
                    b: tm,
                };
            }
            if fm <= on_tol && tm < t_end {
                return Scan::Hit { t: tm };
            }
        }
    }
    Scan::None
}

/// Golden-section minimization, stopping early once `f` drops into the band.
fn golden_min<F>(f: &F, mut a: f64, mut b: f64, on_tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc < -on_tol {
            return (c, fc);
        }
        if fd < -on_tol {
            return (d, fd);
        }
        if (b - a) <= 1e-14 * a.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Illinois regula falsi on a bracket with `g(a) > 0 > g(b)`. Returns the
/// final bracket `(a, b)` with `b - a <= xtol` or `|g| <= ftol` at one end.
pub(crate) fn refine_root<G>(g: &G, mut a: f64, mut b: f64, xtol: f64, ftol: f64) -> (f64, f64)
where
    G: Fn(f64) -> f64,
{
    let mut ga = g(a);
    let mut gb = g(b);
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= xtol
            && (ga.abs() <= ftol || gb.abs() <= ftol || b - a <= 1e-15 * b.abs().max(1.0))
        {
            break;
        }
        let mut t = (a * gb - b * ga) / (gb - ga);
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
        // keep the bracket shrinking geometrically even if one end stalls
        let width = b - a;
        let gt = g(t);
        if gt > 0.0 {
            a = t;
            ga = gt;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            b = t;
            gb = gt;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
        if b - a > 0.75 * width {
            let mid = 0.5 * (a + b);
            let gm = g(mid);
            if gm > 0.0 {
                a = mid;
                ga = gm;
            } else {
                b = mid;
                gb = gm;
            }
            side = 0;
        }
    }
    (a, b)
}

/// A contact between a dense segment and a switching surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventLocation {
    /// `sigma` changes sign at `t`.
    Crossing { t: f64 },
    /// `|sigma|` dips to within `on_tol` at `t` and the segment returns to
    /// the side it started on.
    Grazing { t: f64 },
}

impl EventLocation {
    pub fn time(&self) -> f64 {
        match *self {
            EventLocation::Crossing { t } | EventLocation::Grazing { t } => t,
        }
    }
}

/// First contact of `seg` with `surface`, located to `event_tol` in time.
/// `None` means the segment stays strictly on its starting side.
pub fn locate_event(
    seg: &dyn DenseOutput,
    surface: &SwitchingSurface,
    event_tol: f64,
) -> Option<EventLocation> {
    let on_tol = surface.on_tol();
    let x_cell = core::cell::RefCell::new(vec![0.0; seg.dim()]);
    let sigma = |t: f64| {
        let mut x = x_cell.borrow_mut();
        seg.eval(t, &mut x);
        surface.sigma(t, &x)
    };
    let (t0, t1) = (seg.t_start(), seg.t_end());
    let s0 = sigma(t0);
    if s0.abs() <= on_tol {
        return Some(EventLocation::Crossing { t: t0 });
    }
    let side = if s0 > 0.0 { 1.0 } else { -1.0 };
    let end = side * sigma(t1);
    let f = |t: f64| side * sigma(t);
    match scan(&f, t0, t1, on_tol) {
        Scan::None => None,
        Scan::Crossing { a, b } => {
            let (a, b) = refine_root(&f, a, b, event_tol, on_tol);
            let t = if f(a).abs() <= f(b).abs() { a } else { b };
            Some(EventLocation::Crossing { t })
        }
        Scan::Hit { t } => {
            if end > on_tol {
                Some(EventLocation::Grazing { t })
            } else {
                Some(EventLocation::Crossing { t })
            }
        }
    }
}
