//! Small dense-vector helpers over slices.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

pub(crate) fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

pub(crate) fn lerp(out: &mut [f64], a: &[f64], b: &[f64], w: f64) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x + w * (y - x);
    }
}
