use alloc::vec;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::dist;

/// Sup over a uniform grid on the common time range of the Euclidean
/// distance between two trajectories, each linearly interpolated between
/// its samples. The grid always includes both ends of the common range.
pub fn trajectory_distance(a: &Trajectory, b: &Trajectory, grid: f64) -> Result<f64> {
    if !(grid > 0.0) {
        return Err(Error::Domain("grid step must be positive"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("empty trajectory"));
    }
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let lo = a.t_start().max(b.t_start());
    let hi = a.t_end().min(b.t_end());
    if lo > hi {
        return Err(Error::Domain("trajectories have disjoint time ranges"));
    }
    let mut xa = vec![0.0; a.dim];
    let mut xb = vec![0.0; b.dim];
    let steps = libm::ceil((hi - lo) / grid) as usize;
    let mut sup: f64 = 0.0;
    for k in 0..=steps {
        let t = if k == steps { hi } else { lo + k as f64 * grid };
        a.state_at(t, &mut xa)?;
        b.state_at(t, &mut xb)?;
        sup = sup.max(dist(&xa, &xb));
    }
    Ok(sup)
}
