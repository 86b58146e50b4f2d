//! Upper half-space model of `H^3` and horosphere coordinates.
//!
//! The horosphere `H` is the horizontal plane at Euclidean height 1. A point
//! with horosphere coordinates `(x, t)` (signed distance `t` to `H` along the
//! vertical geodesic through `x`) sits at Euclidean height `s = e^{-t}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horoconvex::PeriodicFunction;
use crate::planar::Vec2;

/// A point of the upper half-space, stored as chart point and Euclidean height.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    x: Vec2,
    s: f64,
}

impl HPoint {
    pub fn new(x: Vec2, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("height must be positive and finite, got {s}")));
        }
        if !x.is_finite() {
            return Err(Error::Domain("non-finite chart point".into()));
        }
        Ok(HPoint { x, s })
    }

    pub fn x(&self) -> Vec2 {
        self.x
    }

    pub fn height(&self) -> f64 {
        self.s
    }

    /// Signed distance to the horosphere at height 1 (positive below it).
    pub fn t(&self) -> f64 {
        -self.s.ln()
    }
}

/// `(x, t)_H -> (x, e^{-t})_E`.
pub fn horo_to_upper(x: Vec2, t: f64) -> HPoint {
    HPoint { x, s: (-t).exp() }
}

/// Inverse of [`horo_to_upper`].
pub fn upper_to_horo(p: &HPoint) -> (Vec2, f64) {
    (p.x, p.t())
}

/// `arccosh(1 + w)` for `w >= 0`, accurate for tiny `w`.
#[inline]
pub fn acosh1p(w: f64) -> f64 {
    if w < 1e-8 {
        // sqrt(2w) (1 - w/12 + 3w^2/160)
        (2.0 * w).sqrt() * (1.0 - w / 12.0 + 3.0 * w * w / 160.0)
    } else {
        (w + (w * (w + 2.0)).sqrt()).ln_1p()
    }
}

#[inline]
pub(crate) fn hyp_distance_parts(xp: Vec2, sp: f64, xq: Vec2, sq: f64) -> f64 {
    let ds = sp - sq;
    let w = ((xp - xq).norm_sq() + ds * ds) / (2.0 * sp * sq);
    acosh1p(w)
}

/// Hyperbolic distance, `cosh d = 1 + (|x_p - x_q|^2 + (s_p - s_q)^2) / (2 s_p s_q)`.
pub fn hyp_distance(p: &HPoint, q: &HPoint) -> f64 {
    if p == q {
        return 0.0;
    }
    hyp_distance_parts(p.x, p.s, q.x, q.s)
}

/// Distance in `H^3` between the horograph points above `x` and `y`.
///
/// Never exceeds the intrinsic distance on the horograph.
pub fn chordal_lower_bound(u: &PeriodicFunction, x: Vec2, y: Vec2) -> f64 {
    if x == y {
        return 0.0;
    }
    hyp_distance_parts(x, (-u.eval(x)).exp(), y, (-u.eval(y)).exp())
}
