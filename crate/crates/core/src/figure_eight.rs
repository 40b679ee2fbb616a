//! The planar figure-eight `E_δ(t) = (cos t, δ sin 2t)` and its normal image.
//!
//! The unit normal is the tangent rotated by `−π/2`, i.e. the direction of
//! `(2δ cos 2t, sin t)`, so the normal angle starts at `ν(0) = 0`. Its
//! extremes sit where the curvature vanishes (`cos t = 0`), which gives the
//! closed form `ℓ(δ) = π + 2 arctan(2δ)` for the length of the normal image.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureEightParams {
    delta: f64,
}

impl FigureEightParams {
    /// Requires `0 < delta ≤ 1`.
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta <= 1.0 {
            Ok(FigureEightParams { delta })
        } else {
            Err(Error::InvalidParameter(format!(
                "figure-eight delta must lie in (0, 1], got {delta}"
            )))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        (t.cos(), self.delta * (2.0 * t).sin())
    }

    /// `E′_δ(t) = (−sin t, 2δ cos 2t)`; never zero.
    pub fn derivative(&self, t: f64) -> (f64, f64) {
        (-t.sin(), 2.0 * self.delta * (2.0 * t).cos())
    }

    /// Angle of the unit normal, continuous in `t`, with `ν(0) = 0`.
    ///
    /// The normal direction `(2δ cos 2t, sin t)` has vanishing second
    /// component only at `t ∈ πZ`, where the first is `2δ > 0`, so `atan2`
    /// never crosses its branch cut and is already the continuous lift.
    pub fn normal_angle(&self, t: f64) -> f64 {
        t.sin().atan2(2.0 * self.delta * (2.0 * t).cos())
    }

    /// `(cos ν, sin ν)` without evaluating the angle.
    pub fn unit_normal(&self, t: f64) -> (f64, f64) {
        let x = 2.0 * self.delta * (2.0 * t).cos();
        let y = t.sin();
        let r = x.hypot(y);
        (x / r, y / r)
    }

    /// Length of the arc swept by the unit normal.
    pub fn spherical_image_length(&self) -> f64 {
        PI + 2.0 * (2.0 * self.delta).atan()
    }

    /// Largest `|ν(t)|`, attained at `t = ±π/2`.
    pub fn max_normal_angle(&self) -> f64 {
        PI / 2.0 + (2.0 * self.delta).atan()
    }
}

/// Largest `δ` whose normal image has length at most `π + alpha`,
/// i.e. `tan(alpha/2)/2`, capped at the artifact limit `δ = 1`.
pub fn max_delta_for_arc(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::NoAdmissibleDelta(alpha));
    }
    if alpha >= PI {
        return Ok(1.0);
    }
    Ok(((alpha / 2.0).tan() / 2.0).min(1.0))
}
