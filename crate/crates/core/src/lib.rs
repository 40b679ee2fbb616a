//! Explicit closed immersed tori in R³ (and spun products in higher
//! dimension) whose Gauss map avoids a prescribed finite set of directions,
//! together with sampled, resolution-aware certification of every property
//! the construction relies on.
//!
//! The pipeline for a finite obstacle set `X ⊂ S²` is:
//!
//! 1. [`framing::choose_pole`] picks an axis and rotates `X` so the axis is `±e₃`;
//! 2. [`framing::fit_separating_series`] fits an odd trigonometric height
//!    function whose graph separates `X` from `-X` ([`framing::separate`]
//!    runs both steps over several candidate axes);
//! 3. [`framing::build_frame`] turns it into an orthonormal normal frame
//!    `(N₁, N₂)` along the unit circle;
//! 4. [`immersion::extend`] sweeps a figure-eight curve through every normal
//!    plane, producing a torus;
//! 5. [`verify`] samples the torus on a grid and certifies immersion,
//!    avoidance margin, and degree zero of its Gauss map.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod figure_eight;
pub mod framing;
pub mod immersion;
pub mod io;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};
