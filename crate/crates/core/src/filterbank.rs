//! Receptive-profile families: 2D Gabor, endstopped, spatiotemporal and
//! discrete (learned) filters.

mod discrete;
mod endstop;
mod gabor;
mod spatiotemporal;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use discrete::{
    ingest_discrete_bank, synthetic_learned_bank, DiscreteFilter, PlacedFilter, SyntheticBankSpec,
};
pub use endstop::{endstopped_response, endstopped_value, EndstopParams, Endstopped};
pub use gabor::{gabor_value, pinwheel_restrict, Gabor, GaborParams, RestrictedBank};
pub use spatiotemporal::{
    c_weighted_value, spatiotemporal_value, CWeighted, SeparablePoint, SpaceTimeGabor, SpaceTimePoint,
    SpatioTemporalParams,
};

/// Reduces an angle to `(-π, π]`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Position and orientation of a filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeaturePoint {
    pub x: f64,
    pub y: f64,
    /// Radians in `(-π, π]`.
    pub theta: f64,
}

impl FeaturePoint {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        FeaturePoint { x, y, theta: reduce_angle(theta) }
    }

    pub const ORIGIN: FeaturePoint = FeaturePoint { x: 0.0, y: 0.0, theta: 0.0 };
}

/// Axis-aligned box in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn around(x: f64, y: f64, rx: f64, ry: f64) -> Self {
        Window { x0: x - rx, x1: x + rx, y0: y - ry, y1: y + ry }
    }

    pub fn union(&self, o: &Window) -> Window {
        Window { x0: self.x0.min(o.x0), x1: self.x1.max(o.x1), y0: self.y0.min(o.y0), y1: self.y1.max(o.y1) }
    }
}

/// A filter that can be sampled at any point of the plane.
pub trait Profile: Sync {
    fn eval(&self, u: f64, v: f64) -> Complex64;

    /// Box outside which the profile is treated as zero.
    fn window(&self) -> Window;

    /// Sampled profiles only exist on a lattice of this spacing, anchored at
    /// the returned point.
    fn lattice(&self) -> Option<(f64, (f64, f64))> {
        None
    }
}

/// Space-time counterpart of [`Profile`].
pub trait Profile3: Sync {
    fn eval(&self, u: f64, v: f64, s: f64) -> Complex64;

    /// Spatial box and temporal interval outside which the profile is zero.
    fn window(&self) -> (Window, f64, f64);
}
