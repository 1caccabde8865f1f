use std::f64::consts::PI;

use num_complex::Complex64;

use super::gabor::local_frame;
use super::{FeaturePoint, GaborParams, Profile3, Window};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatioTemporalParams {
    pub gabor: GaborParams,
    /// Temporal Gaussian scale.
    pub beta: f64,
}

impl SpatioTemporalParams {
    pub fn new(gabor: GaborParams, beta: f64) -> Result<Self> {
        gabor.validate()?;
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive (got {beta})")));
        }
        Ok(SpatioTemporalParams { gabor, beta })
    }
}

/// Feature point of a space-time filter: peak time `t` and velocity `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimePoint {
    pub at: FeaturePoint,
    pub t: f64,
    pub alpha: f64,
}

/// Space-time point with a separability index `c ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparablePoint {
    pub point: SpaceTimePoint,
    pub c: f64,
}

impl SeparablePoint {
    pub fn new(point: SpaceTimePoint, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::invalid(format!("separability index must lie in [0, 1] (got {c})")));
        }
        Ok(SeparablePoint { point, c })
    }

    /// The same point moving with velocity `±alpha`.
    pub fn branches(&self) -> (SpaceTimePoint, SpaceTimePoint) {
        let plus = SpaceTimePoint { alpha: self.point.alpha, ..self.point };
        let minus = SpaceTimePoint { alpha: -self.point.alpha, ..self.point };
        (plus, minus)
    }
}

/// `exp(-2πi(X/λ + α(s−t)))·exp(-(X² + Y²)/2σ² − (s−t)²/2β²)`.
pub fn spatiotemporal_value(sp: &SpatioTemporalParams, p: &SpaceTimePoint, u: f64, v: f64, s: f64) -> Complex64 {
    let g = &sp.gabor;
    let (x, y) = local_frame(&p.at, u, v);
    let ya = y / g.aspect;
    let dt = s - p.t;
    let envelope =
        (-(x * x + ya * ya) / (2.0 * g.sigma * g.sigma) - dt * dt / (2.0 * sp.beta * sp.beta)).exp();
    Complex64::from_polar(envelope, -2.0 * PI * (x / g.lambda + p.alpha * dt))
}

/// `c·ψ_{+α} + (1 − c)·ψ_{−α}`.
pub fn c_weighted_value(sp: &SpatioTemporalParams, q: &SeparablePoint, u: f64, v: f64, s: f64) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&q.c) {
        return Err(Error::invalid(format!("separability index must lie in [0, 1] (got {})", q.c)));
    }
    let (plus, minus) = q.branches();
    Ok(spatiotemporal_value(sp, &plus, u, v, s) * q.c
        + spatiotemporal_value(sp, &minus, u, v, s) * (1.0 - q.c))
}

fn space_time_window(sp: &SpatioTemporalParams, p: &SpaceTimePoint) -> (Window, f64, f64) {
    let r = sp.gabor.reach();
    let tr = 4.0 * sp.beta;
    (Window::around(p.at.x, p.at.y, r, r), p.t - tr, p.t + tr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeGabor {
    pub params: SpatioTemporalParams,
    pub at: SpaceTimePoint,
}

impl Profile3 for SpaceTimeGabor {
    fn eval(&self, u: f64, v: f64, s: f64) -> Complex64 {
        spatiotemporal_value(&self.params, &self.at, u, v, s)
    }

    fn window(&self) -> (Window, f64, f64) {
        space_time_window(&self.params, &self.at)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CWeighted {
    pub params: SpatioTemporalParams,
    pub at: SeparablePoint,
}

impl Profile3 for CWeighted {
    fn eval(&self, u: f64, v: f64, s: f64) -> Complex64 {
        let (plus, minus) = self.at.branches();
        spatiotemporal_value(&self.params, &plus, u, v, s) * self.at.c
            + spatiotemporal_value(&self.params, &minus, u, v, s) * (1.0 - self.at.c)
    }

    fn window(&self) -> (Window, f64, f64) {
        space_time_window(&self.params, &self.at.point)
    }
}
