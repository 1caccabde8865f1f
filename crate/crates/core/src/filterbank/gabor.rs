use std::f64::consts::PI;

use num_complex::Complex64;

use super::{FeaturePoint, Profile, Window};
use crate::propagation::PinwheelMap;
use crate::{Error, Result};

/// Wavelength and Gaussian scale of a Gabor filter.
///
/// `aspect` stretches the envelope along the filter axis (`σ_Y = aspect·σ`);
/// the closed-form kernels assume the isotropic case `aspect = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    pub lambda: f64,
    pub sigma: f64,
    pub aspect: f64,
}

impl Default for GaborParams {
    fn default() -> Self {
        GaborParams { lambda: 1.0, sigma: 0.5, aspect: 1.0 }
    }
}

impl GaborParams {
    pub fn new(lambda: f64, sigma: f64) -> Result<Self> {
        let gp = GaborParams { lambda, sigma, aspect: 1.0 };
        gp.validate()?;
        Ok(gp)
    }

    pub fn with_aspect(self, aspect: f64) -> Result<Self> {
        let gp = GaborParams { aspect, ..self };
        gp.validate()?;
        Ok(gp)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.lambda) || !ok(self.sigma) || !ok(self.aspect) {
            return Err(Error::invalid(format!(
                "Gabor parameters must be positive: lambda={}, sigma={}, aspect={}",
                self.lambda, self.sigma, self.aspect
            )));
        }
        Ok(())
    }

    /// Squared L² norm `πσ²·aspect`.
    pub fn norm_sq(&self) -> f64 {
        PI * self.sigma * self.sigma * self.aspect
    }

    pub fn is_isotropic(&self) -> bool {
        self.aspect == 1.0
    }

    /// Half-width of the quadrature window along the larger envelope axis.
    pub fn reach(&self) -> f64 {
        4.0 * self.sigma * self.aspect.max(1.0)
    }
}

/// Coordinates of `(u, v)` in the frame of a filter at `p`: `X` runs along
/// the wave vector, `Y` along the stripes.
#[inline]
pub(crate) fn local_frame(p: &FeaturePoint, u: f64, v: f64) -> (f64, f64) {
    let (s, c) = p.theta.sin_cos();
    let (du, dv) = (u - p.x, v - p.y);
    (du * c + dv * s, -du * s + dv * c)
}

/// `exp(2πiX/λ)·exp(-(X² + Y²)/2σ²)` in the frame of `p`.
pub fn gabor_value(gp: &GaborParams, p: &FeaturePoint, u: f64, v: f64) -> Complex64 {
    let (x, y) = local_frame(p, u, v);
    let ya = y / gp.aspect;
    let envelope = (-(x * x + ya * ya) / (2.0 * gp.sigma * gp.sigma)).exp();
    Complex64::from_polar(envelope, 2.0 * PI * x / gp.lambda)
}

/// A Gabor filter placed at a feature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gabor {
    pub params: GaborParams,
    pub at: FeaturePoint,
}

impl Gabor {
    pub fn new(params: GaborParams, at: FeaturePoint) -> Self {
        Gabor { params, at }
    }
}

impl Profile for Gabor {
    fn eval(&self, u: f64, v: f64) -> Complex64 {
        gabor_value(&self.params, &self.at, u, v)
    }

    fn window(&self) -> Window {
        let r = self.params.reach();
        Window::around(self.at.x, self.at.y, r, r)
    }
}

/// Gabor filters on a spatial grid whose orientation at each node is read
/// from a pinwheel map.
#[derive(Debug, Clone)]
pub struct RestrictedBank {
    pub params: GaborParams,
    pub map: PinwheelMap,
}

impl RestrictedBank {
    /// Filter at map node `(ix, iy)`.
    pub fn filter(&self, ix: usize, iy: usize) -> Gabor {
        let (x, y) = (self.map.xs.value(ix), self.map.ys.value(iy));
        Gabor::new(self.params, FeaturePoint::new(x, y, self.map.theta(ix, iy)))
    }

    pub fn len(&self) -> usize {
        self.map.xs.count * self.map.ys.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Keeps, at each spatial node of a Gabor bank on `(x, y, θ)`, only the filter
/// whose orientation the map prescribes there.
pub fn pinwheel_restrict(
    params: &GaborParams,
    bank_grid: &crate::geometry::FeatureGrid,
    map: &PinwheelMap,
) -> Result<RestrictedBank> {
    let xs = bank_grid.axis("x")?;
    let ys = bank_grid.axis("y")?;
    let same = |a: &crate::geometry::Axis, b: &crate::geometry::Axis| {
        a.count == b.count && (a.min - b.min).abs() <= 1e-9 * a.step && (a.step - b.step).abs() <= 1e-12 * a.step
    };
    if !same(xs, &map.xs) || !same(ys, &map.ys) {
        return Err(Error::GridMismatch("pinwheel map and bank use different spatial grids".into()));
    }
    params.validate()?;
    Ok(RestrictedBank { params: *params, map: map.clone() })
}
