use num_complex::Complex64;

use super::{gabor_value, FeaturePoint, GaborParams, Profile, Window};
use crate::{Error, Result};

/// Weighted difference `c_s·ψ^S − c_l·ψ^L` of a short and a long Gabor
/// sharing position and orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndstopParams {
    pub c_short: f64,
    pub c_long: f64,
    pub short: GaborParams,
    pub long: GaborParams,
}

impl EndstopParams {
    pub fn new(c_short: f64, c_long: f64, short: GaborParams, long: GaborParams) -> Result<Self> {
        let ep = EndstopParams { c_short, c_long, short, long };
        ep.validate()?;
        Ok(ep)
    }

    /// Pair whose envelopes share `base.sigma` across the stripes and extend
    /// `length` and `ratio·length` along them.
    pub fn with_length(c_short: f64, c_long: f64, base: GaborParams, length: f64, ratio: f64) -> Result<Self> {
        if !(length > 0.0) || !(ratio > 1.0) {
            return Err(Error::invalid(format!(
                "endstop length must be positive and the long/short ratio above 1 (got {length}, {ratio})"
            )));
        }
        let short = base.with_aspect(length / base.sigma)?;
        let long = base.with_aspect(ratio * length / base.sigma)?;
        EndstopParams::new(c_short, c_long, short, long)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_long > 0.0 && self.c_short > self.c_long && self.c_short.is_finite()) {
            return Err(Error::invalid(format!(
                "endstop weights need c_short > c_long > 0 (got {} and {})",
                self.c_short, self.c_long
            )));
        }
        self.short.validate()?;
        self.long.validate()
    }
}

pub fn endstopped_value(ep: &EndstopParams, p: &FeaturePoint, u: f64, v: f64) -> Complex64 {
    gabor_value(&ep.short, p, u, v) * ep.c_short - gabor_value(&ep.long, p, u, v) * ep.c_long
}

/// Rectified response `h(c_s·h(r_s) − c_l·h(r_l))` with `h(z) = max(0, z)`.
pub fn endstopped_response(ep: &EndstopParams, r_short: f64, r_long: f64) -> f64 {
    (ep.c_short * r_short.max(0.0) - ep.c_long * r_long.max(0.0)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endstopped {
    pub params: EndstopParams,
    pub at: FeaturePoint,
}

impl Profile for Endstopped {
    fn eval(&self, u: f64, v: f64) -> Complex64 {
        endstopped_value(&self.params, &self.at, u, v)
    }

    fn window(&self) -> Window {
        let r = self.params.short.reach().max(self.params.long.reach());
        Window::around(self.at.x, self.at.y, r, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(c_s: f64, c_l: f64) -> Result<EndstopParams> {
        EndstopParams::new(c_s, c_l, GaborParams::new(1.0, 0.4)?, GaborParams::new(1.0, 0.8)?)
    }

    #[test]
    fn weights_must_be_ordered() {
        assert!(pair(1.0, 1.0).is_err());
        assert!(pair(1.0, 0.0).is_err());
        assert!(pair(1.0, 2.0).is_err());
        assert!(pair(2.0, 1.0).is_ok());
    }

    #[test]
    fn centre_value_is_weight_difference() {
        let ep = pair(2.0, 1.0).unwrap();
        let p = FeaturePoint::new(0.4, -0.3, 1.1);
        let z = endstopped_value(&ep, &p, p.x, p.y);
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn vanishing_long_weight_leaves_the_short_filter() {
        let ep = pair(1.0, 1e-12).unwrap();
        let p = FeaturePoint::new(0.0, 0.0, 0.3);
        for (u, v) in [(0.1, 0.2), (-0.5, 0.7), (1.0, -1.0)] {
            let d = endstopped_value(&ep, &p, u, v) - gabor_value(&ep.short, &p, u, v);
            assert!(d.norm() < 1e-11);
        }
    }

    #[test]
    fn nested_rectifiers() {
        let ep = pair(2.0, 1.0).unwrap();
        assert_eq!(endstopped_response(&ep, 0.0, 0.0), 0.0);
        assert_eq!(endstopped_response(&ep, -5.0, 3.0), 0.0);
        for (rs, rl) in [(1.0, 0.5), (0.3, 2.0), (4.0, 1.0)] {
            let linear = (ep.c_short * rs - ep.c_long * rl).max(0.0);
            assert_eq!(endstopped_response(&ep, rs, rl), linear);
        }
    }

    #[test]
    fn length_builder_sets_axial_extents() {
        let ep = EndstopParams::with_length(2.0, 1.0, GaborParams::default(), 1.0, 1.5).unwrap();
        assert!((ep.short.sigma * ep.short.aspect - 1.0).abs() < 1e-15);
        assert!((ep.long.sigma * ep.long.aspect - 1.5).abs() < 1e-15);
        assert!(EndstopParams::with_length(2.0, 1.0, GaborParams::default(), 1.0, 1.0).is_err());
    }
}
