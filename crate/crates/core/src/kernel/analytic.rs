use std::f64::consts::PI;

use crate::filterbank::{
    FeaturePoint, GaborParams, SeparablePoint, SpaceTimeGabor, SpaceTimePoint, SpatioTemporalParams,
};
use crate::propagation::{KernelField, PinwheelMap};
use crate::{Error, Result};

use super::numeric::{kernel_numeric_3d, QuadratureStep};

/// Closed-form Gabor kernel between `p` and the filter at the origin:
/// `σ²π·exp(−(x² + y²)/4σ² − 2σ²π²(1 − cos θ)/λ²)·cos(π(x(1 + cos θ) + y sin θ)/λ)`.
///
/// Only the isotropic envelope is covered; `gp.aspect` is ignored.
pub fn kernel_gabor_analytic(gp: &GaborParams, p: &FeaturePoint) -> f64 {
    debug_assert!(gp.is_isotropic(), "closed form assumes an isotropic envelope");
    gabor_closed_form(gp, p.x, p.y, p.theta)
}

#[inline]
fn gabor_closed_form(gp: &GaborParams, x: f64, y: f64, theta: f64) -> f64 {
    let s2 = gp.sigma * gp.sigma;
    let (st, ct) = theta.sin_cos();
    let decay = -(x * x + y * y) / (4.0 * s2) - 2.0 * s2 * PI * PI * (1.0 - ct) / (gp.lambda * gp.lambda);
    s2 * PI * decay.exp() * (PI * (x * (1.0 + ct) + y * st) / gp.lambda).cos()
}

/// Coordinates `(a, b, δ)` of `p` relative to `p0`: translate by `−(x0, y0)`,
/// rotate by `−θ0`, and take the orientation difference.
#[inline]
pub fn group_coordinates(p: &FeaturePoint, p0: &FeaturePoint) -> (f64, f64, f64) {
    let (s0, c0) = p0.theta.sin_cos();
    let (dx, dy) = (p.x - p0.x, p.y - p0.y);
    (dx * c0 + dy * s0, -dx * s0 + dy * c0, p.theta - p0.theta)
}

/// `K(p, p0)` through the group action on the closed form.
pub fn kernel_gabor_shifted(gp: &GaborParams, p: &FeaturePoint, p0: &FeaturePoint) -> f64 {
    debug_assert!(gp.is_isotropic(), "closed form assumes an isotropic envelope");
    let (a, b, d) = group_coordinates(p, p0);
    gabor_closed_form(gp, a, b, d)
}

/// `sqrt(2(η − k))`, the L² distance between two profiles of squared norm η.
pub fn kernel_distance(eta: f64, k: f64) -> Result<f64> {
    if k > eta + 1e-9 * eta.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotNormalized { value: k, eta });
    }
    Ok((2.0 * (eta - k)).max(0.0).sqrt())
}

/// Width of the patch around each filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchSpec {
    pub lambda: f64,
}

impl PatchSpec {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("patch width must be positive (got {lambda})")));
        }
        Ok(PatchSpec { lambda })
    }
}

/// `|a(1 + cos δ) + b sin δ|`; the patch is where this stays below λ.
///
/// Equals `|2 cos(δ/2)·⟨z − z0, e_{(θ+θ0)/2}⟩|`, so it is symmetric in `p`
/// and `p0` and 2π-periodic in both orientations.
#[inline]
pub fn patch_excess(p: &FeaturePoint, p0: &FeaturePoint) -> f64 {
    let (a, b, d) = group_coordinates(p, p0);
    let (sd, cd) = d.sin_cos();
    (a * (1.0 + cd) + b * sd).abs()
}

pub fn patch_contains(ps: &PatchSpec, p: &FeaturePoint, p0: &FeaturePoint) -> bool {
    patch_excess(p, p0) < ps.lambda
}

/// Zeroes the field outside the patch of its origin. With `floor`, values
/// below it are raised to it as well.
pub fn truncate_kernel(field: &KernelField, ps: &PatchSpec, floor: Option<f64>) -> Result<KernelField> {
    let g = &field.field.grid;
    let (kx, ky, kt) = (g.axis_index("x")?, g.axis_index("y")?, g.axis_index("theta")?);
    let o = &field.origin;
    let p0 = FeaturePoint::new(o[kx], o[ky], o[kt]);
    let mut out = field.clone();
    for (idx, v) in out.field.values.iter_mut().enumerate() {
        let p = FeaturePoint::new(g.coord(idx, kx), g.coord(idx, ky), g.coord(idx, kt));
        if !patch_contains(ps, &p, &p0) {
            *v = 0.0;
        } else if let Some(f) = floor {
            *v = v.max(f);
        }
    }
    out.truncated = true;
    Ok(out)
}

/// `(‖Re ψ‖², ‖Im ψ‖²)` of an isotropic Gabor filter.
pub fn gabor_energy_split(gp: &GaborParams) -> (f64, f64) {
    let eta = gp.norm_sq();
    let q = (-4.0 * PI * PI * gp.sigma * gp.sigma / (gp.lambda * gp.lambda)).exp();
    (0.5 * eta * (1.0 + q), 0.5 * eta * (1.0 - q))
}

/// Squared norm `σ²π·β√π` of a space-time Gabor filter.
pub fn spatiotemporal_norm_sq(sp: &SpatioTemporalParams) -> f64 {
    sp.gabor.norm_sq() * sp.beta * PI.sqrt()
}

/// Space-time kernel. For equal peak times it factorises as
/// `K_spatial·β√π·exp(−π²β²(α − α0)²)`; otherwise it is computed by
/// quadrature of the two filters.
pub fn kernel_spatiotemporal(sp: &SpatioTemporalParams, p: &SpaceTimePoint, p0: &SpaceTimePoint) -> Result<f64> {
    if p.t == p0.t {
        let spatial = kernel_gabor_shifted(&sp.gabor, &p.at, &p0.at);
        let da = p.alpha - p0.alpha;
        return Ok(spatial * sp.beta * PI.sqrt() * (-PI * PI * sp.beta * sp.beta * da * da).exp());
    }
    let a = SpaceTimeGabor { params: *sp, at: *p };
    let b = SpaceTimeGabor { params: *sp, at: *p0 };
    kernel_numeric_3d(&a, &b, QuadratureStep::fine(sp))
}

/// Kernel between separability-weighted filters, expanded bilinearly over
/// the `±α` branches.
pub fn kernel_c_family(sp: &SpatioTemporalParams, q: &SeparablePoint, q0: &SeparablePoint) -> Result<f64> {
    let (qp, qm) = q.branches();
    let (rp, rm) = q0.branches();
    let (c, c0) = (q.c, q0.c);
    Ok(c * c0 * kernel_spatiotemporal(sp, &qp, &rp)?
        + c * (1.0 - c0) * kernel_spatiotemporal(sp, &qp, &rm)?
        + (1.0 - c) * c0 * kernel_spatiotemporal(sp, &qm, &rp)?
        + (1.0 - c) * (1.0 - c0) * kernel_spatiotemporal(sp, &qm, &rm)?)
}

/// Kernel between the map-selected filters at two map nodes.
pub fn kernel_pinwheel(map: &PinwheelMap, gp: &GaborParams, at: (f64, f64), at0: (f64, f64)) -> Result<f64> {
    let p = map.feature_point(at.0, at.1)?;
    let p0 = map.feature_point(at0.0, at0.1)?;
    Ok(kernel_gabor_shifted(gp, &p, &p0))
}
