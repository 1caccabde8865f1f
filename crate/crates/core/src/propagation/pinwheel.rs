use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::filterbank::{FeaturePoint, GaborParams};
use crate::geometry::{Axis, FeatureGrid, Measure};
use crate::kernel::{kernel_gabor_shifted, patch_contains, PatchSpec};
use crate::{Error, Result};

use super::{iterate_kernel, transition_operator, Init, KernelField, Nonlinearity, Realization};

/// Orientation field `θ(x, y)` on a spatial grid, stored with `x` slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct PinwheelMap {
    pub xs: Axis,
    pub ys: Axis,
    values: Vec<f64>,
}

impl PinwheelMap {
    pub fn new(xs: Axis, ys: Axis, values: Vec<f64>) -> Result<Self> {
        if values.len() != xs.count * ys.count {
            return Err(Error::GridMismatch(format!(
                "{} orientations for a {}x{} map",
                values.len(),
                xs.count,
                ys.count
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("orientation map contains non-finite values"));
        }
        Ok(PinwheelMap { xs, ys, values })
    }

    pub fn constant(xs: Axis, ys: Axis, theta: f64) -> Result<Self> {
        let n = xs.count * ys.count;
        Self::new(xs, ys, vec![theta; n])
    }

    pub fn theta(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.ys.count + iy]
    }

    /// Map-selected feature point at a node given by its coordinates.
    pub fn feature_point(&self, x: f64, y: f64) -> Result<FeaturePoint> {
        match (self.xs.index_of(x), self.ys.index_of(y)) {
            (Some(ix), Some(iy)) => Ok(FeaturePoint::new(x, y, self.theta(ix, iy))),
            _ => Err(Error::GridMismatch(format!("({x}, {y}) is not a node of the orientation map"))),
        }
    }

    /// The spatial grid, with cell-area measure.
    pub fn grid(&self) -> Result<FeatureGrid> {
        FeatureGrid::new(vec![self.xs.clone(), self.ys.clone()], Measure::GridCell)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Affinely maps orientations from `(−π/2, π/2]` onto `[lo, lo + span)`.
    pub fn rescaled(&self, lo: f64, span: f64) -> PinwheelMap {
        let values = self.values.iter().map(|t| lo + (t + PI / 2.0) / PI * span).collect();
        PinwheelMap { xs: self.xs.clone(), ys: self.ys.clone(), values }
    }
}

/// Half the phase of a superposition of `m` plane waves with wave number `k`,
/// directions `πj/m` and seeded uniform phases.
pub fn generate_pinwheel(xs: Axis, ys: Axis, m: usize, k: f64, seed: u64) -> Result<PinwheelMap> {
    if m < 2 || !(k > 0.0) || !k.is_finite() {
        return Err(Error::invalid("pinwheel synthesis needs m >= 2 waves and k > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let waves: Vec<(f64, f64, f64)> = (1..=m)
        .zip(&phases)
        .map(|(j, &phi)| {
            let a = PI * j as f64 / m as f64;
            (k * a.cos(), k * a.sin(), phi)
        })
        .collect();
    let mut values = Vec::with_capacity(xs.count * ys.count);
    for x in xs.values() {
        for y in ys.values() {
            let z: Complex64 = waves.iter().map(|&(kx, ky, phi)| Complex64::from_polar(1.0, kx * x + ky * y + phi)).sum();
            let mut t = 0.5 * z.arg();
            // arg lies in [−π, π]; fold −π/2 onto π/2
            if t <= -PI / 2.0 {
                t += PI;
            }
            values.push(t);
        }
    }
    PinwheelMap::new(xs, ys, values)
}

/// Iterates the kernel between map-selected filters from node `at0`,
/// seeded with the normalised column. Returns steps `1..=n` over `(x, y)`.
pub fn propagate_pinwheel(
    map: &PinwheelMap,
    gp: &GaborParams,
    at0: (f64, f64),
    n: usize,
    h: Nonlinearity,
    patch: Option<PatchSpec>,
) -> Result<Vec<KernelField>> {
    gp.validate()?;
    let grid = map.grid()?;
    let origin = grid
        .locate(&[at0.0, at0.1])
        .ok_or_else(|| Error::GridMismatch(format!("({}, {}) is not a node of the orientation map", at0.0, at0.1)))?;
    let points: Vec<FeaturePoint> = (0..grid.len())
        .map(|i| {
            let c = grid.coords(i);
            let (ix, iy) = (i / map.ys.count, i % map.ys.count);
            FeaturePoint::new(c[0], c[1], map.theta(ix, iy))
        })
        .collect();
    let gp = *gp;
    let truncated = patch.is_some();
    let k = move |p: usize, q: usize| {
        let (a, b) = (&points[p], &points[q]);
        match &patch {
            Some(ps) if !patch_contains(ps, a, b) => 0.0,
            _ => kernel_gabor_shifted(&gp, a, b),
        }
    };
    let op = transition_operator(k, &grid, h, Realization::Materialized, truncated)?;
    iterate_kernel(&op, &grid, origin, n, Init::Normalized)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes(half: f64, step: f64) -> (Axis, Axis) {
        (Axis::symmetric("x", half, step).unwrap(), Axis::symmetric("y", half, step).unwrap())
    }

    fn wrapped(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(PI);
        d.min(PI - d)
    }

    #[test]
    fn two_waves_have_constant_orientation_along_a_crest_line() {
        // e^{ia} + e^{ib} = 2cos((a−b)/2)·e^{i(a+b)/2}; with a = ky + φ1 and
        // b = −kx + φ2, a + b is constant on y = x + c, so θ is constant there
        // wherever the cosine keeps its sign
        let (xs, ys) = axes(4.0, 0.25);
        let k = 1.3;
        let map = generate_pinwheel(xs, ys, 2, k, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (p1, p2): (f64, f64) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
        let c = 0.5;
        let mut seen = Vec::new();
        for ix in 0..map.xs.count {
            let x = map.xs.value(ix);
            let Some(iy) = map.ys.index_of(x + c) else { continue };
            let half_diff = 0.5 * (k * (x + c) + p1 + k * x - p2);
            if half_diff.cos() > 1e-3 {
                seen.push(map.theta(ix, iy));
            }
        }
        assert!(seen.len() > 3);
        let expected = 0.25 * (k * c + p1 + p2);
        for t in seen {
            assert!(wrapped(t, expected) < 1e-9, "{t} vs {expected}");
        }
    }

    #[test]
    fn same_seed_gives_the_same_map() {
        let (xs, ys) = axes(2.0, 0.5);
        let a = generate_pinwheel(xs.clone(), ys.clone(), 30, 0.6, 3).unwrap();
        let b = generate_pinwheel(xs.clone(), ys.clone(), 30, 0.6, 3).unwrap();
        let c = generate_pinwheel(xs, ys, 30, 0.6, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.values().iter().all(|t| *t > -PI / 2.0 && *t <= PI / 2.0));
    }

    #[test]
    fn orientation_histogram_is_roughly_uniform() {
        // chi-square over 12 bins on a thinned lattice (spacing well above
        // the correlation length) against the 5% critical value for 11 dof
        let xs = Axis::new("x", 0.0, 3.0, 60).unwrap();
        let ys = Axis::new("y", 0.0, 3.0, 60).unwrap();
        let map = generate_pinwheel(xs, ys, 30, 2.0 * PI / 5.0, 11).unwrap();
        let mut bins = [0usize; 12];
        for t in map.values() {
            let b = (((t + PI / 2.0) / PI) * 12.0).floor().min(11.0) as usize;
            bins[b] += 1;
        }
        let e = map.values().len() as f64 / 12.0;
        let chi2: f64 = bins.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 19.675, "chi2 = {chi2}, bins {bins:?}");
    }

    #[test]
    fn rejects_bad_synthesis_parameters() {
        let (xs, ys) = axes(1.0, 0.5);
        assert!(generate_pinwheel(xs.clone(), ys.clone(), 1, 1.0, 0).is_err());
        assert!(generate_pinwheel(xs, ys, 4, 0.0, 0).is_err());
    }

    #[test]
    fn constant_map_propagation_is_mirror_symmetric() {
        // θ = 0: the fixed-orientation kernel is even in y and the x-axis grid
        // is symmetric, so each step is invariant under y -> −y
        let (xs, ys) = axes(2.0, 0.25);
        let map = PinwheelMap::constant(xs, ys, 0.0).unwrap();
        let steps = propagate_pinwheel(&map, &GaborParams::default(), (0.0, 0.0), 3, Nonlinearity::default(), None).unwrap();
        let ny = map.ys.count;
        for f in &steps {
            let v = &f.field.values;
            for ix in 0..map.xs.count {
                for iy in 0..ny {
                    let a = v[ix * ny + iy];
                    let b = v[ix * ny + (ny - 1 - iy)];
                    assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
                }
            }
            assert!((f.field.integral() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn first_step_is_the_normalised_column() {
        let (xs, ys) = axes(1.0, 0.25);
        let map = generate_pinwheel(xs, ys, 8, 1.0, 5).unwrap();
        let gp = GaborParams::default();
        let steps = propagate_pinwheel(&map, &gp, (0.0, 0.0), 1, Nonlinearity::default(), None).unwrap();
        let col = &steps[0].field.values;
        // positive exactly where the rectified kernel to the origin is
        let grid = map.grid().unwrap();
        let o = map.feature_point(0.0, 0.0).unwrap();
        for i in 0..grid.len() {
            let c = grid.coords(i);
            let k = kernel_gabor_shifted(&gp, &map.feature_point(c[0], c[1]).unwrap(), &o);
            assert_eq!(col[i] > 0.0, k > 0.0);
        }
    }

    #[test]
    fn off_map_origin_is_rejected() {
        let (xs, ys) = axes(1.0, 0.5);
        let map = PinwheelMap::constant(xs, ys, 0.0).unwrap();
        let r = propagate_pinwheel(&map, &GaborParams::default(), (0.2, 0.0), 1, Nonlinearity::default(), None);
        assert!(matches!(r, Err(Error::GridMismatch(_))));
    }
}
