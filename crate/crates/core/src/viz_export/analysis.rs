use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::GridField;
use crate::propagation::PinwheelMap;
use crate::{Error, Result};

use super::{ArgmaxField, Projection2D};

/// Grid points on the level `L`: points equal to `L`, and points above `L`
/// with an axis neighbour below it. Empty exactly when `L` is outside the
/// field's range.
pub fn level_set(field: &GridField, level: f64) -> Vec<usize> {
    let v = &field.values;
    (0..v.len())
        .filter(|&i| {
            if v[i] == level {
                return true;
            }
            if v[i] < level {
                return false;
            }
            let mut below = false;
            field.grid.for_each_neighbor(i, |j| below |= v[j] < level);
            below
        })
        .collect()
}

/// Connected components of `{f > level}` under axis adjacency, each sorted,
/// ordered by their first point.
pub fn components_above(field: &GridField, level: f64) -> Vec<Vec<usize>> {
    let v = &field.values;
    let mut seen = vec![false; v.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..v.len() {
        if seen[start] || !(v[start] > level) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(i) = stack.pop() {
            comp.push(i);
            field.grid.for_each_neighbor(i, |j| {
                if !seen[j] && v[j] > level {
                    seen[j] = true;
                    stack.push(j);
                }
            });
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Linear-interpolated percentile of a sample.
fn percentile(mut values: Vec<f64>, pct: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let rank = (pct / 100.0).clamp(0.0, 1.0) * (values.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    Some(values[lo] + (rank - lo as f64) * (values[hi] - values[lo]))
}

/// Percentile of the strictly positive values; `None` if there are none.
pub fn percentile_positive(values: &[f64], pct: f64) -> Option<f64> {
    percentile(values.iter().copied().filter(|v| *v > 0.0).collect(), pct)
}

fn two_axes(field: &GridField) -> Result<(usize, usize)> {
    let axes = field.grid.axes();
    if axes.len() != 2 {
        return Err(Error::GridMismatch("expected a field over two spatial axes".into()));
    }
    Ok((axes[0].count, axes[1].count))
}

/// μ-integral of a planar field over the double cone of half-angle
/// `half_angle` around the direction `axis_angle` through `origin`, the
/// apex itself excluded.
pub fn cone_mass(field: &GridField, origin: (f64, f64), axis_angle: f64, half_angle: f64) -> Result<f64> {
    two_axes(field)?;
    let mut sum = 0.0;
    for i in 0..field.values.len() {
        let (dx, dy) = (field.grid.coord(i, 0) - origin.0, field.grid.coord(i, 1) - origin.1);
        if dx == 0.0 && dy == 0.0 {
            continue;
        }
        let d = (dy.atan2(dx) - axis_angle).rem_euclid(PI);
        if d.min(PI - d) <= half_angle + 1e-12 {
            sum += field.grid.weight(i) * field.values[i];
        }
    }
    Ok(sum)
}

/// Orientation difference folded into `[0, π/2]`.
fn orientation_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Mean orientation gap between the masked map nodes and node `origin`.
pub fn patchiness(map: &PinwheelMap, mask: &[bool], origin: (usize, usize)) -> Option<f64> {
    let t0 = map.theta(origin.0, origin.1);
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        sum += orientation_gap(map.values()[i], t0);
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchinessReport {
    pub statistic: f64,
    pub count: usize,
    /// 5th percentile of the statistic over random masks of equal size.
    pub baseline_p5: f64,
    pub baseline_mean: f64,
    pub trials: usize,
}

impl PatchinessReport {
    pub fn is_patchy(&self) -> bool {
        self.statistic < self.baseline_p5
    }
}

/// Compares [`patchiness`] of `mask` against uniformly drawn masks with the
/// same number of nodes.
pub fn patchiness_report(
    map: &PinwheelMap,
    mask: &[bool],
    origin: (usize, usize),
    trials: usize,
    seed: u64,
) -> Result<PatchinessReport> {
    let n = map.values().len();
    if mask.len() != n {
        return Err(Error::GridMismatch("mask and map sizes differ".into()));
    }
    if origin.0 >= map.xs.count || origin.1 >= map.ys.count {
        return Err(Error::GridMismatch("origin is off the map".into()));
    }
    let count = mask.iter().filter(|m| **m).count();
    let statistic = patchiness(map, mask, origin).ok_or_else(|| Error::invalid("empty suprathreshold mask"))?;
    if trials == 0 {
        return Err(Error::invalid("at least one random mask is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t0 = map.theta(origin.0, origin.1);
    let baseline: Vec<f64> = (0..trials)
        .map(|_| {
            let picks = rand::seq::index::sample(&mut rng, n, count);
            picks.iter().map(|i| orientation_gap(map.values()[i], t0)).sum::<f64>() / count as f64
        })
        .collect();
    let baseline_mean = baseline.iter().sum::<f64>() / trials as f64;
    let baseline_p5 = percentile(baseline, 5.0).expect("non-empty");
    Ok(PatchinessReport { statistic, count, baseline_p5, baseline_mean, trials })
}

/// Radius of the circle best matching the glyph orientations of an argmax
/// field: a glyph at distance `r` from `origin` turned by `Δ` from
/// `reference` lies on a circle through the origin tangent to `reference`
/// when `2 sin(|Δ|/2) = r κ`. κ is the peak-weighted least-squares fit over
/// masked nodes farther than `min_radius`. Returns `∞` for straight fields.
pub fn curvature_radius(af: &ArgmaxField, origin: (f64, f64), reference: f64, min_radius: f64) -> Result<f64> {
    if af.grid.axes().len() != 2 {
        return Err(Error::GridMismatch("curvature fit needs a planar argmax field".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..af.index.len() {
        let Some(theta) = af.coord(i) else { continue };
        let r = (af.grid.coord(i, 0) - origin.0).hypot(af.grid.coord(i, 1) - origin.1);
        if r <= min_radius {
            continue;
        }
        let w = af.peak[i];
        num += w * r * 2.0 * (0.5 * orientation_gap(theta, reference)).sin();
        den += w * r * r;
    }
    if den <= 0.0 {
        return Err(Error::invalid("no masked glyphs outside the exclusion radius"));
    }
    Ok(if num > 0.0 { den / num } else { f64::INFINITY })
}

/// Shape of a suprathreshold blob from its weighted second moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anisotropy {
    /// Largest over smallest covariance eigenvalue.
    pub ratio: f64,
    /// Direction of the major axis, in `[0, π)`.
    pub major_axis: f64,
    /// Nodes in the blob.
    pub size: usize,
}

/// Second-moment anisotropy of the component of `{f > threshold}` that
/// contains the node `origin`, with the field values as weights.
pub fn second_moment_anisotropy(p: &Projection2D, threshold: f64, origin: (f64, f64)) -> Result<Anisotropy> {
    two_axes(&p.field)?;
    let o = p
        .field
        .grid
        .locate(&[origin.0, origin.1])
        .ok_or_else(|| Error::GridMismatch("origin is not a grid node".into()))?;
    let comp = components_above(&p.field, threshold)
        .into_iter()
        .find(|c| c.binary_search(&o).is_ok())
        .ok_or_else(|| Error::invalid("origin is below the threshold"))?;
    let g = &p.field.grid;
    let (mut sw, mut mx, mut my) = (0.0, 0.0, 0.0);
    for &i in &comp {
        let w = p.field.values[i];
        sw += w;
        mx += w * g.coord(i, 0);
        my += w * g.coord(i, 1);
    }
    mx /= sw;
    my /= sw;
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for &i in &comp {
        let w = p.field.values[i] / sw;
        let (dx, dy) = (g.coord(i, 0) - mx, g.coord(i, 1) - my);
        cxx += w * dx * dx;
        cyy += w * dy * dy;
        cxy += w * dx * dy;
    }
    let mean = 0.5 * (cxx + cyy);
    let rad = (0.25 * (cxx - cyy).powi(2) + cxy * cxy).sqrt();
    let (big, small) = (mean + rad, mean - rad);
    Ok(Anisotropy {
        ratio: big / small.max(1e-12 * big.max(1e-300)),
        major_axis: (0.5 * (2.0 * cxy).atan2(cxx - cyy)).rem_euclid(PI),
        size: comp.len(),
    })
}
