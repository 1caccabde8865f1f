use crate::filterbank::{FeaturePoint, GaborParams, Profile};
use crate::geometry::FeatureGrid;
use crate::kernel::{equalize_norms, kernel_gabor_shifted, patch_contains, PatchSpec, ShiftTable};
use crate::{Error, Result};

use super::operator::ShiftInvariantMatrix;
use super::{Nonlinearity, TransitionOperator};

/// A bank obtained by translating a few base filters over the `(x, y)` nodes
/// of a grid with axes `(x, y, feature)`, together with its kernel table.
#[derive(Debug, Clone)]
pub struct TranslationBank {
    grid: FeatureGrid,
    table: ShiftTable,
    eta: f64,
    truncated: bool,
}

fn check_layout(grid: &FeatureGrid) -> Result<()> {
    let axes = grid.axes();
    if axes.len() != 3 || axes[0].name != "x" || axes[1].name != "y" {
        return Err(Error::GridMismatch("translation banks need axes (x, y, feature)".into()));
    }
    Ok(())
}

impl TranslationBank {
    /// Isotropic Gabor filters at every node of a grid with axes `(x, y, theta)`;
    /// the kernel comes from the closed form.
    pub fn gabor(gp: &GaborParams, grid: FeatureGrid) -> Result<Self> {
        check_layout(&grid)?;
        gp.validate()?;
        if !gp.is_isotropic() {
            return Err(Error::Unsupported("closed-form kernel needs an isotropic envelope".into()));
        }
        let thetas = grid.axis("theta")?.values();
        let (ax, ay) = (&grid.axes()[0], &grid.axes()[1]);
        let (hx, hy) = (ax.step, ay.step);
        let table = ShiftTable::from_fn(thetas.len(), (ax.count - 1, ay.count - 1), |i, j, dx, dy| {
            let p = FeaturePoint::new(dx as f64 * hx, dy as f64 * hy, thetas[i]);
            kernel_gabor_shifted(gp, &p, &FeaturePoint::new(0.0, 0.0, thetas[j]))
        });
        Ok(TranslationBank { grid, table, eta: gp.norm_sq(), truncated: false })
    }

    /// Translated copies of sampled profiles: `bases[k]` is the filter of
    /// feature `k` placed at the origin. The kernel is a `delta`-lattice
    /// Riemann sum; grid steps must be whole multiples of `delta`. Filters
    /// whose norms spread are rescaled to their mean norm.
    pub fn from_profiles(bases: &[&dyn Profile], grid: FeatureGrid, delta: f64) -> Result<Self> {
        check_layout(&grid)?;
        if bases.len() != grid.axes()[2].count {
            return Err(Error::GridMismatch(format!(
                "{} base filters for a feature axis of {} samples",
                bases.len(),
                grid.axes()[2].count
            )));
        }
        let stride = |step: f64| -> Result<usize> {
            let r = step / delta;
            if (r - r.round()).abs() > 1e-6 || r.round() < 1.0 {
                return Err(Error::GridMismatch(format!("grid step {step} is not a multiple of the lattice spacing {delta}")));
            }
            Ok(r.round() as usize)
        };
        let (ax, ay) = (&grid.axes()[0], &grid.axes()[1]);
        let strides = (stride(ax.step)?, stride(ay.step)?);
        let mut table = ShiftTable::correlate(bases, delta, strides, (ax.count - 1, ay.count - 1))?;
        let (eta, scales) = equalize_norms(&table.norms())?;
        if scales.iter().any(|s| *s != 1.0) {
            table.scale_features(&scales);
        }
        Ok(TranslationBank { grid, table, eta, truncated: false })
    }

    /// Zeroes the kernel outside each filter's patch. The feature axis must
    /// be `theta`.
    pub fn truncate(&mut self, ps: &PatchSpec) -> Result<()> {
        let thetas = self.grid.axis("theta")?.values();
        let (hx, hy) = (self.grid.axes()[0].step, self.grid.axes()[1].step);
        self.table.map_in_place(|i, j, dx, dy, v| {
            let p = FeaturePoint::new(dx as f64 * hx, dy as f64 * hy, thetas[i]);
            if patch_contains(ps, &p, &FeaturePoint::new(0.0, 0.0, thetas[j])) {
                v
            } else {
                0.0
            }
        });
        self.truncated = true;
        Ok(())
    }

    pub fn grid(&self) -> &FeatureGrid {
        &self.grid
    }

    pub fn table(&self) -> &ShiftTable {
        &self.table
    }

    /// Common squared norm of the filters.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// `K(p, q)` between grid points.
    pub fn kernel(&self, p: usize, q: usize) -> f64 {
        let nf = self.table.features();
        let ny = self.grid.axes()[1].count;
        let (pz, qz) = (p / nf, q / nf);
        let dx = (pz / ny) as isize - (qz / ny) as isize;
        let dy = (pz % ny) as isize - (qz % ny) as isize;
        self.table.get(p % nf, q % nf, dx, dy)
    }

    /// `K(·, origin)` over the grid.
    pub fn kernel_column(&self, origin: usize) -> Vec<f64> {
        (0..self.grid.len()).map(|p| self.kernel(p, origin)).collect()
    }

    /// `S[K]` with `h` applied to every table entry.
    pub fn operator(&self, h: Nonlinearity) -> Result<TransitionOperator> {
        let mut rectified = self.table.clone();
        rectified.map_in_place(|_, _, _, _, v| h.apply(v));
        let (nx, ny) = (self.grid.axes()[0].count, self.grid.axes()[1].count);
        let matrix = ShiftInvariantMatrix::new(&rectified, nx, ny)?;
        TransitionOperator::new(Box::new(matrix), &self.grid, h, self.truncated)
    }
}
