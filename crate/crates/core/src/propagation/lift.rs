use ndarray::Array2;
use rayon::prelude::*;

use crate::filterbank::Profile;
use crate::geometry::{FeatureGrid, GridField};
use crate::{Error, Result};

use super::{Activation, Nonlinearity};

/// Plane coordinates of pixel `(row, col)` for an image of `shape`
/// `(height, width)` sampled at spacing `pixel`: columns run along +x, rows
/// downwards along −y, and pixel `(height/2, width/2)` sits at the origin.
pub fn image_lattice_point(shape: (usize, usize), row: usize, col: usize, pixel: f64) -> (f64, f64) {
    let (cr, cc) = (shape.0 / 2, shape.1 / 2);
    ((col as f64 - cc as f64) * pixel, (cr as f64 - row as f64) * pixel)
}

fn lattice_index(v: f64, pixel: f64) -> Result<isize> {
    let r = v / pixel;
    if (r - r.round()).abs() > 1e-6 {
        return Err(Error::GridMismatch(format!("coordinate {v} is not on the pixel lattice of spacing {pixel}")));
    }
    Ok(r.round() as isize)
}

/// `I_0(p) = h(Re ∫ I ψ_p)` on a grid with axes `(x, y, feature)`, where the
/// filter at `p` is `bases[feature]` translated to `(x, y)`. The integral is
/// the pixel-lattice Riemann sum; the image is zero outside its frame.
pub fn lift_image(
    image: &Array2<f64>,
    pixel: f64,
    bases: &[&dyn Profile],
    grid: &FeatureGrid,
    h: Nonlinearity,
) -> Result<Activation> {
    let axes = grid.axes();
    if axes.len() != 3 || axes[0].name != "x" || axes[1].name != "y" {
        return Err(Error::GridMismatch("lifting needs a grid with axes (x, y, feature)".into()));
    }
    if axes[2].count != bases.len() {
        return Err(Error::GridMismatch(format!("{} filters for {} features", bases.len(), axes[2].count)));
    }
    if !(pixel > 0.0) || image.is_empty() {
        return Err(Error::invalid("lifting needs a non-empty image and a positive pixel size"));
    }
    let (height, width) = image.dim();
    let (cr, cc) = ((height / 2) as isize, (width / 2) as isize);
    let cols: Vec<isize> = axes[0].values().iter().map(|&x| lattice_index(x, pixel)).collect::<Result<_>>()?;
    let rows: Vec<isize> = axes[1].values().iter().map(|&y| lattice_index(y, pixel)).collect::<Result<_>>()?;

    // real parts of the bases on their lattice windows: (dx, dy, weight)
    let templates: Vec<Vec<(isize, isize, f64)>> = bases
        .iter()
        .map(|b| {
            let w = b.window();
            let (i0, i1) = ((w.x0 / pixel - 1e-9).ceil() as isize, (w.x1 / pixel + 1e-9).floor() as isize);
            let (j0, j1) = ((w.y0 / pixel - 1e-9).ceil() as isize, (w.y1 / pixel + 1e-9).floor() as isize);
            let mut t = Vec::new();
            for i in i0..=i1 {
                for j in j0..=j1 {
                    let v = b.eval(i as f64 * pixel, j as f64 * pixel).re;
                    if v != 0.0 {
                        t.push((i, j, v));
                    }
                }
            }
            t
        })
        .collect();

    let nf = bases.len();
    let ny = rows.len();
    let area = pixel * pixel;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let f = idx % nf;
            let (ix, iy) = ((idx / nf) / ny, (idx / nf) % ny);
            let mut sum = 0.0;
            for &(dx, dy, w) in &templates[f] {
                let r = cr - rows[iy] - dy;
                let c = cc + cols[ix] + dx;
                if r >= 0 && c >= 0 && (r as usize) < height && (c as usize) < width {
                    sum += w * image[[r as usize, c as usize]];
                }
            }
            h.apply(sum * area)
        })
        .collect();
    Ok(Activation { field: GridField::new(grid.clone(), values)?, step: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::{FeaturePoint, Gabor, GaborParams};
    use crate::geometry::{Axis, Measure};

    fn setup() -> (Vec<Gabor>, FeatureGrid) {
        let gp = GaborParams::default();
        let thetas = Axis::new("theta", -std::f64::consts::FRAC_PI_2, std::f64::consts::PI / 12.0, 12).unwrap();
        let bases = thetas.values().iter().map(|&t| Gabor::new(gp, FeaturePoint::new(0.0, 0.0, t))).collect();
        let grid = FeatureGrid::new(
            vec![Axis::symmetric("x", 0.5, 0.1).unwrap(), Axis::symmetric("y", 0.5, 0.1).unwrap(), thetas],
            Measure::GridCell,
        )
        .unwrap();
        (bases, grid)
    }

    #[test]
    fn blank_image_lifts_to_zero() {
        let (bases, grid) = setup();
        let refs: Vec<&dyn Profile> = bases.iter().map(|b| b as &dyn Profile).collect();
        let a = lift_image(&Array2::zeros((41, 41)), 0.1, &refs, &grid, Nonlinearity::default()).unwrap();
        assert!(a.field.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn a_filter_image_is_matched_by_its_own_orientation() {
        let (bases, grid) = setup();
        let refs: Vec<&dyn Profile> = bases.iter().map(|b| b as &dyn Profile).collect();
        let pixel = 0.1;
        let target = 4;
        let img = Array2::from_shape_fn((41, 41), |(r, c)| {
            let (x, y) = image_lattice_point((41, 41), r, c, pixel);
            bases[target].eval(x, y).re
        });
        let a = lift_image(&img, pixel, &refs, &grid, Nonlinearity::default()).unwrap();
        let at = |f: usize| a.field.values[grid.index(&[5, 5, f])];
        let best = (0..12).max_by(|&i, &j| at(i).total_cmp(&at(j))).unwrap();
        assert_eq!(best, target);
    }

    #[test]
    fn off_lattice_grids_are_rejected() {
        let (bases, _) = setup();
        let refs: Vec<&dyn Profile> = bases.iter().map(|b| b as &dyn Profile).collect();
        let grid = FeatureGrid::new(
            vec![
                Axis::new("x", 0.05, 0.1, 3).unwrap(),
                Axis::new("y", 0.0, 0.1, 3).unwrap(),
                Axis::new("theta", 0.0, 0.5, 12).unwrap(),
            ],
            Measure::GridCell,
        )
        .unwrap();
        let r = lift_image(&Array2::zeros((9, 9)), 0.1, &refs, &grid, Nonlinearity::default());
        assert!(matches!(r, Err(Error::GridMismatch(_))));
    }
}
