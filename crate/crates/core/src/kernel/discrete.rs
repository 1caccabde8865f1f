use rayon::prelude::*;

use crate::filterbank::DiscreteFilter;
use crate::geometry::{Axis, FeatureGrid, GridField, Measure};
use crate::{Error, Result};

/// `K((x, y, f), (0, 0, origin))` for a bank of equally shaped, centred
/// lattice filters translated over their own lattice. Shifts reach as far as
/// two filters still overlap, so an `h × w` bank gives a
/// `(2w − 1) × (2h − 1)` plane per feature, on axes `(x, y, feature)`.
pub fn discrete_kernel_column(bank: &[DiscreteFilter], origin: usize) -> Result<GridField> {
    let f0 = bank.get(origin).ok_or_else(|| Error::invalid(format!("feature {origin} is not in the bank")))?;
    let (h, w, delta) = (f0.height(), f0.width(), f0.delta());
    if bank.iter().any(|f| f.height() != h || f.width() != w || f.delta() != delta) {
        return Err(Error::GridMismatch("bank filters must share shape and spacing".into()));
    }
    if h % 2 == 0 || w % 2 == 0 {
        return Err(Error::invalid("filters must have odd sides so that they are centred"));
    }
    let (rx, ry) = (w as isize - 1, h as isize - 1);
    let grid = FeatureGrid::new(
        vec![
            Axis::new("x", -(rx as f64) * delta, delta, 2 * w - 1)?,
            Axis::new("y", -(ry as f64) * delta, delta, 2 * h - 1)?,
            Axis::new("feature", 0.0, 1.0, bank.len())?,
        ],
        Measure::GridCell,
    )?;
    let nf = bank.len();
    let ny = 2 * h - 1;
    let a0 = f0.values();
    let area = delta * delta;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let f = idx % nf;
            let (ix, iy) = ((idx / nf) / ny, (idx / nf) % ny);
            let (dx, dy) = (ix as isize - rx, iy as isize - ry);
            let a = bank[f].values();
            // ψ_f shifted by (dx, dy): rows grow downwards, so a shift up by
            // dy reads row r + dy of the unshifted filter
            let mut sum = 0.0;
            for r in 0..h as isize {
                let rr = r + dy;
                if rr < 0 || rr >= h as isize {
                    continue;
                }
                for c in 0..w as isize {
                    let cc = c - dx;
                    if cc < 0 || cc >= w as isize {
                        continue;
                    }
                    let p = a[[rr as usize, cc as usize]];
                    let q = a0[[r as usize, c as usize]];
                    sum += p.re * q.re + p.im * q.im;
                }
            }
            sum * area
        })
        .collect();
    GridField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::Profile;
    use crate::kernel::kernel_numeric;
    use ndarray::Array2;

    #[test]
    fn matches_quadrature_of_placed_filters() {
        let bank: Vec<DiscreteFilter> = (0..3)
            .map(|k| {
                DiscreteFilter::from_real(
                    Array2::from_shape_fn((5, 5), |(r, c)| ((r * 5 + c + k * 7) as f64 * 0.37).sin()),
                    0.5,
                )
                .unwrap()
            })
            .collect();
        let col = discrete_kernel_column(&bank, 1).unwrap();
        assert_eq!(col.grid.shape(), vec![9, 9, 3]);
        let origin = bank[1].placed(0.0, 0.0);
        for idx in [0, 17, 121, 150, 242] {
            let c = col.grid.coords(idx);
            let moved = bank[c[2] as usize].placed(c[0], c[1]);
            let expect = kernel_numeric(&moved as &dyn Profile, &origin as &dyn Profile, 0.5).unwrap();
            assert!((col.values[idx] - expect).abs() < 1e-12, "{idx}: {} vs {expect}", col.values[idx]);
        }
        let zero = col.grid.locate(&[0.0, 0.0, 1.0]).unwrap();
        assert!((col.values[zero] - bank[1].norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn rejects_mixed_shapes() {
        let a = DiscreteFilter::from_real(Array2::zeros((3, 3)), 1.0).unwrap();
        let b = DiscreteFilter::from_real(Array2::zeros((5, 5)), 1.0).unwrap();
        assert!(discrete_kernel_column(&[a.clone(), b], 0).is_err());
        assert!(discrete_kernel_column(&[a], 2).is_err());
    }
}
