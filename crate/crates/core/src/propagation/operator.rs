use rayon::prelude::*;

use crate::kernel::ShiftTable;
use crate::{Error, Result};

/// A square nonnegative matrix `H` on grid points, applied without
/// necessarily being stored.
pub trait KernelMatrix: Send + Sync {
    fn len(&self) -> usize;

    /// `out = H·x`.
    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// `out = Hᵀ·x`.
    fn apply_transpose(&self, x: &[f64], out: &mut [f64]);

    /// `H(p, q)`.
    fn entry(&self, p: usize, q: usize) -> f64;

    /// Column `H(·, q)`.
    fn column(&self, q: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.len()];
        e[q] = 1.0;
        let mut out = vec![0.0; self.len()];
        self.apply(&e, &mut out);
        out
    }
}

/// Compressed-row storage of the nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    offsets: Vec<usize>,
    columns: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Evaluates every entry once, keeping the nonzeros. Fails when the
    /// nonzeros would exceed `max_nonzeros`.
    pub fn from_fn<F>(n: usize, f: F, max_nonzeros: usize) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        if n > u32::MAX as usize {
            return Err(Error::invalid("grid too large for row-compressed storage"));
        }
        let rows: Vec<Vec<(u32, f64)>> = (0..n)
            .into_par_iter()
            .map(|p| (0..n).filter_map(|q| {
                let v = f(p, q);
                (v != 0.0).then_some((q as u32, v))
            }).collect())
            .collect();
        let nnz: usize = rows.iter().map(Vec::len).sum();
        if nnz > max_nonzeros {
            return Err(Error::invalid(format!("{nnz} nonzeros exceed the storage budget of {max_nonzeros}")));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut columns = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        offsets.push(0);
        for row in rows {
            for (q, v) in row {
                columns.push(q);
                values.push(v);
            }
            offsets.push(columns.len());
        }
        Ok(CsrMatrix { n, offsets, columns, values })
    }

    pub fn nonzeros(&self) -> usize {
        self.values.len()
    }

    fn row(&self, p: usize) -> (&[u32], &[f64]) {
        let r = self.offsets[p]..self.offsets[p + 1];
        (&self.columns[r.clone()], &self.values[r])
    }
}

impl KernelMatrix for CsrMatrix {
    fn len(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(p, o)| {
            let (cols, vals) = self.row(p);
            *o = cols.iter().zip(vals).map(|(&q, v)| v * x[q as usize]).sum();
        });
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for p in 0..self.n {
            let (cols, vals) = self.row(p);
            let xp = x[p];
            for (&q, v) in cols.iter().zip(vals) {
                out[q as usize] += v * xp;
            }
        }
    }

    fn entry(&self, p: usize, q: usize) -> f64 {
        let (cols, vals) = self.row(p);
        cols.binary_search(&(q as u32)).map(|k| vals[k]).unwrap_or(0.0)
    }
}

/// Entries recomputed on every application.
pub struct LazyMatrix {
    n: usize,
    f: Box<dyn Fn(usize, usize) -> f64 + Send + Sync>,
}

impl LazyMatrix {
    pub fn new(n: usize, f: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        LazyMatrix { n, f: Box::new(f) }
    }
}

impl KernelMatrix for LazyMatrix {
    fn len(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(p, o)| {
            *o = (0..self.n).map(|q| (self.f)(p, q) * x[q]).sum();
        });
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(q, o)| {
            *o = (0..self.n).map(|p| (self.f)(p, q) * x[p]).sum();
        });
    }

    fn entry(&self, p: usize, q: usize) -> f64 {
        (self.f)(p, q)
    }
}

/// Matrix of a translation-invariant bank on a grid ordered `(x, y, feature)`:
/// `H((ix, iy, i), (jx, jy, j)) = T_ij(ix − jx, iy − jy)`.
#[derive(Debug, Clone)]
pub struct ShiftInvariantMatrix {
    nx: usize,
    ny: usize,
    nf: usize,
    forward: Vec<Vec<Tap>>,
    backward: Vec<Vec<Tap>>,
}

/// One nonzero table entry.
#[derive(Debug, Clone, Copy)]
struct Tap {
    j: u32,
    dx: i32,
    dy: i32,
    w: f64,
}

impl ShiftInvariantMatrix {
    /// `table` must already hold the final (truncated, rectified) values.
    pub fn new(table: &ShiftTable, nx: usize, ny: usize) -> Result<Self> {
        let nf = table.features();
        let (rx, ry) = table.reach();
        let taps = |transpose: bool| -> Vec<Vec<Tap>> {
            (0..nf)
                .map(|i| {
                    let mut out = Vec::new();
                    for j in 0..nf {
                        for dx in -(rx.min(nx - 1) as isize)..=(rx.min(nx - 1) as isize) {
                            for dy in -(ry.min(ny - 1) as isize)..=(ry.min(ny - 1) as isize) {
                                let w = if transpose { table.get(j, i, -dx, -dy) } else { table.get(i, j, dx, dy) };
                                if w != 0.0 {
                                    out.push(Tap { j: j as u32, dx: dx as i32, dy: dy as i32, w });
                                }
                            }
                        }
                    }
                    out
                })
                .collect()
        };
        if nx == 0 || ny == 0 || nf == 0 {
            return Err(Error::invalid("empty translation grid"));
        }
        Ok(ShiftInvariantMatrix { nx, ny, nf, forward: taps(false), backward: taps(true) })
    }

    pub fn nonzero_taps(&self) -> usize {
        self.forward.iter().map(Vec::len).sum()
    }

    fn run(&self, taps: &[Vec<Tap>], x: &[f64], out: &mut [f64]) {
        let (nx, ny, nf) = (self.nx, self.ny, self.nf);
        let plane = nx * ny;
        // feature-major copy of the input: planes[j][ix * ny + iy]
        let mut planes = vec![0.0; nf * plane];
        for (idx, v) in x.iter().enumerate() {
            planes[(idx % nf) * plane + idx / nf] = *v;
        }
        let results: Vec<Vec<f64>> = taps
            .par_iter()
            .map(|row| {
                let mut acc = vec![0.0; plane];
                for t in row {
                    let src = &planes[t.j as usize * plane..(t.j as usize + 1) * plane];
                    let (dx, dy) = (t.dx as isize, t.dy as isize);
                    let x0 = dx.max(0) as usize;
                    let x1 = (nx as isize + dx.min(0)) as usize;
                    let y0 = dy.max(0) as usize;
                    let y1 = (ny as isize + dy.min(0)) as usize;
                    for ix in x0..x1 {
                        let sx = (ix as isize - dx) as usize;
                        let dst = &mut acc[ix * ny + y0..ix * ny + y1];
                        let s = &src[sx * ny + (y0 as isize - dy) as usize..sx * ny + (y1 as isize - dy) as usize];
                        for (d, v) in dst.iter_mut().zip(s) {
                            *d += t.w * v;
                        }
                    }
                }
                acc
            })
            .collect();
        for (i, acc) in results.iter().enumerate() {
            for (k, v) in acc.iter().enumerate() {
                out[k * nf + i] = *v;
            }
        }
    }
}

impl KernelMatrix for ShiftInvariantMatrix {
    fn len(&self) -> usize {
        self.nx * self.ny * self.nf
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.run(&self.forward, x, out);
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        self.run(&self.backward, x, out);
    }

    fn entry(&self, p: usize, q: usize) -> f64 {
        let nf = self.nf;
        let (i, j) = (p % nf, q % nf);
        let (pz, qz) = (p / nf, q / nf);
        let dx = (pz / self.ny) as i32 - (qz / self.ny) as i32;
        let dy = (pz % self.ny) as i32 - (qz % self.ny) as i32;
        self.forward[i]
            .iter()
            .find(|t| t.j as usize == j && t.dx == dx && t.dy == dy)
            .map_or(0.0, |t| t.w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(p: usize, q: usize) -> f64 {
        let d = p.abs_diff(q) as f64;
        if d > 3.0 {
            0.0
        } else {
            1.0 / (1.0 + d) + 0.1 * (p % 3) as f64
        }
    }

    #[test]
    fn csr_and_lazy_agree() {
        let n = 17;
        let csr = CsrMatrix::from_fn(n, toy, usize::MAX).unwrap();
        let lazy = LazyMatrix::new(n, toy);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
        csr.apply(&x, &mut a);
        lazy.apply(&x, &mut b);
        assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-14));
        csr.apply_transpose(&x, &mut a);
        lazy.apply_transpose(&x, &mut b);
        assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-14));
        assert_eq!(csr.entry(4, 6), toy(4, 6));
        assert_eq!(csr.entry(0, 9), 0.0);
    }

    #[test]
    fn csr_respects_its_budget() {
        assert!(CsrMatrix::from_fn(10, |_, _| 1.0, 99).is_err());
    }

    #[test]
    fn shift_invariant_matches_the_dense_definition() {
        let (nx, ny, nf) = (5, 4, 3);
        let table = ShiftTable::from_fn(nf, (3, 2), |i, j, dx, dy| {
            let v = 1.0 + i as f64 - 0.5 * j as f64 + 0.3 * dx as f64 - 0.2 * (dy * dy) as f64;
            v.max(0.0)
        });
        let m = ShiftInvariantMatrix::new(&table, nx, ny).unwrap();
        let n = nx * ny * nf;
        let owned = table.clone();
        let dense = move |p: usize, q: usize| {
            let (i, j) = (p % nf, q % nf);
            let (pz, qz) = (p / nf, q / nf);
            let dx = (pz / ny) as isize - (qz / ny) as isize;
            let dy = (pz % ny) as isize - (qz % ny) as isize;
            owned.get(i, j, dx, dy)
        };
        let lazy = LazyMatrix::new(n, dense.clone());
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64) - 3.0).collect();
        let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
        m.apply(&x, &mut a);
        lazy.apply(&x, &mut b);
        assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12));
        m.apply_transpose(&x, &mut a);
        lazy.apply_transpose(&x, &mut b);
        assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12));
        for (p, q) in [(0, 0), (5, 17), (33, 2), (59, 40)] {
            assert_eq!(m.entry(p, q), dense(p, q));
        }
    }
}
