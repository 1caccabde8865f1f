use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::filterbank::Profile;
use crate::{Error, Result};

/// Kernel of a bank built by translating a few base filters over a lattice:
/// `K((z, i), (z', j)) = T_ij(z − z')`, with displacements counted in lattice
/// steps and stored for `|dx| ≤ reach.0`, `|dy| ≤ reach.1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTable {
    features: usize,
    reach: (usize, usize),
    data: Vec<f64>,
}

impl ShiftTable {
    pub fn from_fn<F>(features: usize, reach: (usize, usize), f: F) -> Self
    where
        F: Fn(usize, usize, isize, isize) -> f64 + Sync,
    {
        let (w, h) = (2 * reach.0 + 1, 2 * reach.1 + 1);
        let data = (0..features * features)
            .into_par_iter()
            .flat_map_iter(|ij| {
                let (i, j) = (ij / features, ij % features);
                let f = &f;
                (0..w * h).map(move |k| {
                    let dx = (k / h) as isize - reach.0 as isize;
                    let dy = (k % h) as isize - reach.1 as isize;
                    f(i, j, dx, dy)
                })
            })
            .collect();
        ShiftTable { features, reach, data }
    }

    /// Tables of sampled base filters (each positioned around the origin) by
    /// FFT cross-correlation on the lattice of spacing `delta`. One table step
    /// is `stride` lattice nodes along each axis.
    pub fn correlate(bases: &[&dyn Profile], delta: f64, stride: (usize, usize), reach: (usize, usize)) -> Result<Self> {
        if bases.is_empty() || stride.0 == 0 || stride.1 == 0 || !(delta > 0.0) {
            return Err(Error::invalid("correlation needs bases, a positive spacing and nonzero strides"));
        }
        let mut win = bases[0].window();
        for b in &bases[1..] {
            win = win.union(&b.window());
        }
        let i0 = (win.x0 / delta - 1e-9).ceil() as i64;
        let i1 = (win.x1 / delta + 1e-9).floor() as i64;
        let j0 = (win.y0 / delta - 1e-9).ceil() as i64;
        let j1 = (win.y1 / delta + 1e-9).floor() as i64;
        let (mx, my) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
        let (lx, ly) = (fast_len(2 * mx - 1), fast_len(2 * my - 1));

        let mut planner = FftPlanner::<f64>::new();
        let (fx, fy) = (planner.plan_fft_forward(lx), planner.plan_fft_forward(ly));
        let (ix, iy) = (planner.plan_fft_inverse(lx), planner.plan_fft_inverse(ly));

        let spectra: Vec<Vec<Complex64>> = bases
            .par_iter()
            .map(|b| {
                // each base is zero outside its own window
                let w = b.window();
                let (bi0, bi1) = ((w.x0 / delta - 1e-9).ceil() as i64, (w.x1 / delta + 1e-9).floor() as i64);
                let (bj0, bj1) = ((w.y0 / delta - 1e-9).ceil() as i64, (w.y1 / delta + 1e-9).floor() as i64);
                let mut buf = vec![Complex64::new(0.0, 0.0); lx * ly];
                for i in bi0..=bi1 {
                    let u = i as f64 * delta;
                    for j in bj0..=bj1 {
                        buf[(i - i0) as usize * ly + (j - j0) as usize] = b.eval(u, j as f64 * delta);
                    }
                }
                fft2(&mut buf, lx, ly, &fx, &fy);
                buf
            })
            .collect();

        let n = bases.len();
        let scale = delta * delta / (lx * ly) as f64;
        let (w, h) = (2 * reach.0 + 1, 2 * reach.1 + 1);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let planes: Vec<Vec<f64>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let mut buf: Vec<Complex64> =
                    spectra[i].iter().zip(&spectra[j]).map(|(a, b)| a.conj() * b).collect();
                fft2(&mut buf, lx, ly, &ix, &iy);
                let mut plane = vec![0.0; w * h];
                for (k, out) in plane.iter_mut().enumerate() {
                    let sx = ((k / h) as isize - reach.0 as isize) * stride.0 as isize;
                    let sy = ((k % h) as isize - reach.1 as isize) * stride.1 as isize;
                    if sx.unsigned_abs() < mx && sy.unsigned_abs() < my {
                        let r = sx.rem_euclid(lx as isize) as usize;
                        let c = sy.rem_euclid(ly as isize) as usize;
                        *out = buf[r * ly + c].re * scale;
                    }
                }
                plane
            })
            .collect();

        let mut data = vec![0.0; n * n * w * h];
        for (&(i, j), plane) in pairs.iter().zip(&planes) {
            data[(i * n + j) * w * h..(i * n + j + 1) * w * h].copy_from_slice(plane);
            if i != j {
                // T_ji(s) = T_ij(−s)
                let dst = &mut data[(j * n + i) * w * h..(j * n + i + 1) * w * h];
                for (k, v) in plane.iter().enumerate() {
                    dst[w * h - 1 - k] = *v;
                }
            }
        }
        Ok(ShiftTable { features: n, reach, data })
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn reach(&self) -> (usize, usize) {
        self.reach
    }

    /// Displacement plane of the pair `(i, j)`, indexed `[dx + reach.0][dy + reach.1]`.
    pub fn plane(&self, i: usize, j: usize) -> &[f64] {
        let wh = (2 * self.reach.0 + 1) * (2 * self.reach.1 + 1);
        let k = i * self.features + j;
        &self.data[k * wh..(k + 1) * wh]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, dx: isize, dy: isize) -> f64 {
        let (rx, ry) = (self.reach.0 as isize, self.reach.1 as isize);
        if dx.abs() > rx || dy.abs() > ry {
            return 0.0;
        }
        let h = 2 * ry + 1;
        self.plane(i, j)[((dx + rx) * h + dy + ry) as usize]
    }

    /// Replaces every entry `v` at `(i, j, dx, dy)` by `f(i, j, dx, dy, v)`.
    pub fn map_in_place<F>(&mut self, f: F)
    where
        F: Fn(usize, usize, isize, isize, f64) -> f64 + Sync,
    {
        let (rx, ry) = self.reach;
        let (w, h) = (2 * rx + 1, 2 * ry + 1);
        let n = self.features;
        self.data.par_chunks_mut(w * h).enumerate().for_each(|(ij, plane)| {
            let (i, j) = (ij / n, ij % n);
            for (k, v) in plane.iter_mut().enumerate() {
                let dx = (k / h) as isize - rx as isize;
                let dy = (k % h) as isize - ry as isize;
                *v = f(i, j, dx, dy, *v);
            }
        });
    }

    /// `T_ij ← s_i·s_j·T_ij`, i.e. filter `i` multiplied by `s_i`.
    pub fn scale_features(&mut self, s: &[f64]) {
        let n = self.features;
        self.map_in_place(|i, j, _, _, v| v * s[i] * s[j]);
        debug_assert_eq!(s.len(), n);
    }

    /// Squared norms `T_ii(0, 0)`.
    pub fn norms(&self) -> Vec<f64> {
        (0..self.features).map(|i| self.get(i, i, 0, 0)).collect()
    }

    /// Largest absolute displacement with a nonzero entry, per axis.
    pub fn support(&self) -> (usize, usize) {
        let (rx, ry) = self.reach;
        let h = 2 * ry + 1;
        let mut sup = (0, 0);
        for ij in 0..self.features * self.features {
            let plane = self.plane(ij / self.features, ij % self.features);
            for (k, v) in plane.iter().enumerate() {
                if *v != 0.0 {
                    let dx = ((k / h) as isize - rx as isize).unsigned_abs();
                    let dy = ((k % h) as isize - ry as isize).unsigned_abs();
                    sup = (sup.0.max(dx), sup.1.max(dy));
                }
            }
        }
        sup
    }
}

/// Smallest length `≥ n` with no prime factor above 5.
fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

fn fft2(buf: &mut [Complex64], lx: usize, ly: usize, fx: &Arc<dyn Fft<f64>>, fy: &Arc<dyn Fft<f64>>) {
    for row in buf.chunks_exact_mut(ly) {
        fy.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); lx];
    for c in 0..ly {
        for r in 0..lx {
            col[r] = buf[r * ly + c];
        }
        fx.process(&mut col);
        for r in 0..lx {
            buf[r * ly + c] = col[r];
        }
    }
}
