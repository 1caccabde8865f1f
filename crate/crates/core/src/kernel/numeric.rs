use num_complex::Complex64;

use crate::filterbank::{Profile, Profile3, SpatioTemporalParams, Window};
use crate::{Error, Result};

/// Lattice spacings for space-time quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureStep {
    pub space: f64,
    pub time: f64,
}

impl QuadratureStep {
    /// A tenth of the spatial and temporal envelope scales.
    pub fn fine(sp: &SpatioTemporalParams) -> Self {
        QuadratureStep { space: sp.gabor.sigma / 10.0, time: sp.beta / 10.0 }
    }
}

fn check_lattice(p: &dyn Profile, delta: f64) -> Result<()> {
    if let Some((d, (ax, ay))) = p.lattice() {
        let on = |v: f64| ((v / delta) - (v / delta).round()).abs() < 1e-6;
        if (d - delta).abs() > 1e-9 * delta || !on(ax) || !on(ay) {
            return Err(Error::GridMismatch(format!(
                "sampled filter with spacing {d} anchored at ({ax}, {ay}) does not sit on the quadrature lattice of spacing {delta}"
            )));
        }
    }
    Ok(())
}

/// Integer lattice range `[lo, hi]` covering `[a, b]` at spacing `delta`.
fn lattice_range(a: f64, b: f64, delta: f64) -> (i64, i64) {
    ((a / delta - 1e-9).ceil() as i64, (b / delta + 1e-9).floor() as i64)
}

/// Sums `f(ψ_a, ψ_b)` over the lattice nodes of the union of both windows;
/// each profile is zero outside its own window.
fn lattice_sum(a: &dyn Profile, b: &dyn Profile, delta: f64, f: impl Fn(Complex64, Complex64) -> f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("quadrature spacing must be positive (got {delta})")));
    }
    check_lattice(a, delta)?;
    check_lattice(b, delta)?;
    let ra = LatticeBox::new(&a.window(), delta);
    let rb = LatticeBox::new(&b.window(), delta);
    let zero = Complex64::new(0.0, 0.0);
    let mut total = 0.0;
    for i in ra.i0.min(rb.i0)..=ra.i1.max(rb.i1) {
        let u = i as f64 * delta;
        let mut row = 0.0;
        for j in ra.j0.min(rb.j0)..=ra.j1.max(rb.j1) {
            let v = j as f64 * delta;
            let x = if ra.contains(i, j) { a.eval(u, v) } else { zero };
            let y = if rb.contains(i, j) { b.eval(u, v) } else { zero };
            row += f(x, y);
        }
        total += row;
    }
    Ok(total * delta * delta)
}

/// Lattice nodes inside a window.
#[derive(Debug, Clone, Copy)]
struct LatticeBox {
    i0: i64,
    i1: i64,
    j0: i64,
    j1: i64,
}

impl LatticeBox {
    fn new(w: &Window, delta: f64) -> Self {
        let (i0, i1) = lattice_range(w.x0, w.x1, delta);
        let (j0, j1) = lattice_range(w.y0, w.y1, delta);
        LatticeBox { i0, i1, j0, j1 }
    }

    #[inline]
    fn contains(&self, i: i64, j: i64) -> bool {
        (self.i0..=self.i1).contains(&i) && (self.j0..=self.j1).contains(&j)
    }
}

/// Riemann sum `δ²·Re Σ ψ_a·conj(ψ_b)` over the union of both windows.
pub fn kernel_numeric(a: &dyn Profile, b: &dyn Profile, delta: f64) -> Result<f64> {
    lattice_sum(a, b, delta, |x, y| x.re * y.re + x.im * y.im)
}

/// Riemann sum of `|ψ_a − ψ_b|²`.
pub fn l2_distance_sq(a: &dyn Profile, b: &dyn Profile, delta: f64) -> Result<f64> {
    lattice_sum(a, b, delta, |x, y| (x - y).norm_sqr())
}

/// `(‖Re ψ‖², ‖Im ψ‖²)` by quadrature.
pub fn energy_decomposition(p: &dyn Profile, delta: f64) -> Result<(f64, f64)> {
    let re = lattice_sum(p, p, delta, |x, _| x.re * x.re)?;
    let im = lattice_sum(p, p, delta, |x, _| x.im * x.im)?;
    Ok((re, im))
}

/// Riemann sum `δ²·δt·Re Σ ψ_a·conj(ψ_b)` over space and time.
pub fn kernel_numeric_3d(a: &dyn Profile3, b: &dyn Profile3, step: QuadratureStep) -> Result<f64> {
    let (d, dt) = (step.space, step.time);
    if !(d > 0.0 && dt > 0.0) {
        return Err(Error::invalid("quadrature spacings must be positive"));
    }
    let (wa, ta0, ta1) = a.window();
    let (wb, tb0, tb1) = b.window();
    let (ra, rb) = (LatticeBox::new(&wa, d), LatticeBox::new(&wb, d));
    let (ka, kb) = (lattice_range(ta0, ta1, dt), lattice_range(tb0, tb1, dt));
    let zero = Complex64::new(0.0, 0.0);
    let mut total = 0.0;
    for k in ka.0.min(kb.0)..=ka.1.max(kb.1) {
        let s = k as f64 * dt;
        let (in_a, in_b) = ((ka.0..=ka.1).contains(&k), (kb.0..=kb.1).contains(&k));
        let mut slab = 0.0;
        for i in ra.i0.min(rb.i0)..=ra.i1.max(rb.i1) {
            let u = i as f64 * d;
            for j in ra.j0.min(rb.j0)..=ra.j1.max(rb.j1) {
                let v = j as f64 * d;
                let x = if in_a && ra.contains(i, j) { a.eval(u, v, s) } else { zero };
                let y = if in_b && rb.contains(i, j) { b.eval(u, v, s) } else { zero };
                slab += x.re * y.re + x.im * y.im;
            }
        }
        total += slab;
    }
    Ok(total * d * d * dt)
}

/// Common norm for a bank whose squared norms are `norms`. When they spread by
/// more than 1e-6 relative, each filter is rescaled to the mean; the returned
/// factors multiply the filters.
pub fn equalize_norms(norms: &[f64]) -> Result<(f64, Vec<f64>)> {
    if norms.is_empty() {
        return Err(Error::invalid("empty bank"));
    }
    if let Some(i) = norms.iter().position(|n| !(*n > 0.0 && n.is_finite())) {
        return Err(Error::Degenerate { index: i, what: "filter norm" });
    }
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let spread = norms.iter().map(|n| ((n - mean) / mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-6 {
        return Ok((mean, vec![1.0; norms.len()]));
    }
    Ok((mean, norms.iter().map(|n| (mean / n).sqrt()).collect()))
}
