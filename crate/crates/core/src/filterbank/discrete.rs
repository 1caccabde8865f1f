use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Profile, Window};
use crate::{Error, Result};

/// A sampled filter on a square lattice of spacing `delta`. Column index runs
/// along +x, row index along −y (image order); the reference pixel is the
/// array centre `(height/2, width/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFilter {
    values: Array2<Complex64>,
    delta: f64,
    real: bool,
}

impl DiscreteFilter {
    pub fn new(values: Array2<Complex64>, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("filter spacing must be positive (got {delta})")));
        }
        if values.is_empty() {
            return Err(Error::invalid("empty filter"));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("filter values must be finite"));
        }
        let real = values.iter().all(|z| z.im == 0.0);
        Ok(DiscreteFilter { values, delta, real })
    }

    pub fn from_real(values: Array2<f64>, delta: f64) -> Result<Self> {
        DiscreteFilter::new(values.mapv(|v| Complex64::new(v, 0.0)), delta)
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn height(&self) -> usize {
        self.values.nrows()
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }

    pub fn center(&self) -> (usize, usize) {
        (self.height() / 2, self.width() / 2)
    }

    pub fn real_part(&self) -> Array2<f64> {
        self.values.mapv(|z| z.re)
    }

    /// Location of the maximum: signed for real filters, modulus for complex
    /// ones. The first hit in row-major order wins ties.
    pub fn peak(&self) -> (usize, usize) {
        let score = |z: &Complex64| if self.real { z.re } else { z.norm_sqr() };
        let mut best = (0, 0);
        let mut top = f64::NEG_INFINITY;
        for ((r, c), z) in self.values.indexed_iter() {
            let v = score(z);
            if v > top {
                top = v;
                best = (r, c);
            }
        }
        best
    }

    pub fn norm_sq(&self) -> f64 {
        self.delta * self.delta * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> DiscreteFilter {
        DiscreteFilter { values: self.values.mapv(|z| z * factor), delta: self.delta, real: self.real }
    }

    /// The filter with its reference pixel at `(x, y)`.
    pub fn placed(&self, x: f64, y: f64) -> PlacedFilter<'_> {
        PlacedFilter { filter: self, x, y }
    }
}

/// Pads each filter with `pad` zeros on every side, recentres it on its peak
/// and crops a `crop × crop` window around the peak. Window pixels falling
/// outside the padded array are zero.
pub fn ingest_discrete_bank(raw: &[DiscreteFilter], pad: usize, crop: usize) -> Result<Vec<DiscreteFilter>> {
    if raw.is_empty() {
        return Err(Error::invalid("empty filter bank"));
    }
    if crop % 2 == 0 {
        return Err(Error::invalid(format!("crop size must be odd (got {crop})")));
    }
    let (h, w) = (raw[0].height(), raw[0].width());
    if raw.iter().any(|f| f.height() != h || f.width() != w) {
        return Err(Error::invalid("all raw filters must share dimensions"));
    }
    if crop > h + 2 * pad || crop > w + 2 * pad {
        return Err(Error::invalid(format!("crop {crop} exceeds the padded size {}x{}", h + 2 * pad, w + 2 * pad)));
    }
    let half = (crop / 2) as isize;
    raw.iter()
        .map(|f| {
            let (pr, pc) = f.peak();
            // peak position in padded coordinates
            let (pr, pc) = ((pr + pad) as isize, (pc + pad) as isize);
            let mut out = Array2::<Complex64>::zeros((crop, crop));
            for i in 0..crop {
                for j in 0..crop {
                    let r = pr - half + i as isize - pad as isize;
                    let c = pc - half + j as isize - pad as isize;
                    if r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w {
                        out[[i, j]] = f.values[[r as usize, c as usize]];
                    }
                }
            }
            Ok(DiscreteFilter { values: out, delta: f.delta, real: f.real })
        })
        .collect()
}

/// A discrete filter anchored in the plane.
#[derive(Debug, Clone, Copy)]
pub struct PlacedFilter<'a> {
    pub filter: &'a DiscreteFilter,
    pub x: f64,
    pub y: f64,
}

impl Profile for PlacedFilter<'_> {
    fn eval(&self, u: f64, v: f64) -> Complex64 {
        let f = self.filter;
        let (cr, cc) = f.center();
        let dc = ((u - self.x) / f.delta).round() as isize;
        let dr = -((v - self.y) / f.delta).round() as isize;
        let (r, c) = (cr as isize + dr, cc as isize + dc);
        if r < 0 || c < 0 || r as usize >= f.height() || c as usize >= f.width() {
            return Complex64::new(0.0, 0.0);
        }
        f.values[[r as usize, c as usize]]
    }

    fn window(&self) -> Window {
        let f = self.filter;
        let (cr, cc) = f.center();
        let d = f.delta;
        Window {
            x0: self.x - cc as f64 * d,
            x1: self.x + (f.width() - 1 - cc) as f64 * d,
            y0: self.y - (f.height() - 1 - cr) as f64 * d,
            y1: self.y + cr as f64 * d,
        }
    }

    fn lattice(&self) -> Option<(f64, (f64, f64))> {
        Some((self.filter.delta, (self.x, self.y)))
    }
}

/// Parameters of the synthetic stand-in for a learned bank: localised,
/// oriented, band-pass patches with a little noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBankSpec {
    pub count: usize,
    pub size: usize,
    /// Spatial frequency range in cycles per pixel.
    pub frequency: (f64, f64),
    /// Envelope width across the stripes, in wavelengths.
    pub width: (f64, f64),
    /// Ratio of envelope length along the stripes to the width.
    pub elongation: (f64, f64),
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticBankSpec {
    fn default() -> Self {
        SyntheticBankSpec {
            count: 128,
            size: 16,
            frequency: (0.12, 0.25),
            width: (0.35, 0.5),
            elongation: (1.5, 2.5),
            noise: 0.02,
            seed: 42,
        }
    }
}

/// Seeded synthetic bank. Returns the unit-norm filters (pixel spacing 1) and
/// the stripe direction of each, measured counter-clockwise from +x in the
/// plane (y up).
pub fn synthetic_learned_bank(spec: &SyntheticBankSpec) -> Result<(Vec<DiscreteFilter>, Vec<f64>)> {
    if spec.count == 0 || spec.size < 8 {
        return Err(Error::invalid("synthetic bank needs at least one filter of size >= 8"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::invalid(e.to_string()))?;
    let n = spec.size;
    let margin = 4.0;
    let mut filters = Vec::with_capacity(spec.count);
    let mut stripes = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let cx = rng.random_range(margin..(n as f64 - margin - 1.0));
        let cy = rng.random_range(margin..(n as f64 - margin - 1.0));
        let theta = rng.random_range(0.0..PI);
        let freq = rng.random_range(spec.frequency.0..spec.frequency.1);
        let phase = rng.random_range(0.0..2.0 * PI);
        let sx = rng.random_range(spec.width.0..spec.width.1) / freq;
        let sy = sx * rng.random_range(spec.elongation.0..spec.elongation.1);
        let (s, c) = theta.sin_cos();
        let mut a = Array2::<f64>::zeros((n, n));
        for ((r, col), v) in a.indexed_iter_mut() {
            // plane coordinates, y up
            let du = col as f64 - cx;
            let dv = cy - r as f64;
            let x = du * c + dv * s;
            let y = -du * s + dv * c;
            *v = (2.0 * PI * freq * x + phase).cos() * (-x * x / (2.0 * sx * sx) - y * y / (2.0 * sy * sy)).exp()
                + noise.sample(&mut rng);
        }
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        a /= norm;
        filters.push(DiscreteFilter::from_real(a, 1.0)?);
        stripes.push((theta + PI / 2.0).rem_euclid(PI));
    }
    Ok((filters, stripes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(a: Array2<f64>) -> DiscreteFilter {
        DiscreteFilter::from_real(a, 1.0).unwrap()
    }

    #[test]
    fn delta_filter_lands_in_the_centre() {
        let mut a = Array2::<f64>::zeros((16, 16));
        a[[3, 12]] = 1.0;
        let out = ingest_discrete_bank(&[real(a)], 5, 11).unwrap();
        assert_eq!(out[0].height(), 11);
        assert_eq!(out[0].values()[[5, 5]].re, 1.0);
        assert_eq!(out[0].values().iter().filter(|z| z.re != 0.0).count(), 1);
    }

    #[test]
    fn corner_peaks_keep_the_window_inside_the_padded_array() {
        // every peak position of a 16x16 filter, including the corners
        for r in 0..16 {
            for c in 0..16 {
                let mut a = Array2::<f64>::from_elem((16, 16), 0.01);
                a[[r, c]] = 1.0;
                let (pr, pc) = (r + 5, c + 5);
                assert!(pr >= 5 && pr + 5 < 26 && pc >= 5 && pc + 5 < 26);
                let out = ingest_discrete_bank(&[real(a)], 5, 11).unwrap();
                assert_eq!(out[0].peak(), (5, 5));
            }
        }
    }

    #[test]
    fn complex_filters_centre_on_the_modulus() {
        let mut a = Array2::<Complex64>::zeros((9, 9));
        a[[2, 2]] = Complex64::new(0.5, 0.0);
        a[[6, 1]] = Complex64::new(0.0, -0.9);
        let f = DiscreteFilter::new(a, 0.1).unwrap();
        assert!(!f.is_real());
        assert_eq!(f.peak(), (6, 1));
        let out = ingest_discrete_bank(&[f], 0, 5).unwrap();
        assert_eq!(out[0].values()[[2, 2]], Complex64::new(0.0, -0.9));
    }

    #[test]
    fn ties_go_to_the_first_row_then_column() {
        let mut a = Array2::<f64>::zeros((5, 5));
        a[[3, 0]] = 2.0;
        a[[1, 4]] = 2.0;
        a[[1, 2]] = 2.0;
        assert_eq!(real(a).peak(), (1, 2));
    }

    #[test]
    fn ingest_rejects_bad_shapes() {
        let f = real(Array2::zeros((16, 16)));
        assert!(ingest_discrete_bank(&[], 5, 11).is_err());
        assert!(ingest_discrete_bank(std::slice::from_ref(&f), 5, 10).is_err());
        assert!(ingest_discrete_bank(std::slice::from_ref(&f), 0, 17).is_err());
        let g = real(Array2::zeros((8, 8)));
        assert!(ingest_discrete_bank(&[f, g], 5, 11).is_err());
    }

    #[test]
    fn synthetic_bank_shape_and_determinism() {
        let spec = SyntheticBankSpec::default();
        let (a, oa) = synthetic_learned_bank(&spec).unwrap();
        let (b, ob) = synthetic_learned_bank(&spec).unwrap();
        assert_eq!(a.len(), 128);
        assert_eq!(a, b);
        assert_eq!(oa, ob);
        assert!(a.iter().all(|f| (f.norm_sq() - 1.0).abs() < 1e-12 && f.height() == 16));
    }

    #[test]
    fn placed_filter_window_matches_its_support() {
        let mut a = Array2::<f64>::zeros((3, 5));
        a[[0, 0]] = 1.0;
        let f = DiscreteFilter::from_real(a, 0.5).unwrap();
        let p = f.placed(1.0, 2.0);
        let w = p.window();
        assert_eq!((w.x0, w.x1, w.y0, w.y1), (0.0, 2.0, 1.5, 2.5));
        assert_eq!(p.eval(0.0, 2.5).re, 1.0);
        assert_eq!(p.eval(-0.5, 2.5).re, 0.0);
    }

    proptest! {
        #[test]
        fn ingest_is_idempotent(values in proptest::collection::vec(-1.0f64..1.0, 256)) {
            let a = Array2::from_shape_vec((16, 16), values).unwrap();
            let once = ingest_discrete_bank(&[real(a)], 5, 11).unwrap();
            let twice = ingest_discrete_bank(&once, 0, 11).unwrap();
            prop_assert_eq!(&once, &twice);
        }
    }
}
