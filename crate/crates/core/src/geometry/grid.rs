use std::f64::consts::PI;

use crate::{Error, Result};

/// One sampled coordinate axis: `min + i * step` for `i < count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub step: f64,
    pub count: usize,
    /// Periodic axes close up after `count` samples (period `count * step`).
    pub periodic: bool,
}

impl Axis {
    pub fn new(name: impl Into<String>, min: f64, step: f64, count: usize) -> Result<Self> {
        let name = name.into();
        if !(step > 0.0 && step.is_finite()) || !min.is_finite() {
            return Err(Error::invalid(format!("axis `{name}`: step must be positive and finite")));
        }
        if count == 0 {
            return Err(Error::invalid(format!("axis `{name}` has no samples")));
        }
        if name.is_empty() || name.len() > u8::MAX as usize {
            return Err(Error::invalid("axis names must have 1..=255 bytes"));
        }
        Ok(Axis { name, min, step, count, periodic: false })
    }

    /// Samples `-half, ..., 0, ..., half` (half rounded to a whole number of steps).
    pub fn symmetric(name: impl Into<String>, half: f64, step: f64) -> Result<Self> {
        if !(half >= 0.0) || !(step > 0.0) {
            return Err(Error::invalid("symmetric axis needs half >= 0 and step > 0"));
        }
        let k = (half / step + 1e-9).floor() as usize;
        Axis::new(name, -(k as f64) * step, step, 2 * k + 1)
    }

    /// `count` equally spaced angles covering the full circle, centred on zero.
    pub fn circle(name: impl Into<String>, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("circle axis needs at least one sample"));
        }
        let step = 2.0 * PI / count as f64;
        let lo = ((count - 1) / 2) as f64;
        let mut axis = Axis::new(name, -lo * step, step, count)?;
        axis.periodic = true;
        Ok(axis)
    }

    pub fn periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn max(&self) -> f64 {
        self.value(self.count - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    /// Index of the sample at coordinate `v`, if `v` lies on the axis.
    pub fn index_of(&self, v: f64) -> Option<usize> {
        let r = (v - self.min) / self.step;
        let k = r.round();
        if (r - k).abs() > 1e-6 {
            return None;
        }
        let k = k as i64;
        if self.periodic {
            Some(k.rem_euclid(self.count as i64) as usize)
        } else if k >= 0 && (k as usize) < self.count {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Index of the sample closest to `v` (clamped, or wrapped on periodic axes).
    pub fn nearest(&self, v: f64) -> usize {
        let k = ((v - self.min) / self.step).round() as i64;
        if self.periodic {
            k.rem_euclid(self.count as i64) as usize
        } else {
            k.clamp(0, self.count as i64 - 1) as usize
        }
    }

    /// Coordinate difference `a - b`, wrapped into half a period on periodic axes.
    pub fn delta(&self, a: f64, b: f64) -> f64 {
        let d = a - b;
        if self.periodic {
            let period = self.step * self.count as f64;
            d - period * (d / period).round()
        } else {
            d
        }
    }

    /// Length covered by the sample cells, `count * step`.
    pub fn extent(&self) -> f64 {
        self.step * self.count as f64
    }
}

/// Per-point weights μ on a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    /// Every point weighs 1; integrals become plain sums.
    Counting,
    /// Every point weighs the product of the axis steps.
    GridCell,
    Custom(Vec<f64>),
}

/// Cartesian product of sampled axes with a measure. Points are numbered in
/// row-major order: the first axis varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    axes: Vec<Axis>,
    measure: Measure,
    strides: Vec<usize>,
    len: usize,
}

impl FeatureGrid {
    pub fn new(axes: Vec<Axis>, measure: Measure) -> Result<Self> {
        if axes.is_empty() || axes.len() > u8::MAX as usize {
            return Err(Error::invalid("a grid needs between 1 and 255 axes"));
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::invalid(format!("duplicate axis `{}`", a.name)));
            }
        }
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len() - 1).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].count;
        }
        let len = strides[0] * axes[0].count;
        if let Measure::Custom(w) = &measure {
            if w.len() != len {
                return Err(Error::GridMismatch(format!("{} weights for {len} points", w.len())));
            }
            if let Some(i) = w.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::invalid(format!("weight at point {i} is not positive and finite")));
            }
        }
        Ok(FeatureGrid { axes, measure, strides, len })
    }

    pub fn with_measure(self, measure: Measure) -> Result<Self> {
        FeatureGrid::new(self.axes, measure)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Position of the axis called `name`.
    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    pub fn axis(&self, name: &str) -> Result<&Axis> {
        Ok(&self.axes[self.axis_index(name)?])
    }

    #[inline]
    pub fn index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.axes.len());
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    #[inline]
    pub fn unravel_into(&self, mut idx: usize, out: &mut [usize]) {
        for (k, s) in self.strides.iter().enumerate() {
            out[k] = idx / s;
            idx %= s;
        }
    }

    pub fn unravel(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        self.unravel_into(idx, &mut out);
        out
    }

    /// Coordinate of point `idx` along axis `k`.
    #[inline]
    pub fn coord(&self, idx: usize, k: usize) -> f64 {
        self.axes[k].value((idx / self.strides[k]) % self.axes[k].count)
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        (0..self.axes.len()).map(|k| self.coord(idx, k)).collect()
    }

    /// Grid point at the given coordinates, if they all lie on the axes.
    pub fn locate(&self, coords: &[f64]) -> Option<usize> {
        if coords.len() != self.axes.len() {
            return None;
        }
        let mut idx = 0;
        for ((a, &c), s) in self.axes.iter().zip(coords).zip(&self.strides) {
            idx += a.index_of(c)? * s;
        }
        Some(idx)
    }

    #[inline]
    pub fn weight(&self, idx: usize) -> f64 {
        match &self.measure {
            Measure::Counting => 1.0,
            Measure::GridCell => self.cell_volume(),
            Measure::Custom(w) => w[idx],
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.weight(i)).collect()
    }

    pub fn total_measure(&self) -> f64 {
        match &self.measure {
            Measure::Counting => self.len as f64,
            Measure::GridCell => self.cell_volume() * self.len as f64,
            Measure::Custom(w) => w.iter().sum(),
        }
    }

    fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    /// The grid with axis `k` removed. Custom weights do not survive the
    /// reduction and fall back to counting.
    pub fn without_axis(&self, k: usize) -> Result<FeatureGrid> {
        if self.axes.len() < 2 {
            return Err(Error::invalid("cannot drop the only axis of a grid"));
        }
        let mut axes = self.axes.clone();
        axes.remove(k);
        let measure = match self.measure {
            Measure::GridCell => Measure::GridCell,
            _ => Measure::Counting,
        };
        FeatureGrid::new(axes, measure)
    }

    /// Calls `f` with every axis-adjacent neighbour of `idx` (two per axis,
    /// wrapping on periodic axes).
    pub fn for_each_neighbor(&self, idx: usize, mut f: impl FnMut(usize)) {
        for (k, a) in self.axes.iter().enumerate() {
            let s = self.strides[k];
            let i = (idx / s) % a.count;
            if i > 0 {
                f(idx - s);
            } else if a.periodic && a.count > 2 {
                f(idx + (a.count - 1) * s);
            }
            if i + 1 < a.count {
                f(idx + s);
            } else if a.periodic && a.count > 2 {
                f(idx - (a.count - 1) * s);
            }
        }
    }
}

/// Weights of the counting measure: every point weighs 1.
pub fn counting_measure(grid: &FeatureGrid) -> Vec<f64> {
    vec![1.0; grid.len()]
}

/// Weights of the grid-cell measure: every point weighs its cell volume.
pub fn grid_cell_measure(grid: &FeatureGrid) -> Vec<f64> {
    let cell: f64 = grid.axes().iter().map(|a| a.step).product();
    vec![cell; grid.len()]
}

/// A real scalar per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: FeatureGrid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: FeatureGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridField { grid, values })
    }

    pub fn zeros(grid: FeatureGrid) -> Self {
        let values = vec![0.0; grid.len()];
        GridField { grid, values }
    }

    /// μ-weighted sum of the values.
    pub fn integral(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| v * self.grid.weight(i)).sum()
    }

    pub fn abs_integral(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| v.abs() * self.grid.weight(i)).sum()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn at(&self, coords: &[f64]) -> Option<f64> {
        self.grid.locate(coords).map(|i| self.values[i])
    }
}
