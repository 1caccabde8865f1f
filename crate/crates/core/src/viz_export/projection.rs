use crate::geometry::{Axis, FeatureGrid, GridField};
use crate::{Error, Result};

/// A field reduced by taking the maximum over one axis. For `(x, y, θ)`
/// sources this is an image on the `(x, y)` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    pub field: GridField,
    /// Free-form label of the source field.
    pub source: String,
    /// Name of the axis that was reduced.
    pub axis: String,
}

impl Projection2D {
    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    /// Sample count along the first remaining axis.
    pub fn width(&self) -> usize {
        self.field.grid.axes()[0].count
    }

    /// Sample count along the second remaining axis (1 for 1D results).
    pub fn height(&self) -> usize {
        self.field.grid.axes().get(1).map_or(1, |a| a.count)
    }

    pub fn values(&self) -> &[f64] {
        &self.field.values
    }
}

/// Per-pixel maximum and first maximising index along axis `k`.
fn reduce(field: &GridField, k: usize) -> (Vec<f64>, Vec<usize>) {
    let shape = field.grid.shape();
    let count = shape[k];
    let inner: usize = shape[k + 1..].iter().product();
    let outer: usize = shape[..k].iter().product();
    let mut best = vec![f64::NEG_INFINITY; outer * inner];
    let mut arg = vec![0usize; outer * inner];
    for o in 0..outer {
        for a in 0..count {
            let base = (o * count + a) * inner;
            for i in 0..inner {
                let v = field.values[base + i];
                let slot = o * inner + i;
                // strict comparison keeps the smallest coordinate on ties
                if a == 0 || v > best[slot] {
                    best[slot] = v;
                    arg[slot] = a;
                }
            }
        }
    }
    (best, arg)
}

/// Maximum over the named axis.
pub fn project_max(field: &GridField, axis: &str) -> Result<Projection2D> {
    let k = field.grid.axis_index(axis)?;
    if field.grid.axes().len() < 2 {
        return Err(Error::invalid("cannot project a one-dimensional field"));
    }
    let (best, _) = reduce(field, k);
    let grid = field.grid.without_axis(k)?;
    Ok(Projection2D { field: GridField::new(grid, best)?, source: String::new(), axis: axis.to_string() })
}

/// Maximising coordinate along one axis, kept where the maximum exceeds a
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgmaxField {
    /// The remaining axes.
    pub grid: FeatureGrid,
    /// The reduced axis.
    pub axis: Axis,
    /// Index on `axis` of the maximum, `None` where masked out.
    pub index: Vec<Option<usize>>,
    /// The maximum itself, everywhere.
    pub peak: Vec<f64>,
}

impl ArgmaxField {
    pub fn coord(&self, i: usize) -> Option<f64> {
        self.index[i].map(|a| self.axis.value(a))
    }

    pub fn mask(&self) -> Vec<bool> {
        self.index.iter().map(Option::is_some).collect()
    }

    pub fn count(&self) -> usize {
        self.index.iter().filter(|i| i.is_some()).count()
    }
}

pub fn argmax_feature(field: &GridField, axis: &str, threshold: f64) -> Result<ArgmaxField> {
    if threshold.is_nan() || threshold == f64::INFINITY {
        return Err(Error::invalid("threshold must be finite or −∞"));
    }
    let k = field.grid.axis_index(axis)?;
    if field.grid.axes().len() < 2 {
        return Err(Error::invalid("cannot reduce a one-dimensional field"));
    }
    let (peak, arg) = reduce(field, k);
    let index = peak.iter().zip(&arg).map(|(&p, &a)| (p > threshold).then_some(a)).collect();
    Ok(ArgmaxField { grid: field.grid.without_axis(k)?, axis: field.grid.axes()[k].clone(), index, peak })
}
