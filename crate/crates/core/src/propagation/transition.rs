use crate::geometry::{FeatureGrid, GridField};
use crate::{Error, Result};

use super::operator::{CsrMatrix, KernelMatrix, LazyMatrix};
use super::{Activation, InitMode, KernelField, Nonlinearity};

/// How a pairwise kernel is turned into a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realization {
    /// Row-compressed storage for grids up to [`Realization::MATERIALIZE_LIMIT`]
    /// points, lazy evaluation beyond.
    Auto,
    Materialized,
    Lazy,
}

impl Realization {
    pub const MATERIALIZE_LIMIT: usize = 20_000;
    /// Nonzero budget for row-compressed storage (about 1.2 GB).
    pub const NONZERO_BUDGET: usize = 100_000_000;
}

/// `S[K]`: `H = h(K)` normalised in both variables, then once more in the
/// first, so that `∫ S(p, q) dμ(p) = 1` for every `q`.
///
/// Stored in factored form `S(p, q) = r(p)·H(p, q)·c(q)` with
/// `r = 1/(Hμ)` and `c(q) = 1/((Hᵀμ)(q)·e(q))`.
pub struct TransitionOperator {
    matrix: Box<dyn KernelMatrix>,
    weights: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    pub nonlinearity: Nonlinearity,
    pub truncated: bool,
}

impl TransitionOperator {
    /// `matrix` holds `H = h(K)` (already rectified and, if wanted, truncated).
    pub fn new(matrix: Box<dyn KernelMatrix>, grid: &FeatureGrid, nonlinearity: Nonlinearity, truncated: bool) -> Result<Self> {
        let n = grid.len();
        if matrix.len() != n {
            return Err(Error::GridMismatch(format!("operator of size {} on a grid of {n} points", matrix.len())));
        }
        let weights = grid.weights();
        let mut col = vec![0.0; n];
        let mut row = vec![0.0; n];
        matrix.apply_transpose(&weights, &mut col);
        matrix.apply(&weights, &mut row);
        if let Some(q) = col.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Degenerate { index: q, what: "column" });
        }
        if let Some(p) = row.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Degenerate { index: p, what: "row" });
        }
        let row_scale: Vec<f64> = row.iter().map(|v| 1.0 / v).collect();
        let scaled: Vec<f64> = weights.iter().zip(&row_scale).map(|(w, r)| w * r).collect();
        let mut e = vec![0.0; n];
        matrix.apply_transpose(&scaled, &mut e);
        let mut col_scale = Vec::with_capacity(n);
        for q in 0..n {
            let eq = e[q] / col[q];
            if !(eq > 0.0 && eq.is_finite()) {
                return Err(Error::Degenerate { index: q, what: "second-stage column" });
            }
            col_scale.push(1.0 / (col[q] * eq));
        }
        Ok(TransitionOperator { matrix, weights, row_scale, col_scale, nonlinearity, truncated })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn matrix(&self) -> &dyn KernelMatrix {
        self.matrix.as_ref()
    }

    /// `S(p, q)`.
    pub fn entry(&self, p: usize, q: usize) -> f64 {
        self.row_scale[p] * self.matrix.entry(p, q) * self.col_scale[q]
    }

    /// `(Sf)(p) = ∫ S(p, q) f(q) dμ(q)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = f.iter().zip(&self.weights).zip(&self.col_scale).map(|((f, w), c)| f * w * c).collect();
        let mut out = vec![0.0; f.len()];
        self.matrix.apply(&g, &mut out);
        out.iter_mut().zip(&self.row_scale).for_each(|(o, r)| *o *= r);
        out
    }

    /// Column `S(·, q)`.
    pub fn column(&self, q: usize) -> Vec<f64> {
        let mut col = self.matrix.column(q);
        let c = self.col_scale[q];
        col.iter_mut().zip(&self.row_scale).for_each(|(v, r)| *v *= r * c);
        col
    }

    /// `∫ S(p, q) dμ(p)` for every `q`.
    pub fn column_sums(&self) -> Vec<f64> {
        let x: Vec<f64> = self.weights.iter().zip(&self.row_scale).map(|(w, r)| w * r).collect();
        let mut out = vec![0.0; x.len()];
        self.matrix.apply_transpose(&x, &mut out);
        out.iter().zip(&self.col_scale).map(|(v, c)| v * c).collect()
    }
}

/// Builds `S[K]` for a pairwise kernel `k(p, q)` (truncation, if any, already
/// folded into `k`).
pub fn transition_operator<F>(
    k: F,
    grid: &FeatureGrid,
    h: Nonlinearity,
    realization: Realization,
    truncated: bool,
) -> Result<TransitionOperator>
where
    F: Fn(usize, usize) -> f64 + Send + Sync + 'static,
{
    let n = grid.len();
    let rectified = move |p: usize, q: usize| h.apply(k(p, q));
    let materialize = match realization {
        Realization::Materialized => true,
        Realization::Lazy => false,
        Realization::Auto => n <= Realization::MATERIALIZE_LIMIT,
    };
    let matrix: Box<dyn KernelMatrix> = if materialize {
        Box::new(CsrMatrix::from_fn(n, rectified, Realization::NONZERO_BUDGET)?)
    } else {
        Box::new(LazyMatrix::new(n, rectified))
    };
    TransitionOperator::new(matrix, grid, h, truncated)
}

/// Seed of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// `K_1 = S(·, p0)`.
    Normalized,
    /// `K_1` given explicitly, usually the signed column `K(·, p0)`.
    Raw(Vec<f64>),
}

/// `K_1, …, K_n` around grid point `origin`, with `K_m = S K_{m−1}`.
pub fn iterate_kernel(
    op: &TransitionOperator,
    grid: &FeatureGrid,
    origin: usize,
    n: usize,
    init: Init,
) -> Result<Vec<KernelField>> {
    if n == 0 {
        return Err(Error::invalid("at least one iteration is required"));
    }
    if grid.len() != op.len() || origin >= grid.len() {
        return Err(Error::GridMismatch("origin or grid does not match the operator".into()));
    }
    let (mut current, mode) = match init {
        Init::Normalized => (op.column(origin), InitMode::Normalized),
        Init::Raw(v) => {
            if v.len() != grid.len() {
                return Err(Error::GridMismatch("raw seed has the wrong length".into()));
            }
            (v, InitMode::Raw)
        }
    };
    let origin_coords = grid.coords(origin);
    let mut out = Vec::with_capacity(n);
    for step in 1..=n {
        if step > 1 {
            current = op.apply(&current);
        }
        out.push(KernelField {
            field: GridField::new(grid.clone(), current.clone())?,
            origin: origin_coords.clone(),
            step,
            init: mode,
            nonlinearity: Some(op.nonlinearity),
            truncated: op.truncated,
        });
    }
    Ok(out)
}

/// `I_0, …, I_n` with `I_m = S I_{m−1}`; element 0 is the input.
pub fn evolve_activation(op: &TransitionOperator, input: &Activation, n: usize) -> Result<Vec<Activation>> {
    if input.field.values.len() != op.len() {
        return Err(Error::GridMismatch("activation does not live on the operator grid".into()));
    }
    let mut out = vec![input.clone()];
    for _ in 0..n {
        let last = out.last().expect("non-empty");
        let next = op.apply(&last.field.values);
        out.push(Activation { field: GridField::new(last.field.grid.clone(), next)?, step: last.step + 1 });
    }
    Ok(out)
}

/// Smallest `n ≥ 1` with `rf_radius + n·growth ≥ ratio·rf_radius`.
pub fn step_count_for_ratio(rf_radius: f64, growth: f64, ratio: f64) -> Result<usize> {
    if !(rf_radius > 0.0 && growth > 0.0 && ratio.is_finite()) {
        return Err(Error::invalid("radius and growth must be positive"));
    }
    let need = (ratio - 1.0) * rf_radius / growth;
    Ok((need - 1e-9).ceil().max(1.0) as usize)
}

/// Step count reaching the 2.2-fold summation-field extent.
pub fn default_step_count(rf_radius: f64, growth: f64) -> Result<usize> {
    step_count_for_ratio(rf_radius, growth, 2.2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Axis, Measure};

    fn toy_grid(weights: Vec<f64>) -> FeatureGrid {
        FeatureGrid::new(vec![Axis::new("f", 0.0, 1.0, weights.len()).unwrap()], Measure::Custom(weights)).unwrap()
    }

    const TOY: [[f64; 3]; 3] = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 1.0]];

    fn toy_op(weights: Vec<f64>) -> (TransitionOperator, FeatureGrid) {
        let g = toy_grid(weights);
        let op = transition_operator(|p, q| TOY[p][q], &g, Nonlinearity::default(), Realization::Materialized, false).unwrap();
        (op, g)
    }

    /// Two-stage normalisation written out entry by entry.
    fn toy_dense(w: &[f64]) -> [[f64; 3]; 3] {
        let mut col = [0.0; 3];
        let mut row = [0.0; 3];
        for p in 0..3 {
            for q in 0..3 {
                col[q] += TOY[p][q] * w[p];
                row[p] += TOY[p][q] * w[q];
            }
        }
        let mut k1 = [[0.0; 3]; 3];
        for p in 0..3 {
            for q in 0..3 {
                k1[p][q] = TOY[p][q] / (col[q] * row[p]);
            }
        }
        let mut s = [[0.0; 3]; 3];
        for q in 0..3 {
            let e: f64 = (0..3).map(|p| k1[p][q] * w[p]).sum();
            for p in 0..3 {
                s[p][q] = k1[p][q] / e;
            }
        }
        s
    }

    #[test]
    fn toy_operator_matches_hand_normalisation() {
        let w = vec![0.5, 1.0, 2.0];
        let (op, _) = toy_op(w.clone());
        let s = toy_dense(&w);
        for p in 0..3 {
            for q in 0..3 {
                assert!((op.entry(p, q) - s[p][q]).abs() < 1e-14);
            }
        }
        assert!(op.column_sums().iter().all(|c| (c - 1.0).abs() < 1e-14));
    }

    #[test]
    fn constant_kernel_gives_uniform_operator() {
        let g = toy_grid(vec![0.2; 5]);
        let op = transition_operator(|_, _| 3.0, &g, Nonlinearity::default(), Realization::Lazy, false).unwrap();
        for p in 0..5 {
            for q in 0..5 {
                assert!((op.entry(p, q) - 1.0).abs() < 1e-14);
            }
        }
        let input = Activation { field: GridField::new(g.clone(), vec![0.7; 5]).unwrap(), step: 0 };
        let out = evolve_activation(&op, &input, 3).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out[3].field.values.iter().all(|v| (v - 0.7).abs() < 1e-14));
        assert!((out[3].field.integral() - input.field.integral()).abs() < 1e-14);
        assert_eq!(evolve_activation(&op, &input, 0).unwrap()[0], input);
    }

    #[test]
    fn toy_iteration_matches_repeated_products() {
        let w = vec![0.5, 1.0, 2.0];
        let (op, g) = toy_op(w.clone());
        let s = toy_dense(&w);
        let fields = iterate_kernel(&op, &g, 1, 3, Init::Normalized).unwrap();
        let mut k: Vec<f64> = (0..3).map(|p| s[p][1]).collect();
        for (n, f) in fields.iter().enumerate() {
            if n > 0 {
                k = (0..3).map(|p| (0..3).map(|q| s[p][q] * k[q] * w[q]).sum()).collect();
            }
            for p in 0..3 {
                assert!((f.field.values[p] - k[p]).abs() < 1e-14);
            }
            assert!((f.field.integral() - 1.0).abs() < 1e-14);
            assert_eq!(f.step, n + 1);
        }
    }

    #[test]
    fn zero_column_is_reported_with_its_index() {
        let g = toy_grid(vec![1.0; 3]);
        let err = transition_operator(
            |p, q| if p == 2 || q == 2 { -1.0 } else { 1.0 },
            &g,
            Nonlinearity::default(),
            Realization::Materialized,
            false,
        )
        .err()
        .unwrap();
        assert!(matches!(err, Error::Degenerate { index: 2, .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn step_counts() {
        assert_eq!(default_step_count(1.0, 1.0).unwrap(), 2);
        assert_eq!(default_step_count(1.0, 0.6).unwrap(), 2);
        assert_eq!(default_step_count(2.0, 1.2).unwrap(), 2);
        assert_eq!(step_count_for_ratio(1.0, 1.0, 1.0).unwrap(), 1);
        assert_eq!(default_step_count(1.0, 0.1).unwrap(), 12);
        assert!(default_step_count(0.0, 1.0).is_err());
    }
}
