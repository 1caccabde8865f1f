#![allow(dead_code)]

use std::f64::consts::PI;

use cortexk::filterbank::{EndstopParams, Endstopped, FeaturePoint, Gabor, GaborParams, Profile};
use cortexk::geometry::{Axis, FeatureGrid, Measure};
use cortexk::kernel::PatchSpec;
use cortexk::propagation::{iterate_kernel, Init, KernelField, Nonlinearity, TranslationBank};

pub fn gp() -> GaborParams {
    GaborParams::new(1.0, 0.5).unwrap()
}

/// x in [-1.5, 1.5], y in [-3, 3] at step 0.1; theta in [-1.5, 1.5] at 0.15.
pub fn propagation_grid() -> FeatureGrid {
    FeatureGrid::new(
        vec![
            Axis::symmetric("x", 1.5, 0.1).unwrap(),
            Axis::symmetric("y", 3.0, 0.1).unwrap(),
            Axis::symmetric("theta", 1.5, 0.15).unwrap(),
        ],
        Measure::GridCell,
    )
    .unwrap()
}

/// x, y in [-1, 1] at step 0.01; theta in [-1.5, 1.5] at 0.015.
pub fn visual_grid() -> FeatureGrid {
    FeatureGrid::new(
        vec![
            Axis::symmetric("x", 1.0, 0.01).unwrap(),
            Axis::symmetric("y", 1.0, 0.01).unwrap(),
            Axis::symmetric("theta", 1.5, 0.015).unwrap(),
        ],
        Measure::GridCell,
    )
    .unwrap()
}

pub fn gabor_bank(grid: &FeatureGrid, truncate: bool) -> TranslationBank {
    let mut bank = TranslationBank::gabor(&gp(), grid.clone()).unwrap();
    if truncate {
        bank.truncate(&PatchSpec::new(1.0).unwrap()).unwrap();
    }
    bank
}

pub fn propagate_gabor(grid: &FeatureGrid, truncate: bool, n: usize) -> Vec<KernelField> {
    let bank = gabor_bank(grid, truncate);
    let op = bank.operator(Nonlinearity::default()).unwrap();
    let origin = grid.locate(&[0.0, 0.0, 0.0]).unwrap();
    iterate_kernel(&op, grid, origin, n, Init::Normalized).unwrap()
}

pub fn gabors_at_origin(gp: &GaborParams, thetas: &[f64]) -> Vec<Gabor> {
    thetas.iter().map(|&t| Gabor::new(*gp, FeaturePoint::new(0.0, 0.0, t))).collect()
}

pub fn endstops_at_origin(ep: &EndstopParams, thetas: &[f64]) -> Vec<Endstopped> {
    thetas.iter().map(|&t| Endstopped { params: *ep, at: FeaturePoint::new(0.0, 0.0, t) }).collect()
}

pub fn as_profiles<T: Profile>(v: &[T]) -> Vec<&dyn Profile> {
    v.iter().map(|p| p as &dyn Profile).collect()
}

/// Orientation difference folded into [0, π/2].
pub fn orientation_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}
