mod common;

use common::gp;
use cortexk::filterbank::{FeaturePoint, SeparablePoint, SpaceTimePoint, SpatioTemporalParams};
use cortexk::geometry::{Axis, FeatureGrid, GridField, Measure};
use cortexk::kernel::{kernel_c_family, kernel_spatiotemporal, spatiotemporal_norm_sq};
use cortexk::viz_export::project_max;

fn grid() -> FeatureGrid {
    FeatureGrid::new(
        vec![
            Axis::symmetric("x", 1.0, 0.1).unwrap(),
            Axis::symmetric("y", 1.0, 0.1).unwrap(),
            Axis::symmetric("theta", 1.5, 0.3).unwrap(),
            Axis::symmetric("alpha", 1.0, 0.2).unwrap(),
        ],
        Measure::GridCell,
    )
    .unwrap()
}

fn point(g: &FeatureGrid, i: usize) -> SpaceTimePoint {
    SpaceTimePoint { at: FeaturePoint::new(g.coord(i, 0), g.coord(i, 1), g.coord(i, 2)), t: 0.0, alpha: g.coord(i, 3) }
}

fn origin() -> SpaceTimePoint {
    SpaceTimePoint { at: FeaturePoint::ORIGIN, t: 0.0, alpha: 0.0 }
}

fn peak(f: &GridField) -> (usize, f64) {
    f.values.iter().copied().enumerate().fold((0, f64::MIN), |b, (i, v)| if v > b.1 { (i, v) } else { b })
}

#[test]
fn kernel_and_projections_peak_at_origin() {
    let sp = SpatioTemporalParams::new(gp(), 1.0).unwrap();
    let g = grid();
    let values = (0..g.len()).map(|i| kernel_spatiotemporal(&sp, &point(&g, i), &origin()).unwrap()).collect();
    let field = GridField::new(g.clone(), values).unwrap();
    let (i, v) = peak(&field);
    assert_eq!(g.coords(i), vec![0.0; 4]);
    assert!((v - spatiotemporal_norm_sq(&sp)).abs() < 1e-12 * v);
    for axis in ["alpha", "theta"] {
        let proj = project_max(&field, axis).unwrap();
        let (j, _) = peak(&proj.field);
        assert!(proj.field.grid.coords(j).iter().all(|c| c.abs() < 1e-12), "{axis}");
    }
}

#[test]
fn velocity_mismatch_lowers_the_kernel() {
    let sp = SpatioTemporalParams::new(gp(), 1.0).unwrap();
    let at = |alpha| SpaceTimePoint { alpha, ..origin() };
    let vals: Vec<f64> = [0.0, 0.2, 0.4, 0.8].iter().map(|&a| kernel_spatiotemporal(&sp, &at(a), &origin()).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
}

#[test]
fn c_family_reduces_to_its_branches() {
    let sp = SpatioTemporalParams::new(gp(), 1.0).unwrap();
    let p = SpaceTimePoint { at: FeaturePoint::new(0.2, -0.1, 0.3), t: 0.0, alpha: 0.4 };
    let one = |q: SpaceTimePoint| SeparablePoint::new(q, 1.0).unwrap();
    let a = kernel_c_family(&sp, &one(p), &one(origin())).unwrap();
    let b = kernel_spatiotemporal(&sp, &p, &origin()).unwrap();
    assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "{a} vs {b}");
}
