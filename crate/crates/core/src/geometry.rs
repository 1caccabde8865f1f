//! Sampled feature spaces, their measures, d-balls and the glued distance.

mod graph;
mod grid;

pub use graph::{ball_measure, glued_distance, glued_distances_from, PatchGraph, Reach};
pub use grid::{counting_measure, grid_cell_measure, Axis, FeatureGrid, GridField, Measure};
