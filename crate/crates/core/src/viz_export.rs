//! Reductions of fields to the image plane, rasters, field statistics used
//! by the experiments, and the binary/text file formats.

mod analysis;
mod formats;
mod projection;
mod raster;

pub use analysis::{
    components_above, cone_mass, curvature_radius, level_set, patchiness, patchiness_report, percentile_positive,
    second_moment_anisotropy, Anisotropy, PatchinessReport,
};
pub use formats::{
    read_csv_bank, read_fbank, read_kgrid, read_pgm, read_ppm, write_csv_bank, write_fbank, write_kgrid, write_pgm,
    write_ppm, write_projection_csv,
};
pub use projection::{argmax_feature, project_max, ArgmaxField, Projection2D};
pub use raster::{hue_rgb, overlay_threshold, render_glyph_field, GlyphLayout, GrayImage, RgbImage};
