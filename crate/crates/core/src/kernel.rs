//! The generating kernel `K(p, q) = Re⟨ψ_p, ψ_q⟩`, its distance, closed forms
//! for Gabor banks, patches and truncation.

mod analytic;
mod discrete;
mod numeric;
mod table;

pub use analytic::{
    gabor_energy_split, group_coordinates, kernel_c_family, kernel_distance, kernel_gabor_analytic,
    kernel_gabor_shifted, kernel_pinwheel, kernel_spatiotemporal, patch_contains, patch_excess,
    spatiotemporal_norm_sq, truncate_kernel, PatchSpec,
};
pub use discrete::discrete_kernel_column;
pub use numeric::{
    energy_decomposition, equalize_norms, kernel_numeric, kernel_numeric_3d, l2_distance_sq,
    QuadratureStep,
};
pub use table::ShiftTable;
