//! The normalised transition operator, iterated connectivity kernels, image
//! lifting and evolution, and propagation on pinwheel maps.

mod bank;
mod fields;
mod lift;
mod operator;
mod pinwheel;
mod transition;

pub use bank::TranslationBank;
pub use fields::{Activation, InitMode, KernelField, Nonlinearity};
pub use lift::{image_lattice_point, lift_image};
pub use operator::{CsrMatrix, KernelMatrix, LazyMatrix, ShiftInvariantMatrix};
pub use pinwheel::{generate_pinwheel, propagate_pinwheel, PinwheelMap};
pub use transition::{
    default_step_count, evolve_activation, iterate_kernel, step_count_for_ratio, transition_operator, Init,
    Realization, TransitionOperator,
};
