//! Position-dephasing maps: the random-kick channel Δ_g in its kernel,
//! pointer-meter and Monte Carlo forms, the step projector, and the partial
//! inverse.

mod apply;
mod kernel;
mod kicks;
mod monte_carlo;
mod pointer;

pub use apply::{
    apply_dephasing, apply_dephasing_twice, apply_product_dephasing, apply_step_projector,
    inverse_dephasing, inverse_dephasing_default, InverseDephasing, MaskedMatrix,
};
pub use kernel::{
    gaussian_kernel, kernel_from_kicks, kernel_from_pointer, DephasingKernel, KernelKind,
    KernelModel,
};
pub use kicks::KickDistribution;
pub use monte_carlo::{apply_random_kicks_mc, empirical_kernel, sample_kicks, MC_BATCH};
pub use pointer::PointerState;
