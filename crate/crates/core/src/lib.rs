//! Position-basis coherence on a discretized line.
//!
//! States live on a uniform [`Grid`] as density matrices with entries
//! ρ(x_i, x_j)·dx. A [`DephasingKernel`] g(x − y) defines the dephasing map
//! Δ_g, and the crate measures how much coherence it removes
//! ([`measures::c_rel_g`], [`measures::c2_g`]), checks which operations commute
//! with it ([`free_ops`]), builds interference witnesses ([`witness`]) and
//! evolves Gaussian packets in a Newtonian potential ([`dynamics`]).
//!
//! ```
//! use cvcl_core::{gaussian_kernel, DensityMatrix, GaussianParams, Grid, WaveFunction};
//! use cvcl_core::measures::{c2_g, c2_gaussian_closed_form};
//!
//! let packet = GaussianParams::new(0.0, 1.0)?;
//! let grid = packet.fitted_grid(256)?;
//! let rho = DensityMatrix::pure(&WaveFunction::gaussian(grid, packet)?);
//! let kernel = gaussian_kernel(grid, 2.0)?;
//! let lattice = c2_g(&rho, &kernel)?.value;
//! assert!((lattice - c2_gaussian_closed_form(1.0, 2.0)?).abs() < 1e-6);
//! # Ok::<(), cvcl_core::Error>(())
//! ```

pub mod channels;
pub mod dynamics;
pub mod error;
pub mod free_ops;
pub mod grid;
pub mod linalg;
pub mod measures;
pub mod state;
pub mod tolerance;
pub mod witness;

pub use channels::{
    apply_dephasing, apply_random_kicks_mc, apply_step_projector, gaussian_kernel,
    inverse_dephasing, kernel_from_kicks, kernel_from_pointer, DephasingKernel, KernelModel,
    KickDistribution, PointerState,
};
pub use error::{Error, Result};
pub use faer::c64;
pub use grid::Grid;
pub use state::{DensityMatrix, GaussianParams, WaveFunction};
pub use tolerance::{Tolerances, UnitSystem, Units};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/states.md")]
mod book_states {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/channels.md")]
mod book_channels {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/measures.md")]
mod book_measures {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/free_ops.md")]
mod book_free_ops {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/witness.md")]
mod book_witness {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/dynamics.md")]
mod book_dynamics {}
