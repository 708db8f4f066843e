use faer::{c64, Mat, MatRef};

use super::kernel::DephasingKernel;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg;
use crate::state::DensityMatrix;
use crate::tolerance::Tolerances;

fn check_grid(rho: &DensityMatrix, kernel: &DephasingKernel) -> Result<()> {
    if rho.grid()? != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Δ_g(ρ): ρ(x, y) ↦ g(x − y) ρ(x, y).
///
/// Refuses kernels that are not completely positive; masks go through
/// [`apply_step_projector`] instead.
pub fn apply_dephasing(rho: &DensityMatrix, kernel: &DephasingKernel) -> Result<DensityMatrix> {
    check_grid(rho, kernel)?;
    if !kernel.is_completely_positive() {
        return Err(Error::NotCompletelyPositive);
    }
    Ok(DensityMatrix::from_parts(
        rho.factors().to_vec(),
        kernel.mask(rho.entries()),
    ))
}

/// Δ_g ∘ Δ_g
pub fn apply_dephasing_twice(
    rho: &DensityMatrix,
    kernel: &DephasingKernel,
) -> Result<DensityMatrix> {
    apply_dephasing(&apply_dephasing(rho, kernel)?, kernel)
}

/// (Δ_{g_A} ⊗ Δ_{g_B})(ρ_AB) on a two-factor product state.
pub fn apply_product_dephasing(
    rho: &DensityMatrix,
    kernel_a: &DephasingKernel,
    kernel_b: &DephasingKernel,
) -> Result<DensityMatrix> {
    match rho.factors() {
        [ga, gb] if ga == kernel_a.grid() && gb == kernel_b.grid() => {}
        [_, _] => return Err(Error::GridMismatch),
        f => return Err(Error::NotSingleLattice(f.len())),
    }
    if !(kernel_a.is_completely_positive() && kernel_b.is_completely_positive()) {
        return Err(Error::NotCompletelyPositive);
    }
    let nb = kernel_b.grid().len() as isize;
    let m = rho.entries();
    let dim = m.nrows();
    let entries = Mat::from_fn(dim, dim, |r, c| {
        let (ra, rb) = (r as isize / nb, r as isize % nb);
        let (ca, cb) = (c as isize / nb, c as isize % nb);
        kernel_a.at_offset(ra - ca) * kernel_b.at_offset(rb - cb) * m[(r, c)]
    });
    Ok(DensityMatrix::from_parts(rho.factors().to_vec(), entries))
}

/// Output of a mask that need not be completely positive.
#[derive(Clone, Debug)]
pub struct MaskedMatrix {
    grid: Grid,
    entries: Mat<c64>,
}

impl MaskedMatrix {
    pub fn entries(&self) -> MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn trace(&self) -> c64 {
        linalg::trace(self.entries.as_ref())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(self.entries.as_ref())
    }

    /// Validity report: the smallest eigenvalue of the masked matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        linalg::min_eigenvalue(self.entries.as_ref())
    }

    pub fn is_state(&self) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -Tolerances::global().positivity)
    }

    /// Applies the step mask again.
    pub fn project(&self, epsilon: f64) -> Result<MaskedMatrix> {
        let mask = DephasingKernel::step(self.grid, epsilon)?;
        Ok(MaskedMatrix {
            grid: self.grid,
            entries: mask.mask(self.entries.as_ref()),
        })
    }

    /// Converts to a density matrix if the mask happened to preserve positivity.
    pub fn into_state(self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.grid, self.entries)
    }
}

/// Step projector Δ_Θ^ε: keeps entries with |x_i − x_j| ≤ ε.
pub fn apply_step_projector(rho: &DensityMatrix, epsilon: f64) -> Result<MaskedMatrix> {
    let grid = *rho.grid()?;
    let mask = DephasingKernel::step(grid, epsilon)?;
    Ok(MaskedMatrix {
        grid,
        entries: mask.mask(rho.entries()),
    })
}

/// Result of the partial inverse ρ(x, y)/g(x − y).
#[derive(Clone, Debug)]
pub struct InverseDephasing {
    pub entries: Mat<c64>,
    pub is_state: bool,
    pub min_eigenvalue: f64,
    /// Tr(ρ̃²)
    pub trace_hs: f64,
}

/// Entrywise division by the kernel; refuses when |g| < `floor` anywhere.
pub fn inverse_dephasing(
    rho: &DensityMatrix,
    kernel: &DephasingKernel,
    floor: f64,
) -> Result<InverseDephasing> {
    check_grid(rho, kernel)?;
    let min_abs = kernel.min_abs();
    if min_abs < floor {
        return Err(Error::SingularKernel { min_abs, floor });
    }
    let n = kernel.grid().len();
    let m = rho.entries();
    let entries = Mat::from_fn(n, n, |i, j| m[(i, j)] / kernel.values()[i + n - 1 - j]);
    let tol = Tolerances::global();
    let min_eigenvalue = linalg::min_eigenvalue(entries.as_ref())?;
    let is_state = linalg::hermiticity_defect(entries.as_ref()) <= tol.hermiticity
        && (linalg::trace(entries.as_ref()) - 1.0).norm() <= tol.trace
        && min_eigenvalue >= -tol.inverse_positivity;
    let trace_hs = linalg::hs_norm_sq(entries.as_ref());
    Ok(InverseDephasing {
        entries,
        is_state,
        min_eigenvalue,
        trace_hs,
    })
}

/// [`inverse_dephasing`] with the default refusal floor.
pub fn inverse_dephasing_default(
    rho: &DensityMatrix,
    kernel: &DephasingKernel,
) -> Result<InverseDephasing> {
    inverse_dephasing(rho, kernel, Tolerances::global().inverse_floor)
}
