//! Coherence quantifiers built on the dephasing channel.
//!
//! Entropies are in nats. The relative entropy floors the spectrum of its
//! second argument and reports how much weight of the first argument fell
//! outside the retained support, so divergence is visible rather than clamped.

use faer::{c64, MatRef};

use crate::channels::{apply_dephasing, apply_product_dephasing, DephasingKernel};
use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{DensityMatrix, WaveFunction, DEFAULT_PRODUCT_CAP};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Eigendecomposition,
    IntegralForm,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureReport {
    /// +∞ when `finite` is false.
    pub value: f64,
    pub finite: bool,
    pub method: Method,
    /// Weight of ρ on eigenvectors of σ dropped by the eigenvalue floor.
    pub support_defect: f64,
}

fn entropy_terms(values: &[f64], floor: f64) -> f64 {
    values
        .iter()
        .filter(|&&l| l > floor)
        .map(|&l| l * l.ln())
        .sum()
}

/// S(ρ) = −Tr ρ ln ρ
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let values = linalg::eigenvalues(rho.entries())?;
    Ok(-entropy_terms(&values, Tolerances::global().eigen_floor))
}

/// Σ_k w_k ln μ_k over retained eigenpairs of σ, plus the dropped weight.
fn cross_term(rho: MatRef<'_, c64>, sigma: MatRef<'_, c64>) -> Result<(f64, f64)> {
    let floor = Tolerances::global().eigen_floor;
    let eig = linalg::eigh(sigma)?;
    let projected = eig.vectors.adjoint() * rho * &eig.vectors;
    let mut cross = 0.0;
    let mut defect = 0.0;
    for (k, &mu) in eig.values.iter().enumerate() {
        let w = projected[(k, k)].re;
        if mu > floor {
            cross += w * mu.ln();
        } else {
            defect += w;
        }
    }
    Ok((cross, defect.max(0.0)))
}

fn relative_entropy_of(rho: MatRef<'_, c64>, sigma: MatRef<'_, c64>) -> Result<MeasureReport> {
    let tol = Tolerances::global();
    let (cross, support_defect) = cross_term(rho, sigma)?;
    let finite = support_defect <= tol.support_defect;
    let value = if finite {
        entropy_terms(&linalg::eigenvalues(rho)?, tol.eigen_floor) - cross
    } else {
        f64::INFINITY
    };
    Ok(MeasureReport {
        value,
        finite,
        method: Method::Eigendecomposition,
        support_defect,
    })
}

/// S(ρ‖σ) = Tr ρ ln ρ − Tr ρ ln σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<MeasureReport> {
    if rho.factors() != sigma.factors() {
        return Err(Error::GridMismatch);
    }
    relative_entropy_of(rho.entries(), sigma.entries())
}

/// Relative-entropy dephasing loss S(ρ‖Δ_g ρ).
pub fn c_rel_g(rho: &DensityMatrix, kernel: &DephasingKernel) -> Result<MeasureReport> {
    let dephased = apply_dephasing(rho, kernel)?;
    relative_entropy_of(rho.entries(), dephased.entries())
}

/// −⟨ψ| ln Δ_g(|ψ⟩⟨ψ|) |ψ⟩
pub fn c_rel_pure(psi: &WaveFunction, kernel: &DephasingKernel) -> Result<f64> {
    let tol = Tolerances::global();
    if (psi.norm_sq() - 1.0).abs() > tol.normalization {
        return Err(Error::InvalidState(format!(
            "wavefunction norm {} is not 1",
            psi.norm_sq()
        )));
    }
    let rho = DensityMatrix::pure(psi);
    let dephased = apply_dephasing(&rho, kernel)?;
    let eig = linalg::eigh(dephased.entries())?;
    let amps = psi.amplitudes();
    let mut value = 0.0;
    let mut defect = 0.0;
    for (k, &mu) in eig.values.iter().enumerate() {
        let overlap: c64 = amps
            .iter()
            .enumerate()
            .map(|(i, a)| eig.vectors[(i, k)].conj() * a)
            .sum::<c64>()
            * psi.grid().dx().sqrt();
        let w = overlap.norm_sqr();
        if mu > tol.eigen_floor {
            value -= w * mu.ln();
        } else {
            defect += w;
        }
    }
    Ok(if defect > tol.support_defect {
        f64::INFINITY
    } else {
        value
    })
}

/// Σ_ij (1 − |g(x_i − x_j)|²)|M_ij|²
pub fn c2_integral_form(rho: &DensityMatrix, kernel: &DephasingKernel) -> Result<f64> {
    if rho.grid()? != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    let m = rho.entries();
    let n = m.nrows();
    let values = kernel.values();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += (1.0 - values[i + n - 1 - j].norm_sqr()) * m[(i, j)].norm_sqr();
        }
    }
    Ok(acc)
}

fn c2_routes_agree(trace_form: f64, integral: f64) -> Result<()> {
    let tol = Tolerances::global().c2_routes;
    if (trace_form - integral).abs() > tol {
        return Err(Error::Numeric(format!(
            "C2 trace form {trace_form} and integral form {integral} disagree"
        )));
    }
    Ok(())
}

/// Hilbert–Schmidt dephasing loss Tr ρ² − Tr (Δ_g ρ)², cross-checked against
/// the integral form.
pub fn c2_g(rho: &DensityMatrix, kernel: &DephasingKernel) -> Result<MeasureReport> {
    let dephased = apply_dephasing(rho, kernel)?;
    let value = rho.purity() - dephased.purity();
    c2_routes_agree(value, c2_integral_form(rho, kernel)?)?;
    Ok(MeasureReport {
        value,
        finite: true,
        method: Method::Eigendecomposition,
        support_defect: 0.0,
    })
}

/// Hilbert–Schmidt weight outside the strip |x − y| ≤ ε (lattice ties inside).
pub fn c2_epsilon(rho: &DensityMatrix, epsilon: f64) -> Result<f64> {
    let grid = *rho.grid()?;
    let mask = DephasingKernel::step(grid, epsilon)?;
    let m = rho.entries();
    let n = grid.len();
    let values = mask.values();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if values[i + n - 1 - j].re == 0.0 {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    Ok(acc)
}

fn check_scales(sigma: f64, ell_g: f64) -> Result<()> {
    for (name, value) in [("sigma", sigma), ("ell_g", ell_g)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveScale { name, value });
        }
    }
    Ok(())
}

/// 1 − 1/√(1 + 4σ²/ℓ²), evaluated without cancellation for small σ/ℓ.
pub fn c2_gaussian_closed_form(sigma: f64, ell_g: f64) -> Result<f64> {
    check_scales(sigma, ell_g)?;
    let r = sigma / ell_g;
    Ok(-(-0.5 * (4.0 * r * r).ln_1p()).exp_m1())
}

/// Lower bound ½ ln(1 + 2σ²/ℓ²) on the relative-entropy loss of a Gaussian packet.
pub fn crel_jensen_bound(sigma: f64, ell_g: f64) -> Result<f64> {
    check_scales(sigma, ell_g)?;
    let r = sigma / ell_g;
    Ok(0.5 * (2.0 * r * r).ln_1p())
}

/// erfc(ε/2σ): weight of a Gaussian packet outside the strip of half-width ε.
pub fn c2_epsilon_gaussian_closed_form(sigma: f64, epsilon: f64) -> Result<f64> {
    check_scales(sigma, 1.0)?;
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    Ok(libm::erfc(epsilon / (2.0 * sigma)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdditivityDefects {
    pub crel_sum_defect: f64,
    pub c2_product_defect: f64,
}

/// Compares both measures on ρ_A ⊗ ρ_B under Δ_A ⊗ Δ_B with their
/// single-factor values.
pub fn additivity_check(
    rho_a: &DensityMatrix,
    kernel_a: &DephasingKernel,
    rho_b: &DensityMatrix,
    kernel_b: &DephasingKernel,
) -> Result<AdditivityDefects> {
    let joint = DensityMatrix::tensor_product_capped(rho_a, rho_b, DEFAULT_PRODUCT_CAP)?;
    let joint_dephased = apply_product_dephasing(&joint, kernel_a, kernel_b)?;
    let crel_joint = relative_entropy_of(joint.entries(), joint_dephased.entries())?;
    let crel_a = c_rel_g(rho_a, kernel_a)?;
    let crel_b = c_rel_g(rho_b, kernel_b)?;
    let crel_sum_defect = (crel_joint.value - crel_a.value - crel_b.value).abs();

    let da = apply_dephasing(rho_a, kernel_a)?;
    let db = apply_dephasing(rho_b, kernel_b)?;
    let c2_joint = joint.purity() - joint_dephased.purity();
    let product = rho_a.purity() * rho_b.purity() - da.purity() * db.purity();
    Ok(AdditivityDefects {
        crel_sum_defect,
        c2_product_defect: (c2_joint - product).abs(),
    })
}
