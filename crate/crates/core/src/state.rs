//! Wavefunctions and density matrices sampled on a [`Grid`].
//!
//! Density matrices use the convention M_ij = ρ(x_i, x_j)·dx, so traces,
//! purities and eigenvalues are plain matrix quantities with no further
//! quadrature weights.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg;
use crate::tolerance::Tolerances;

/// Default cap on the dimension of tensor-product states.
pub const DEFAULT_PRODUCT_CAP: usize = 4096;

/// Margin, in widths, a Gaussian packet must keep from both grid ends.
pub const GAUSSIAN_MARGIN: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianParams {
    pub center: f64,
    pub sigma: f64,
}

impl GaussianParams {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::NonPositiveScale {
                name: "sigma",
                value: sigma,
            });
        }
        Ok(Self { center, sigma })
    }

    /// Checks the 6σ support margin against `grid`.
    pub fn check_fits(&self, grid: &Grid) -> Result<()> {
        let need = GAUSSIAN_MARGIN * self.sigma * (1.0 - 1e-12);
        if self.center - grid.x_min() < need || grid.x_max() - self.center < need {
            return Err(Error::PacketClipped {
                center: self.center,
                sigma: self.sigma,
                margin: GAUSSIAN_MARGIN,
                x_min: grid.x_min(),
                x_max: grid.x_max(),
            });
        }
        Ok(())
    }

    /// The smallest grid of `n_points` that holds this packet with the required margin.
    pub fn fitted_grid(&self, n_points: usize) -> Result<Grid> {
        Grid::centered(self.center, GAUSSIAN_MARGIN * self.sigma, n_points)
    }

    /// Analytic amplitude (2πσ²)^(−1/4) exp(−(x−x0)²/(4σ²)).
    pub fn amplitude(&self, x: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let u = x - self.center;
        (2.0 * std::f64::consts::PI * s2).powf(-0.25) * (-u * u / (4.0 * s2)).exp()
    }
}

#[derive(Clone, Debug)]
pub struct WaveFunction {
    grid: Grid,
    amplitudes: Vec<c64>,
}

impl WaveFunction {
    /// Wraps already-normalized amplitudes, checking Σ|ψ_i|²dx = 1.
    pub fn new(grid: Grid, amplitudes: Vec<c64>) -> Result<Self> {
        check_len(&grid, amplitudes.len())?;
        let psi = Self { grid, amplitudes };
        let defect = (psi.norm_sq() - 1.0).abs();
        if defect > Tolerances::global().normalization {
            return Err(Error::InvalidState(format!(
                "wavefunction norm defect {defect:e}"
            )));
        }
        Ok(psi)
    }

    /// Rescales arbitrary amplitudes to unit lattice norm.
    pub fn normalized(grid: Grid, mut amplitudes: Vec<c64>) -> Result<Self> {
        check_len(&grid, amplitudes.len())?;
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::InvalidState("amplitudes have zero norm".into()));
        }
        let scale = norm_sq.sqrt().recip();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(Self { grid, amplitudes })
    }

    /// Gaussian packet with vanishing mean momentum, renormalized on the lattice.
    pub fn gaussian(grid: Grid, params: GaussianParams) -> Result<Self> {
        params.check_fits(&grid)?;
        let amps = grid
            .points()
            .map(|x| c64::new(params.amplitude(x), 0.0))
            .collect();
        Self::normalized(grid, amps)
    }

    /// Smooth compactly supported bump exp(−1/(1−u²)), u = (x − center)/half_width.
    pub fn bump(grid: Grid, center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::NonPositiveScale {
                name: "half_width",
                value: half_width,
            });
        }
        let amps = grid
            .points()
            .map(|x| {
                let u = (x - center) / half_width;
                let v = if u.abs() < 1.0 {
                    (-1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                };
                c64::new(v, 0.0)
            })
            .collect();
        Self::normalized(grid, amps)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// ⟨self|other⟩ = Σ conj(ψ_i) φ_i dx
    pub fn inner(&self, other: &WaveFunction) -> Result<c64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<c64>()
            * self.grid.dx())
    }

    /// Multiplies by exp(i k x) (a momentum boost by ℏk).
    pub fn boosted(&self, wavenumber: f64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(self.grid.points())
            .map(|(a, x)| a * c64::cis(wavenumber * x))
            .collect();
        Self {
            grid: self.grid,
            amplitudes,
        }
    }

    /// Zeroes every amplitude outside `[lo, hi]` and renormalizes.
    pub fn truncated(&self, lo: f64, hi: f64) -> Result<Self> {
        let keep = self.grid.sites_in(lo, hi);
        let amps = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if keep.contains(&i) { *a } else { c64::new(0.0, 0.0) })
            .collect();
        Self::normalized(self.grid, amps)
    }

    /// Lattice sites carrying nonzero amplitude, as a half-open index range.
    pub fn support(&self) -> std::ops::Range<usize> {
        let first = self.amplitudes.iter().position(|a| a.norm_sqr() > 0.0);
        let last = self.amplitudes.iter().rposition(|a| a.norm_sqr() > 0.0);
        match (first, last) {
            (Some(f), Some(l)) => f..l + 1,
            _ => 0..0,
        }
    }
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::InvalidState(format!(
            "{len} amplitudes for a grid of {} points",
            grid.len()
        )));
    }
    Ok(())
}

/// Discretized density operator, possibly on a product of lattices.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    factors: Vec<Grid>,
    entries: Mat<c64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity of `entries`.
    pub fn new(grid: Grid, entries: Mat<c64>) -> Result<Self> {
        if entries.nrows() != grid.len() || entries.ncols() != grid.len() {
            return Err(Error::InvalidState(format!(
                "{}x{} matrix for a grid of {} points",
                entries.nrows(),
                entries.ncols(),
                grid.len()
            )));
        }
        let rho = Self::from_parts(vec![grid], entries);
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts(factors: Vec<Grid>, entries: Mat<c64>) -> Self {
        debug_assert_eq!(
            factors.iter().map(Grid::len).product::<usize>(),
            entries.nrows()
        );
        Self { factors, entries }
    }

    /// M_ij = ψ_i ψ_j* dx
    pub fn pure(psi: &WaveFunction) -> Self {
        let a = psi.amplitudes();
        let dx = psi.grid().dx();
        let entries = Mat::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj() * dx);
        Self::from_parts(vec![*psi.grid()], entries)
    }

    /// Diagonal state with the given site populations.
    pub fn diagonal(grid: Grid, populations: &[f64]) -> Result<Self> {
        check_len(&grid, populations.len())?;
        check_weights(populations)?;
        let entries = Mat::from_fn(grid.len(), grid.len(), |i, j| {
            if i == j {
                c64::new(populations[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        Ok(Self::from_parts(vec![grid], entries))
    }

    /// Convex combination Σ w_k ρ_k.
    pub fn mix(states: &[DensityMatrix], weights: &[f64]) -> Result<Self> {
        if states.is_empty() || states.len() != weights.len() {
            return Err(Error::InvalidState(
                "mixture needs one weight per state and at least one state".into(),
            ));
        }
        check_weights(weights)?;
        let first = &states[0];
        if states.iter().any(|s| s.factors != first.factors) {
            return Err(Error::GridMismatch);
        }
        let n = first.dim();
        let entries = Mat::from_fn(n, n, |i, j| {
            states
                .iter()
                .zip(weights)
                .map(|(s, &w)| s.entries[(i, j)] * w)
                .sum()
        });
        Ok(Self::from_parts(first.factors.clone(), entries))
    }

    /// ρ_A ⊗ ρ_B on the product lattice, refusing dimensions above [`DEFAULT_PRODUCT_CAP`].
    pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        Self::tensor_product_capped(a, b, DEFAULT_PRODUCT_CAP)
    }

    pub fn tensor_product_capped(a: &DensityMatrix, b: &DensityMatrix, cap: usize) -> Result<Self> {
        let (na, nb) = (a.dim(), b.dim());
        let dim = na * nb;
        if dim > cap {
            return Err(Error::SizeCap { dim, cap });
        }
        let entries = Mat::from_fn(dim, dim, |r, c| {
            a.entries[(r / nb, c / nb)] * b.entries[(r % nb, c % nb)]
        });
        let mut factors = a.factors.clone();
        factors.extend_from_slice(&b.factors);
        Ok(Self::from_parts(factors, entries))
    }

    /// The single lattice this state lives on.
    pub fn grid(&self) -> Result<&Grid> {
        match self.factors.as_slice() {
            [g] => Ok(g),
            f => Err(Error::NotSingleLattice(f.len())),
        }
    }

    pub fn factors(&self) -> &[Grid] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn into_entries(self) -> Mat<c64> {
        self.entries
    }

    pub fn trace(&self) -> c64 {
        linalg::trace(self.entries.as_ref())
    }

    /// Tr(ρ²)
    pub fn purity(&self) -> f64 {
        linalg::hs_norm_sq(self.entries.as_ref())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(self.entries.as_ref())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        linalg::min_eigenvalue(self.entries.as_ref())
    }

    /// Position density ρ(x_i, x_i)·dx on a single lattice.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    /// Checks every declared invariant (the positivity check costs one eigendecomposition).
    pub fn validate(&self) -> Result<()> {
        let tol = Tolerances::global();
        let herm = self.hermiticity_defect();
        if herm > tol.hermiticity {
            return Err(Error::InvalidState(format!("hermiticity defect {herm:e}")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue()?;
        if min < -tol.positivity {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

}

fn check_weights(weights: &[f64]) -> Result<()> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > Tolerances::global().weight_sum {
        return Err(Error::WeightSum(sum));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: usize) -> Grid {
        Grid::new(-8.0, 8.0, n).unwrap()
    }

    fn packet(grid: Grid, center: f64, sigma: f64) -> WaveFunction {
        WaveFunction::gaussian(grid, GaussianParams::new(center, sigma).unwrap()).unwrap()
    }

    #[test]
    fn gaussian_is_normalized() {
        let psi = packet(unit_grid(401), 0.0, 1.0);
        assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_amplitude_ratio_is_e() {
        // grid points at 0 and 2σ exist when dx divides 2
        let grid = Grid::new(-8.0, 8.0, 161).unwrap();
        let psi = packet(grid, 0.0, 1.0);
        let at = |x: f64| psi.amplitudes()[((x + 8.0) / grid.dx()).round() as usize].re;
        assert!((at(0.0) / at(2.0) - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn packet_margin_rule() {
        let grid = Grid::new(0.0, 400e-6, 801).unwrap();
        assert!(WaveFunction::gaussian(grid, GaussianParams::new(200e-6, 10e-6).unwrap()).is_ok());
        let clipped = WaveFunction::gaussian(grid, GaussianParams::new(595e-6, 10e-6).unwrap());
        assert!(matches!(clipped, Err(Error::PacketClipped { .. })));
        assert!(GaussianParams::new(0.0, 0.0).is_err());
    }

    #[test]
    fn pure_state_invariants() {
        let psi = packet(unit_grid(201), 0.3, 1.0).boosted(1.7);
        let rho = DensityMatrix::pure(&psi);
        assert!((rho.trace() - 1.0).norm() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-10);
        assert!(rho.hermiticity_defect() < 1e-15);
        rho.validate().unwrap();
        let m = rho.entries();
        assert!((m[(10, 50)].norm() - m[(50, 10)].norm()).abs() < 1e-16);
    }

    #[test]
    fn mixing_rules() {
        let g = unit_grid(161);
        let rho = DensityMatrix::pure(&packet(g, -0.5, 0.8));
        let same = DensityMatrix::mix(&[rho.clone()], &[1.0]).unwrap();
        assert_eq!(linalg::frobenius_distance(same.entries(), rho.entries()), 0.0);
        let half = DensityMatrix::mix(&[rho.clone(), rho.clone()], &[0.5, 0.5]).unwrap();
        assert!(linalg::frobenius_distance(half.entries(), rho.entries()) < 1e-15);
        assert!(matches!(
            DensityMatrix::mix(&[rho.clone(), rho.clone()], &[0.6, 0.6]),
            Err(Error::WeightSum(_))
        ));
        let other = DensityMatrix::pure(&packet(unit_grid(101), 0.0, 0.8));
        assert!(matches!(
            DensityMatrix::mix(&[rho, other], &[0.5, 0.5]),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn disjoint_packets_have_half_purity() {
        let g = Grid::new(-10.0, 10.0, 201).unwrap();
        let a = DensityMatrix::pure(&WaveFunction::bump(g, -5.0, 2.0).unwrap());
        let b = DensityMatrix::pure(&WaveFunction::bump(g, 5.0, 2.0).unwrap());
        let mixed = DensityMatrix::mix(&[a, b], &[0.5, 0.5]).unwrap();
        // brute-force Tr(ρ²) = Σ_ij Σ_k M_ik M_ki
        let m = mixed.entries();
        let n = m.nrows();
        let mut tr = c64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                tr += m[(i, k)] * m[(k, i)];
            }
        }
        assert!((tr.re - 0.5).abs() < 1e-12 && tr.im.abs() < 1e-14);
    }

    #[test]
    fn tensor_products() {
        let ga = Grid::new(-7.0, 7.0, 40).unwrap();
        let gb = Grid::new(-9.0, 9.0, 30).unwrap();
        let a = DensityMatrix::pure(&packet(ga, 0.0, 1.0));
        let b_pure = DensityMatrix::pure(&packet(gb, 1.0, 1.2));
        let b = DensityMatrix::mix(
            &[b_pure, DensityMatrix::pure(&packet(gb, -1.0, 1.0))],
            &[0.3, 0.7],
        )
        .unwrap();
        let ab = DensityMatrix::tensor_product(&a, &b).unwrap();
        assert_eq!(ab.dim(), 1200);
        assert_eq!(ab.factors().len(), 2);
        assert!((ab.trace() - 1.0).norm() < 1e-12);
        assert!((ab.purity() - a.purity() * b.purity()).abs() < 1e-12);
        let aa = DensityMatrix::tensor_product(&a, &a).unwrap();
        assert!((aa.purity() - 1.0).abs() < 1e-10);
        assert!(matches!(ab.grid(), Err(Error::NotSingleLattice(2))));
        assert!(matches!(
            DensityMatrix::tensor_product_capped(&a, &b, 1000),
            Err(Error::SizeCap { dim: 1200, cap: 1000 })
        ));
    }

    #[test]
    fn validation_catches_broken_matrices() {
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let bad_trace = Mat::from_fn(2, 2, |i, j| c64::new(if i == j { 0.6 } else { 0.0 }, 0.0));
        assert!(DensityMatrix::new(g, bad_trace).is_err());
        let negative = Mat::from_fn(2, 2, |i, j| c64::new(if i == j { 0.5 } else { 0.9 }, 0.0));
        assert!(DensityMatrix::new(g, negative).is_err());
        let ok = Mat::from_fn(2, 2, |i, j| c64::new(if i == j { 0.5 } else { 0.2 }, 0.0));
        assert!(DensityMatrix::new(g, ok).is_ok());
    }

    #[test]
    fn normalization_defect_shrinks_under_refinement() {
        // analytic Gaussian, before renormalization, on grids refined by doubling
        let p = GaussianParams::new(0.0, 1.0).unwrap();
        let defects: Vec<f64> = [9usize, 17, 33]
            .iter()
            .map(|&n| {
                let g = Grid::new(-10.0, 10.0, n).unwrap();
                let norm: f64 = g.points().map(|x| p.amplitude(x).powi(2)).sum::<f64>() * g.dx();
                (norm - 1.0).abs()
            })
            .collect();
        assert!(defects[1] < defects[0] && defects[2] < defects[1], "{defects:?}");
    }
}
