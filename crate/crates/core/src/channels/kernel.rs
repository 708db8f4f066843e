use faer::{c64, Mat, MatRef};

use super::kicks::KickDistribution;
use super::pointer::PointerState;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg;
use crate::tolerance::{Tolerances, Units};

#[derive(Clone, Debug, PartialEq)]
pub enum KernelKind {
    /// g ≡ 1
    Identity,
    Gaussian { ell_g: f64 },
    FromKicks { eta: Option<f64> },
    FromPointer { scale: f64 },
    Step { epsilon: f64 },
    Custom,
    /// Pointwise product of two kernels (composition of the maps).
    Composed,
}

/// Relative-coordinate suppression g(ξ_k), ξ_k = k·dx, k = −(n−1)..(n−1).
///
/// Stored on the difference lattice (2n − 1 values); g_0 is exactly 1 and
/// g_{−k} = conj(g_k).
#[derive(Clone, Debug)]
pub struct DephasingKernel {
    grid: Grid,
    values: Vec<c64>,
    kind: KernelKind,
    completely_positive: bool,
}

impl DephasingKernel {
    pub fn identity(grid: Grid) -> Self {
        Self {
            values: vec![c64::new(1.0, 0.0); 2 * grid.len() - 1],
            grid,
            kind: KernelKind::Identity,
            completely_positive: true,
        }
    }

    /// g(ξ) = exp(−ξ²/(2ℓ_g²))
    pub fn gaussian(grid: Grid, ell_g: f64) -> Result<Self> {
        if !(ell_g > 0.0) || ell_g.is_nan() {
            return Err(Error::NonPositiveScale {
                name: "ell_g",
                value: ell_g,
            });
        }
        Ok(Self::from_half(grid, KernelKind::Gaussian { ell_g }, true, |xi| {
            c64::new(gaussian_value(xi, ell_g), 0.0)
        }))
    }

    /// Characteristic function of the kick distribution.
    pub fn from_kicks(grid: Grid, kicks: &KickDistribution, units: &Units) -> Self {
        Self::from_half(
            grid,
            KernelKind::FromKicks { eta: kicks.eta() },
            true,
            |xi| kicks.characteristic(xi, units),
        )
    }

    /// g(ξ) = G(s·ξ) from the pointer autocorrelation, linearly interpolated on the meter lattice.
    pub fn from_pointer(pointer: &PointerState, grid: Grid) -> Result<Self> {
        let auto = pointer.autocorrelation();
        let dz = pointer.grid().dx();
        let reach = (auto.len() - 1) as f64 * dz;
        let needed = pointer.scale() * grid.span();
        if needed > reach * (1.0 + 1e-12) {
            return Err(Error::Resolution {
                needed,
                available: reach,
            });
        }
        let g0 = auto[0].re;
        let kernel = Self::from_half(
            grid,
            KernelKind::FromPointer {
                scale: pointer.scale(),
            },
            false,
            |xi| {
                let t = (pointer.scale() * xi / dz).min((auto.len() - 1) as f64);
                let i = t.floor() as usize;
                let f = t - i as f64;
                let lo = auto[i];
                let hi = auto.get(i + 1).copied().unwrap_or(lo);
                (lo * (1.0 - f) + hi * f) / g0
            },
        );
        kernel.with_checked_positivity()
    }

    /// Heaviside mask Θ(ε − |ξ|) with lattice ties kept (|ξ| ≤ ε).
    pub fn step(grid: Grid, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::Domain(format!("epsilon must be >= 0, got {epsilon}")));
        }
        let mut kernel = Self::from_half(grid, KernelKind::Step { epsilon }, false, |xi| {
            c64::new(if xi <= epsilon { 1.0 } else { 0.0 }, 0.0)
        });
        let nonzero = kernel.values.iter().filter(|v| v.re != 0.0).count();
        kernel.completely_positive = nonzero == 1 || nonzero == kernel.values.len();
        Ok(kernel)
    }

    /// Arbitrary values on the difference lattice, validated (including positive
    /// semidefiniteness of the Toeplitz matrix g(x_i − x_j)).
    pub fn custom(grid: Grid, values: Vec<c64>) -> Result<Self> {
        let n = grid.len();
        if values.len() != 2 * n - 1 {
            return Err(Error::InvalidKernel(format!(
                "expected {} values, got {}",
                2 * n - 1,
                values.len()
            )));
        }
        let tol = Tolerances::global().kernel;
        let center = values[n - 1];
        if (center - 1.0).norm() > tol {
            return Err(Error::InvalidKernel(format!("g(0) = {center}, expected 1")));
        }
        for k in 1..n {
            let (pos, neg) = (values[n - 1 + k], values[n - 1 - k]);
            if (neg - pos.conj()).norm() > tol {
                return Err(Error::InvalidKernel(format!(
                    "g(-{k}dx) != conj g({k}dx)"
                )));
            }
        }
        if let Some(v) = values.iter().find(|v| v.norm() > 1.0 + tol) {
            return Err(Error::InvalidKernel(format!("|g| = {} exceeds 1", v.norm())));
        }
        let mut values = values;
        values[n - 1] = c64::new(1.0, 0.0);
        let kernel = Self {
            grid,
            values,
            kind: KernelKind::Custom,
            completely_positive: false,
        };
        kernel.with_checked_positivity()
    }

    /// Convex mixture of kick phases; completely positive by construction.
    pub(crate) fn sampled_mixture(grid: Grid, values: Vec<c64>) -> Result<Self> {
        debug_assert_eq!(values.len(), 2 * grid.len() - 1);
        Ok(Self {
            grid,
            values,
            kind: KernelKind::FromKicks { eta: None },
            completely_positive: true,
        })
    }

    fn from_half(
        grid: Grid,
        kind: KernelKind,
        completely_positive: bool,
        f: impl Fn(f64) -> c64,
    ) -> Self {
        let n = grid.len();
        let mut values = vec![c64::new(1.0, 0.0); 2 * n - 1];
        for k in 1..n {
            let g = f(grid.separation(k as isize));
            values[n - 1 + k] = g;
            values[n - 1 - k] = g.conj();
        }
        Self {
            grid,
            values,
            kind,
            completely_positive,
        }
    }

    fn with_checked_positivity(mut self) -> Result<Self> {
        let min = linalg::min_eigenvalue(self.toeplitz().as_ref())?;
        self.completely_positive = min >= -Tolerances::global().positivity;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn values(&self) -> &[c64] {
        &self.values
    }

    /// g(k·dx)
    pub fn at_offset(&self, k: isize) -> c64 {
        let n = self.grid.len() as isize;
        assert!(k.abs() < n, "offset {k} outside the difference lattice");
        self.values[(k + n - 1) as usize]
    }

    /// Whether Δ_g is completely positive (the mask matrix is positive semidefinite).
    pub fn is_completely_positive(&self) -> bool {
        self.completely_positive
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }

    /// The mask matrix [g(x_i − x_j)].
    pub fn toeplitz(&self) -> Mat<c64> {
        let n = self.grid.len();
        Mat::from_fn(n, n, |i, j| self.values[i + n - 1 - j])
    }

    /// Kernel of Δ_self ∘ Δ_other, the pointwise product.
    pub fn compose(&self, other: &DephasingKernel) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
            kind: KernelKind::Composed,
            completely_positive: self.completely_positive && other.completely_positive,
        })
    }

    /// M'_ij = g(x_i − x_j)·M_ij
    pub(crate) fn mask(&self, m: MatRef<'_, c64>) -> Mat<c64> {
        let n = self.grid.len();
        assert_eq!(m.nrows(), n);
        Mat::from_fn(n, n, |i, j| self.values[i + n - 1 - j] * m[(i, j)])
    }
}

pub(crate) fn gaussian_value(xi: f64, ell_g: f64) -> f64 {
    (-xi * xi / (2.0 * ell_g * ell_g)).exp()
}

/// A kernel family independent of any particular grid.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelModel {
    Identity,
    Gaussian { ell_g: f64 },
    Kicks { kicks: KickDistribution, units: Units },
}

impl KernelModel {
    pub fn on_grid(&self, grid: Grid) -> Result<DephasingKernel> {
        match self {
            KernelModel::Identity => Ok(DephasingKernel::identity(grid)),
            KernelModel::Gaussian { ell_g } => DephasingKernel::gaussian(grid, *ell_g),
            KernelModel::Kicks { kicks, units } => {
                Ok(DephasingKernel::from_kicks(grid, kicks, units))
            }
        }
    }

    /// g(ξ) in the continuum.
    pub fn value(&self, xi: f64) -> c64 {
        match self {
            KernelModel::Identity => c64::new(1.0, 0.0),
            KernelModel::Gaussian { ell_g } => c64::new(gaussian_value(xi, *ell_g), 0.0),
            KernelModel::Kicks { kicks, units } => kicks.characteristic(xi, units),
        }
    }

    /// ℓ_g for Gaussian families; `None` otherwise.
    pub fn coherence_length(&self) -> Option<f64> {
        match self {
            KernelModel::Identity => None,
            KernelModel::Gaussian { ell_g } => Some(*ell_g),
            KernelModel::Kicks { kicks, units } => kicks.coherence_length(units),
        }
    }
}

/// Gaussian kernel exp(−ξ²/(2ℓ_g²)) on `grid`.
pub fn gaussian_kernel(grid: Grid, ell_g: f64) -> Result<DephasingKernel> {
    DephasingKernel::gaussian(grid, ell_g)
}

pub fn kernel_from_kicks(grid: Grid, kicks: &KickDistribution, units: &Units) -> DephasingKernel {
    DephasingKernel::from_kicks(grid, kicks, units)
}

pub fn kernel_from_pointer(pointer: &PointerState, grid: Grid) -> Result<DephasingKernel> {
    DephasingKernel::from_pointer(pointer, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(k: &DephasingKernel) {
        let n = k.grid().len() as isize;
        assert_eq!(k.at_offset(0), c64::new(1.0, 0.0));
        for off in 1..n {
            assert!((k.at_offset(-off) - k.at_offset(off).conj()).norm() <= 1e-12);
            assert!(k.at_offset(off).norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn gaussian_values() {
        let grid = Grid::new(-10.0, 10.0, 201).unwrap();
        let k = gaussian_kernel(grid, 1.0).unwrap();
        check_invariants(&k);
        assert_eq!(k.at_offset(0).re, 1.0);
        assert!((k.at_offset(10).re - (-0.5f64).exp()).abs() < 1e-15);
        assert!((k.at_offset(10).re - 0.60653).abs() < 1e-5);
        assert!((k.at_offset(100).re / (-50.0f64).exp() - 1.0).abs() < 1e-12);
        assert!((k.at_offset(100).re - 1.93e-22).abs() < 0.01e-22);
        assert!(matches!(
            gaussian_kernel(grid, 0.0),
            Err(Error::NonPositiveScale { .. })
        ));
    }

    #[test]
    fn kick_kernels() {
        let grid = Grid::new(-5e-6, 5e-6, 101).unwrap();
        let units = Units::SI;
        let still = kernel_from_kicks(grid, &KickDistribution::point(0.0).unwrap(), &units);
        assert!(still.values().iter().all(|v| *v == c64::new(1.0, 0.0)));

        let eta = units.hbar / 2e-6;
        let gk = kernel_from_kicks(grid, &KickDistribution::gaussian(eta).unwrap(), &units);
        let gg = gaussian_kernel(grid, units.hbar / eta).unwrap();
        for (a, b) in gk.values().iter().zip(gg.values()) {
            assert!((a - b).norm() <= 1e-12);
        }
        check_invariants(&gk);

        let p = 3.0 * units.hbar / 1e-6;
        let two = KickDistribution::sampled(vec![p, -p], vec![0.5, 0.5]).unwrap();
        assert!(two.is_unbiased());
        let k2 = kernel_from_kicks(grid, &two, &units);
        for off in -100..=100isize {
            let xi = grid.separation(off);
            let expect = (p * xi / units.hbar).cos();
            assert!((k2.at_offset(off) - c64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn kick_distribution_validation() {
        assert!(KickDistribution::gaussian(-1.0).is_err());
        assert!(KickDistribution::sampled(vec![1.0], vec![0.5]).is_err());
        assert!(KickDistribution::sampled(vec![1.0, 2.0], vec![1.5, -0.5]).is_err());
        let biased = KickDistribution::sampled(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(!biased.is_unbiased());
        assert_eq!(biased.mean(), 1.5);
    }

    #[test]
    fn pointer_kernel_gaussian_shape() {
        let meter = Grid::new(-20.0, 20.0, 801).unwrap();
        let w = 1.5;
        let pointer = PointerState::gaussian(meter, w, 1.0).unwrap();
        let auto = pointer.autocorrelation();
        assert!((auto[0].re - 1.0).abs() < 1e-10);
        // lattice autocorrelation against exp(−z²/(8w²))
        for k in [1usize, 10, 40, 100] {
            let z = k as f64 * meter.dx();
            let expect = (-z * z / (8.0 * w * w)).exp();
            assert!((auto[k].norm() - expect).abs() < 1e-9, "k={k}");
        }
        let grid = Grid::new(-5.0, 5.0, 51).unwrap();
        let k = kernel_from_pointer(&pointer, grid).unwrap();
        check_invariants(&k);
        assert_eq!(k.at_offset(0), c64::new(1.0, 0.0));
        for off in 1..51isize {
            assert!(k.at_offset(off).norm() < 1.0);
        }
        assert!(k.is_completely_positive());
    }

    #[test]
    fn pointer_kernel_interpolates_and_refines() {
        let w = 1.0;
        let grid = Grid::new(-3.0, 3.0, 41).unwrap();
        let err_at = |n: usize| {
            let meter = Grid::new(-15.0, 15.0, n).unwrap();
            let pointer = PointerState::gaussian(meter, w, 0.7).unwrap();
            let k = kernel_from_pointer(&pointer, grid).unwrap();
            (1..41isize)
                .map(|off| {
                    let z = 0.7 * grid.separation(off);
                    (k.at_offset(off).re - (-z * z / (8.0 * w * w)).exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (err_at(151), err_at(601));
        assert!(fine < coarse, "{coarse} {fine}");
        assert!(fine < 1e-3);
    }

    #[test]
    fn any_pointer_is_strictly_contractive() {
        let meter = Grid::new(0.0, 1.0, 64).unwrap();
        let amps: Vec<c64> = (0..64)
            .map(|i| c64::new(((i * 37 % 11) as f64) - 4.0, ((i * 13 % 7) as f64) - 3.0))
            .collect();
        let psi = crate::state::WaveFunction::normalized(meter, amps).unwrap();
        let pointer = PointerState::new(meter, psi.amplitudes().to_vec(), 1.0).unwrap();
        let auto = pointer.autocorrelation();
        assert!((auto[0].re - 1.0).abs() < 1e-12);
        assert!(auto[1..].iter().all(|g| g.norm() < 1.0));
    }

    #[test]
    fn pointer_resolution_error() {
        let pointer = PointerState::gaussian(Grid::new(-1.0, 1.0, 101).unwrap(), 0.1, 1.0).unwrap();
        let wide = Grid::new(-5.0, 5.0, 11).unwrap();
        assert!(matches!(
            kernel_from_pointer(&pointer, wide),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn characteristic_kernels_are_positive_semidefinite() {
        let grid = Grid::new(-4.0, 4.0, 60).unwrap();
        let g = gaussian_kernel(grid, 0.7).unwrap();
        assert!(linalg::min_eigenvalue(g.toeplitz().as_ref()).unwrap() >= -1e-10);
        let kicks = KickDistribution::sampled(vec![-2.0, 0.5, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let k = kernel_from_kicks(grid, &kicks, &Units::NATURAL);
        assert!(linalg::min_eigenvalue(k.toeplitz().as_ref()).unwrap() >= -1e-10);
    }

    #[test]
    fn step_kernel_flags() {
        let grid = Grid::new(0.0, 10.0, 11).unwrap();
        let s = DephasingKernel::step(grid, 2.0).unwrap();
        assert!(!s.is_completely_positive());
        assert_eq!(s.at_offset(2).re, 1.0);
        assert_eq!(s.at_offset(-2).re, 1.0);
        assert_eq!(s.at_offset(3).re, 0.0);
        assert!(DephasingKernel::step(grid, 0.0).unwrap().is_completely_positive());
        assert!(DephasingKernel::step(grid, 10.0).unwrap().is_completely_positive());
        assert!(DephasingKernel::step(grid, -1.0).is_err());
    }

    #[test]
    fn custom_kernel_validation() {
        let grid = Grid::new(0.0, 1.0, 3).unwrap();
        let one = c64::new(1.0, 0.0);
        let h = c64::new(0.5, 0.1);
        assert!(DephasingKernel::custom(grid, vec![h.conj() * 0.5, h.conj(), one, h, h * 0.5]).is_ok());
        assert!(DephasingKernel::custom(grid, vec![h, h, one, h, h]).is_err());
        assert!(DephasingKernel::custom(grid, vec![one, one, c64::new(0.9, 0.0), one, one]).is_err());
        assert!(DephasingKernel::custom(grid, vec![one; 4]).is_err());
        let big = c64::new(1.2, 0.0);
        assert!(DephasingKernel::custom(grid, vec![big, big, one, big, big]).is_err());
    }
}
