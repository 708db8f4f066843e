use faer::c64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::GaussianParams;
use crate::tolerance::Tolerances;

/// Meter wavepacket m(z) on its own lattice, with coupling scale s = λt.
#[derive(Clone, Debug)]
pub struct PointerState {
    grid: Grid,
    amplitudes: Vec<c64>,
    scale: f64,
}

impl PointerState {
    pub fn new(grid: Grid, amplitudes: Vec<c64>, scale: f64) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidState(format!(
                "{} pointer amplitudes for {} meter sites",
                amplitudes.len(),
                grid.len()
            )));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::NonPositiveScale {
                name: "pointer scale",
                value: scale,
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx();
        if (norm - 1.0).abs() > Tolerances::global().normalization {
            return Err(Error::InvalidState(format!(
                "pointer norm defect {:e}",
                (norm - 1.0).abs()
            )));
        }
        Ok(Self {
            grid,
            amplitudes,
            scale,
        })
    }

    /// Gaussian pointer (2πw²)^(−1/4) exp(−z²/(4w²)) centered on the meter grid.
    pub fn gaussian(grid: Grid, width: f64, scale: f64) -> Result<Self> {
        let params = GaussianParams::new(0.5 * (grid.x_min() + grid.x_max()), width)?;
        let psi = crate::state::WaveFunction::gaussian(grid, params)?;
        Self::new(grid, psi.amplitudes().to_vec(), scale)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// G(k·dz) = Σ_u m(u) m*(u + k·dz) dz for k = 0..n−1.
    pub fn autocorrelation(&self) -> Vec<c64> {
        let m = &self.amplitudes;
        let n = m.len();
        let dz = self.grid.dx();
        (0..n)
            .map(|k| {
                (0..n - k)
                    .map(|u| m[u] * m[u + k].conj())
                    .sum::<c64>()
                    * dz
            })
            .collect()
    }
}
