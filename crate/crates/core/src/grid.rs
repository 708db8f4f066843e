//! Uniform, endpoint-inclusive position lattice.

use crate::error::{Error, Result};

/// Lattice x_i = x_min + i·dx, i = 0..n_points−1, with dx = (x_max − x_min)/(n_points − 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidRange(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidRange(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        let dx = (x_max - x_min) / (n_points - 1) as f64;
        if dx <= 0.0 {
            return Err(Error::InvalidRange("lattice spacing underflows".into()));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
            dx,
        })
    }

    /// Grid of `n_points` covering `[center − half_width, center + half_width]`.
    pub fn centered(center: f64, half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(center - half_width, center + half_width, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn span(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.point(i))
    }

    /// Separation x_i − x_j for a lattice offset k = i − j.
    pub fn separation(&self, offset: isize) -> f64 {
        offset as f64 * self.dx
    }

    /// Number of whole lattice steps in `length`, if it is a lattice multiple.
    pub fn steps_for(&self, name: &'static str, length: f64) -> Result<isize> {
        let steps = length / self.dx;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 * rounded.abs().max(1.0) {
            return Err(Error::OffLattice {
                name,
                value: length,
            });
        }
        Ok(rounded as isize)
    }

    /// Indices of lattice sites inside the closed interval `[lo, hi]`.
    pub fn sites_in(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let slack = 1e-9 * self.dx;
        let first = ((lo - self.x_min - slack) / self.dx).ceil().max(0.0) as usize;
        let last = ((hi - self.x_min + slack) / self.dx).floor();
        if last < 0.0 {
            return 0..0;
        }
        let end = (last as usize + 1).min(self.n_points);
        first.min(end)..end
    }
}
