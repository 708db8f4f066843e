//! Sampled random-kick channel.
//!
//! The average (1/N) Σ_s U_s ρ U_s† with U_s = diag(exp(i p_s x_j/ℏ)) equals
//! the Hadamard product of ρ with the empirical characteristic function
//! (1/N) Σ_s exp(i p_s (x_i − x_j)/ℏ), which is what gets accumulated here:
//! O(n) work per sample instead of O(n²).

use faer::c64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use super::apply::apply_dephasing;
use super::kernel::DephasingKernel;
use super::kicks::KickDistribution;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::DensityMatrix;
use crate::tolerance::Units;

/// Samples per independently seeded batch.
pub const MC_BATCH: usize = 4096;

fn draw_batch(kicks: &KickDistribution, rng: &mut impl Rng, count: usize) -> Result<Vec<f64>> {
    match (kicks.eta(), kicks.samples()) {
        (Some(eta), _) => {
            let normal = Normal::new(0.0, eta).map_err(|e| Error::Domain(e.to_string()))?;
            Ok((0..count).map(|_| normal.sample(rng)).collect())
        }
        (None, Some((momenta, weights))) => {
            let index = WeightedIndex::new(weights).map_err(|e| Error::Domain(e.to_string()))?;
            Ok((0..count).map(|_| momenta[index.sample(rng)]).collect())
        }
        (None, None) => unreachable!("kick distribution is either analytic or sampled"),
    }
}

/// Kick momenta for `n_samples` draws: batch b uses stream b of a ChaCha8
/// generator seeded with `seed`, so the sequence is platform independent.
pub fn sample_kicks(kicks: &KickDistribution, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n_samples);
    for (b, start) in (0..n_samples).step_by(MC_BATCH).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        out.extend(draw_batch(kicks, &mut rng, MC_BATCH.min(n_samples - start))?);
    }
    Ok(out)
}

/// Empirical characteristic function of `n_samples` seeded kicks on `grid`.
pub fn empirical_kernel(
    grid: Grid,
    kicks: &KickDistribution,
    n_samples: usize,
    seed: u64,
    units: &Units,
) -> Result<DephasingKernel> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let n = grid.len();
    let momenta = sample_kicks(kicks, n_samples, seed)?;
    let mut total = vec![c64::new(0.0, 0.0); n];
    // per-batch partial sums, reduced in batch order
    for batch in momenta.chunks(MC_BATCH) {
        let mut partial = vec![c64::new(0.0, 0.0); n];
        for &p in batch {
            for (k, acc) in partial.iter_mut().enumerate().skip(1) {
                *acc += c64::cis(p * grid.separation(k as isize) / units.hbar);
            }
        }
        total.iter_mut().zip(&partial).for_each(|(t, p)| *t += p);
    }
    let inv = 1.0 / n_samples as f64;
    let mut values = vec![c64::new(1.0, 0.0); 2 * n - 1];
    for k in 1..n {
        let g = total[k] * inv;
        values[n - 1 + k] = g;
        values[n - 1 - k] = g.conj();
    }
    DephasingKernel::sampled_mixture(grid, values)
}

/// Monte Carlo random-kick channel with `n_samples` seeded kicks.
pub fn apply_random_kicks_mc(
    rho: &DensityMatrix,
    kicks: &KickDistribution,
    n_samples: usize,
    seed: u64,
    units: &Units,
) -> Result<DensityMatrix> {
    let kernel = empirical_kernel(*rho.grid()?, kicks, n_samples, seed, units)?;
    apply_dephasing(rho, &kernel)
}
