//! Gaussian packet in the quadratic expansion of a Newtonian potential about
//! x0: an inverted oscillator with rate κ = √(2GM/x0³). Width, centre and the
//! coherence measures that depend only on the width are closed-form.
//!
//! The reference-case changes are ~1e−14 nats, so every "value minus initial
//! value" is computed from σ_t² − σ0² directly and never by subtraction.

use crate::channels::gaussian_kernel;
use crate::error::{Error, Result};
use crate::measures::{c2_g, c2_gaussian_closed_form, crel_jensen_bound};
use crate::state::{DensityMatrix, GaussianParams, WaveFunction};
use crate::tolerance::Units;

/// Below this |κt| the sinh(u)/u factor is evaluated by its series.
pub const SINHC_SERIES_THRESHOLD: f64 = 1e-3;

/// Smallest accepted x0/σ0.
pub const MIN_LOCALIZATION_RATIO: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonianScenario {
    /// Test mass.
    pub m: f64,
    /// Source mass; zero gives free spreading.
    pub source_mass: f64,
    pub x0: f64,
    pub sigma0: f64,
    pub ell_g: f64,
    pub t_max: f64,
    /// Number of rows in the time series (uniform steps, both ends included);
    /// a zero duration always gives the single t = 0 row.
    pub n_steps: usize,
    pub units: Units,
}

impl NewtonianScenario {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("m", self.m),
            ("x0", self.x0),
            ("sigma0", self.sigma0),
            ("ell_g", self.ell_g),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveScale { name, value });
            }
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(Error::Domain(format!("t_max must be >= 0, got {}", self.t_max)));
        }
        if !(self.source_mass >= 0.0) || !self.source_mass.is_finite() {
            return Err(Error::Domain(format!(
                "source mass must be >= 0, got {}",
                self.source_mass
            )));
        }
        if self.x0 / self.sigma0 < MIN_LOCALIZATION_RATIO {
            return Err(Error::Domain(format!(
                "x0/sigma0 = {} is below {MIN_LOCALIZATION_RATIO}",
                self.x0 / self.sigma0
            )));
        }
        if self.n_steps < 2 {
            return Err(Error::Domain("n_steps must be at least 2".into()));
        }
        Ok(())
    }

    /// Two 1e−14 kg masses, x0 = 200 μm, σ0 = 10 μm, ℓ_g = 20 μm, one second.
    pub fn reference_case() -> Self {
        Self {
            m: 1e-14,
            source_mass: 1e-14,
            x0: 200e-6,
            sigma0: 10e-6,
            ell_g: 20e-6,
            t_max: 1.0,
            n_steps: 101,
            units: Units::SI,
        }
    }

    pub fn rows(&self) -> usize {
        if self.t_max == 0.0 {
            1
        } else {
            self.n_steps
        }
    }

    pub fn time(&self, row: usize) -> f64 {
        if row == 0 {
            return 0.0;
        }
        self.t_max * row as f64 / (self.n_steps - 1) as f64
    }
}

/// κ = √(2GM/x0³)
pub fn kappa(s: &NewtonianScenario) -> f64 {
    (2.0 * s.units.gravitational_constant * s.source_mass / s.x0.powi(3)).sqrt()
}

/// a0 = −GM/x0²
pub fn acceleration(s: &NewtonianScenario) -> f64 {
    -s.units.gravitational_constant * s.source_mass / (s.x0 * s.x0)
}

pub fn sinhc_series(u: f64) -> f64 {
    let u2 = u * u;
    1.0 + u2 / 6.0 * (1.0 + u2 / 20.0 * (1.0 + u2 / 42.0))
}

pub fn sinhc_direct(u: f64) -> f64 {
    u.sinh() / u
}

/// sinh(u)/u
pub fn sinhc(u: f64) -> f64 {
    if u.abs() < SINHC_SERIES_THRESHOLD {
        sinhc_series(u)
    } else {
        sinhc_direct(u)
    }
}

/// Free-spreading velocity scale ℏ/(2mσ0).
fn spreading_rate(s: &NewtonianScenario) -> f64 {
    s.units.hbar / (2.0 * s.m * s.sigma0)
}

/// σ_t² − σ0² = σ0² sinh²(κt) + (ℏ/2mσ0)² t² sinhc²(κt)
pub fn width_growth(s: &NewtonianScenario, t: f64) -> f64 {
    let u = kappa(s) * t;
    let sh = sinhc(u) * u;
    let v = spreading_rate(s) * t * sinhc(u);
    s.sigma0 * s.sigma0 * sh * sh + v * v
}

/// σ0² cosh²(κt) + (ℏ/(2mσ0κ))² sinh²(κt), evaluated literally. Only valid for κ > 0.
pub fn width_squared_direct(s: &NewtonianScenario, t: f64) -> f64 {
    let k = kappa(s);
    let u = k * t;
    let a = s.sigma0 * u.cosh();
    let b = spreading_rate(s) / k * u.sinh();
    a * a + b * b
}

pub fn sigma_t(s: &NewtonianScenario, t: f64) -> f64 {
    (s.sigma0 * s.sigma0 + width_growth(s, t)).sqrt()
}

/// x_c(t) = x0 + ½ a0 t²
pub fn classical_center(s: &NewtonianScenario, t: f64) -> f64 {
    s.x0 + 0.5 * acceleration(s) * t * t
}

/// ½ ln[(1 + 2σ_t²/ℓ²)/(1 + 2σ0²/ℓ²)] from the width growth.
pub fn delta_crel_bound(s: &NewtonianScenario, t: f64) -> f64 {
    let l2 = s.ell_g * s.ell_g;
    0.5 * (2.0 * width_growth(s, t) / (l2 + 2.0 * s.sigma0 * s.sigma0)).ln_1p()
}

/// lim_{t→0} delta_crel_bound(t)/t² = (σ0²κ² + (ℏ/2mσ0)²)/(ℓ² + 2σ0²)
pub fn delta_crel_bound_taylor_coefficient(s: &NewtonianScenario) -> f64 {
    let k = kappa(s);
    let v = spreading_rate(s);
    (s.sigma0 * s.sigma0 * k * k + v * v) / (s.ell_g * s.ell_g + 2.0 * s.sigma0 * s.sigma0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceRow {
    pub t: f64,
    pub sigma_t: f64,
    pub c2: f64,
    pub crel_bound: f64,
    pub delta_crel_bound: f64,
}

pub fn coherence_row(s: &NewtonianScenario, t: f64) -> Result<CoherenceRow> {
    let sigma = sigma_t(s, t);
    Ok(CoherenceRow {
        t,
        sigma_t: sigma,
        c2: c2_gaussian_closed_form(sigma, s.ell_g)?,
        crel_bound: crel_jensen_bound(sigma, s.ell_g)?,
        delta_crel_bound: delta_crel_bound(s, t),
    })
}

/// Uniformly sampled rows from t = 0 to t_max.
pub fn coherence_time_series(s: &NewtonianScenario) -> Result<Vec<CoherenceRow>> {
    s.validate()?;
    (0..s.rows()).map(|i| coherence_row(s, s.time(i))).collect()
}

/// Where the quadratic expansion of the potential can be trusted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityFlags {
    pub kappa_t_max: f64,
    pub x0_over_sigma0: f64,
    /// σ at t_max over x0.
    pub final_width_over_x0: f64,
    pub well_localized: bool,
}

pub fn validity_flags(s: &NewtonianScenario) -> ValidityFlags {
    let final_width_over_x0 = sigma_t(s, s.t_max) / s.x0;
    ValidityFlags {
        kappa_t_max: kappa(s) * s.t_max,
        x0_over_sigma0: s.x0 / s.sigma0,
        final_width_over_x0,
        well_localized: final_width_over_x0 <= 1.0 / MIN_LOCALIZATION_RATIO,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConsistency {
    pub c2_numeric: f64,
    pub c2_closed: f64,
    pub rel_error: f64,
    /// |c2 at x_c(t) − c2 at x0|
    pub center_shift_defect: f64,
}

fn lattice_c2(center: f64, sigma: f64, ell_g: f64, n_points: usize) -> Result<f64> {
    let params = GaussianParams::new(center, sigma)?;
    let grid = params.fitted_grid(n_points)?;
    let rho = DensityMatrix::pure(&WaveFunction::gaussian(grid, params)?);
    Ok(c2_g(&rho, &gaussian_kernel(grid, ell_g)?)?.value)
}

/// Lattice C₂ of the evolved packet at x_c(t) against the closed form, and
/// the same lattice computation recentred at x0.
pub fn grid_consistency_check(
    s: &NewtonianScenario,
    t_sample: f64,
    n_points: usize,
) -> Result<GridConsistency> {
    s.validate()?;
    if !(0.0..=s.t_max).contains(&t_sample) {
        return Err(Error::Domain(format!(
            "sample time {t_sample} outside [0, {}]",
            s.t_max
        )));
    }
    let sigma = sigma_t(s, t_sample);
    let c2_numeric = lattice_c2(classical_center(s, t_sample), sigma, s.ell_g, n_points)?;
    let c2_at_x0 = lattice_c2(s.x0, sigma, s.ell_g, n_points)?;
    let c2_closed = c2_gaussian_closed_form(sigma, s.ell_g)?;
    let abs_error = (c2_numeric - c2_closed).abs();
    Ok(GridConsistency {
        c2_numeric,
        c2_closed,
        rel_error: if c2_closed > 0.0 { abs_error / c2_closed } else { abs_error },
        center_shift_defect: (c2_numeric - c2_at_x0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural(source_mass: f64) -> NewtonianScenario {
        NewtonianScenario {
            m: 1.0,
            source_mass,
            x0: 50.0,
            sigma0: 1.0,
            ell_g: 1.5,
            t_max: 20.0,
            n_steps: 41,
            units: Units::NATURAL,
        }
    }

    #[test]
    fn kappa_values() {
        let reference = NewtonianScenario::reference_case();
        assert!((kappa(&reference) - 4.0848e-7).abs() < 1e-11);
        let free = NewtonianScenario {
            source_mass: 0.0,
            ..reference
        };
        assert_eq!(kappa(&free), 0.0);
        let heavy = NewtonianScenario {
            source_mass: 2e-14,
            ..reference
        };
        assert!((kappa(&heavy) / kappa(&reference) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(NewtonianScenario::reference_case().validate().is_ok());
        let bad = NewtonianScenario {
            x0: 50e-6,
            ..NewtonianScenario::reference_case()
        };
        assert!(bad.validate().is_err());
        let bad = NewtonianScenario {
            sigma0: -1.0,
            ..NewtonianScenario::reference_case()
        };
        assert!(bad.validate().is_err());
        let instant = NewtonianScenario {
            t_max: 0.0,
            ..NewtonianScenario::reference_case()
        };
        let rows = coherence_time_series(&instant).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].delta_crel_bound, 0.0);
        let bad = NewtonianScenario {
            source_mass: -1.0,
            ..NewtonianScenario::reference_case()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn width_evolution() {
        let s = natural(3.0);
        assert_eq!(sigma_t(&s, 0.0), s.sigma0);
        assert_eq!(width_growth(&s, 0.0), 0.0);
        let mut last = s.sigma0;
        for i in 0..s.n_steps {
            let w = sigma_t(&s, s.time(i));
            assert!(w >= last);
            last = w;
        }
        // quadratic onset
        let t = 1e-4;
        let onset = (s.sigma0.powi(2) * kappa(&s).powi(2) + 0.25) * t * t;
        assert!((width_growth(&s, t) / onset - 1.0).abs() < 1e-8);
        // free limit
        let free = natural(0.0);
        let t = 7.0;
        assert!((sigma_t(&free, t).powi(2) - (1.0 + (0.5 * t).powi(2))).abs() < 1e-12);
        // the inverted potential spreads faster than free motion
        for t in [0.5, 3.0, 20.0] {
            assert!(sigma_t(&s, t) > sigma_t(&free, t));
        }
    }

    #[test]
    fn branches_agree() {
        let u = 1e-4;
        assert!((sinhc_series(u) / sinhc_direct(u) - 1.0).abs() < 1e-12);
        let s = natural(3.0);
        let t = u / kappa(&s);
        let safe = s.sigma0.powi(2) + width_growth(&s, t);
        assert!((safe / width_squared_direct(&s, t) - 1.0).abs() < 1e-12);
        for u in [0.5, 2.0, 5.0] {
            let t = u / kappa(&s);
            assert!((sigma_t(&s, t).powi(2) / width_squared_direct(&s, t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn centre_trajectory() {
        let reference = NewtonianScenario::reference_case();
        assert_eq!(classical_center(&reference, 0.0), reference.x0);
        let shift = reference.x0 - classical_center(&reference, 1.0);
        assert!((shift - 0.5 * 6.6743e-11 * 1e-14 / 4e-8).abs() < 1e-20);
        assert!((-0.5 * acceleration(&reference) - 8.3429e-18).abs() < 1e-22);
        assert!((shift - 8.3429e-18).abs() < 1e-19);
        let free = natural(0.0);
        assert_eq!(classical_center(&free, 13.0), free.x0);
    }

    #[test]
    fn reference_series_shape() {
        let reference = NewtonianScenario::reference_case();
        let rows = coherence_time_series(&reference).unwrap();
        assert_eq!(rows.len(), reference.n_steps);
        assert_eq!(rows[0].delta_crel_bound, 0.0);
        for pair in rows.windows(2) {
            assert!(pair[1].sigma_t >= pair[0].sigma_t);
            assert!(pair[1].c2 >= pair[0].c2);
            assert!(pair[1].crel_bound >= pair[0].crel_bound);
            assert!(pair[1].delta_crel_bound >= pair[0].delta_crel_bound);
        }
        let coeff = delta_crel_bound_taylor_coefficient(&reference);
        assert!((coeff - 2.78e-14).abs() < 0.01e-14);
        for row in &rows[1..] {
            let ratio = row.delta_crel_bound / (row.t * row.t);
            assert!((ratio / coeff - 1.0).abs() < 5e-7, "{ratio} vs {coeff}");
        }
        let flags = validity_flags(&reference);
        assert!(flags.well_localized && flags.kappa_t_max < 1e-6);
        assert_eq!(flags.x0_over_sigma0, 20.0);
    }

    #[test]
    fn delta_is_nonnegative_and_monotone() {
        for mass in [0.0, 0.5, 5.0] {
            let s = natural(mass);
            let rows = coherence_time_series(&s).unwrap();
            assert!(rows.windows(2).all(|p| p[1].delta_crel_bound >= p[0].delta_crel_bound));
            assert!(rows.iter().all(|r| r.delta_crel_bound >= 0.0));
        }
    }

    #[test]
    fn lattice_matches_closed_form() {
        let reference = NewtonianScenario::reference_case();
        let check = grid_consistency_check(&reference, 1.0, 1024).unwrap();
        assert!(check.rel_error < 1e-5, "{check:?}");
        assert!(check.center_shift_defect < 1e-10);
        let blind = NewtonianScenario {
            ell_g: 1.0,
            ..reference
        };
        for t in [0.0, 0.5, 1.0] {
            assert!(coherence_row(&blind, t).unwrap().c2 < 1e-9);
        }
        assert!(grid_consistency_check(&reference, 2.0, 64).is_err());
    }
}
