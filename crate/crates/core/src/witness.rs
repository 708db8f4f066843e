//! Two-packet sector: C₂ in closed form, threshold witnesses built from the
//! quadrature X_θ = e^{iθ}|L⟩⟨R| + e^{−iθ}|R⟩⟨L|, and the double-slit fringe
//! model. A full-grid cross-check measures how good the narrow-packet
//! approximation actually is.

use faer::{c64, Mat};

use crate::channels::KernelModel;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::measures::c2_g;
use crate::state::{DensityMatrix, GaussianParams, WaveFunction, GAUSSIAN_MARGIN};
use crate::tolerance::Tolerances;

/// Sector state [[p, c], [c*, 1 − p]] in the {L, R} packet basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPacketState {
    pub p: f64,
    pub c: c64,
    /// Separation between the packet centres.
    pub d: f64,
    pub packet_width: f64,
}

impl TwoPacketState {
    pub fn new(p: f64, c: c64, d: f64, packet_width: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidState(format!("population {p} outside [0, 1]")));
        }
        if c.norm_sqr() > p * (1.0 - p) + 1e-12 {
            return Err(Error::InvalidState(format!(
                "|c|² = {} exceeds p(1 − p) = {}",
                c.norm_sqr(),
                p * (1.0 - p)
            )));
        }
        for (name, value) in [("d", d), ("packet_width", packet_width)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveScale { name, value });
            }
        }
        Ok(Self {
            p,
            c,
            d,
            packet_width,
        })
    }

    /// (|L⟩ + e^{iφ}|R⟩)/√2
    pub fn balanced(phase: f64, d: f64, packet_width: f64) -> Result<Self> {
        Self::new(0.5, 0.5 * c64::cis(-phase), d, packet_width)
    }

    /// packet_width / scale; the sector algebra assumes this is small.
    pub fn narrowness(&self, scale: f64) -> f64 {
        self.packet_width / scale
    }

    /// Fringe visibility 2|c|.
    pub fn visibility(&self) -> f64 {
        2.0 * self.c.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlitGeometry {
    pub k: f64,
    pub d: f64,
    pub screen_distance: f64,
}

impl SlitGeometry {
    pub fn new(k: f64, d: f64, screen_distance: f64) -> Result<Self> {
        for (name, value) in [("k", k), ("d", d), ("screen_distance", screen_distance)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveScale { name, value });
            }
        }
        Ok(Self {
            k,
            d,
            screen_distance,
        })
    }

    /// θ(x) = k d x / L
    pub fn theta(&self, x: f64) -> f64 {
        self.k * self.d * x / self.screen_distance
    }

    pub fn fringe_period(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.screen_distance / (self.k * self.d)
    }

    /// k d² / L; the linear phase θ(x) needs this to be small.
    pub fn far_field_parameter(&self) -> f64 {
        self.k * self.d * self.d / self.screen_distance
    }

    pub fn is_far_field(&self) -> bool {
        self.far_field_parameter() < 0.1
    }
}

fn check_kernel_value(g_at_d: c64) -> Result<()> {
    if !(g_at_d.norm() <= 1.0 + Tolerances::global().kernel) {
        return Err(Error::Domain(format!("|g(d)| = {} exceeds 1", g_at_d.norm())));
    }
    Ok(())
}

/// 2(1 − |g(d)|²)|c|²
pub fn c2_two_packet(state: &TwoPacketState, g_at_d: c64) -> Result<f64> {
    check_kernel_value(g_at_d)?;
    Ok(2.0 * (1.0 - g_at_d.norm_sqr()).max(0.0) * state.c.norm_sqr())
}

/// Tr(X_θ ρ) = 2 Re(e^{−iθ} c)
pub fn x_theta_expectation(state: &TwoPacketState, theta: f64) -> f64 {
    2.0 * (c64::cis(-theta) * state.c).re
}

/// Threshold √(2c0/(1 − |g(d)|²)) on |Tr(X_θ ρ)| above which C₂ > c0.
pub fn witness_bound(c0: f64, g_at_d: c64) -> Result<f64> {
    check_kernel_value(g_at_d)?;
    if !(c0 > 0.0) {
        return Err(Error::Domain(format!("threshold c0 must be positive, got {c0}")));
    }
    let loss = 1.0 - g_at_d.norm_sqr();
    if loss <= 0.0 {
        return Err(Error::DegenerateKernel);
    }
    Ok((2.0 * c0 / loss).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certification {
    /// Tr(W ρ) for W = bound·𝟙 − X_θ.
    pub witness_value: f64,
    pub certified: bool,
}

pub fn certify(state: &TwoPacketState, theta: f64, c0: f64, g_at_d: c64) -> Result<Certification> {
    let witness_value = witness_bound(c0, g_at_d)? - x_theta_expectation(state, theta);
    Ok(Certification {
        witness_value,
        certified: witness_value < 0.0,
    })
}

/// I(x) = ½ + Re(e^{−iθ(x)} c)
pub fn fringe_intensity(x: f64, geometry: &SlitGeometry, c: c64) -> f64 {
    0.5 + (c64::cis(-geometry.theta(x)) * c).re
}

/// (1 − |g(d)|²)/2 · V²
pub fn visibility_to_c2(visibility: f64, g_at_d: c64) -> Result<f64> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::Domain(format!("visibility {visibility} outside [0, 1]")));
    }
    check_kernel_value(g_at_d)?;
    Ok(0.5 * (1.0 - g_at_d.norm_sqr()).max(0.0) * visibility * visibility)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossCheck {
    pub c2_grid: f64,
    pub c2_sector: f64,
    pub abs_error: f64,
    /// abs_error / c2_sector (+∞ when the sector value is zero and the grid value is not).
    pub rel_error: f64,
    /// |⟨L|R⟩|
    pub overlap: f64,
    pub overlap_warning: bool,
    /// packet_width / ℓ_g when the kernel has a coherence length.
    pub width_to_coherence_length: Option<f64>,
    pub width_to_separation: f64,
    pub n_points: usize,
}

/// Builds Gaussian packets at ∓d/2 on a lattice with `points_per_width`
/// sites per packet width and compares the exact C₂ with the sector formula.
pub fn full_grid_crosscheck(
    state: &TwoPacketState,
    kernel: &KernelModel,
    points_per_width: usize,
) -> Result<CrossCheck> {
    if points_per_width == 0 {
        return Err(Error::Domain("points_per_width must be at least 1".into()));
    }
    let half = 0.5 * state.d + GAUSSIAN_MARGIN * state.packet_width;
    let dx = state.packet_width / points_per_width as f64;
    let n_points = 2 * (half / dx).ceil() as usize + 1;
    let grid = Grid::centered(0.0, half, n_points)?;
    let left = WaveFunction::gaussian(grid, GaussianParams::new(-0.5 * state.d, state.packet_width)?)?;
    let right = WaveFunction::gaussian(grid, GaussianParams::new(0.5 * state.d, state.packet_width)?)?;
    let overlap = left.inner(&right)?.norm();

    let (l, r) = (left.amplitudes(), right.amplitudes());
    let (p, c) = (state.p, state.c);
    let dx = grid.dx();
    let entries = Mat::from_fn(n_points, n_points, |i, j| {
        (l[i] * l[j].conj() * p
            + l[i] * r[j].conj() * c
            + r[i] * l[j].conj() * c.conj()
            + r[i] * r[j].conj() * (1.0 - p))
            * dx
    });
    // positive by construction: a PSD 2×2 sector matrix in the packet pair
    let rho = DensityMatrix::from_parts(vec![grid], entries);
    let c2_grid = c2_g(&rho, &kernel.on_grid(grid)?)?.value;
    let c2_sector = c2_two_packet(state, kernel.value(state.d))?;
    let abs_error = (c2_grid - c2_sector).abs();
    let rel_error = if c2_sector > 0.0 {
        abs_error / c2_sector
    } else if abs_error == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CrossCheck {
        c2_grid,
        c2_sector,
        abs_error,
        rel_error,
        overlap,
        overlap_warning: overlap > Tolerances::global().disjointness,
        width_to_coherence_length: kernel.coherence_length().map(|ell| state.packet_width / ell),
        width_to_separation: state.packet_width / state.d,
        n_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn sector(p: f64, c: c64) -> TwoPacketState {
        TwoPacketState::new(p, c, 3.0, 0.05).unwrap()
    }

    #[test]
    fn state_validation() {
        assert!(TwoPacketState::new(0.5, c64::new(0.5, 0.0), 1.0, 0.1).is_ok());
        assert!(TwoPacketState::new(0.5, c64::new(0.51, 0.0), 1.0, 0.1).is_err());
        assert!(TwoPacketState::new(1.2, c64::new(0.0, 0.0), 1.0, 0.1).is_err());
        assert!(TwoPacketState::new(0.5, c64::new(0.0, 0.0), 0.0, 0.1).is_err());
        assert!(SlitGeometry::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn sector_c2() {
        let g = c64::new(0.6, 0.0);
        assert_eq!(c2_two_packet(&sector(0.5, c64::new(0.0, 0.0)), g).unwrap(), 0.0);
        let balanced = TwoPacketState::balanced(0.7, 3.0, 0.05).unwrap();
        assert!((c2_two_packet(&balanced, g).unwrap() - (1.0 - 0.36) / 2.0).abs() < 1e-15);
        assert!((c2_two_packet(&balanced, c64::new(0.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!(c2_two_packet(&balanced, c64::new(1.1, 0.0)).is_err());
    }

    #[test]
    fn quadrature_expectations() {
        let s = sector(0.5, c64::new(0.3, 0.0));
        assert!((x_theta_expectation(&s, 0.0) - 0.6).abs() < 1e-15);
        let c = c64::from_polar(0.4, 1.1);
        let s = sector(0.5, c);
        assert!((x_theta_expectation(&s, 1.1) - 0.8).abs() < 1e-15);
        assert!(x_theta_expectation(&s, 1.1 + FRAC_PI_2).abs() < 1e-15);
        let max = (0..3600)
            .map(|i| x_theta_expectation(&s, i as f64 * PI / 1800.0))
            .fold(f64::MIN, f64::max);
        assert!(max <= 0.8 + 1e-15 && max > 0.8 - 1e-6);
    }

    #[test]
    fn bounds() {
        let g = c64::new(0.3, 0.4);
        assert!((witness_bound((1.0 - g.norm_sqr()) / 2.0, g).unwrap() - 1.0).abs() < 1e-15);
        assert!((witness_bound(0.125, c64::new(0.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!(witness_bound(1e-300, c64::new(0.0, 0.0)).unwrap() < 1e-149);
        assert!(matches!(
            witness_bound(0.1, c64::new(1.0, 0.0)),
            Err(Error::DegenerateKernel)
        ));
        assert!(witness_bound(0.0, c64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn certification() {
        let g = c64::new(0.2, 0.0);
        let top = (1.0 - g.norm_sqr()) / 2.0;
        let weak = sector(0.5, c64::new(0.05, 0.0));
        assert!(!certify(&weak, 0.0, 0.5 * top, g).unwrap().certified);
        let balanced = TwoPacketState::balanced(0.4, 3.0, 0.05).unwrap();
        let theta = balanced.c.arg();
        let cert = certify(&balanced, theta, 0.9 * top, g).unwrap();
        assert!(cert.certified && cert.witness_value < 0.0);
        assert!(c2_two_packet(&balanced, g).unwrap() > 0.9 * top);
    }

    #[test]
    fn fringes() {
        let geo = SlitGeometry::new(2.0e7, 1e-6, 1.0).unwrap();
        assert_eq!(fringe_intensity(0.37, &geo, c64::new(0.0, 0.0)), 0.5);
        assert!((fringe_intensity(0.0, &geo, c64::new(0.5, 0.0)) - 1.0).abs() < 1e-15);
        let c = c64::from_polar(0.3, 0.5);
        let period = geo.fringe_period();
        assert!((period - 2.0 * PI / 20.0).abs() < 1e-15);
        for x in [0.01, 0.123, 0.4] {
            let a = fringe_intensity(x, &geo, c);
            let b = fringe_intensity(x + period, &geo, c);
            assert!((a - b).abs() < 1e-9);
            let s = sector(0.5, c);
            assert!((2.0 * a - 1.0 - x_theta_expectation(&s, geo.theta(x))).abs() < 1e-15);
        }
        assert!(geo.is_far_field());
    }

    #[test]
    fn visibility_relation() {
        let g = c64::new(0.5, 0.0);
        assert_eq!(visibility_to_c2(0.0, g).unwrap(), 0.0);
        assert!((visibility_to_c2(1.0, g).unwrap() - 0.375).abs() < 1e-15);
        assert!((visibility_to_c2(0.5, c64::new(0.0, 0.0)).unwrap() - 0.125).abs() < 1e-15);
        assert!(visibility_to_c2(1.5, g).is_err());
        // consistent with the sector formula through V = 2|c|
        let s = sector(0.5, c64::from_polar(0.35, 2.0));
        assert!((visibility_to_c2(s.visibility(), g).unwrap() - c2_two_packet(&s, g).unwrap()).abs() < 1e-15);
        // grows with separation while |g| decays
        let model = KernelModel::Gaussian { ell_g: 1.0 };
        let mut last = 0.0;
        for i in 0..50 {
            let v = visibility_to_c2(0.7, model.value(0.1 * i as f64)).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn grid_crosscheck() {
        let ell = 1.0;
        let model = KernelModel::Gaussian { ell_g: ell };
        let wide = TwoPacketState::balanced(0.0, 3.0 * ell, ell / 20.0).unwrap();
        let a = full_grid_crosscheck(&wide, &model, 5).unwrap();
        assert!(a.rel_error < 0.02, "{a:?}");
        assert!(!a.overlap_warning);
        assert_eq!(a.width_to_coherence_length, Some(0.05));
        let narrow = TwoPacketState::balanced(0.0, 3.0 * ell, ell / 100.0).unwrap();
        let b = full_grid_crosscheck(&narrow, &model, 5).unwrap();
        assert!(b.rel_error < a.rel_error, "{a:?} {b:?}");

        let incoherent = TwoPacketState::new(0.5, c64::new(0.0, 0.0), 3.0 * ell, ell / 20.0).unwrap();
        let z = full_grid_crosscheck(&incoherent, &model, 5).unwrap();
        assert_eq!(z.c2_sector, 0.0);
        // only the intra-packet loss of each half-weight packet remains
        let intra = 0.5 * crate::measures::c2_gaussian_closed_form(ell / 20.0, ell).unwrap();
        assert!((z.c2_grid - intra).abs() < 1e-6, "{z:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn witness_is_sound(
            p in 0.0f64..=1.0,
            radius in 0.0f64..=1.0,
            phase in -PI..PI,
            theta in -PI..PI,
            g_abs in 0.0f64..0.999,
            g_arg in -PI..PI,
            c0 in 1e-6f64..0.5,
        ) {
            let c = c64::from_polar(radius * (p * (1.0 - p)).sqrt(), phase);
            let s = TwoPacketState::new(p, c, 1.0, 0.01).unwrap();
            let g = c64::from_polar(g_abs, g_arg);
            if c2_two_packet(&s, g).unwrap() <= c0 {
                prop_assert!(certify(&s, theta, c0, g).unwrap().witness_value >= -1e-12);
            } else if certify(&s, theta, c0, g).unwrap().certified {
                prop_assert!(c2_two_packet(&s, g).unwrap() > c0);
            }
        }
    }
}
