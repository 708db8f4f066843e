//! Numerical tolerances and physical constants.
//!
//! Validation thresholds are collected in [`Tolerances`]. The process-wide
//! instance returned by [`Tolerances::global`] is scaled by the
//! `CVCL_TOLERANCE_SCALE` environment variable (default 1), which multiplies
//! every validation tolerance for stress testing. Algorithmic cut-offs (the
//! eigenvalue floor and the inverse-dephasing floor) are not scaled.

use std::sync::OnceLock;

/// Environment variable scaling every validation tolerance.
pub const TOLERANCE_SCALE_ENV: &str = "CVCL_TOLERANCE_SCALE";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// |Tr ρ − 1|.
    pub trace: f64,
    /// max |M − M†|.
    pub hermiticity: f64,
    /// Smallest admissible eigenvalue is `-positivity`.
    pub positivity: f64,
    /// Lattice normalization of wavefunctions and pointer states.
    pub normalization: f64,
    /// |Σ w − 1| for mixture and kick weights.
    pub weight_sum: f64,
    /// Kernel invariants (|g| ≤ 1 + tol, conjugate symmetry).
    pub kernel: f64,
    /// max |Σ K†K − 1|.
    pub completeness: f64,
    /// Relative entropy is infinite beyond this much weight off the support.
    pub support_defect: f64,
    /// Agreement of the two C₂ evaluation routes.
    pub c2_routes: f64,
    /// Covariance defect that still counts as membership in the free class.
    pub covariance: f64,
    /// Slack allowed in monotonicity inequalities.
    pub monotonicity_slack: f64,
    /// Maximal overlap between "disjoint" packets.
    pub disjointness: f64,
    /// Positivity threshold used to decide whether an inverse-dephased matrix is a state.
    pub inverse_positivity: f64,
    /// Eigenvalues at or below this are excluded from logarithms.
    pub eigen_floor: f64,
    /// Default refusal threshold of the partial inverse.
    pub inverse_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            trace: 1e-10,
            hermiticity: 1e-12,
            positivity: 1e-10,
            normalization: 1e-10,
            weight_sum: 1e-12,
            kernel: 1e-12,
            completeness: 1e-10,
            support_defect: 1e-8,
            c2_routes: 1e-10,
            covariance: 1e-8,
            monotonicity_slack: 1e-8,
            disjointness: 1e-8,
            inverse_positivity: 1e-8,
            eigen_floor: 1e-14,
            inverse_floor: 1e-12,
        }
    }
}

impl Tolerances {
    /// Multiplies every validation tolerance by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            trace: self.trace * factor,
            hermiticity: self.hermiticity * factor,
            positivity: self.positivity * factor,
            normalization: self.normalization * factor,
            weight_sum: self.weight_sum * factor,
            kernel: self.kernel * factor,
            completeness: self.completeness * factor,
            support_defect: self.support_defect * factor,
            c2_routes: self.c2_routes * factor,
            covariance: self.covariance * factor,
            monotonicity_slack: self.monotonicity_slack * factor,
            disjointness: self.disjointness * factor,
            inverse_positivity: self.inverse_positivity * factor,
            ..*self
        }
    }

    /// Process-wide tolerances, read once from the environment.
    pub fn global() -> &'static Tolerances {
        static GLOBAL: OnceLock<Tolerances> = OnceLock::new();
        GLOBAL.get_or_init(|| {
            let factor = std::env::var(TOLERANCE_SCALE_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|f| f.is_finite() && *f > 0.0)
                .unwrap_or(1.0);
            Tolerances::default().scaled(factor)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitSystem {
    Si,
    Natural,
}

/// Values of ℏ and G used by kick kernels and the Newtonian example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Units {
    /// J·s
    pub hbar: f64,
    /// m³·kg⁻¹·s⁻²
    pub gravitational_constant: f64,
    pub mode: UnitSystem,
}

impl Units {
    pub const SI: Units = Units {
        hbar: 1.054_571_817e-34,
        gravitational_constant: 6.674_30e-11,
        mode: UnitSystem::Si,
    };

    pub const NATURAL: Units = Units {
        hbar: 1.0,
        gravitational_constant: 1.0,
        mode: UnitSystem::Natural,
    };

    pub fn new(mode: UnitSystem) -> Self {
        match mode {
            UnitSystem::Si => Self::SI,
            UnitSystem::Natural => Self::NATURAL,
        }
    }
}
