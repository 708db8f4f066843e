use faer::c64;

use crate::error::{Error, Result};
use crate::tolerance::{Tolerances, Units};

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Gaussian { eta: f64 },
    Sampled { momenta: Vec<f64>, weights: Vec<f64> },
}

/// Probability density of random momentum kicks, analytic Gaussian or a weighted sample.
#[derive(Clone, Debug, PartialEq)]
pub struct KickDistribution(Repr);

impl KickDistribution {
    /// Zero-mean Gaussian with momentum spread `eta` (kg·m/s).
    pub fn gaussian(eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::NonPositiveScale {
                name: "eta",
                value: eta,
            });
        }
        Ok(Self(Repr::Gaussian { eta }))
    }

    pub fn sampled(momenta: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if momenta.is_empty() || momenta.len() != weights.len() {
            return Err(Error::Domain(
                "kick sample needs one weight per momentum".into(),
            ));
        }
        if momenta.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("kick momenta must be finite".into()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0))
            || (sum - 1.0).abs() > Tolerances::global().weight_sum
        {
            return Err(Error::WeightSum(sum));
        }
        Ok(Self(Repr::Sampled { momenta, weights }))
    }

    /// A single deterministic kick; `p = 0` gives the identity channel.
    pub fn point(p: f64) -> Result<Self> {
        Self::sampled(vec![p], vec![1.0])
    }

    /// Analytic spread η, if this is the Gaussian kind.
    pub fn eta(&self) -> Option<f64> {
        match self.0 {
            Repr::Gaussian { eta } => Some(eta),
            Repr::Sampled { .. } => None,
        }
    }

    pub fn samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.0 {
            Repr::Gaussian { .. } => None,
            Repr::Sampled { momenta, weights } => Some((momenta, weights)),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.0 {
            Repr::Gaussian { .. } => 0.0,
            Repr::Sampled { momenta, weights } => {
                momenta.iter().zip(weights).map(|(p, w)| p * w).sum()
            }
        }
    }

    /// Typical kick size used to judge the bias.
    pub fn scale(&self) -> f64 {
        match &self.0 {
            Repr::Gaussian { eta } => *eta,
            Repr::Sampled { momenta, .. } => momenta.iter().fold(0.0f64, |m, p| m.max(p.abs())),
        }
    }

    /// Mean momentum vanishes within 1e−10 of the kick scale.
    pub fn is_unbiased(&self) -> bool {
        self.mean().abs() <= 1e-10 * self.scale().max(f64::MIN_POSITIVE)
    }

    /// Characteristic function g(ξ) = ∫ dp g̃(p) exp(i p ξ/ℏ).
    pub fn characteristic(&self, xi: f64, units: &Units) -> c64 {
        match &self.0 {
            Repr::Gaussian { eta } => {
                let a = eta * xi / units.hbar;
                c64::new((-0.5 * a * a).exp(), 0.0)
            }
            Repr::Sampled { momenta, weights } => momenta
                .iter()
                .zip(weights)
                .map(|(p, w)| c64::cis(p * xi / units.hbar) * *w)
                .sum(),
        }
    }

    /// ℓ_g = ℏ/η for the Gaussian kind.
    pub fn coherence_length(&self, units: &Units) -> Option<f64> {
        self.eta().map(|eta| units.hbar / eta)
    }
}
