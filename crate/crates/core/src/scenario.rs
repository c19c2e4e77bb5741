use serde::{Deserialize, Serialize};

use crate::modes::ModeBasis;
use crate::opening::OpeningFunction;
use crate::{Error, Result};

/// One experiment: which sites carry the two-level systems, their level
/// splittings, the coupling strength and the opening profiles.
///
/// For ion-trap scenarios `omega_a`/`omega_b` hold `−δ` (minus the laser
/// detuning), which makes the interaction-picture Hamiltonian identical to
/// the chain case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub site_a: usize,
    pub site_b: usize,
    pub omega_a: f64,
    pub omega_b: f64,
    pub epsilon: f64,
    pub opening_a: OpeningFunction,
    pub opening_b: OpeningFunction,
    /// Interaction duration `T`.
    pub duration: f64,
}

impl Scenario {
    /// Same splitting and profile on both sites.
    pub fn symmetric(
        site_a: usize,
        site_b: usize,
        omega: f64,
        epsilon: f64,
        opening: OpeningFunction,
        duration: f64,
    ) -> Self {
        Scenario {
            site_a,
            site_b,
            omega_a: omega,
            omega_b: omega,
            epsilon,
            opening_a: opening.clone(),
            opening_b: opening,
            duration,
        }
    }

    pub fn validate(&self, basis: &ModeBasis) -> Result<()> {
        basis.check_site(self.site_a)?;
        basis.check_site(self.site_b)?;
        if self.site_a == self.site_b {
            return Err(Error::InvalidParameters(format!(
                "site_a and site_b must differ (both {})",
                self.site_a
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.omega_a.is_finite() && self.omega_b.is_finite()) {
            return Err(Error::InvalidParameters("level splittings must be finite".into()));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "duration must be finite and >= 0, got {}",
                self.duration
            )));
        }
        self.opening_a.validate()?;
        self.opening_b.validate()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Scenario {
            epsilon,
            ..self.clone()
        }
    }

    /// The same experiment with the roles of `A` and `B` exchanged.
    pub fn swapped(&self) -> Self {
        Scenario {
            site_a: self.site_b,
            site_b: self.site_a,
            omega_a: self.omega_b,
            omega_b: self.omega_a,
            epsilon: self.epsilon,
            opening_a: self.opening_b.clone(),
            opening_b: self.opening_a.clone(),
            duration: self.duration,
        }
    }

    /// The common splitting `Ω`, if both sites share it.
    pub fn common_omega(&self) -> Result<f64> {
        if self.omega_a == self.omega_b {
            Ok(self.omega_a)
        } else {
            Err(Error::Unsupported(format!(
                "dressing requires omega_a == omega_b (got {} and {})",
                self.omega_a, self.omega_b
            )))
        }
    }
}
