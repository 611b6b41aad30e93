use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Natural-unit system for the 1D oscillator: `ħ = m = 1` and `ω` is the only
/// free scale.
///
/// Derived scales are recomputed on access so they can never go stale:
/// `β = 1/(mħω)` and the recoil unit `κ0 = 1/(ħ√β) = √(mω/ħ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    omega: f64,
}

impl UnitSystem {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::NonPositiveFrequency(omega));
        }
        Ok(Self { omega })
    }

    pub fn hbar(&self) -> f64 {
        1.0
    }

    pub fn mass(&self) -> f64 {
        1.0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `β = 1/(mħω)`.
    pub fn beta(&self) -> f64 {
        1.0 / (self.mass() * self.hbar() * self.omega)
    }

    /// Recoil wavenumber unit `κ0 = ħ⁻¹β^{-1/2}`.
    pub fn kappa0(&self) -> f64 {
        1.0 / (self.hbar() * self.beta().sqrt())
    }

    /// Ground-state position width `√(ħ/(mω))`; also the displacement unit
    /// `ħβ^{-1/2}·…` reduces to this in natural units.
    pub fn x_scale(&self) -> f64 {
        (self.hbar() / (self.mass() * self.omega)).sqrt()
    }

    /// Momentum scale `√(mħω)`.
    pub fn p_scale(&self) -> f64 {
        (self.mass() * self.hbar() * self.omega).sqrt()
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { omega: 1.0 }
    }
}
