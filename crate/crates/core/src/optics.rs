//! Focus of a z-polarized Gaussian beam travelling along +y.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{invalid, require_non_negative, require_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    /// Vacuum wavelength [m].
    pub wavelength: f64,
    /// Power [W].
    pub power: f64,
    pub numerical_aperture: f64,
}

impl Beam {
    /// `numerical_aperture` must lie in (0, 1]. Zero power is accepted and
    /// yields a dark focus.
    pub fn new(wavelength: f64, power: f64, numerical_aperture: f64) -> Result<Self> {
        require_positive("wavelength", wavelength)?;
        require_non_negative("power", power)?;
        if !(numerical_aperture > 0.0 && numerical_aperture <= 1.0) {
            return Err(invalid(
                "numerical_aperture",
                format!("must lie in (0, 1], got {numerical_aperture}"),
            ));
        }
        Ok(Self {
            wavelength,
            power,
            numerical_aperture,
        })
    }

    /// Beam specified by its waist instead of its aperture; the effective
    /// aperture λ/(π·w0) may exceed one, which lets waist scans reach
    /// foci tighter than a physical objective allows.
    pub fn with_waist(wavelength: f64, power: f64, waist: f64) -> Result<Self> {
        require_positive("wavelength", wavelength)?;
        require_non_negative("power", power)?;
        require_positive("waist", waist)?;
        Ok(Self {
            wavelength,
            power,
            numerical_aperture: wavelength / (PI * waist),
        })
    }

    pub fn with_power(self, power: f64) -> Self {
        Self { power, ..self }
    }

    pub fn focus(&self) -> FocusParameters {
        let k0 = 2.0 * PI / self.wavelength;
        let waist = self.wavelength / (PI * self.numerical_aperture);
        let axial_length = PI * waist * waist / self.wavelength;
        let intensity = self.power * k0 * k0 * self.numerical_aperture.powi(2) / (2.0 * PI);
        let photon_energy = 2.0 * PI * HBAR * SPEED_OF_LIGHT / self.wavelength;
        FocusParameters {
            k0,
            waist,
            axial_length,
            intensity,
            field_amplitude: (2.0 * intensity / (SPEED_OF_LIGHT * VACUUM_PERMITTIVITY)).sqrt(),
            photon_flux: intensity / photon_energy,
        }
    }
}

/// Derived quantities at the focus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusParameters {
    /// Wavenumber 2π/λ [1/m].
    pub k0: f64,
    /// w0 = λ/(π·NA) [m].
    pub waist: f64,
    /// y0 = π·w0²/λ [m].
    pub axial_length: f64,
    /// I = P·k0²·NA²/(2π) [W/m²].
    pub intensity: f64,
    /// E0 from I = ½·c·ε0·E0² [V/m].
    pub field_amplitude: f64,
    /// Photons per unit area and time, I/(ħ·c·k0) [1/(m²·s)].
    pub photon_flux: f64,
}
