//! Closed-form shot-noise heating, localization, trap frequencies and the
//! translational/rotational comparison ratios.
//!
//! Per-DOF convention: the translational rate Ė_T applies to each of x and
//! y, z receives Ė_T/2, and the rotational rate Ė_R applies to each of the
//! two librational angles β1 and β2.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR, VACUUM_PERMITTIVITY};
use crate::error::{require_non_negative, Error, Result};
use crate::material::{Ellipsoid, PolarizabilityTensor};
use crate::optics::{Beam, FocusParameters};

/// The five small-oscillation degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dof {
    X,
    Y,
    Z,
    Beta1,
    Beta2,
}

impl Dof {
    pub const ALL: [Dof; 5] = [Dof::X, Dof::Y, Dof::Z, Dof::Beta1, Dof::Beta2];

    pub fn label(self) -> &'static str {
        match self {
            Dof::X => "x",
            Dof::Y => "y",
            Dof::Z => "z",
            Dof::Beta1 => "beta1",
            Dof::Beta2 => "beta2",
        }
    }

    pub fn is_rotational(self) -> bool {
        matches!(self, Dof::Beta1 | Dof::Beta2)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn parse(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.label() == label)
    }
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// (8π·J_p/3)·(k0²/4πε0)², the common scattering prefactor [1/(m²·s)·(V/C)²·...].
fn scattering_prefactor(focus: &FocusParameters) -> f64 {
    let coupling = focus.k0 * focus.k0 / (4.0 * PI * VACUUM_PERMITTIVITY);
    8.0 * PI * focus.photon_flux / 3.0 * coupling * coupling
}

/// Translational shot-noise heating rate for x (and y) [J/s].
pub fn translational_heating_rate(particle: &Ellipsoid, focus: &FocusParameters) -> f64 {
    let alpha_z = particle.polarizability().alpha_z();
    scattering_prefactor(focus) * alpha_z * alpha_z * HBAR * HBAR * focus.k0 * focus.k0
        / (2.0 * particle.mass())
}

/// Rotational shot-noise heating rate for each librational angle [J/s].
pub fn rotational_heating_rate(particle: &Ellipsoid, focus: &FocusParameters) -> f64 {
    let delta = particle.polarizability().difference();
    let (i1, _) = particle.moments_of_inertia();
    scattering_prefactor(focus) * delta * delta * HBAR * HBAR / (2.0 * i1)
}

/// Orientational localization rate Λ(Ω, Ω′) [1/s] for orientations given
/// as (α, β) pairs; the spin angle γ does not enter for a symmetric top.
pub fn rotational_localization_rate(
    polarizability: &PolarizabilityTensor,
    focus: &FocusParameters,
    omega: (f64, f64),
    omega_prime: (f64, f64),
) -> f64 {
    let (alpha, beta) = omega;
    let (alpha_p, beta_p) = omega_prime;
    let delta = polarizability.difference();
    let k2 = focus.k0 * focus.k0;
    let coupling = k2 / (4.0 * PI * VACUUM_PERMITTIVITY);
    let angular = 1.0
        - (2.0 * beta).cos() * (2.0 * beta_p).cos()
        - (alpha - alpha_p).cos() * (2.0 * beta).sin() * (2.0 * beta_p).sin();
    0.5 * focus.photon_flux * coupling * coupling * (2.0 * PI / 3.0) * delta * delta * angular
}

/// Small-oscillation trap frequencies [rad/s].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapFrequencies {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub beta1: f64,
    pub beta2: f64,
}

/// ωx = ωz = √(αz/m)·E0/w0, ωy = √(αz/2m)·E0/y0, ωβ = √((αz−αx)/2I1)·E0.
pub fn trap_frequencies(particle: &Ellipsoid, focus: &FocusParameters) -> Result<TrapFrequencies> {
    let pol = particle.polarizability();
    let (i1, _) = particle.moments_of_inertia();
    trap_frequencies_for(&pol, particle.mass(), i1, focus)
}

pub fn trap_frequencies_for(
    pol: &PolarizabilityTensor,
    mass: f64,
    inertia: f64,
    focus: &FocusParameters,
) -> Result<TrapFrequencies> {
    if pol.alpha_z() < pol.alpha_x() {
        return Err(Error::UnstableAlignment {
            alpha_x: pol.alpha_x(),
            alpha_z: pol.alpha_z(),
        });
    }
    let e0 = focus.field_amplitude;
    let x = (pol.alpha_z() / mass).sqrt() * e0 / focus.waist;
    let y = (pol.alpha_z() / (2.0 * mass)).sqrt() * e0 / focus.axial_length;
    let beta = (pol.difference() / (2.0 * inertia)).sqrt() * e0;
    Ok(TrapFrequencies {
        x,
        y,
        z: x,
        beta1: beta,
        beta2: beta,
    })
}

/// The four dimensionless rotation-vs-translation comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    /// Ė_R/Ė_T.
    pub energy: f64,
    /// ωβ1/ωx.
    pub frequency: f64,
    /// ⟨ṅ⟩_R/⟨ṅ⟩_T = (Ė_R/ωβ)/(Ė_T/ωx).
    pub occupation_rate: f64,
    /// Δn_R/Δn_T = (Ė_R/ωβ²)/(Ė_T/ωx²).
    pub delta_n: f64,
}

impl Ratios {
    fn from_rates(heating_t: f64, heating_r: f64, omega_x: f64, omega_beta: f64) -> Self {
        // A sphere has neither librational heating nor a librational trap.
        if heating_r == 0.0 && omega_beta == 0.0 {
            return Self {
                energy: 0.0,
                frequency: 0.0,
                occupation_rate: 0.0,
                delta_n: 0.0,
            };
        }
        let energy = heating_r / heating_t;
        let frequency = omega_beta / omega_x;
        Self {
            energy,
            frequency,
            occupation_rate: energy / frequency,
            delta_n: energy / (frequency * frequency),
        }
    }
}

/// Exact quotients of the computed rates and frequencies.
pub fn ratios(particle: &Ellipsoid, focus: &FocusParameters) -> Result<Ratios> {
    let freqs = trap_frequencies(particle, focus)?;
    Ok(Ratios::from_rates(
        translational_heating_rate(particle, focus),
        rotational_heating_rate(particle, focus),
        freqs.x,
        freqs.beta1,
    ))
}

/// The same four ratios written in terms of geometry, wavelength, waist
/// and anisotropy only.
pub fn approximate_ratios(particle: &Ellipsoid, focus: &FocusParameters) -> Ratios {
    let lambda = 2.0 * PI / focus.k0;
    let size2 = particle.size().powi(2);
    let anis = particle.polarizability().anisotropy();
    let w0 = focus.waist;
    Ratios {
        energy: 5.0 * (lambda / (2.0 * PI)).powi(2) / size2 * anis * anis,
        frequency: (5.0_f64).sqrt() * w0 / (2.0 * size2).sqrt() * anis.sqrt(),
        occupation_rate: lambda * lambda / (4.0 * PI * PI * w0)
            * (10.0 * anis.powi(3) / size2).sqrt(),
        delta_n: lambda * lambda / (2.0 * PI * PI * w0 * w0) * anis,
    }
}

/// ⟨n⟩ = E/(ħω).
pub fn occupation(energy: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    Ok(energy / (HBAR * omega))
}

/// Δn = 2π·Ė/(ħω²), occupation gained per oscillation period.
pub fn delta_n(heating_rate: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    Ok(2.0 * PI * heating_rate / (HBAR * omega * omega))
}

/// Everything the closed forms say about one particle in one beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapCharacterization {
    pub particle: Ellipsoid,
    pub beam: Beam,
    pub focus: FocusParameters,
    pub mass: f64,
    /// I1, about a short axis.
    pub inertia: f64,
    pub polarizability: PolarizabilityTensor,
    pub frequencies: TrapFrequencies,
    /// Ė_T per x or y DOF [J/s].
    pub heating_translational: f64,
    /// Ė_R per librational DOF [J/s].
    pub heating_rotational: f64,
    /// 𝒟 = Ė_T·m/ħ² [1/m²/s].
    pub momentum_diffusion: f64,
    pub ratios: Ratios,
}

pub fn characterize(particle: &Ellipsoid, beam: &Beam) -> Result<TrapCharacterization> {
    let focus = beam.focus();
    let frequencies = trap_frequencies(particle, &focus)?;
    let heating_translational = translational_heating_rate(particle, &focus);
    let heating_rotational = rotational_heating_rate(particle, &focus);
    let mass = particle.mass();
    let (inertia, _) = particle.moments_of_inertia();
    Ok(TrapCharacterization {
        particle: particle.clone(),
        beam: *beam,
        focus,
        mass,
        inertia,
        polarizability: particle.polarizability(),
        frequencies,
        heating_translational,
        heating_rotational,
        momentum_diffusion: heating_translational * mass / (HBAR * HBAR),
        ratios: Ratios::from_rates(
            heating_translational,
            heating_rotational,
            frequencies.x,
            frequencies.beta1,
        ),
    })
}

impl TrapCharacterization {
    pub fn frequency(&self, dof: Dof) -> f64 {
        let f = &self.frequencies;
        match dof {
            Dof::X => f.x,
            Dof::Y => f.y,
            Dof::Z => f.z,
            Dof::Beta1 => f.beta1,
            Dof::Beta2 => f.beta2,
        }
    }

    pub fn heating_rate(&self, dof: Dof) -> f64 {
        match dof {
            Dof::X | Dof::Y => self.heating_translational,
            Dof::Z => 0.5 * self.heating_translational,
            Dof::Beta1 | Dof::Beta2 => self.heating_rotational,
        }
    }

    /// Mass for translations, I1 for librations.
    pub fn inertia_of(&self, dof: Dof) -> f64 {
        if dof.is_rotational() {
            self.inertia
        } else {
            self.mass
        }
    }

    /// Δn for one DOF; zero when the DOF has no restoring force.
    pub fn delta_n(&self, dof: Dof) -> f64 {
        delta_n(self.heating_rate(dof), self.frequency(dof)).unwrap_or(0.0)
    }

    /// β_max = √(2·k_B·T/(I1·ωβ²)).
    pub fn beta_max(&self, temperature: f64) -> Result<f64> {
        require_non_negative("temperature", temperature)?;
        let omega = self.frequencies.beta1;
        if !(omega > 0.0) {
            return Err(Error::NonPositiveFrequency(omega));
        }
        Ok((2.0 * BOLTZMANN * temperature / (self.inertia * omega * omega)).sqrt())
    }
}

/// J/s → mK/s via k_B.
pub fn to_millikelvin_per_second(rate: f64) -> f64 {
    rate / BOLTZMANN * 1e3
}


#[cfg(test)]
mod power_invariance {
    use proptest::prelude::*;

    use super::{characterize, Dof, TrapCharacterization};
    use crate::material::{Ellipsoid, Material};
    use crate::optics::Beam;

    fn trap(a_nm: f64, b_nm: f64, power: f64, na: f64) -> TrapCharacterization {
        let p = Ellipsoid::new(a_nm * 1e-9, b_nm * 1e-9, Material::diamond()).unwrap();
        characterize(&p, &Beam::new(1064e-9, power, na).unwrap()).unwrap()
    }

    proptest! {
        #[test]
        fn delta_n_and_ratios_do_not_depend_on_power(
            a in 10.0f64..60.0, extra in 1.0f64..40.0, power in 1e-3f64..1.0, na in 0.3f64..0.95,
        ) {
            let reference = trap(a, a + extra, 0.07, na);
            let other = trap(a, a + extra, power, na);
            for dof in Dof::ALL {
                prop_assert!((other.delta_n(dof) / reference.delta_n(dof) - 1.0).abs() < 1e-12);
            }
            let pairs = [
                (other.ratios.energy, reference.ratios.energy),
                (other.ratios.frequency, reference.ratios.frequency),
                (other.ratios.occupation_rate, reference.ratios.occupation_rate),
                (other.ratios.delta_n, reference.ratios.delta_n),
            ];
            for (x, y) in pairs {
                prop_assert!((x / y - 1.0).abs() < 1e-12);
            }
        }
    }
}
