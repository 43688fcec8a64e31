//! Cycle-averaged parametric feedback cooling of one degree of freedom with
//! ideal measurement: dE/dt = Ė − ηE²/(2m).

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{require_non_negative, require_positive, Result};

/// Mean feedback power −ηE²/(2m) [J/s].
pub fn cooling_power(energy: f64, gain: f64, mass: f64) -> Result<f64> {
    require_non_negative("energy", energy)?;
    Ok(-gain * energy * energy / (2.0 * mass))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingSolution {
    pub heating_rate: f64,
    pub gain: f64,
    pub mass: f64,
    pub omega: f64,
    /// √(2mĖ/η) [J].
    pub energy_limit: f64,
    /// E_limit/(ħω).
    pub occupation_limit: f64,
    /// √(ηĖ/2m) [1/s].
    pub relaxation_rate: f64,
}

/// Steady state where shot-noise heating balances feedback cooling.
pub fn cooling_limit(heating_rate: f64, gain: f64, mass: f64, omega: f64) -> Result<CoolingSolution> {
    require_positive("heating_rate", heating_rate)?;
    require_positive("gain", gain)?;
    require_positive("mass", mass)?;
    require_positive("omega", omega)?;
    let energy_limit = (2.0 * mass * heating_rate / gain).sqrt();
    Ok(CoolingSolution {
        heating_rate,
        gain,
        mass,
        omega,
        energy_limit,
        occupation_limit: energy_limit / (HBAR * omega),
        relaxation_rate: (gain * heating_rate / (2.0 * mass)).sqrt(),
    })
}

impl CoolingSolution {
    /// B = (√(η/2m)·E_i + √Ė)/(√(η/2m)·E_i − √Ė); `None` at the fixed point
    /// E_i = E_limit where B is undefined.
    pub fn coefficient_b(&self, initial_energy: f64) -> Option<f64> {
        let s = (self.gain / (2.0 * self.mass)).sqrt();
        let r = self.heating_rate.sqrt();
        let den = s * initial_energy - r;
        (den != 0.0).then(|| (s * initial_energy + r) / den)
    }

    /// E(t) = E_limit·(1 + 2/(B·exp(2γt) − 1)) with γ the relaxation rate.
    ///
    /// Evaluated as E_limit·(c₊ + u·c₋)/(c₊ − u·c₋) with u = exp(−2γt) and
    /// c± = √(η/2m)·E_i ± √Ė, which is the same expression multiplied
    /// through by (√(η/2m)·E_i − √Ė). It is finite at the fixed point and
    /// for t → ∞, and also covers heating from below the limit.
    pub fn energy_at(&self, initial_energy: f64, t: f64) -> f64 {
        let s = (self.gain / (2.0 * self.mass)).sqrt();
        let r = self.heating_rate.sqrt();
        let plus = s * initial_energy + r;
        let minus = s * initial_energy - r;
        if minus == 0.0 {
            return self.energy_limit;
        }
        let u = (-2.0 * self.relaxation_rate * t).exp();
        self.energy_limit * (plus + u * minus) / (plus - u * minus)
    }

    pub fn occupation_at(&self, initial_energy: f64, t: f64) -> f64 {
        self.energy_at(initial_energy, t) / (HBAR * self.omega)
    }

    /// Right-hand side of the energy equation.
    pub fn energy_rate(&self, energy: f64) -> f64 {
        self.heating_rate - self.gain * energy * energy / (2.0 * self.mass)
    }
}

/// Stand-alone form of [`CoolingSolution::energy_at`].
pub fn energy_trajectory(
    initial_energy: f64,
    t: f64,
    heating_rate: f64,
    gain: f64,
    mass: f64,
) -> Result<f64> {
    require_non_negative("initial_energy", initial_energy)?;
    // ω only sets the occupation scale; any positive value works here.
    let solution = cooling_limit(heating_rate, gain, mass, 1.0)?;
    Ok(solution.energy_at(initial_energy, t))
}
