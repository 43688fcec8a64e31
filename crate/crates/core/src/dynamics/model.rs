use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{invalid, require_non_negative, require_positive, Result};
use crate::rates::{Dof, TrapCharacterization};

/// One harmonic degree of freedom with its shot-noise heating and feedback
/// gain. `inertia` is the mass for translations and I1 for librations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Oscillator {
    pub label: &'static str,
    pub omega: f64,
    pub inertia: f64,
    pub heating_rate: f64,
    /// Coefficient of q_m·q̇_m in the modulation Δ: η_i for translations,
    /// ζ_j·r² for librations.
    pub gain: f64,
}

impl Oscillator {
    pub fn energy(&self, q: f64, p: f64) -> f64 {
        0.5 * p * p / self.inertia + 0.5 * self.inertia * self.omega * self.omega * q * q
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Piecewise-constant gain multiplier: 1 before the first switch, then the
/// multiplier of the most recent switch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    switches: Vec<(f64, f64)>,
}

impl Schedule {
    pub fn new(switches: Vec<(f64, f64)>) -> Result<Self> {
        for (time, multiplier) in &switches {
            require_non_negative("schedule.time", *time)?;
            require_non_negative("schedule.multiplier", *multiplier)?;
        }
        if switches.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("schedule", "switch times must be strictly increasing"));
        }
        Ok(Self { switches })
    }

    /// Multiplier 1 until `time`, then `multiplier`.
    pub fn single_switch(time: f64, multiplier: f64) -> Result<Self> {
        Self::new(vec![(time, multiplier)])
    }

    pub fn switches(&self) -> &[(f64, f64)] {
        &self.switches
    }

    pub fn is_empty(&self) -> bool {
        self.switches.is_empty()
    }

    pub fn multiplier_at(&self, t: f64) -> f64 {
        self.switches
            .iter()
            .rev()
            .find(|(time, _)| *time <= t)
            .map_or(1.0, |(_, m)| *m)
    }

    pub fn final_multiplier(&self) -> f64 {
        self.switches.last().map_or(1.0, |(_, m)| *m)
    }
}

/// Feedback gains for Δ = Σ η_i·x_i·ẋ_i + Σ ζ_j·r²·β_j·β̇_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    /// η for x, y, z [s/m²].
    pub eta: [f64; 3],
    /// ζ for β1, β2 [s/m²].
    pub zeta: [f64; 2],
    /// Particle size r in the ζ·r² factor [m].
    pub size_scale: f64,
    pub schedule: Schedule,
}

impl FeedbackConfig {
    pub fn new(eta: [f64; 3], zeta: [f64; 2], size_scale: f64, schedule: Schedule) -> Result<Self> {
        for g in eta {
            require_non_negative("feedback.eta", g)?;
        }
        for g in zeta {
            require_non_negative("feedback.zeta", g)?;
        }
        require_positive("feedback.r", size_scale)?;
        Ok(Self {
            eta,
            zeta,
            size_scale,
            schedule,
        })
    }

    /// All gains zero: pure shot-noise heating.
    pub fn off(size_scale: f64) -> Self {
        Self {
            eta: [0.0; 3],
            zeta: [0.0; 2],
            size_scale,
            schedule: Schedule::default(),
        }
    }

    pub fn gain(&self, dof: Dof) -> f64 {
        let r2 = self.size_scale * self.size_scale;
        match dof {
            Dof::X => self.eta[0],
            Dof::Y => self.eta[1],
            Dof::Z => self.eta[2],
            Dof::Beta1 => self.zeta[0] * r2,
            Dof::Beta2 => self.zeta[1] * r2,
        }
    }
}

/// How the measured velocity is formed when positions carry noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VelocityEstimate {
    /// q̇_m = q̇.
    Exact,
    /// q̇_m = q̇ + δR′·ω·δq with an independent unit normal δR′.
    #[default]
    OmegaScaled,
    /// q̇_m = (q_m(t) − q_m(t − dt))/dt; the first step uses q̇.
    FiniteDifference,
}

impl VelocityEstimate {
    pub fn label(self) -> &'static str {
        match self {
            VelocityEstimate::Exact => "exact",
            VelocityEstimate::OmegaScaled => "omega",
            VelocityEstimate::FiniteDifference => "difference",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" | "none" => Some(Self::Exact),
            "omega" => Some(Self::OmegaScaled),
            "difference" => Some(Self::FiniteDifference),
            _ => None,
        }
    }
}

/// Position measurement noise fixed by δq·δp = N·ħ/2 per step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasurementModel {
    pub noise_scale: f64,
    pub velocity: VelocityEstimate,
}

impl MeasurementModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn new(noise_scale: f64, velocity: VelocityEstimate) -> Result<Self> {
        require_non_negative("measurement.N", noise_scale)?;
        Ok(Self {
            noise_scale,
            velocity,
        })
    }

    pub fn is_ideal(&self) -> bool {
        self.noise_scale == 0.0
    }
}

/// A set of `D` oscillators coupled only through the shared modulation Δ.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<const D: usize> {
    pub oscillators: [Oscillator; D],
    /// ħ in the model's units: the SI value for physical models, 2 for the
    /// scaled single-DOF model (where x̃ = x/√(ħ/2mω)).
    pub action_unit: f64,
    pub schedule: Schedule,
    pub measurement: MeasurementModel,
}

impl<const D: usize> Model<D> {
    pub fn validate(&self) -> Result<()> {
        require_positive("action_unit", self.action_unit)?;
        for osc in &self.oscillators {
            require_non_negative("omega", osc.omega)?;
            require_positive("inertia", osc.inertia)?;
            require_non_negative("heating_rate", osc.heating_rate)?;
            require_non_negative("gain", osc.gain)?;
            if !self.measurement.is_ideal() && osc.gain > 0.0 && osc.heating_rate == 0.0 {
                return Err(invalid(
                    "measurement.N",
                    format!(
                        "noisy measurement of `{}` needs a nonzero heating rate to set δq",
                        osc.label
                    ),
                ));
            }
        }
        if self.fastest_omega() <= 0.0 {
            return Err(invalid("omega", "at least one oscillator must have ω > 0"));
        }
        Ok(())
    }

    pub fn fastest_omega(&self) -> f64 {
        self.oscillators.iter().map(|o| o.omega).fold(0.0, f64::max)
    }

    pub fn occupation(&self, index: usize, energy: f64) -> f64 {
        energy / (self.action_unit * self.oscillators[index].omega)
    }

    pub fn labels(&self) -> [&'static str; D] {
        self.oscillators.map(|o| o.label)
    }

    pub fn with_measurement(mut self, measurement: MeasurementModel) -> Self {
        self.measurement = measurement;
        self
    }

    pub fn with_gains(mut self, gains: [f64; D]) -> Self {
        for (osc, g) in self.oscillators.iter_mut().zip(gains) {
            osc.gain = g;
        }
        self
    }
}

impl Model<5> {
    /// Full x, y, z, β1, β2 model of a characterized trap.
    pub fn full(
        trap: &TrapCharacterization,
        feedback: &FeedbackConfig,
        measurement: MeasurementModel,
    ) -> Result<Self> {
        let model = Self {
            oscillators: Dof::ALL.map(|dof| oscillator_for(trap, dof, feedback.gain(dof))),
            action_unit: HBAR,
            schedule: feedback.schedule.clone(),
            measurement,
        };
        model.validate()?;
        Ok(model)
    }
}

fn oscillator_for(trap: &TrapCharacterization, dof: Dof, gain: f64) -> Oscillator {
    Oscillator {
        label: dof.label(),
        omega: trap.frequency(dof),
        inertia: trap.inertia_of(dof),
        heating_rate: trap.heating_rate(dof),
        gain,
    }
}

impl Model<1> {
    /// One degree of freedom of a characterized trap in isolation.
    pub fn single(
        trap: &TrapCharacterization,
        dof: Dof,
        gain: f64,
        measurement: MeasurementModel,
    ) -> Result<Self> {
        let model = Self {
            oscillators: [oscillator_for(trap, dof, gain)],
            action_unit: HBAR,
            schedule: Schedule::default(),
            measurement,
        };
        model.validate()?;
        Ok(model)
    }

    /// Scaled oscillator x̃″ = −x̃(1 + η̃·x̃_m·x̃′_m) with t̃ = ωt,
    /// x̃ = x/√(ħ/2mω), heating Ė̃ = Δn/π and η̃ = η·ħ/(2m).
    pub fn dimensionless(
        delta_n: f64,
        scaled_gain: f64,
        measurement: MeasurementModel,
    ) -> Result<Self> {
        require_positive("delta_n", delta_n)?;
        let model = Self {
            oscillators: [Oscillator {
                label: "x_scaled",
                omega: 1.0,
                inertia: 1.0,
                heating_rate: delta_n / PI,
                gain: scaled_gain,
            }],
            action_unit: 2.0,
            schedule: Schedule::default(),
            measurement,
        };
        model.validate()?;
        Ok(model)
    }

    /// The scaled counterpart of a physical single-DOF model.
    pub fn to_dimensionless(&self) -> Result<Self> {
        let osc = self.oscillators[0];
        let dn = 2.0 * PI * osc.heating_rate / (self.action_unit * osc.omega * osc.omega);
        let mut scaled = Self::dimensionless(
            dn,
            scaled_gain(osc.gain, osc.inertia, self.action_unit),
            self.measurement,
        )?;
        scaled.schedule = self.schedule.clone();
        Ok(scaled)
    }

    /// Length unit √(ħ/2mω) of the scaled model.
    pub fn length_unit(&self) -> f64 {
        let osc = self.oscillators[0];
        (self.action_unit / (2.0 * osc.inertia * osc.omega)).sqrt()
    }
}

/// η̃ = η·ħ/(2m).
pub fn scaled_gain(gain: f64, inertia: f64, action_unit: f64) -> f64 {
    gain * action_unit / (2.0 * inertia)
}

/// Inverse of [`scaled_gain`].
pub fn physical_gain(scaled: f64, inertia: f64, action_unit: f64) -> f64 {
    scaled * 2.0 * inertia / action_unit
}
