use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{Model, VelocityEstimate};

/// Phase-space point of a `D`-oscillator model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState<const D: usize> {
    pub t: f64,
    pub q: [f64; D],
    pub p: [f64; D],
}

impl<const D: usize> SimState<D> {
    pub fn at_rest() -> Self {
        Self {
            t: 0.0,
            q: [0.0; D],
            p: [0.0; D],
        }
    }

    pub fn energies(&self, model: &Model<D>) -> [f64; D] {
        std::array::from_fn(|i| model.oscillators[i].energy(self.q[i], self.p[i]))
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
pub enum Instability {
    #[error("feedback modulation |Δ| = {delta:e} reached 1")]
    Modulation { delta: f64 },
    #[error("non-finite state")]
    NonFinite,
    #[error("energy {energy:e} J exceeded the runaway threshold {threshold:e} J")]
    Runaway { energy: f64, threshold: f64 },
}

/// Measured coordinates and velocities handed to the feedback loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement<const D: usize> {
    pub q: [f64; D],
    pub velocity: [f64; D],
}

/// Fixed-step integrator for one trajectory of a model.
///
/// Each step draws, in order: for every fed-back DOF (index order) the
/// position variate δR and, with [`VelocityEstimate::OmegaScaled`], the
/// velocity variate δR′; then one kick variate δW per heated DOF. Variates
/// are `rand_distr::StandardNormal` from the caller's generator.
#[derive(Debug, Clone)]
pub struct Stepper<'a, const D: usize> {
    model: &'a Model<D>,
    dt: f64,
    kick: [f64; D],
    position_noise: [f64; D],
    previous: Option<[f64; D]>,
}

impl<'a, const D: usize> Stepper<'a, D> {
    pub fn new(model: &'a Model<D>, dt: f64) -> Self {
        let kick = std::array::from_fn(|i| {
            let o = &model.oscillators[i];
            kick_scale(o.heating_rate, dt, o.inertia)
        });
        let position_noise = std::array::from_fn(|i| {
            let o = &model.oscillators[i];
            if model.measurement.is_ideal() || o.gain == 0.0 {
                0.0
            } else {
                model.measurement.noise_scale * model.action_unit / (2.0 * kick[i])
            }
        });
        Self {
            model,
            dt,
            kick,
            position_noise,
            previous: None,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Momentum kick scale δp per DOF.
    pub fn kick_scales(&self) -> [f64; D] {
        self.kick
    }

    /// Position noise scale δq per DOF (zero where the measurement is ideal
    /// or the DOF is not fed back).
    pub fn position_noise_scales(&self) -> [f64; D] {
        self.position_noise
    }

    /// Noisy measurement of the current state.
    pub fn measure<R: Rng + ?Sized>(&mut self, state: &SimState<D>, rng: &mut R) -> Measurement<D> {
        let model = self.model;
        let mut q = state.q;
        let mut velocity: [f64; D] = std::array::from_fn(|i| state.p[i] / model.oscillators[i].inertia);
        if model.measurement.is_ideal() {
            return Measurement { q, velocity };
        }
        let mode = model.measurement.velocity;
        for i in 0..D {
            let dq = self.position_noise[i];
            if dq == 0.0 {
                continue;
            }
            let r: f64 = rng.sample(StandardNormal);
            q[i] += r * dq;
            if mode == VelocityEstimate::OmegaScaled {
                let r2: f64 = rng.sample(StandardNormal);
                velocity[i] += r2 * model.oscillators[i].omega * dq;
            }
        }
        if mode == VelocityEstimate::FiniteDifference {
            if let Some(prev) = self.previous {
                for i in 0..D {
                    if self.position_noise[i] != 0.0 {
                        velocity[i] = (q[i] - prev[i]) / self.dt;
                    }
                }
            }
            self.previous = Some(q);
        }
        Measurement { q, velocity }
    }

    /// Δ = Σ g_i·q_m,i·q̇_m,i at time `t`, including the schedule multiplier.
    pub fn modulation(&self, t: f64, m: &Measurement<D>) -> f64 {
        let multiplier = self.model.schedule.multiplier_at(t);
        if multiplier == 0.0 {
            return 0.0;
        }
        let mut delta = 0.0;
        for i in 0..D {
            let g = self.model.oscillators[i].gain;
            if g != 0.0 {
                delta += g * m.q[i] * m.velocity[i];
            }
        }
        multiplier * delta
    }

    /// One RK4 step of q̈ = −ω²(1+Δ)q with Δ frozen, then shot-noise kicks.
    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut SimState<D>, rng: &mut R) -> Result<(), Instability> {
        let measured = self.measure(state, rng);
        let delta = self.modulation(state.t, &measured);
        // With noisy measurement the instantaneous Δ carries white noise that
        // routinely exceeds 1 even in a well-behaved run, so the bound is
        // only enforced for ideal measurement.
        if self.model.measurement.is_ideal() && delta.abs() >= 1.0 {
            return Err(Instability::Modulation { delta });
        }
        self.advance(state, delta);
        for i in 0..D {
            if self.kick[i] != 0.0 {
                let w: f64 = rng.sample(StandardNormal);
                state.p[i] += w * self.kick[i];
            }
        }
        state.t += self.dt;
        if state.is_finite() {
            Ok(())
        } else {
            Err(Instability::NonFinite)
        }
    }

    /// Deterministic part only.
    pub fn advance(&self, state: &mut SimState<D>, delta: f64) {
        let h = self.dt;
        for (i, o) in self.model.oscillators.iter().enumerate() {
            let k2 = o.omega * o.omega * (1.0 + delta);
            let m = o.inertia;
            let f = |q: f64, p: f64| (p / m, -m * k2 * q);
            let (q0, p0) = (state.q[i], state.p[i]);
            let (a1, b1) = f(q0, p0);
            let (a2, b2) = f(q0 + 0.5 * h * a1, p0 + 0.5 * h * b1);
            let (a3, b3) = f(q0 + 0.5 * h * a2, p0 + 0.5 * h * b2);
            let (a4, b4) = f(q0 + h * a3, p0 + h * b3);
            state.q[i] = q0 + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            state.p[i] = p0 + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        }
    }
}

/// δp = √(2·Ė·dt·m).
pub fn kick_scale(heating_rate: f64, dt: f64, inertia: f64) -> f64 {
    (2.0 * heating_rate * dt * inertia).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::HBAR;
    use crate::dynamics::model::{MeasurementModel, Oscillator, Schedule};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const MASS: f64 = 1.790255423204065e-18;
    const OMEGA: f64 = 2853835.672260022;
    const HEATING: f64 = 1.1393184085706005e-23;

    fn oscillator(heating_rate: f64, gain: f64) -> Oscillator {
        Oscillator {
            label: "x",
            omega: OMEGA,
            inertia: MASS,
            heating_rate,
            gain,
        }
    }

    fn model(heating_rate: f64, gain: f64, n: f64) -> Model<1> {
        Model {
            oscillators: [oscillator(heating_rate, gain)],
            action_unit: HBAR,
            schedule: Schedule::default(),
            measurement: MeasurementModel::new(n, VelocityEstimate::OmegaScaled).unwrap(),
        }
    }

    #[test]
    fn free_oscillation_follows_rk4_amplification() {
        // For q̈ = −ω²q, RK4 scales the energy by exactly
        // 1 − h⁶/72 + h⁸/576 per step, h = ω·dt.
        let m = model(0.0, 0.0, 0.0);
        let dt = 2.0 * PI / OMEGA / 100.0;
        let mut stepper = Stepper::new(&m, dt);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = SimState { t: 0.0, q: [1e-9], p: [0.0] };
        let e0 = s.energies(&m)[0];
        for _ in 0..100 {
            stepper.step(&mut s, &mut rng).unwrap();
        }
        let h = OMEGA * dt;
        let per_step = 1.0 - h.powi(6) / 72.0 + h.powi(8) / 576.0;
        assert_relative_eq!(s.energies(&m)[0] / e0, per_step.powi(100), max_relative = 1e-12);
        // After one period the oscillator is back where it started.
        assert!((s.q[0] - 1e-9).abs() < 1e-14);
    }

    #[test]
    fn single_kick_adds_exact_energy() {
        let m = model(HEATING, 0.0, 0.0);
        let dt = 1e-8;
        let mut stepper = Stepper::new(&m, dt);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = SimState::<1>::at_rest();
        stepper.step(&mut s, &mut rng).unwrap();
        let mut check = ChaCha8Rng::seed_from_u64(7);
        let w: f64 = check.sample(StandardNormal);
        let dp = w * kick_scale(HEATING, dt, MASS);
        assert_eq!(s.p[0], dp);
        assert_eq!(s.q[0], 0.0);
        assert_relative_eq!(s.energies(&m)[0], dp * dp / (2.0 * MASS), max_relative = 1e-15);
    }

    #[test]
    fn noise_scales_satisfy_uncertainty_product() {
        for n in [0.5, 1.0, 2.0, 3.0] {
            for dt in [1e-9, 2.2e-8, 1e-6] {
                for heating in [1e-25, HEATING, 1e-20] {
                    let m = model(heating, 1e12, n);
                    let s = Stepper::new(&m, dt);
                    let product = s.position_noise_scales()[0] * s.kick_scales()[0];
                    assert_relative_eq!(product, n * HBAR / 2.0, max_relative = 1e-14);
                }
            }
        }
    }

    #[test]
    fn ideal_measurement_is_exact_and_draws_nothing() {
        let m = model(HEATING, 1e12, 0.0);
        let mut stepper = Stepper::new(&m, 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = SimState { t: 0.0, q: [2e-9], p: [3e-21] };
        let meas = stepper.measure(&s, &mut rng);
        assert_eq!(meas.q, s.q);
        assert_eq!(meas.velocity, [3e-21 / MASS]);
        let mut fresh = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(rng.random::<u64>(), fresh.random::<u64>());
    }

    #[test]
    fn omega_scaled_velocity_noise() {
        let m = model(HEATING, 1e12, 2.0);
        let mut stepper = Stepper::new(&m, 1e-8);
        let s = SimState { t: 0.0, q: [0.0], p: [0.0] };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let meas = stepper.measure(&s, &mut rng);
        let mut check = ChaCha8Rng::seed_from_u64(11);
        let r: f64 = check.sample(StandardNormal);
        let r2: f64 = check.sample(StandardNormal);
        let dq = stepper.position_noise_scales()[0];
        assert_eq!(meas.q[0], r * dq);
        assert_eq!(meas.velocity[0], r2 * OMEGA * dq);
    }

    #[test]
    fn finite_difference_velocity_uses_previous_measurement() {
        let mut m = model(HEATING, 1e12, 1.0);
        m.measurement.velocity = VelocityEstimate::FiniteDifference;
        let dt = 1e-8;
        let mut stepper = Stepper::new(&m, dt);
        let s = SimState { t: 0.0, q: [1e-9], p: [1e-20] };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let first = stepper.measure(&s, &mut rng);
        assert_eq!(first.velocity[0], 1e-20 / MASS);
        let second = stepper.measure(&s, &mut rng);
        assert_eq!(second.velocity[0], (second.q[0] - first.q[0]) / dt);
    }

    #[test]
    fn large_modulation_is_reported() {
        let m = model(0.0, 1e40, 0.0);
        let mut stepper = Stepper::new(&m, 1e-8);
        let mut s = SimState { t: 0.0, q: [1e-6], p: [1e-18] };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(stepper.step(&mut s, &mut rng), Err(Instability::Modulation { .. })));
    }

    #[test]
    fn schedule_scales_modulation() {
        let mut m = model(0.0, 1e12, 0.0);
        m.schedule = Schedule::single_switch(1e-3, 10.0).unwrap();
        let stepper = Stepper::new(&m, 1e-8);
        let meas = Measurement { q: [1e-9], velocity: [1e-3] };
        let before = stepper.modulation(0.0, &meas);
        assert_relative_eq!(before, 1e12 * 1e-12, max_relative = 1e-15);
        assert_relative_eq!(stepper.modulation(2e-3, &meas), 10.0 * before, max_relative = 1e-15);
    }

    #[test]
    fn positive_modulation_removes_energy_from_expanding_phase() {
        // x·ẋ > 0 stiffens the trap while the particle moves outward.
        let m = model(0.0, 1e9, 0.0);
        let dt = 2.0 * PI / OMEGA / 100.0;
        let mut stepper = Stepper::new(&m, dt);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = SimState { t: 0.0, q: [5e-9], p: [0.0] };
        let e0 = s.energies(&m)[0];
        for _ in 0..1000 {
            stepper.step(&mut s, &mut rng).unwrap();
        }
        assert!(s.energies(&m)[0] < 0.9 * e0);
    }
}
