use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ensemble::{
    mean_and_error, run_ensemble, EnsembleFailure, EnsembleSeries, Initial, IntegratorConfig, Trajectory,
    TrajectoryFailure,
};
use super::model::{MeasurementModel, Model};
use crate::error::{invalid, require_positive, Error, Result};

/// Windowed convergence test for the steady-state occupation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateConfig {
    /// Window length in relaxation times 1/√(g·Ė/2m).
    pub window_relaxation_times: f64,
    /// Consecutive window means closer than this fraction count as converged.
    pub relative_tolerance: f64,
    /// Consecutive window means closer than this many combined standard
    /// errors also count as converged, since a finite ensemble cannot
    /// resolve differences below its own noise.
    pub error_multiple: f64,
    pub max_windows: usize,
}

impl Default for SteadyStateConfig {
    fn default() -> Self {
        Self {
            window_relaxation_times: 50.0,
            relative_tolerance: 0.01,
            error_multiple: 2.0,
            max_windows: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// Ensemble mean of the time-averaged occupation over the last window.
    pub occupation: f64,
    pub std_error: Option<f64>,
    pub window_means: Vec<f64>,
    pub window_length: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyStateError {
    #[error(transparent)]
    Config(#[from] Error),
    #[error("{0}")]
    Unstable(EnsembleFailure),
    #[error("no steady state after {} windows (last mean {:e})", .0.window_means.len(), .0.occupation)]
    NotConverged(SteadyState),
}

/// Runs the ensemble in windows of fixed length until the mean occupation of
/// DOF `dof` settles, and reports the last window. The relaxation time uses
/// the DOF's gain times the schedule's final multiplier.
pub fn steady_state_occupation<const D: usize>(
    model: &Model<D>,
    dof: usize,
    initial: &Initial<D>,
    config: &IntegratorConfig,
    settings: &SteadyStateConfig,
) -> std::result::Result<SteadyState, SteadyStateError> {
    config.validate()?;
    model.validate()?;
    if dof >= D {
        return Err(invalid("dof", format!("index {dof} out of range")).into());
    }
    let osc = model.oscillators[dof];
    let gain = osc.gain * model.schedule.final_multiplier();
    require_positive("feedback gain", gain)?;
    require_positive("heating_rate", osc.heating_rate)?;
    require_positive("omega", osc.omega)?;
    if settings.max_windows < 2 {
        return Err(invalid("max_windows", "need at least two windows").into());
    }
    let relaxation_time = 1.0 / (gain * osc.heating_rate / (2.0 * osc.inertia)).sqrt();
    let window_length = settings.window_relaxation_times * relaxation_time;
    let dt = config.max_step(model);
    let steps = (window_length / dt).ceil() as usize;
    let quantum = model.action_unit * osc.omega;

    let mut trajectories: Vec<Trajectory<'_, D>> = (0..config.trajectories)
        .map(|i| Trajectory::new(model, dt, initial, config.master_seed, i))
        .collect::<Result<_>>()?;

    let mut window_means = Vec::new();
    let mut window_errors: Vec<Option<f64>> = Vec::new();
    for _ in 0..settings.max_windows {
        let averages: Vec<std::result::Result<f64, TrajectoryFailure>> = trajectories
            .par_iter_mut()
            .map(|traj| {
                let mut sum = 0.0;
                for _ in 0..steps {
                    traj.step()?;
                    let s = &traj.state;
                    sum += osc.energy(s.q[dof], s.p[dof]);
                }
                traj.check_energy(&traj.state.energies(model))?;
                Ok(sum / steps as f64 / quantum)
            })
            .collect();
        let failures: Vec<TrajectoryFailure> = averages.iter().filter_map(|r| r.err()).collect();
        if !failures.is_empty() {
            return Err(SteadyStateError::Unstable(EnsembleFailure {
                trajectories: config.trajectories,
                failures,
            }));
        }
        let (mean, se) = mean_and_error(averages.iter().map(|r| *r.as_ref().unwrap()));
        window_means.push(mean);
        window_errors.push(se);
        let k = window_means.len();
        if k >= 2 {
            let diff = (window_means[k - 1] - window_means[k - 2]).abs();
            let noise = match (window_errors[k - 1], window_errors[k - 2]) {
                (Some(a), Some(b)) => settings.error_multiple * (a * a + b * b).sqrt(),
                _ => 0.0,
            };
            if diff <= settings.relative_tolerance * mean.abs() || diff <= noise {
                return Ok(SteadyState {
                    occupation: mean,
                    std_error: se,
                    window_means,
                    window_length,
                    converged: true,
                });
            }
        }
    }
    Err(SteadyStateError::NotConverged(SteadyState {
        occupation: *window_means.last().unwrap(),
        std_error: *window_errors.last().unwrap(),
        window_means,
        window_length,
        converged: false,
    }))
}

/// Ensemble of the scaled single-DOF oscillator; times, energies and the
/// record interval are in scaled units (t̃ = ωt).
pub fn run_dimensionless(
    delta_n: f64,
    measurement: MeasurementModel,
    scaled_gain: f64,
    duration: f64,
    initial: &Initial<1>,
    config: &IntegratorConfig,
) -> Result<std::result::Result<EnsembleSeries, EnsembleFailure>> {
    let model = Model::dimensionless(delta_n, scaled_gain, measurement)?;
    run_ensemble(&model, initial, config, duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrator::{SimState, Stepper};
    use crate::dynamics::model::{scaled_gain, VelocityEstimate};
    use crate::dynamics::ensemble::trajectory_rng;
    use crate::material::{Ellipsoid, Material};
    use crate::optics::Beam;
    use crate::rates::{characterize, Dof};

    fn diamond_x(gain: f64, n: f64) -> Model<1> {
        let p = Ellipsoid::new(48e-9, 53e-9, Material::diamond()).unwrap();
        let trap = characterize(&p, &Beam::new(1064e-9, 0.07, 0.9).unwrap()).unwrap();
        Model::single(&trap, Dof::X, gain, MeasurementModel::new(n, VelocityEstimate::OmegaScaled).unwrap()).unwrap()
    }

    #[test]
    fn scaled_and_physical_trajectories_coincide() {
        for (n, velocity) in [
            (0.0, VelocityEstimate::OmegaScaled),
            (2.0, VelocityEstimate::OmegaScaled),
            (1.0, VelocityEstimate::FiniteDifference),
        ] {
            let mut physical = diamond_x(3e12, 0.0);
            physical.measurement = MeasurementModel::new(n, velocity).unwrap();
            let scaled = physical.to_dimensionless().unwrap();
            let omega = physical.oscillators[0].omega;
            let mass = physical.oscillators[0].inertia;
            let a0 = physical.length_unit();
            let p0 = mass * omega * a0;
            let dt = 2.0 * std::f64::consts::PI / omega / 100.0;
            let mut sp = Stepper::new(&physical, dt);
            let mut ss = Stepper::new(&scaled, omega * dt);
            let mut rp = trajectory_rng(1, 0);
            let mut rs = trajectory_rng(1, 0);
            let mut xp = SimState { t: 0.0, q: [30.0 * a0], p: [-12.0 * p0] };
            let mut xs = SimState { t: 0.0, q: [30.0], p: [-12.0] };
            for _ in 0..20_000 {
                sp.step(&mut xp, &mut rp).unwrap();
                ss.step(&mut xs, &mut rs).unwrap();
            }
            let np = physical.occupation(0, xp.energies(&physical)[0]);
            let ns = scaled.occupation(0, xs.energies(&scaled)[0]);
            assert!((np / ns - 1.0).abs() < 1e-10, "{n}: {np} vs {ns}");
            assert!((xp.q[0] / a0 / xs.q[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn scaled_gain_definition() {
        let physical = diamond_x(3e12, 0.0);
        let scaled = physical.to_dimensionless().unwrap();
        let o = physical.oscillators[0];
        assert_eq!(scaled.oscillators[0].gain, scaled_gain(3e12, o.inertia, physical.action_unit));
        // Δn = 2πĖ/(ħω²) becomes Ė̃ = Δn/π.
        let dn = 2.0 * std::f64::consts::PI * o.heating_rate / (physical.action_unit * o.omega * o.omega);
        assert!((scaled.oscillators[0].heating_rate * std::f64::consts::PI / dn - 1.0).abs() < 1e-14);
    }

    #[test]
    fn steady_state_rejects_zero_gain() {
        let m = diamond_x(0.0, 0.0);
        let c = IntegratorConfig::new(100, 1, 4, 1e-6).unwrap();
        let r = steady_state_occupation(&m, 0, &Initial::Thermal(1e-6), &c, &SteadyStateConfig::default());
        assert!(matches!(r, Err(SteadyStateError::Config(_))));
    }

    #[test]
    fn steady_state_of_scaled_model_is_deterministic() {
        let m = Model::dimensionless(0.083, 2e-4, MeasurementModel::ideal()).unwrap();
        let c = IntegratorConfig::new(50, 3, 4, 1.0).unwrap();
        let settings = SteadyStateConfig {
            window_relaxation_times: 5.0,
            max_windows: 4,
            ..Default::default()
        };
        let a = steady_state_occupation(&m, 0, &Initial::MeanEnergies([20.0]), &c, &settings);
        let b = steady_state_occupation(&m, 0, &Initial::MeanEnergies([20.0]), &c, &settings);
        assert_eq!(a, b);
    }
}
