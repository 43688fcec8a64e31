//! Stochastic trajectories of the trapped particle: harmonic motion in
//! x, y, z, β1, β2 with parametric feedback, shot-noise kicks and optional
//! measurement noise, plus ensemble statistics and steady-state detection.

pub mod ensemble;
pub mod integrator;
pub mod model;
pub mod steady;

pub use ensemble::{
    run_ensemble, run_ensemble_traces, run_trajectory, trajectory_rng, EnsembleFailure, EnsembleSeries,
    EnsembleTraces, Initial, IntegratorConfig, SlopeEstimate, TrajectoryFailure,
};
pub use integrator::{Instability, SimState, Stepper};
pub use model::{FeedbackConfig, MeasurementModel, Model, Oscillator, Schedule, VelocityEstimate};
pub use steady::{run_dimensionless, steady_state_occupation, SteadyState, SteadyStateConfig, SteadyStateError};
