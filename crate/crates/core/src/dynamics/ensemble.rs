use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::integrator::{Instability, SimState, Stepper};
use super::model::Model;
use crate::constants::BOLTZMANN;
use crate::error::{invalid, require_non_negative, require_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Steps per period of the fastest oscillator (upper bound on dt).
    pub steps_per_period: u32,
    pub master_seed: u64,
    pub trajectories: usize,
    /// Sampling interval of the recorded series [model time units].
    pub record_interval: f64,
}

impl IntegratorConfig {
    pub fn new(steps_per_period: u32, master_seed: u64, trajectories: usize, record_interval: f64) -> Result<Self> {
        let config = Self {
            steps_per_period,
            master_seed,
            trajectories,
            record_interval,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period < 20 {
            return Err(invalid(
                "integrator.steps_per_period",
                format!("must be at least 20, got {}", self.steps_per_period),
            ));
        }
        if self.trajectories == 0 {
            return Err(invalid("integrator.trajectories", "must be at least 1"));
        }
        require_positive("integrator.record_interval", self.record_interval)?;
        Ok(())
    }

    /// Largest step that resolves the fastest oscillator.
    pub fn max_step<const D: usize>(&self, model: &Model<D>) -> f64 {
        2.0 * PI / model.fastest_omega() / self.steps_per_period as f64
    }

    /// Step size: the record interval divided into the fewest equal steps
    /// not exceeding [`Self::max_step`].
    pub fn step_layout<const D: usize>(&self, model: &Model<D>) -> (f64, usize) {
        let ratio = self.record_interval / self.max_step(model);
        let steps = (ratio * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (self.record_interval / steps as f64, steps)
    }
}

/// Starting point of every trajectory in an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial<const D: usize> {
    State(SimState<D>),
    /// Equipartition Gaussian at temperature [K] in every DOF.
    Thermal(f64),
    /// Equipartition Gaussian with the given mean energy per DOF.
    MeanEnergies([f64; D]),
}

impl<const D: usize> Initial<D> {
    /// Draws q then p per DOF in index order.
    pub fn sample<R: Rng + ?Sized>(&self, model: &Model<D>, rng: &mut R) -> Result<SimState<D>> {
        let energies = match *self {
            Initial::State(s) => return Ok(s),
            Initial::Thermal(t) => [BOLTZMANN * require_non_negative("initial.temperature_K", t)?; D],
            Initial::MeanEnergies(e) => e,
        };
        let mut state = SimState::at_rest();
        for (i, o) in model.oscillators.iter().enumerate() {
            let e = require_non_negative("initial energy", energies[i])?;
            let rq: f64 = rng.sample(StandardNormal);
            let rp: f64 = rng.sample(StandardNormal);
            if o.omega > 0.0 {
                state.q[i] = rq * (e / (o.inertia * o.omega * o.omega)).sqrt();
            }
            state.p[i] = rp * (e * o.inertia).sqrt();
        }
        Ok(state)
    }
}

/// ChaCha8 generator for trajectory `index`: seeded from `master_seed`
/// through `seed_from_u64`, with the trajectory index as the stream number.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
#[error("trajectory {index} failed at t = {time:e}: {instability}")]
pub struct TrajectoryFailure {
    pub index: usize,
    pub time: f64,
    pub instability: Instability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFailure {
    pub trajectories: usize,
    pub failures: Vec<TrajectoryFailure>,
}

impl fmt::Display for EnsembleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of {} trajectories failed", self.failures.len(), self.trajectories)?;
        if let Some(first) = self.failures.first() {
            write!(f, "; first: {first}")?;
        }
        Ok(())
    }
}

impl std::error::Error for EnsembleFailure {}

/// A single stochastic trajectory that can be advanced step by step.
pub struct Trajectory<'a, const D: usize> {
    pub index: usize,
    pub state: SimState<D>,
    stepper: Stepper<'a, D>,
    rng: ChaCha8Rng,
    runaway: f64,
}

impl<'a, const D: usize> Trajectory<'a, D> {
    pub fn new(model: &'a Model<D>, dt: f64, initial: &Initial<D>, master_seed: u64, index: usize) -> Result<Self> {
        let mut rng = trajectory_rng(master_seed, index as u64);
        let state = initial.sample(model, &mut rng)?;
        let initial_energy: f64 = state.energies(model).iter().sum();
        let quantum: f64 = model.oscillators.iter().map(|o| model.action_unit * o.omega).sum();
        Ok(Self {
            index,
            state,
            stepper: Stepper::new(model, dt),
            rng,
            runaway: 1e6 * initial_energy.max(quantum),
        })
    }

    pub fn step(&mut self) -> std::result::Result<(), TrajectoryFailure> {
        let t = self.state.t;
        self.stepper
            .step(&mut self.state, &mut self.rng)
            .map_err(|instability| self.failure(t, instability))
    }

    /// Checks total energy against 10⁶ × max(initial energy, Σħω).
    pub fn check_energy(&self, energies: &[f64; D]) -> std::result::Result<(), TrajectoryFailure> {
        let energy: f64 = energies.iter().sum();
        if energy > self.runaway {
            return Err(self.failure(
                self.state.t,
                Instability::Runaway {
                    energy,
                    threshold: self.runaway,
                },
            ));
        }
        Ok(())
    }

    fn failure(&self, time: f64, instability: Instability) -> TrajectoryFailure {
        TrajectoryFailure {
            index: self.index,
            time,
            instability,
        }
    }
}

/// Recorded per-DOF energies of one trajectory, one row per record time.
pub type Trace<const D: usize> = Vec<[f64; D]>;

/// Runs trajectory `index` and records energies at t = k·record_interval.
pub fn run_trajectory<const D: usize>(
    model: &Model<D>,
    initial: &Initial<D>,
    config: &IntegratorConfig,
    duration: f64,
    index: usize,
) -> Result<std::result::Result<Trace<D>, TrajectoryFailure>> {
    config.validate()?;
    model.validate()?;
    require_non_negative("integrator.duration", duration)?;
    let (dt, steps_per_record) = config.step_layout(model);
    let records = record_count(duration, config.record_interval);
    let mut traj = Trajectory::new(model, dt, initial, config.master_seed, index)?;
    Ok(record(model, &mut traj, steps_per_record, records))
}

fn record<const D: usize>(
    model: &Model<D>,
    traj: &mut Trajectory<'_, D>,
    steps_per_record: usize,
    records: usize,
) -> std::result::Result<Trace<D>, TrajectoryFailure> {
    let mut trace = Vec::with_capacity(records + 1);
    trace.push(traj.state.energies(model));
    for _ in 0..records {
        for _ in 0..steps_per_record {
            traj.step()?;
        }
        let e = traj.state.energies(model);
        traj.check_energy(&e)?;
        trace.push(e);
    }
    Ok(trace)
}

fn record_count(duration: f64, interval: f64) -> usize {
    (duration / interval * (1.0 + 1e-12)).floor() as usize
}

/// Every trajectory's recorded energies.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTraces<const D: usize> {
    pub labels: [&'static str; D],
    pub omega: [f64; D],
    pub action_unit: f64,
    pub times: Vec<f64>,
    pub traces: Vec<Trace<D>>,
    pub master_seed: u64,
    pub config_hash: String,
}

/// Runs `config.trajectories` trajectories in parallel. Trajectory i uses
/// [`trajectory_rng`]`(master_seed, i)`, so results do not depend on
/// scheduling or thread count.
pub fn run_ensemble_traces<const D: usize>(
    model: &Model<D>,
    initial: &Initial<D>,
    config: &IntegratorConfig,
    duration: f64,
) -> Result<std::result::Result<EnsembleTraces<D>, EnsembleFailure>> {
    config.validate()?;
    model.validate()?;
    require_non_negative("integrator.duration", duration)?;
    let (dt, steps_per_record) = config.step_layout(model);
    let records = record_count(duration, config.record_interval);
    let results: Vec<std::result::Result<Trace<D>, TrajectoryFailure>> = (0..config.trajectories)
        .into_par_iter()
        .map(|index| {
            let mut traj = Trajectory::new(model, dt, initial, config.master_seed, index)
                .expect("initial condition validated");
            record(model, &mut traj, steps_per_record, records)
        })
        .collect();
    // Surface initial-condition errors on the calling thread.
    initial.sample(model, &mut trajectory_rng(config.master_seed, 0))?;

    let mut traces = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(t) => traces.push(t),
            Err(f) => failures.push(f),
        }
    }
    if !failures.is_empty() {
        return Ok(Err(EnsembleFailure {
            trajectories: config.trajectories,
            failures,
        }));
    }
    Ok(Ok(EnsembleTraces {
        labels: model.labels(),
        omega: model.oscillators.map(|o| o.omega),
        action_unit: model.action_unit,
        times: (0..=records).map(|k| k as f64 * config.record_interval).collect(),
        traces,
        master_seed: config.master_seed,
        config_hash: run_hash(model, initial, config, duration),
    }))
}

/// Ensemble means and standard errors.
pub fn run_ensemble<const D: usize>(
    model: &Model<D>,
    initial: &Initial<D>,
    config: &IntegratorConfig,
    duration: f64,
) -> Result<std::result::Result<EnsembleSeries, EnsembleFailure>> {
    Ok(run_ensemble_traces(model, initial, config, duration)?.map(|t| t.summary()))
}

/// First 16 hex digits of SHA-256 over the run's full-precision debug form.
pub fn run_hash<const D: usize>(
    model: &Model<D>,
    initial: &Initial<D>,
    config: &IntegratorConfig,
    duration: f64,
) -> String {
    let text = format!("{model:?}|{initial:?}|{config:?}|{duration:?}");
    short_hash(text.as_bytes())
}

pub fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Mean and standard error of a sample; the error is `None` for one value.
pub fn mean_and_error(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, Option<f64>) {
    let n = values.len();
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, Some((var / n as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub mean: f64,
    pub std_error: Option<f64>,
}

impl<const D: usize> EnsembleTraces<D> {
    pub fn trajectories(&self) -> usize {
        self.traces.len()
    }

    pub fn summary(&self) -> EnsembleSeries {
        let dofs = (0..D)
            .map(|i| {
                let scale = self.action_unit * self.omega[i];
                let mut mean_energy = Vec::with_capacity(self.times.len());
                let mut energy_error = Vec::with_capacity(self.times.len());
                for k in 0..self.times.len() {
                    let (m, e) = mean_and_error(self.traces.iter().map(|t| t[k][i]));
                    mean_energy.push(m);
                    energy_error.push(e);
                }
                let occ = |v: f64| if scale > 0.0 { v / scale } else { f64::NAN };
                let std_error: Option<Vec<f64>> = energy_error.into_iter().collect();
                DofSeries {
                    label: self.labels[i].to_string(),
                    omega: self.omega[i],
                    mean_occupation: mean_energy.iter().map(|&v| occ(v)).collect(),
                    occupation_std_error: std_error.as_ref().map(|s| s.iter().map(|&v| occ(v)).collect()),
                    mean_energy,
                    std_error,
                }
            })
            .collect();
        EnsembleSeries {
            times: self.times.clone(),
            dofs,
            trajectories: self.traces.len(),
            master_seed: self.master_seed,
            config_hash: self.config_hash.clone(),
        }
    }

    /// Least-squares slope dE/dt per trajectory over records in
    /// `[from, to)`, averaged over the ensemble.
    pub fn slope(&self, dof: usize, from: usize, to: usize) -> SlopeEstimate {
        let t = &self.times[from..to];
        let n = t.len() as f64;
        let t_mean = t.iter().sum::<f64>() / n;
        let sxx: f64 = t.iter().map(|v| (v - t_mean) * (v - t_mean)).sum();
        let slopes: Vec<f64> = self
            .traces
            .iter()
            .map(|trace| {
                let e = &trace[from..to];
                let e_mean = e.iter().map(|r| r[dof]).sum::<f64>() / n;
                t.iter()
                    .zip(e)
                    .map(|(ti, r)| (ti - t_mean) * (r[dof] - e_mean))
                    .sum::<f64>()
                    / sxx
            })
            .collect();
        let (mean, std_error) = mean_and_error(slopes.iter().copied());
        SlopeEstimate { mean, std_error }
    }

    /// Slope of the summed energy of several DOFs, averaged over the ensemble.
    pub fn pooled_slope(&self, dofs: &[usize]) -> SlopeEstimate {
        let t = &self.times;
        let n = t.len() as f64;
        let t_mean = t.iter().sum::<f64>() / n;
        let sxx: f64 = t.iter().map(|v| (v - t_mean) * (v - t_mean)).sum();
        let slopes: Vec<f64> = self
            .traces
            .iter()
            .map(|trace| {
                let sum = |r: &[f64; D]| dofs.iter().map(|&i| r[i]).sum::<f64>() / dofs.len() as f64;
                let e_mean = trace.iter().map(sum).sum::<f64>() / n;
                t.iter().zip(trace).map(|(ti, r)| (ti - t_mean) * (sum(r) - e_mean)).sum::<f64>() / sxx
            })
            .collect();
        let (mean, std_error) = mean_and_error(slopes.iter().copied());
        SlopeEstimate { mean, std_error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofSeries {
    pub label: String,
    pub omega: f64,
    /// [J] for physical models, scaled energy otherwise.
    pub mean_energy: Vec<f64>,
    /// Standard error of the mean energy; absent for one trajectory.
    pub std_error: Option<Vec<f64>>,
    pub mean_occupation: Vec<f64>,
    pub occupation_std_error: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSeries {
    pub times: Vec<f64>,
    pub dofs: Vec<DofSeries>,
    pub trajectories: usize,
    pub master_seed: u64,
    pub config_hash: String,
}

impl EnsembleSeries {
    pub fn dof(&self, label: &str) -> Option<&DofSeries> {
        self.dofs.iter().find(|d| d.label == label)
    }
}
