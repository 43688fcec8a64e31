//! Steady-state occupation against feedback gain, and the minimum over gain
//! as the focus (hence Δn) changes.

use serde::{Deserialize, Serialize};

use crate::analytics::cooling_limit;
use crate::dynamics::{
    steady_state_occupation, Initial, IntegratorConfig, MeasurementModel, Model, SteadyStateConfig, SteadyStateError,
};
use crate::error::{invalid, Result};
use crate::material::Ellipsoid;
use crate::optics::Beam;
use crate::rates::{characterize, Dof, TrapCharacterization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointStatus {
    Converged,
    NotConverged,
    Unstable,
}

impl PointStatus {
    pub fn label(self) -> &'static str {
        match self {
            PointStatus::Converged => "converged",
            PointStatus::NotConverged => "not_converged",
            PointStatus::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// η, or ζ for a libration [s/m²].
    pub value: f64,
    /// NaN when unstable.
    pub occupation: f64,
    pub std_error: Option<f64>,
    pub converged: bool,
    pub status: PointStatus,
    /// Ideal-measurement analytic limit at this gain.
    pub analytic_limit: f64,
}

/// Modulation gain for a feedback coefficient: η itself, or ζ·r².
pub fn gain_for(dof: Dof, coefficient: f64, size_scale: f64) -> f64 {
    if dof.is_rotational() {
        coefficient * size_scale * size_scale
    } else {
        coefficient
    }
}

/// Steady state of one DOF in isolation, started at its analytic limit.
pub fn steady_point(
    trap: &TrapCharacterization,
    dof: Dof,
    coefficient: f64,
    size_scale: f64,
    measurement: MeasurementModel,
    config: &IntegratorConfig,
    settings: &SteadyStateConfig,
) -> Result<SweepPoint> {
    let gain = gain_for(dof, coefficient, size_scale);
    let model = Model::single(trap, dof, gain, measurement)?;
    let limit = cooling_limit(trap.heating_rate(dof), gain, trap.inertia_of(dof), trap.frequency(dof))?;
    let initial = Initial::MeanEnergies([limit.energy_limit]);
    let point = |occupation, std_error, status| SweepPoint {
        value: coefficient,
        occupation,
        std_error,
        converged: status == PointStatus::Converged,
        status,
        analytic_limit: limit.occupation_limit,
    };
    match steady_state_occupation(&model, 0, &initial, config, settings) {
        Ok(s) => Ok(point(s.occupation, s.std_error, PointStatus::Converged)),
        Err(SteadyStateError::NotConverged(s)) => Ok(point(s.occupation, s.std_error, PointStatus::NotConverged)),
        Err(SteadyStateError::Unstable(_)) => Ok(point(f64::NAN, None, PointStatus::Unstable)),
        Err(SteadyStateError::Config(e)) => Err(e),
    }
}

pub fn sweep_gain(
    trap: &TrapCharacterization,
    dof: Dof,
    coefficients: &[f64],
    size_scale: f64,
    measurement: MeasurementModel,
    config: &IntegratorConfig,
    settings: &SteadyStateConfig,
) -> Result<Vec<SweepPoint>> {
    coefficients
        .iter()
        .map(|&c| steady_point(trap, dof, c, size_scale, measurement, config, settings))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitScan {
    /// Sorted by coefficient.
    pub points: Vec<SweepPoint>,
    pub best: Option<SweepPoint>,
    /// False when the best point still sits at an edge of the grid.
    pub interior: bool,
}

/// Index of the lowest finite occupation, with unstable points ranked
/// above everything else.
fn argmin(points: &[SweepPoint]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.status != PointStatus::Unstable)
        .min_by(|a, b| a.1.occupation.total_cmp(&b.1.occupation))
        .map(|(i, _)| i)
}

/// Minimum of the steady-state occupation over the feedback coefficient.
/// Starts from `start` and adds factor-of-two points past whichever edge
/// holds the minimum, at most `max_extensions` times.
#[allow(clippy::too_many_arguments)]
pub fn optimal_limit(
    trap: &TrapCharacterization,
    dof: Dof,
    start: &[f64],
    size_scale: f64,
    measurement: MeasurementModel,
    config: &IntegratorConfig,
    settings: &SteadyStateConfig,
    max_extensions: usize,
) -> Result<LimitScan> {
    if start.is_empty() {
        return Err(invalid("sweep.eta", "need at least one starting value"));
    }
    let mut values = start.to_vec();
    values.sort_by(f64::total_cmp);
    let mut points = sweep_gain(trap, dof, &values, size_scale, measurement, config, settings)?;
    let mut extensions = 0;
    let interior = loop {
        let Some(i) = argmin(&points) else { break false };
        let n = points.len();
        // An unstable neighbour above counts as a rise.
        if i != 0 && i != n - 1 {
            break true;
        }
        if extensions >= max_extensions {
            break false;
        }
        extensions += 1;
        if i == n - 1 {
            let v = points[n - 1].value * 2.0;
            points.push(steady_point(trap, dof, v, size_scale, measurement, config, settings)?);
        } else {
            let v = points[0].value / 2.0;
            points.insert(0, steady_point(trap, dof, v, size_scale, measurement, config, settings)?);
        }
    };
    let best = argmin(&points).map(|i| points[i]);
    Ok(LimitScan { points, best, interior })
}

/// Beam with the same wavelength and power whose waist gives `dof` the
/// requested Δn. Δn follows a power law in the waist, whose exponent is
/// measured from the closed forms.
pub fn beam_for_delta_n(particle: &Ellipsoid, beam: &Beam, dof: Dof, target: f64) -> Result<Beam> {
    crate::error::require_positive("sweep.delta_n", target)?;
    let base = characterize(particle, beam)?;
    let w0 = base.focus.waist;
    let probe = Beam::with_waist(beam.wavelength, beam.power, 2.0 * w0)?;
    let dn0 = base.delta_n(dof);
    let dn1 = characterize(particle, &probe)?.delta_n(dof);
    let exponent = (dn1 / dn0).ln() / 2f64.ln();
    if !exponent.is_finite() || exponent.abs() < 1e-9 {
        return Err(invalid("sweep.delta_n", format!("Δn of `{dof}` does not change with the beam waist")));
    }
    Beam::with_waist(beam.wavelength, beam.power, w0 * (target / dn0).powf(1.0 / exponent))
}
